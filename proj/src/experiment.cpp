#include "epl/experiment.hpp"

#include <sstream>

namespace epl {

ExperimentData make_data(const ExperimentConfig& cfg) {
  ExperimentData d;
  d.train = generate_dataset(cfg.train_scene());
  d.eval = generate_dataset(cfg.eval_scene());
  return d;
}

ExperimentResult run_training(const ExperimentConfig& cfg, const ExperimentData& data,
                              const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.validate();
  ExperimentResult r{TinyNet(1, cfg.dataset.classes), {}};
  r.net.initialize(derive_seed(cfg.seed, kInitStream));
  r.train = train(r.net, data.train, data.eval, cfg.train_config(), on_epoch);
  return r;
}

SweepKind parse_sweep_kind(std::string_view name) {
  if (name == "mu") return SweepKind::Mu;
  if (name == "splitter") return SweepKind::Splitter;
  if (name == "kernel") return SweepKind::Kernel;
  if (name == "weight") return SweepKind::Weight;
  throw DomainError("unknown sweep '" + std::string(name) + "' (mu, splitter, kernel, weight)");
}

std::string to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::Mu:
      return "mu";
    case SweepKind::Splitter:
      return "splitter";
    case SweepKind::Kernel:
      return "kernel";
    case SweepKind::Weight:
      return "weight";
  }
  return "?";
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& base, SweepKind sweep,
                                      const ExperimentData& data) {
  std::vector<std::pair<std::string, ExperimentConfig>> runs;
  switch (sweep) {
    case SweepKind::Mu:
      for (int mu : base.sweeps.mu) {
        ExperimentConfig c = base;
        c.loss.mu_exp = mu;
        runs.emplace_back(std::to_string(mu), c);
      }
      break;
    case SweepKind::Splitter:
      for (SplitterKind k : base.sweeps.splitter) {
        ExperimentConfig c = base;
        c.ac.splitter = make_splitter(k);
        runs.emplace_back(to_string(k), c);
      }
      break;
    case SweepKind::Kernel:
      for (int w : base.sweeps.kernel) {
        ExperimentConfig c = base;
        c.ac.kernel_size = w;
        runs.emplace_back(std::to_string(w), c);
      }
      break;
    case SweepKind::Weight:
      for (double w : base.sweeps.weight) {
        ExperimentConfig c = base;
        c.loss.lambda1 = w;
        std::ostringstream os;
        os << w;
        runs.emplace_back(os.str(), c);
      }
      break;
  }

  std::vector<AblationRow> rows;
  for (auto& [label, cfg] : runs) {
    cfg.epl = true;
    const ExperimentResult r = run_training(cfg, data);
    const EpochRecord& last = r.train.history.back();
    AblationRow row;
    row.sweep = to_string(sweep);
    row.value = label;
    row.ce = last.ce;
    row.point = last.point;
    row.line = last.line;
    row.miou = last.miou;
    row.trimap_iou = last.trimap_iou;
    row.fmeasure = last.fmeasure;
    rows.push_back(row);
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os.precision(10);
  os << "sweep,value,L_ce,L_point,L_line,miou,trimap_iou_w3,fmeasure_t1\n";
  for (const auto& r : rows) {
    os << r.sweep << ',' << r.value << ',' << r.ce << ',' << r.point << ',' << r.line << ','
       << r.miou << ',' << r.trimap_iou << ',' << r.fmeasure << '\n';
  }
  return os.str();
}

}  // namespace epl
