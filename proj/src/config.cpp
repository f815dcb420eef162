#include "epl/config.hpp"

#include <fstream>
#include <set>

namespace epl {

namespace {

using nlohmann::json;

void reject_unknown(const json& section, const std::set<std::string>& known, const std::string& where) {
  if (!section.is_object()) throw DomainError("config: '" + where + "' must be an object");
  for (const auto& [key, _] : section.items()) {
    if (!known.count(key)) throw DomainError("config: unknown key '" + where + "." + key + "'");
  }
}

template <typename T>
void read(const json& section, const char* key, T& into, const std::string& where) {
  if (!section.contains(key)) return;
  try {
    into = section.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DomainError("config: bad value for '" + where + "." + key + "': " + e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  dataset.validate();
  if (eval_count < 0) throw DomainError("config: eval_count must be >= 0");
  ac.validate();
  loss.validate();
  train_config().validate();
  for (int w : trimap_widths) {
    if (w < 1) throw DomainError("config: trimap widths must be >= 1");
  }
  for (int t : f_tolerances) {
    if (t < 0) throw DomainError("config: F tolerances must be >= 0");
  }
  for (int m : sweeps.mu) {
    if (m < 2 || m % 2 != 0) throw DomainError("config: mu sweep values must be even and >= 2");
  }
  for (int k : sweeps.kernel) {
    if (k < 3 || k % 2 == 0) throw DomainError("config: kernel sweep values must be odd and >= 3");
  }
  for (double w : sweeps.weight) {
    if (!(w >= 0.0)) throw DomainError("config: weight sweep values must be >= 0");
  }
}

SceneSpec ExperimentConfig::train_scene() const {
  SceneSpec s = dataset;
  s.seed = derive_seed(seed, kTrainDataStream);
  return s;
}

SceneSpec ExperimentConfig::eval_scene() const {
  SceneSpec s = dataset;
  s.seed = derive_seed(seed, kEvalDataStream);
  s.count = eval_count;
  return s;
}

TrainConfig ExperimentConfig::train_config() const {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = batch_size;
  t.learning_rate = learning_rate;
  t.momentum = momentum;
  t.seed = derive_seed(seed, kShuffleStream);
  t.objective.loss = loss;
  t.objective.ac = ac;
  t.objective.conversion = conversion;
  t.objective.epl = epl;
  t.trimap_widths = trimap_widths;
  t.f_tolerances = f_tolerances;
  return t;
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig cfg;
  reject_unknown(j, {"seed", "dataset", "ac", "loss", "train", "eval", "ablate"}, "root");
  read(j, "seed", cfg.seed, "root");

  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    reject_unknown(d, {"kind", "height", "width", "classes", "noise_sigma", "intensities", "count",
                       "eval_count", "gap"},
                   "dataset");
    std::string kind = to_string(cfg.dataset.kind);
    read(d, "kind", kind, "dataset");
    cfg.dataset.kind = parse_scene_kind(kind);
    read(d, "height", cfg.dataset.height, "dataset");
    read(d, "width", cfg.dataset.width, "dataset");
    read(d, "classes", cfg.dataset.classes, "dataset");
    read(d, "noise_sigma", cfg.dataset.noise_sigma, "dataset");
    read(d, "intensities", cfg.dataset.intensities, "dataset");
    read(d, "count", cfg.dataset.count, "dataset");
    read(d, "eval_count", cfg.eval_count, "dataset");
    read(d, "gap", cfg.dataset.gap, "dataset");
  }
  if (j.contains("ac")) {
    const json& a = j.at("ac");
    reject_unknown(a, {"w", "splitter", "conversion"}, "ac");
    int w = cfg.ac.kernel_size;
    std::string splitter = to_string(cfg.ac.splitter.kind);
    std::string conversion = to_string(cfg.conversion);
    read(a, "w", w, "ac");
    read(a, "splitter", splitter, "ac");
    read(a, "conversion", conversion, "ac");
    cfg.ac.kernel_size = w;
    cfg.ac.splitter = make_splitter(parse_splitter_kind(splitter));
    cfg.conversion = parse_conversion(conversion);
  }
  if (j.contains("loss")) {
    const json& l = j.at("loss");
    reject_unknown(l, {"norm", "mu_exp", "lambda1", "lambda2", "reduction"}, "loss");
    std::string norm = to_string(cfg.loss.norm);
    std::string reduction = to_string(cfg.loss.reduction);
    read(l, "norm", norm, "loss");
    read(l, "reduction", reduction, "loss");
    read(l, "mu_exp", cfg.loss.mu_exp, "loss");
    read(l, "lambda1", cfg.loss.lambda1, "loss");
    read(l, "lambda2", cfg.loss.lambda2, "loss");
    cfg.loss.norm = parse_norm(norm);
    cfg.loss.reduction = parse_reduction(reduction);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t, {"epochs", "batch_size", "learning_rate", "momentum", "epl"}, "train");
    read(t, "epochs", cfg.epochs, "train");
    read(t, "batch_size", cfg.batch_size, "train");
    read(t, "learning_rate", cfg.learning_rate, "train");
    read(t, "momentum", cfg.momentum, "train");
    read(t, "epl", cfg.epl, "train");
  }
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    reject_unknown(e, {"trimap_widths", "f_tolerances"}, "eval");
    read(e, "trimap_widths", cfg.trimap_widths, "eval");
    read(e, "f_tolerances", cfg.f_tolerances, "eval");
  }
  if (j.contains("ablate")) {
    const json& a = j.at("ablate");
    reject_unknown(a, {"mu", "splitter", "kernel", "weight"}, "ablate");
    read(a, "mu", cfg.sweeps.mu, "ablate");
    read(a, "kernel", cfg.sweeps.kernel, "ablate");
    read(a, "weight", cfg.sweeps.weight, "ablate");
    if (a.contains("splitter")) {
      std::vector<std::string> names;
      read(a, "splitter", names, "ablate");
      cfg.sweeps.splitter.clear();
      for (const auto& n : names) cfg.sweeps.splitter.push_back(parse_splitter_kind(n));
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

nlohmann::json to_json(const SceneSpec& spec) {
  return {{"kind", to_string(spec.kind)},   {"height", spec.height},
          {"width", spec.width},            {"classes", spec.classes},
          {"noise_sigma", spec.noise_sigma}, {"intensities", spec.class_intensities()},
          {"count", spec.count},            {"gap", spec.gap},
          {"seed", spec.seed}};
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json splitters = nlohmann::json::array();
  for (auto k : cfg.sweeps.splitter) splitters.push_back(to_string(k));
  nlohmann::json dataset = to_json(cfg.dataset);
  dataset.erase("seed");
  dataset["eval_count"] = cfg.eval_count;
  return {
      {"seed", cfg.seed},
      {"dataset", dataset},
      {"ac",
       {{"w", cfg.ac.kernel_size},
        {"splitter", to_string(cfg.ac.splitter.kind)},
        {"conversion", to_string(cfg.conversion)}}},
      {"loss",
       {{"norm", to_string(cfg.loss.norm)},
        {"mu_exp", cfg.loss.mu_exp},
        {"lambda1", cfg.loss.lambda1},
        {"lambda2", cfg.loss.lambda2},
        {"reduction", to_string(cfg.loss.reduction)}}},
      {"train",
       {{"epochs", cfg.epochs},
        {"batch_size", cfg.batch_size},
        {"learning_rate", cfg.learning_rate},
        {"momentum", cfg.momentum},
        {"epl", cfg.epl}}},
      {"eval", {{"trimap_widths", cfg.trimap_widths}, {"f_tolerances", cfg.f_tolerances}}},
      {"ablate",
       {{"mu", cfg.sweeps.mu},
        {"splitter", splitters},
        {"kernel", cfg.sweeps.kernel},
        {"weight", cfg.sweeps.weight}}},
  };
}

}  // namespace epl
