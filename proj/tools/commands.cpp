#include "commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "epl/config.hpp"
#include "epl/experiment.hpp"
#include "epl/gradcheck.hpp"
#include "epl/io.hpp"
#include "epl/losses.hpp"
#include "epl/metrics.hpp"
#include "epl/model.hpp"

namespace epl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Shared plumbing

template <typename T>
struct Flag {
  T value{};
  CLI::Option* option = nullptr;

  bool given() const { return option != nullptr && option->count() > 0; }
};

template <typename T>
void add(CLI::App* app, Flag<T>& flag, const std::string& name, const std::string& help) {
  flag.option = app->add_option(name, flag.value, help);
}

// Config flags shared by the experiment-level commands.
struct Overrides {
  std::string config;
  Flag<std::uint64_t> seed;
  Flag<std::string> kind;
  Flag<int> height, width, classes, count, eval_count, gap;
  Flag<double> sigma;
  Flag<int> w;
  Flag<std::string> splitter, conversion;
  Flag<std::string> norm, reduction;
  Flag<int> mu;
  Flag<double> lambda1, lambda2;
  Flag<int> epochs, batch_size;
  Flag<double> learning_rate, momentum;
  Flag<std::string> epl, ablate;
  Flag<std::vector<int>> widths, tolerances;
};

void add_config_flags(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON experiment config");
  add(app, o.seed, "--seed", "top-level seed");
}

void add_dataset_flags(CLI::App* app, Overrides& o) {
  add(app, o.kind, "--kind", "scene kind: adjacent_rects, touching_disks, random_polygons, mixed");
  add(app, o.height, "--height", "image height");
  add(app, o.width, "--width", "image width");
  add(app, o.classes, "--classes", "number of classes K");
  add(app, o.count, "--count", "number of training samples");
  add(app, o.eval_count, "--eval-count", "number of evaluation samples");
  add(app, o.gap, "--gap", "background gap between same-class disks (1 or 2)");
  add(app, o.sigma, "--sigma", "Gaussian noise sigma");
}

void add_conversion_flags(CLI::App* app, Overrides& o) {
  add(app, o.w, "--w", "kernel size (odd, >= 3)");
  add(app, o.splitter, "--splitter", "splitter: A, B or C");
}

void add_loss_flags(CLI::App* app, Overrides& o) {
  add(app, o.norm, "--norm", "point loss norm: L1 or L2");
  add(app, o.reduction, "--reduction", "point loss reduction: sum or mean");
  add(app, o.mu, "--mu", "line loss exponent (even)");
  add(app, o.lambda1, "--lambda1", "point loss weight");
  add(app, o.lambda2, "--lambda2", "line loss weight");
}

void add_train_flags(CLI::App* app, Overrides& o) {
  add(app, o.epochs, "--epochs", "training epochs");
  add(app, o.batch_size, "--batch-size", "mini-batch size");
  add(app, o.learning_rate, "--lr", "learning rate");
  add(app, o.momentum, "--momentum", "SGD momentum");
  add(app, o.epl, "--epl", "on: CE + point + line, off: CE only");
  add(app, o.ablate, "--ablate", "sc: box-filter conversion in the EPL terms, ac: anisotropic");
}

void add_eval_flags(CLI::App* app, Overrides& o) {
  add(app, o.widths, "--trimap-widths", "trimap band widths");
  add(app, o.tolerances, "--f-tolerances", "boundary F tolerances");
}

bool parse_switch(const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw DomainError("expected on or off, got '" + v + "'");
}

template <typename T>
void put(json& j, const Flag<T>& f, const char* section, const char* key) {
  if (f.given()) j[section][key] = f.value;
}

ExperimentConfig resolve(const Overrides& o) {
  json j = json::object();
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw std::runtime_error("cannot open config " + o.config);
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw FormatError("config " + o.config + ": " + e.what());
    }
  }
  json patch = json::object();
  if (o.seed.given()) patch["seed"] = o.seed.value;
  put(patch, o.kind, "dataset", "kind");
  put(patch, o.height, "dataset", "height");
  put(patch, o.width, "dataset", "width");
  put(patch, o.classes, "dataset", "classes");
  put(patch, o.count, "dataset", "count");
  put(patch, o.eval_count, "dataset", "eval_count");
  put(patch, o.gap, "dataset", "gap");
  put(patch, o.sigma, "dataset", "noise_sigma");
  put(patch, o.w, "ac", "w");
  put(patch, o.splitter, "ac", "splitter");
  put(patch, o.ablate, "ac", "conversion");
  put(patch, o.norm, "loss", "norm");
  put(patch, o.reduction, "loss", "reduction");
  put(patch, o.mu, "loss", "mu_exp");
  put(patch, o.lambda1, "loss", "lambda1");
  put(patch, o.lambda2, "loss", "lambda2");
  put(patch, o.epochs, "train", "epochs");
  put(patch, o.batch_size, "train", "batch_size");
  put(patch, o.learning_rate, "train", "learning_rate");
  put(patch, o.momentum, "train", "momentum");
  if (o.epl.given()) patch["train"]["epl"] = parse_switch(o.epl.value);
  put(patch, o.widths, "eval", "trimap_widths");
  put(patch, o.tolerances, "eval", "f_tolerances");
  j.merge_patch(patch);
  return parse_config(j);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path default_out(const std::string& command) {
  const char* env = std::getenv("EPL_OUT_DIR");
  return fs::path(env && *env ? env : "epl_out") / command;
}

std::string sample_stem(std::size_t i) {
  std::ostringstream os;
  os << "sample_" << std::setw(4) << std::setfill('0') << i;
  return os.str();
}

// Config echo written next to a command's outputs. It carries
// "status": "running" while the command executes, then "ok" or "failed"
// so partial outputs are recognisable.
struct Context {
  std::vector<std::string> args;
  std::ostream& out;
  std::ostream& err;
  fs::path echo_path;
  json echo;

  void begin(const fs::path& path, const std::string& command, json config) {
    echo_path = path;
    echo = {{"command", command}, {"args", args}, {"config", std::move(config)}, {"status", "running"}};
    write_json(echo_path, echo);
  }
  void finish(json extra = json::object()) {
    echo["status"] = "ok";
    if (!extra.empty()) echo["result"] = std::move(extra);
    write_json(echo_path, echo);
  }
  void fail(const std::string& message) {
    if (echo_path.empty()) return;
    echo["status"] = "failed";
    echo["error"] = message;
    try {
      write_json(echo_path, echo);
    } catch (const std::exception&) {
      // The original error is the one worth reporting.
    }
  }
};

std::vector<Sample> read_manifest(const fs::path& dir, int classes) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::runtime_error("cannot open " + (dir / "manifest.json").string());
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    throw FormatError("manifest " + (dir / "manifest.json").string() + ": " + e.what());
  }
  std::vector<Sample> out;
  for (const auto& s : m.at("samples")) out.push_back(read_sample(dir, s.at("stem").get<std::string>(), classes));
  return out;
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
  Overrides o;
  std::string out;
  std::string split = "train";
};

int cmd_gen(Context& ctx, const GenArgs& a) {
  const ExperimentConfig cfg = resolve(a.o);
  if (a.split != "train" && a.split != "eval") throw DomainError("--split must be train or eval");
  const SceneSpec spec = a.split == "train" ? cfg.train_scene() : cfg.eval_scene();
  const fs::path dir = a.out.empty() ? default_out("gen") : fs::path(a.out);
  fs::create_directories(dir);
  ctx.begin(dir / "config.json", "gen", to_json(cfg));

  json samples = json::array();
  for (int i = 0; i < spec.count; ++i) {
    const std::string stem = sample_stem(static_cast<std::size_t>(i));
    write_sample(dir, stem, generate_sample(spec, i));
    samples.push_back({{"stem", stem}, {"image", stem + ".eplt"}, {"labels", stem + ".pgm"}});
  }
  write_json(dir / "manifest.json", {{"split", a.split}, {"spec", to_json(spec)}, {"samples", samples}});
  ctx.out << "wrote " << spec.count << " samples to " << dir.string() << "\n";
  ctx.finish({{"samples", spec.count}});
  return 0;
}

// ---------------------------------------------------------------------------
// convert

struct ConvertArgs {
  Overrides o;
  std::string labels;
  int classes = 0;
  std::string out;
  std::string render;
};

int cmd_convert(Context& ctx, const ConvertArgs& a) {
  const ExperimentConfig cfg = resolve(a.o);
  const LabelMap labels = read_pgm(a.labels, a.classes);
  const fs::path out = a.out.empty() ? default_out("convert") / "field.eplt" : fs::path(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  fs::path echo = out;
  echo.replace_extension(".config.json");
  json config = {{"labels", a.labels},
                 {"classes", labels.classes()},
                 {"w", cfg.ac.kernel_size},
                 {"splitter", to_string(cfg.ac.splitter.kind)},
                 {"conversion", to_string(cfg.conversion)}};
  ctx.begin(echo, "convert", config);

  const auto energies = convert(one_hot(labels, labels.classes()), cfg.ac, cfg.conversion);
  write_eplt(out, to_tensor(energies));
  if (!a.render.empty()) {
    const double max_energy = cfg.conversion == Conversion::Anisotropic
                                  ? cfg.ac.radius() + 1.0
                                  : static_cast<double>(cfg.ac.kernel_size * cfg.ac.kernel_size);
    for (Index s = 0; s < energies.directions(); ++s) {
      for (Index c = 0; c < energies.channels(); ++c) {
        const fs::path p = fs::path(a.render) / ("field_s" + std::to_string(s) + "_c" + std::to_string(c) + ".pgm");
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        write_pgm_image(p, render_energy(energies.plane(s, c), max_energy));
      }
    }
  }
  ctx.out << "wrote " << energies.directions() << "x" << energies.channels() << "x" << energies.rows()
          << "x" << energies.cols() << " potential field to " << out.string() << "\n";
  ctx.finish({{"dims", to_tensor(energies).dims}});
  return 0;
}

// ---------------------------------------------------------------------------
// loss

struct LossArgs {
  Overrides o;
  std::string gt;
  std::string pred;
  std::string which = "all";
  std::string out;
};

int cmd_loss(Context& ctx, const LossArgs& a) {
  const ExperimentConfig cfg = resolve(a.o);
  const std::set<std::string> known = {"point", "line", "ce", "dice", "all"};
  if (!known.count(a.which)) throw DomainError("--loss must be one of point, line, ce, dice, all");

  ProbabilityField pred;
  LabelMap gt;
  if (a.pred.empty()) {
    gt = read_pgm(a.gt, cfg.dataset.classes);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> n(0.0, 1.5);
    Field<double> logits(gt.classes(), gt.rows(), gt.cols());
    for (auto& p : logits.planes()) {
      for (Index i = 0; i < p.size(); ++i) p.data()[i] = n(rng);
    }
    pred = softmax(logits);
  } else {
    pred = field_from_tensor(read_eplt(a.pred));
    gt = read_pgm(a.gt, static_cast<int>(pred.channels()));
    if (gt.rows() != pred.rows() || gt.cols() != pred.cols()) {
      throw DomainError("loss: prediction and label dimensions differ");
    }
  }

  const fs::path out = a.out.empty() ? default_out("loss") / "loss.json" : fs::path(a.out);
  fs::path echo = out;
  echo.replace_extension(".config.json");
  json config = to_json(cfg);
  config["gt"] = a.gt;
  config["pred"] = a.pred.empty() ? json("random") : json(a.pred);
  ctx.begin(echo, "loss", config);

  const json loss_config = {{"norm", to_string(cfg.loss.norm)},
                            {"reduction", to_string(cfg.loss.reduction)},
                            {"mu_exp", cfg.loss.mu_exp},
                            {"w", cfg.ac.kernel_size},
                            {"splitter", to_string(cfg.ac.splitter.kind)},
                            {"conversion", to_string(cfg.conversion)}};
  const ProbabilityField gt_prob = one_hot(gt, gt.classes());
  const auto gt_e = convert(gt_prob, cfg.ac, cfg.conversion);
  const auto pred_e = convert(pred, cfg.ac, cfg.conversion);

  json records = json::array();
  auto record = [&](const std::string& name, double value) {
    if (!std::isfinite(value)) throw std::runtime_error("loss: " + name + " is not finite");
    records.push_back({{"loss_name", name}, {"value", value}, {"config", loss_config}, {"seed", cfg.seed}});
    ctx.out << name << " " << std::setprecision(12) << value << "\n";
  };
  const bool all = a.which == "all";
  if (all || a.which == "point") record("point", point_loss(gt_e, pred_e, cfg.loss, false).value);
  if (all || a.which == "line") {
    record("line", equipotential_line_loss(gt_e, pred_e, cfg.loss, cfg.ac.radius(), false).value);
  }
  if (all || a.which == "ce") record("cross_entropy", cross_entropy_loss(pred, gt, false).value);
  if (all || a.which == "dice") record("dice", dice_loss(pred, gt_prob, false).value);
  write_json(out, records);
  ctx.finish();
  return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckArgs {
  GradcheckOptions opt;
  std::string kind = "point_l2";
  std::string splitter = "A";
  std::string conversion = "ac";
  std::string out;
  double min_fraction = 0.95;
};

int cmd_gradcheck(Context& ctx, GradcheckArgs a) {
  a.opt.kind = parse_grad_loss_kind(a.kind);
  a.opt.splitter = parse_splitter_kind(a.splitter);
  a.opt.conversion = parse_conversion(a.conversion);
  const fs::path out = a.out.empty() ? default_out("gradcheck") / "gradcheck.json" : fs::path(a.out);
  fs::path echo = out;
  echo.replace_extension(".config.json");
  const json config = {{"loss", to_string(a.opt.kind)}, {"classes", a.opt.classes},
                       {"rows", a.opt.rows},            {"cols", a.opt.cols},
                       {"samples", a.opt.samples},      {"seed", a.opt.seed},
                       {"step", a.opt.step},            {"tolerance", a.opt.tolerance},
                       {"mu_exp", a.opt.mu_exp},        {"w", a.opt.kernel_size},
                       {"splitter", a.splitter},        {"conversion", a.conversion}};
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  ctx.begin(echo, "gradcheck", config);
  const GradReport report = run_gradcheck(a.opt);
  write_json(out, report.to_json());
  ctx.out << report.to_json().dump() << "\n";
  const bool pass = report.fraction_passing >= a.min_fraction;
  ctx.finish({{"pass", pass}});
  if (!pass) {
    ctx.err << "gradcheck: only " << report.fraction_passing << " of coordinates within tolerance\n";
    return 2;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  Overrides o;
  std::string out;
  std::string data;
};

int cmd_train(Context& ctx, const TrainArgs& a) {
  const ExperimentConfig cfg = resolve(a.o);
  const fs::path dir = a.out.empty() ? default_out("train") : fs::path(a.out);
  fs::create_directories(dir);
  ctx.begin(dir / "config.json", "train", to_json(cfg));

  ExperimentData data;
  if (a.data.empty()) {
    data = make_data(cfg);
  } else {
    data.train = read_manifest(a.data, cfg.dataset.classes);
    data.eval = generate_dataset(cfg.eval_scene());
  }
  ctx.out << "epoch,L_ce,L_point,L_line,miou,trimap_iou,fmeasure\n";
  const ExperimentResult r = run_training(cfg, data, [&](const EpochRecord& e) {
    ctx.out << e.epoch << ',' << e.ce << ',' << e.point << ',' << e.line << ',' << e.miou << ','
            << e.trimap_iou << ',' << e.fmeasure << std::endl;
  });

  write_text(dir / "history.csv", history_csv(r.train.history));
  write_json(dir / "history.json", history_json(r.train.history));
  write_eplt(dir / "checkpoint.eplt", to_tensor(r.net.parameters()));
  write_json(dir / "checkpoint.json", {{"architecture", r.net.architecture()},
                                       {"parameters_file", "checkpoint.eplt"},
                                       {"config", to_json(cfg)}});
  write_json(dir / "eval.json", r.train.final_eval.to_json());
  write_text(dir / "eval.csv", r.train.final_eval.to_csv());
  fs::create_directories(dir / "eval_set");
  fs::create_directories(dir / "predictions");
  for (std::size_t i = 0; i < data.eval.size(); ++i) {
    const std::string stem = sample_stem(i);
    write_sample(dir / "eval_set", stem, data.eval[i]);
    write_pgm(dir / "predictions" / (stem + ".pgm"),
              argmax_labels(forward(r.net, image_field(data.eval[i].image))));
  }
  ctx.finish({{"final", r.train.final_eval.to_json()}});
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  Overrides o;
  std::string pred;
  std::string gt;
  std::string out;
};

int cmd_eval(Context& ctx, const EvalArgs& a) {
  const ExperimentConfig cfg = resolve(a.o);
  const fs::path dir = a.out.empty() ? default_out("eval") : fs::path(a.out);
  fs::create_directories(dir);
  json config = to_json(cfg);
  config["pred_dir"] = a.pred;
  config["gt_dir"] = a.gt;
  ctx.begin(dir / "config.json", "eval", config);

  if (!fs::is_directory(a.gt)) throw std::runtime_error("eval: " + a.gt + " is not a directory");
  if (!fs::is_directory(a.pred)) throw std::runtime_error("eval: " + a.pred + " is not a directory");
  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(a.gt)) {
    if (entry.path().extension() == ".pgm") stems.push_back(entry.path().stem().string());
  }
  std::sort(stems.begin(), stems.end());
  if (stems.empty()) throw std::runtime_error("eval: no .pgm labels in " + a.gt);

  std::vector<std::string> missing;
  for (const auto& s : stems) {
    if (!fs::exists(fs::path(a.pred) / (s + ".pgm"))) missing.push_back(s + ".pgm");
  }
  if (!missing.empty()) {
    ctx.err << "eval: " << missing.size() << " prediction(s) missing from " << a.pred << ":\n";
    for (const auto& m : missing) ctx.err << "  " << m << "\n";
    ctx.echo["missing"] = missing;
    ctx.fail("missing predictions");
    return 1;
  }

  const int k = cfg.dataset.classes;
  std::vector<EvalReport> reports;
  for (const auto& s : stems) {
    const LabelMap gt = read_pgm(fs::path(a.gt) / (s + ".pgm"), k);
    const LabelMap pred = read_pgm(fs::path(a.pred) / (s + ".pgm"), k);
    reports.push_back(evaluate(pred, gt, k, cfg.trimap_widths, cfg.f_tolerances));
  }
  const EvalReport report = aggregate(reports);
  write_json(dir / "report.json", report.to_json());
  write_text(dir / "report.csv", report.to_csv());
  ctx.out << report.to_json().dump(2) << "\n";
  ctx.finish({{"images", report.images}});
  return 0;
}

// ---------------------------------------------------------------------------
// ablate

struct AblateArgs {
  Overrides o;
  std::string sweep;
  std::string out;
};

int cmd_ablate(Context& ctx, const AblateArgs& a) {
  const ExperimentConfig cfg = resolve(a.o);
  const SweepKind sweep = parse_sweep_kind(a.sweep);
  const fs::path dir = a.out.empty() ? default_out("ablate") : fs::path(a.out);
  fs::create_directories(dir);
  json config = to_json(cfg);
  config["sweep"] = a.sweep;
  ctx.begin(dir / "config.json", "ablate", config);

  const ExperimentData data = make_data(cfg);
  const auto rows = run_ablation(cfg, sweep, data);
  for (const auto& r : rows) {
    if (!std::isfinite(r.ce) || !std::isfinite(r.point) || !std::isfinite(r.line)) {
      throw std::runtime_error("ablate: non-finite loss for " + r.sweep + "=" + r.value);
    }
  }
  const std::string csv = ablation_csv(rows);
  write_text(dir / ("ablation_" + a.sweep + ".csv"), csv);
  ctx.out << csv;
  ctx.finish({{"rows", rows.size()}});
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"EPL: anisotropic potential fields and equipotential line losses"};
  app.name("epl");
  app.require_subcommand(1);

  Context ctx{args, out, err, {}, {}};
  std::function<int()> action;

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate a synthetic dataset");
  add_config_flags(g, gen.o);
  add_dataset_flags(g, gen.o);
  g->add_option("--out", gen.out, "output directory");
  g->add_option("--split", gen.split, "train (stream 1, count) or eval (stream 2, eval-count)");
  g->callback([&] { action = [&] { return cmd_gen(ctx, gen); }; });

  ConvertArgs conv;
  auto* c = app.add_subcommand("convert", "convert a label map to potential fields");
  add_config_flags(c, conv.o);
  add_conversion_flags(c, conv.o);
  add(c, conv.o.ablate, "--conversion", "ac (anisotropic) or sc (box filter)");
  c->add_option("--labels", conv.labels, "P5 PGM label map")->required();
  c->add_option("--classes", conv.classes, "class count (0: infer from labels)");
  c->add_option("--out", conv.out, "output .eplt file");
  c->add_option("--render", conv.render, "directory for per-plane PGM energy renderings");
  c->callback([&] { action = [&] { return cmd_convert(ctx, conv); }; });

  LossArgs loss;
  auto* l = app.add_subcommand("loss", "evaluate losses for one prediction");
  add_config_flags(l, loss.o);
  add_conversion_flags(l, loss.o);
  add_loss_flags(l, loss.o);
  add(l, loss.o.ablate, "--conversion", "ac (anisotropic) or sc (box filter)");
  add(l, loss.o.classes, "--classes", "class count when no prediction is given");
  l->add_option("--gt", loss.gt, "P5 PGM label map")->required();
  l->add_option("--pred", loss.pred, ".eplt probability field (K x H x W); random if omitted");
  l->add_option("--loss", loss.which, "point, line, ce, dice or all");
  l->add_option("--out", loss.out, "output JSON file");
  l->callback([&] { action = [&] { return cmd_loss(ctx, loss); }; });

  GradcheckArgs gc;
  auto* gk = app.add_subcommand("gradcheck", "compare analytic and finite-difference gradients");
  gk->add_option("--loss", gc.kind, "point_l1, point_l2, line, ce, dice or composite");
  gk->add_option("--mu", gc.opt.mu_exp, "line loss exponent");
  gk->add_option("--samples", gc.opt.samples, "coordinates to check");
  gk->add_option("--seed", gc.opt.seed, "seed");
  gk->add_option("--step", gc.opt.step, "finite-difference step");
  gk->add_option("--tol", gc.opt.tolerance, "relative error bound");
  gk->add_option("--min-fraction", gc.min_fraction, "fraction of coordinates that must pass");
  gk->add_option("--w", gc.opt.kernel_size, "kernel size");
  gk->add_option("--splitter", gc.splitter, "A, B or C");
  gk->add_option("--conversion", gc.conversion, "ac or sc");
  gk->add_option("--classes", gc.opt.classes, "classes");
  gk->add_option("--rows", gc.opt.rows, "rows");
  gk->add_option("--cols", gc.opt.cols, "cols");
  gk->add_option("--out", gc.out, "output JSON file");
  gk->callback([&] { action = [&] { return cmd_gradcheck(ctx, gc); }; });

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "train the segmentation network");
  add_config_flags(t, tr.o);
  add_dataset_flags(t, tr.o);
  add_conversion_flags(t, tr.o);
  add_loss_flags(t, tr.o);
  add_train_flags(t, tr.o);
  add_eval_flags(t, tr.o);
  t->add_option("--data", tr.data, "train on a `gen` directory instead of generating");
  t->add_option("--out", tr.out, "output directory");
  t->callback([&] { action = [&] { return cmd_train(ctx, tr); }; });

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "score predicted label maps against ground truth");
  add_config_flags(e, ev.o);
  add(e, ev.o.classes, "--classes", "number of classes K");
  add_eval_flags(e, ev.o);
  e->add_option("--pred", ev.pred, "directory of predicted <stem>.pgm")->required();
  e->add_option("--gt", ev.gt, "directory of ground-truth <stem>.pgm")->required();
  e->add_option("--out", ev.out, "output directory");
  e->callback([&] { action = [&] { return cmd_eval(ctx, ev); }; });

  AblateArgs ab;
  auto* a = app.add_subcommand("ablate", "train once per value of a sweep");
  add_config_flags(a, ab.o);
  add_dataset_flags(a, ab.o);
  add_conversion_flags(a, ab.o);
  add_loss_flags(a, ab.o);
  add_train_flags(a, ab.o);
  add_eval_flags(a, ab.o);
  a->add_option("--sweep", ab.sweep, "mu, splitter, kernel or weight")->required();
  a->add_option("--out", ab.out, "output directory");
  a->callback([&] { action = [&] { return cmd_ablate(ctx, ab); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& pe) {
    return app.exit(pe, out, err);
  }

  try {
    return action();
  } catch (const std::exception& ex) {
    err << "epl: " << ex.what() << "\n";
    ctx.fail(ex.what());
    return 1;
  }
}

}  // namespace epl::cli
