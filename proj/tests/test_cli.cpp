#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "epl/field_core.hpp"
#include "epl/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int status;
  std::string out;
  std::string err;
};

Result epl_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = epl::cli::run(args, out, err);
  return {status, out.str(), err.str()};
}

fs::path fresh(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("epl_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json load(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

epl::LabelMap centred_square(int size, int side) {
  epl::LabelPlane l = epl::LabelPlane::Zero(size, size);
  const int lo = (size - side) / 2;
  l.block(lo, lo, side, side).setOnes();
  return epl::LabelMap(l, 2);
}

}  // namespace

TEST_CASE("gen writes samples, manifest and config echo deterministically") {
  const fs::path a = fresh("gen_a"), b = fresh("gen_b");
  const std::vector<std::string> common = {"gen", "--seed", "7", "--count", "6", "--height", "32", "--width", "32"};
  auto args_a = common;
  args_a.insert(args_a.end(), {"--out", a.string()});
  auto args_b = common;
  args_b.insert(args_b.end(), {"--out", b.string()});
  REQUIRE(epl_run(args_a).status == 0);
  REQUIRE(epl_run(args_b).status == 0);
  const json m = load(a / "manifest.json");
  CHECK(m["samples"].size() == 6);
  CHECK(load(a / "config.json")["status"] == "ok");
  for (const auto& entry : fs::directory_iterator(a)) {
    const fs::path name = entry.path().filename();
    if (name == "config.json") continue;  // echoes the differing --out argument
    CHECK(slurp(a / name) == slurp(b / name));
  }
  CHECK(fs::exists(a / "sample_0005.pgm"));
}

TEST_CASE("gen defaults to 200 samples") {
  const fs::path d = fresh("gen_default");
  REQUIRE(epl_run({"gen", "--height", "16", "--width", "16", "--out", d.string()}).status == 0);
  CHECK(load(d / "manifest.json")["samples"].size() == 200);
}

TEST_CASE("invalid config values fail with nonzero status") {
  const fs::path d = fresh("gen_bad");
  const Result r = epl_run({"gen", "--classes", "1", "--out", d.string()});
  CHECK(r.status != 0);
  CHECK(r.err.find("K must be") != std::string::npos);
  CHECK(epl_run({"gen", "--nonsense"}).status != 0);
  CHECK(epl_run({}).status != 0);
  std::ofstream(d / "typo.json") << R"({"loss": {"lamda1": 0.2}})";
  CHECK(epl_run({"gen", "--config", (d / "typo.json").string(), "--out", d.string()}).status != 0);
}

TEST_CASE("flags override the config file") {
  const fs::path d = fresh("override");
  std::ofstream(d / "cfg.json") << R"({"seed": 3, "dataset": {"count": 5, "height": 24, "width": 24}})";
  REQUIRE(epl_run({"gen", "--config", (d / "cfg.json").string(), "--count", "2", "--out", (d / "o").string()})
              .status == 0);
  const json echo = load(d / "o" / "config.json");
  CHECK(echo["config"]["seed"] == 3);
  CHECK(echo["config"]["dataset"]["count"] == 2);
  CHECK(load(d / "o" / "manifest.json")["samples"].size() == 2);
}

TEST_CASE("convert produces potential fields and renderings") {
  const fs::path d = fresh("convert");
  epl::write_pgm(d / "square.pgm", centred_square(9, 5));
  REQUIRE(epl_run({"convert", "--labels", (d / "square.pgm").string(), "--w", "5", "--splitter", "A",
                   "--out", (d / "a.eplt").string(), "--render", (d / "render").string()})
              .status == 0);
  const epl::Tensor t = epl::read_eplt(d / "a.eplt");
  CHECK(t.dims == std::vector<std::uint32_t>{4, 2, 9, 9});
  const auto e = epl::potentials_from_tensor(t);
  for (epl::Index s = 0; s < 4; ++s) {
    CHECK(e.plane(s, 1).minCoeff() == 0.0);
    CHECK(e.plane(s, 1).maxCoeff() == 3.0);
  }
  CHECK(fs::exists(d / "render" / "field_s3_c1.pgm"));
  CHECK(load(d / "a.config.json")["status"] == "ok");

  REQUIRE(epl_run({"convert", "--labels", (d / "square.pgm").string(), "--splitter", "C", "--out",
                   (d / "c.eplt").string()})
              .status == 0);
  CHECK(epl::read_eplt(d / "c.eplt").dims[0] == 8);
  CHECK(epl_run({"convert", "--labels", (d / "nope.pgm").string(), "--out", (d / "x.eplt").string()}).status != 0);
  CHECK(epl_run({"convert", "--labels", (d / "square.pgm").string(), "--w", "4"}).status != 0);
}

TEST_CASE("loss emits one record per loss") {
  const fs::path d = fresh("loss");
  const auto labels = centred_square(8, 4);
  epl::write_pgm(d / "gt.pgm", labels);
  epl::write_eplt(d / "perfect.eplt", epl::to_tensor(epl::one_hot(labels, 2)));
  REQUIRE(epl_run({"loss", "--gt", (d / "gt.pgm").string(), "--pred", (d / "perfect.eplt").string(), "--w", "5",
                   "--out", (d / "perfect.json").string()})
              .status == 0);
  const json rec = load(d / "perfect.json");
  REQUIRE(rec.size() == 4);
  for (const auto& r : rec) {
    CHECK(r.contains("config"));
    CHECK(r.contains("seed"));
    if (r["loss_name"] != "cross_entropy") CHECK(std::abs(r["value"].get<double>()) < 1e-12);
  }
  REQUIRE(epl_run({"loss", "--gt", (d / "gt.pgm").string(), "--classes", "2", "--loss", "line", "--seed", "4",
                   "--out", (d / "random.json").string()})
              .status == 0);
  const json rnd = load(d / "random.json");
  REQUIRE(rnd.size() == 1);
  CHECK(rnd[0]["loss_name"] == "line");
  CHECK(rnd[0]["seed"] == 4);
  CHECK(rnd[0]["value"].get<double>() > 0.0);
}

TEST_CASE("gradcheck command") {
  const fs::path d = fresh("gradcheck");
  const Result r = epl_run({"gradcheck", "--loss", "line", "--mu", "2", "--samples", "32", "--out",
                            (d / "g.json").string()});
  CHECK(r.status == 0);
  CHECK(load(d / "g.json")["fraction_passing"].get<double>() >= 0.95);
  CHECK(json::parse(r.out)["loss_name"] == "line_mu2");
  CHECK(epl_run({"gradcheck", "--loss", "hinge"}).status != 0);
}

TEST_CASE("train, eval and their file contracts") {
  const fs::path d = fresh("train");
  const std::vector<std::string> base = {"train", "--count", "6", "--eval-count", "3", "--height", "24",
                                         "--width", "24", "--epochs", "2", "--batch-size", "3"};
  for (const std::string mode : {"on", "off"}) {
    auto args = base;
    args.insert(args.end(), {"--epl", mode, "--out", (d / mode).string()});
    REQUIRE(epl_run(args).status == 0);
    const std::string csv = slurp(d / mode / "history.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(fs::exists(d / mode / "checkpoint.eplt"));
    CHECK(load(d / mode / "checkpoint.json")["architecture"]["name"] == "tinynet");
    CHECK(load(d / mode / "config.json")["config"]["train"]["epl"] == (mode == "on"));
  }
  CHECK(slurp(d / "on" / "history.csv") != slurp(d / "off" / "history.csv"));

  auto sc = base;
  sc.insert(sc.end(), {"--ablate", "sc", "--out", (d / "sc").string()});
  REQUIRE(epl_run(sc).status == 0);
  CHECK(load(d / "sc" / "config.json")["config"]["ac"]["conversion"] == "sc");

  // Predictions against themselves score perfectly.
  const std::string eval_set = (d / "on" / "eval_set").string();
  REQUIRE(epl_run({"eval", "--pred", eval_set, "--gt", eval_set, "--out", (d / "self").string()}).status == 0);
  const json self = load(d / "self" / "report.json");
  CHECK(self["miou"] == 1.0);
  CHECK(self["images"] == 3);
  CHECK(self["trimap_iou"].size() == 4);  // widths 1, 3, 5, 10

  REQUIRE(epl_run({"eval", "--pred", (d / "on" / "predictions").string(), "--gt", eval_set, "--out",
                   (d / "model").string()})
              .status == 0);
  const std::string rows = slurp(d / "model" / "report.csv");
  CHECK(rows.rfind("metric,param,value\n", 0) == 0);
  CHECK(rows.find("boundary_f,3,") != std::string::npos);

  fs::remove(d / "on" / "predictions" / "sample_0001.pgm");
  const Result missing = epl_run({"eval", "--pred", (d / "on" / "predictions").string(), "--gt", eval_set,
                                  "--out", (d / "missing").string()});
  CHECK(missing.status != 0);
  CHECK(missing.err.find("sample_0001.pgm") != std::string::npos);
  CHECK(load(d / "missing" / "config.json")["status"] == "failed");
}

TEST_CASE("train can read a generated dataset") {
  const fs::path d = fresh("train_data");
  REQUIRE(epl_run({"gen", "--count", "4", "--height", "24", "--width", "24", "--out", (d / "data").string()})
              .status == 0);
  REQUIRE(epl_run({"train", "--data", (d / "data").string(), "--eval-count", "2", "--height", "24", "--width",
                   "24", "--epochs", "1", "--out", (d / "run").string()})
              .status == 0);
  CHECK(fs::exists(d / "run" / "history.json"));
}

TEST_CASE("ablate writes one row per sweep value") {
  const fs::path d = fresh("ablate");
  std::ofstream(d / "cfg.json") << R"({"dataset": {"count": 4, "eval_count": 2, "height": 24, "width": 24},
                                      "train": {"epochs": 1, "batch_size": 2}})";
  REQUIRE(epl_run({"ablate", "--config", (d / "cfg.json").string(), "--sweep", "splitter", "--out",
                   (d / "out").string()})
              .status == 0);
  const std::string csv = slurp(d / "out" / "ablation_splitter.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(csv.find("\nsplitter,B,") != std::string::npos);
  CHECK(epl_run({"ablate", "--sweep", "depth", "--out", (d / "bad").string()}).status != 0);
}
