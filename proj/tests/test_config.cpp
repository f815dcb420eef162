#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "epl/config.hpp"
#include "epl/experiment.hpp"

using namespace epl;
using nlohmann::json;

TEST_CASE("empty config yields the defaults") {
  const ExperimentConfig c = parse_config(json::object());
  CHECK(c.dataset.count == 200);
  CHECK(c.eval_count == 50);
  CHECK(c.dataset.classes == 3);
  CHECK(c.ac.kernel_size == 7);
  CHECK(c.ac.splitter.kind == SplitterKind::A);
  CHECK(c.conversion == Conversion::Anisotropic);
  CHECK(c.loss.mu_exp == 10);
  CHECK(c.loss.lambda1 == 0.1);
  CHECK(c.loss.lambda2 == 0.01);
  CHECK(c.epl);
  CHECK(c.sweeps.mu == std::vector<int>{2, 4, 10, 16, 20});
  CHECK(c.sweeps.weight == std::vector<double>{0.05, 0.1, 0.2, 0.25, 0.5});
  CHECK(c.sweeps.splitter.size() == 3);
}

TEST_CASE("fields override defaults and round trip") {
  const json j = json::parse(R"({
    "seed": 17,
    "dataset": {"kind": "touching_disks", "noise_sigma": 0.1, "count": 12, "gap": 2},
    "ac": {"w": 5, "splitter": "C", "conversion": "sc"},
    "loss": {"norm": "L1", "mu_exp": 4, "lambda1": 0.2, "reduction": "sum"},
    "train": {"epochs": 3, "epl": false},
    "eval": {"trimap_widths": [2], "f_tolerances": [0, 4]},
    "ablate": {"splitter": ["B"], "mu": [2]}
  })");
  const ExperimentConfig c = parse_config(j);
  CHECK(c.seed == 17);
  CHECK(c.dataset.kind == SceneKind::TouchingDisks);
  CHECK(c.dataset.gap == 2);
  CHECK(c.ac.kernel_size == 5);
  CHECK(c.ac.splitter.size() == 8);
  CHECK(c.conversion == Conversion::Standard);
  CHECK(c.loss.norm == Norm::L1);
  CHECK(c.loss.reduction == Reduction::Sum);
  CHECK(c.epochs == 3);
  CHECK_FALSE(c.epl);
  CHECK(c.sweeps.splitter == std::vector<SplitterKind>{SplitterKind::B});

  const ExperimentConfig again = parse_config(to_json(c));
  CHECK(to_json(again) == to_json(c));
}

TEST_CASE("seed streams are independent") {
  ExperimentConfig c;
  c.seed = 3;
  CHECK(c.train_scene().seed == derive_seed(3, kTrainDataStream));
  CHECK(c.eval_scene().seed == derive_seed(3, kEvalDataStream));
  CHECK(c.eval_scene().count == 50);
  CHECK(c.train_config().seed == derive_seed(3, kShuffleStream));
  CHECK(c.train_scene().seed != c.eval_scene().seed);
}

TEST_CASE("invalid configs are rejected") {
  CHECK_THROWS_AS(parse_config(json::parse(R"({"loss": {"mu": 10}})")), DomainError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"bogus": 1})")), DomainError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"loss": {"mu_exp": 3}})")), DomainError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"ac": {"w": 4}})")), DomainError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"ac": {"splitter": "D"}})")), DomainError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"train": {"epochs": "many"}})")), DomainError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"dataset": {"classes": 1}})")), DomainError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"ablate": {"kernel": [4]}})")), DomainError);
}

TEST_CASE("load_config reads files") {
  const auto dir = std::filesystem::temp_directory_path() / "epl_test_config";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "ok.json") << R"({"seed": 4})";
    std::ofstream(dir / "bad.json") << "{ not json";
  }
  CHECK(load_config(dir / "ok.json").seed == 4);
  CHECK_THROWS_AS(load_config(dir / "bad.json"), FormatError);
  CHECK_THROWS(load_config(dir / "missing.json"));
}

TEST_CASE("ablation sweep produces one finite row per value") {
  ExperimentConfig c;
  c.dataset.height = c.dataset.width = 24;
  c.dataset.count = 4;
  c.eval_count = 2;
  c.epochs = 1;
  c.batch_size = 2;
  c.sweeps.mu = {2, 4};
  const ExperimentData data = make_data(c);
  CHECK(data.train.size() == 4);
  CHECK(data.eval.size() == 2);
  const auto rows = run_ablation(c, SweepKind::Mu, data);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].value == "2");
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.ce));
    CHECK(std::isfinite(r.line));
  }
  const std::string csv = ablation_csv(rows);
  CHECK(csv.rfind("sweep,value,L_ce,L_point,L_line,miou,trimap_iou_w3,fmeasure_t1\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
