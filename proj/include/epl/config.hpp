// Experiment configuration: one JSON document, every field optional.
//
// {
//   "seed": 0,
//   "dataset": {"kind": "mixed", "height": 64, "width": 64, "classes": 3,
//               "noise_sigma": 0.16, "intensities": [], "count": 200,
//               "eval_count": 50, "gap": 1},
//   "ac":      {"w": 7, "splitter": "A", "conversion": "ac"},
//   "loss":    {"norm": "L2", "mu_exp": 10, "lambda1": 0.1, "lambda2": 0.01,
//               "reduction": "mean"},
//   "train":   {"epochs": 10, "batch_size": 8, "learning_rate": 0.05,
//               "momentum": 0.9, "epl": true},
//   "eval":    {"trimap_widths": [1, 3, 5, 10], "f_tolerances": [1, 2, 3]},
//   "ablate":  {"mu": [2, 4, 10, 16, 20], "splitter": ["A", "B", "C"],
//               "kernel": [3, 5, 7, 9], "weight": [0.05, 0.1, 0.2, 0.25, 0.5]}
// }
//
// Every random stream derives from "seed": training set = stream 1,
// evaluation set = stream 2, weight init = stream 3, batch shuffling =
// stream 4 (see derive_seed).

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "epl/datagen.hpp"
#include "epl/field_core.hpp"
#include "epl/losses.hpp"
#include "epl/model.hpp"

namespace epl {

enum SeedStream : std::uint64_t {
  kTrainDataStream = 1,
  kEvalDataStream = 2,
  kInitStream = 3,
  kShuffleStream = 4,
};

struct SweepLists {
  std::vector<int> mu = {2, 4, 10, 16, 20};
  std::vector<SplitterKind> splitter = {SplitterKind::A, SplitterKind::B, SplitterKind::C};
  std::vector<int> kernel = {3, 5, 7, 9};
  std::vector<double> weight = {0.05, 0.1, 0.2, 0.25, 0.5};
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  SceneSpec dataset;
  int eval_count = 50;
  ACConfig ac;
  Conversion conversion = Conversion::Anisotropic;
  LossConfig loss;
  int epochs = 10;
  int batch_size = 8;
  double learning_rate = 0.05;
  double momentum = 0.9;
  bool epl = true;
  std::vector<int> trimap_widths = {1, 3, 5, 10};
  std::vector<int> f_tolerances = {1, 2, 3};
  SweepLists sweeps;

  void validate() const;

  SceneSpec train_scene() const;
  SceneSpec eval_scene() const;
  TrainConfig train_config() const;
};

/// Parses and validates; unknown keys are rejected so typos surface.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);
nlohmann::json to_json(const SceneSpec& spec);

}  // namespace epl
