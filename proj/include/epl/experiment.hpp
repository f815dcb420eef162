// End-to-end runs shared by the CLI and the acceptance suite: dataset
// generation, training and ablation sweeps.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "epl/config.hpp"
#include "epl/model.hpp"

namespace epl {

struct ExperimentData {
  std::vector<Sample> train;
  std::vector<Sample> eval;
};

ExperimentData make_data(const ExperimentConfig& cfg);

struct ExperimentResult {
  TinyNet net;
  TrainResult train;
};

/// Initialises a TinyNet from the config seed and trains it on `data`.
ExperimentResult run_training(const ExperimentConfig& cfg, const ExperimentData& data,
                              const std::function<void(const EpochRecord&)>& on_epoch = {});

enum class SweepKind { Mu, Splitter, Kernel, Weight };

SweepKind parse_sweep_kind(std::string_view name);
std::string to_string(SweepKind kind);

struct AblationRow {
  std::string sweep;
  std::string value;
  double ce = 0.0;
  double point = 0.0;
  double line = 0.0;
  double miou = 0.0;
  double trimap_iou = 0.0;  // width 3
  double fmeasure = 0.0;    // tolerance 1
};

/// One training run per sweep value; every run shares the config seed.
/// The weight sweep varies lambda1 (point loss weight).
std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg, SweepKind sweep,
                                      const ExperimentData& data);

std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace epl
