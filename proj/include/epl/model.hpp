// Tiny fully-convolutional segmentation network and its SGD trainer.
//
// Architecture: conv3x3(Cin->8) + ReLU -> conv3x3(8->8) + ReLU ->
// conv1x1(8->K) -> per-pixel softmax, zero padding throughout. Parameters live
// in one flat vector laid out as [W1, b1, W2, b2, W3, b3]; a 3x3 weight
// matrix has rows indexed by (ky*3 + kx)*Cin + c_in and one column per output
// channel.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "epl/datagen.hpp"
#include "epl/field_core.hpp"
#include "epl/losses.hpp"
#include "epl/metrics.hpp"
#include "epl/tensor.hpp"

namespace epl {

inline constexpr int kHiddenChannels = 8;

class TinyNet {
 public:
  TinyNet(int in_channels, int classes);

  static Index parameter_count(int in_channels, int classes);

  int in_channels() const { return in_channels_; }
  int classes() const { return classes_; }
  Eigen::VectorXd& parameters() { return theta_; }
  const Eigen::VectorXd& parameters() const { return theta_; }

  /// Uniform(-a, a) with a = sqrt(1 / fan_in) for weights and biases.
  void initialize(std::uint64_t seed);

  nlohmann::json architecture() const;

 private:
  int in_channels_;
  int classes_;
  Eigen::VectorXd theta_;
};

/// Multiply-accumulate and element counts of one forward pass.
struct ForwardTrace {
  std::uint64_t macs = 0;
  std::uint64_t activations = 0;
};

/// Intermediate activations kept for backpropagation. Matrices are
/// (pixels x channels).
struct ForwardCache {
  Index rows = 0;
  Index cols = 0;
  Eigen::MatrixXd input;
  Eigen::MatrixXd cols1, pre1, act1;
  Eigen::MatrixXd cols2, pre2, act2;
  Eigen::MatrixXd logits;
  ProbabilityField probs;
};

ForwardCache forward_cached(const TinyNet& net, const Field<double>& image,
                            ForwardTrace* trace = nullptr);
ProbabilityField forward(const TinyNet& net, const Field<double>& image,
                         ForwardTrace* trace = nullptr);

/// Single-channel float image to a one-channel double field.
Field<double> image_field(const Plane<float>& image);

LabelMap argmax_labels(const ProbabilityField& probs);

/// Which potential-domain terms contribute to the objective.
struct ObjectiveConfig {
  LossConfig loss;
  ACConfig ac;
  Conversion conversion = Conversion::Anisotropic;
  bool epl = true;  // false: CE only (lambda1 = lambda2 = 0)
};

struct LossBreakdown {
  double ce = 0.0;
  double point = 0.0;
  double line = 0.0;
  double total = 0.0;
};

struct BackwardResult {
  LossBreakdown loss;
  Eigen::VectorXd gradient;
};

/// Value of ce + lambda1 * point + lambda2 * line for one sample.
LossBreakdown objective(const TinyNet& net, const Field<double>& image, const LabelMap& labels,
                        const ObjectiveConfig& cfg);

/// Gradient of the objective with respect to the flat parameter vector.
BackwardResult backward(const TinyNet& net, const Field<double>& image, const LabelMap& labels,
                        const ObjectiveConfig& cfg);

struct TrainConfig {
  int epochs = 10;
  int batch_size = 8;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  ObjectiveConfig objective;
  std::vector<int> trimap_widths = {1, 3, 5, 10};
  std::vector<int> f_tolerances = {1, 2, 3};
  int history_trimap_width = 3;
  int history_f_tolerance = 1;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double ce = 0.0;
  double point = 0.0;
  double line = 0.0;
  double miou = 0.0;
  double trimap_iou = 0.0;
  double fmeasure = 0.0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  EvalReport final_eval;
};

/// Mini-batch SGD with momentum. Epoch losses are sample means of the
/// per-batch training objective; metrics are computed on `eval` (or the
/// training set when `eval` is empty) after each epoch.
TrainResult train(TinyNet& net, const std::vector<Sample>& data, const std::vector<Sample>& eval,
                  const TrainConfig& cfg,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

EvalReport evaluate_model(const TinyNet& net, const std::vector<Sample>& data,
                          const std::vector<int>& trimap_widths,
                          const std::vector<int>& f_tolerances);

std::string history_csv(const std::vector<EpochRecord>& history);
nlohmann::json history_json(const std::vector<EpochRecord>& history);

}  // namespace epl
