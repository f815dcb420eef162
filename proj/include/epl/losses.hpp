// Potential-domain losses (point loss, equipotential line loss) and the
// probability-domain baselines they are combined with.
//
// Every loss accumulates in double precision, sequentially in
// (direction, class, level, raster) order, so results are deterministic.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epl/field_core.hpp"
#include "epl/tensor.hpp"

namespace epl {

enum class Norm { L1, L2 };
enum class Reduction { Sum, Mean };

Norm parse_norm(std::string_view name);
Reduction parse_reduction(std::string_view name);
std::string to_string(Norm n);
std::string to_string(Reduction r);

struct LossConfig {
  Norm norm = Norm::L2;
  Reduction reduction = Reduction::Mean;
  int mu_exp = 10;  // exponential activation factor, must be even
  double lambda1 = 0.1;
  double lambda2 = 0.01;

  void validate() const;
};

template <typename Grad>
struct LossValue {
  double value = 0.0;
  std::optional<Grad> gradient;
};

using EnergyLoss = LossValue<PotentialFieldSet<double>>;
using ProbabilityLoss = LossValue<ProbabilityField>;

/// (1/|S|) sum_s sum_{c,p} |E_gt - E_pred| (L1) or (E_gt - E_pred)^2 (L2).
/// Mean reduction further divides by K*H*W. The gradient is taken with
/// respect to E_pred.
EnergyLoss point_loss(const PotentialFieldSet<double>& gt, const PotentialFieldSet<double>& pred,
                      const LossConfig& cfg, bool with_gradient = true);

/// Equal-count line regions for one (class, direction) plane pair.
///
/// Ground-truth level tau in [1, r] holds the pixels whose energy is exactly
/// tau; energy 0 is the exterior and r+1 the interior. The predicted
/// counterpart walks predicted energies in ascending (energy, raster index)
/// order, skips as many pixels as the ground-truth exterior, then hands out
/// |l^1|, |l^2|, ... pixels per level. Leftovers form the predicted interior.
struct LineRegions {
  int radius = 0;
  std::vector<Index> exterior;
  std::vector<std::vector<Index>> levels;  // levels[tau - 1]
  std::vector<Index> interior;
  std::vector<Index> predicted_exterior;
  std::vector<std::vector<Index>> predicted_levels;
  std::vector<Index> predicted_interior;
};

LineRegions build_line_regions(const Plane<double>& gt, const Plane<double>& pred, int radius);

/// One equipotential dice coefficient, reported for diagnostics.
struct EdcTerm {
  Index direction = 0;
  Index channel = 0;
  int level = 0;
  double edc = 0.0;
  bool skipped = false;  // ground-truth line empty at this level
};

/// Soft-field line loss. For every class i, direction s and level tau in
/// [1, r]:
///
///   d  = exp(-(E_gt   - tau)^mu)      d^ = exp(-(E_pred - tau)^mu)
///   C  = |d|_1 / |d*d|_1
///   EDC = 2 C |d*d^|_1 / (|d|_1 + |d^|_1)
///
/// and the loss is sum(1 - EDC) / |S|. Levels whose ground-truth line is
/// empty (|d|_1 < 1e-12) are skipped.
EnergyLoss equipotential_line_loss(const PotentialFieldSet<double>& gt,
                                   const PotentialFieldSet<double>& pred, const LossConfig& cfg,
                                   int radius, bool with_gradient = true);

std::vector<EdcTerm> equipotential_dice_terms(const PotentialFieldSet<double>& gt,
                                              const PotentialFieldSet<double>& pred, int mu_exp,
                                              int radius);

inline constexpr double kProbabilityClamp = 1e-12;
inline constexpr double kEmptyLineThreshold = 1e-12;

/// Mean over pixels of -log(max(pred[label], 1e-12)).
ProbabilityLoss cross_entropy_loss(const ProbabilityField& pred, const LabelMap& labels,
                                   bool with_gradient = true);

/// 1 - mean over classes of 2 sum(pred*gt) / (sum pred + sum gt); classes
/// with an empty ground truth are skipped.
ProbabilityLoss dice_loss(const ProbabilityField& pred, const ProbabilityField& gt,
                          bool with_gradient = true);

/// Pulls an energy-domain loss back to the probability domain through the
/// adjoint of the conversion.
ProbabilityLoss pull_back(const EnergyLoss& loss, const ACConfig& ac, Conversion conversion);

/// ce + lambda1 * point + lambda2 * line, gradients combined linearly.
ProbabilityLoss combine_losses(const ProbabilityLoss& ce, const ProbabilityLoss& point,
                               const ProbabilityLoss& line, const LossConfig& cfg);

/// Per-pixel softmax over channels.
ProbabilityField softmax(const Field<double>& logits);

/// Chain rule through softmax: given dL/dP returns dL/dZ.
Field<double> softmax_backward(const ProbabilityField& probs, const ProbabilityField& grad_probs);

}  // namespace epl
