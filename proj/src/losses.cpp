#include "epl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace epl {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

void require_same_shape(const PotentialFieldSet<double>& a, const PotentialFieldSet<double>& b,
                        const char* who) {
  if (!a.same_shape(b)) throw DomainError(std::string(who) + ": shape mismatch");
}

// Shared kernel of the line loss and its diagnostics. When `grad` is given
// the loss gradient is accumulated into it.
double line_loss_kernel(const PotentialFieldSet<double>& gt, const PotentialFieldSet<double>& pred,
                        int mu, int radius, PotentialFieldSet<double>* grad,
                        std::vector<EdcTerm>* terms) {
  const double inv_dirs = 1.0 / static_cast<double>(gt.directions());
  const Index n = gt.rows() * gt.cols();
  Eigen::ArrayXd d(n);
  Eigen::ArrayXd dh(n);
  double total = 0.0;
  for (Index s = 0; s < gt.directions(); ++s) {
    for (Index c = 0; c < gt.channels(); ++c) {
      const Eigen::Map<const Eigen::ArrayXd> g(gt.plane(s, c).data(), n);
      const Eigen::Map<const Eigen::ArrayXd> e(pred.plane(s, c).data(), n);
      for (int tau = 1; tau <= radius; ++tau) {
        double sum_d = 0.0, sum_dd = 0.0, sum_dh = 0.0, inter = 0.0;
        for (Index p = 0; p < n; ++p) {
          d[p] = std::exp(-ipow(g[p] - tau, mu));
          dh[p] = std::exp(-ipow(e[p] - tau, mu));
          sum_d += d[p];
          sum_dd += d[p] * d[p];
          sum_dh += dh[p];
          inter += d[p] * dh[p];
        }
        EdcTerm term{s, c, tau, 0.0, false};
        if (sum_d < kEmptyLineThreshold) {
          term.skipped = true;
          if (terms) terms->push_back(term);
          continue;
        }
        const double norm = sum_d / sum_dd;
        const double denom = sum_d + sum_dh;
        term.edc = 2.0 * norm * inter / denom;
        total += 1.0 - term.edc;
        if (terms) terms->push_back(term);
        if (grad) {
          auto& out = grad->plane(s, c);
          const double k = 2.0 * norm / (denom * denom);
          for (Index p = 0; p < n; ++p) {
            if (dh[p] == 0.0) continue;
            const double dedc_ddh = k * (d[p] * denom - inter);
            const double ddh_de = -mu * ipow(e[p] - tau, mu - 1) * dh[p];
            out.data()[p] -= inv_dirs * dedc_ddh * ddh_de;
          }
        }
      }
    }
  }
  return total * inv_dirs;
}

}  // namespace

Norm parse_norm(std::string_view name) {
  if (name == "L1" || name == "l1") return Norm::L1;
  if (name == "L2" || name == "l2") return Norm::L2;
  throw DomainError("unknown norm '" + std::string(name) + "' (expected L1 or L2)");
}

Reduction parse_reduction(std::string_view name) {
  if (name == "sum") return Reduction::Sum;
  if (name == "mean") return Reduction::Mean;
  throw DomainError("unknown reduction '" + std::string(name) + "' (expected sum or mean)");
}

std::string to_string(Norm n) { return n == Norm::L1 ? "L1" : "L2"; }
std::string to_string(Reduction r) { return r == Reduction::Sum ? "sum" : "mean"; }

void LossConfig::validate() const {
  if (mu_exp < 2 || mu_exp % 2 != 0) {
    throw DomainError("mu_exp must be an even integer >= 2, got " + std::to_string(mu_exp));
  }
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw DomainError("loss weights must be >= 0");
}

EnergyLoss point_loss(const PotentialFieldSet<double>& gt, const PotentialFieldSet<double>& pred,
                      const LossConfig& cfg, bool with_gradient) {
  require_same_shape(gt, pred, "point_loss");
  double scale = 1.0 / static_cast<double>(gt.directions());
  if (cfg.reduction == Reduction::Mean) {
    scale /= static_cast<double>(gt.channels() * gt.rows() * gt.cols());
  }
  EnergyLoss out;
  if (with_gradient) out.gradient.emplace(gt.directions(), gt.channels(), gt.rows(), gt.cols());
  double total = 0.0;
  for (Index s = 0; s < gt.directions(); ++s) {
    for (Index c = 0; c < gt.channels(); ++c) {
      const Plane<double> delta = gt.plane(s, c) - pred.plane(s, c);
      if (cfg.norm == Norm::L1) {
        total += delta.cwiseAbs().sum();
        if (with_gradient) {
          out.gradient->plane(s, c) = -scale * delta.unaryExpr([](double v) {
            return static_cast<double>((v > 0.0) - (v < 0.0));
          });
        }
      } else {
        total += delta.squaredNorm();
        if (with_gradient) out.gradient->plane(s, c) = -2.0 * scale * delta;
      }
    }
  }
  out.value = total * scale;
  return out;
}

LineRegions build_line_regions(const Plane<double>& gt, const Plane<double>& pred, int radius) {
  if (gt.rows() != pred.rows() || gt.cols() != pred.cols()) {
    throw DomainError("build_line_regions: shape mismatch");
  }
  if (radius < 1) throw DomainError("build_line_regions: radius must be >= 1");
  const Index n = gt.size();
  LineRegions out;
  out.radius = radius;
  out.levels.resize(static_cast<std::size_t>(radius));
  out.predicted_levels.resize(static_cast<std::size_t>(radius));
  for (Index p = 0; p < n; ++p) {
    const double v = gt.data()[p];
    if (v != std::round(v) || v < 0.0 || v > radius + 1) {
      throw DomainError("build_line_regions: ground-truth energy " + std::to_string(v) +
                        " is not an integer in [0, r+1]");
    }
    const int level = static_cast<int>(v);
    if (level == 0) {
      out.exterior.push_back(p);
    } else if (level == radius + 1) {
      out.interior.push_back(p);
    } else {
      out.levels[static_cast<std::size_t>(level - 1)].push_back(p);
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return pred.data()[a] < pred.data()[b]; });
  auto cursor = order.begin();
  auto take = [&cursor](std::size_t count, std::vector<Index>& into) {
    into.assign(cursor, cursor + static_cast<std::ptrdiff_t>(count));
    cursor += static_cast<std::ptrdiff_t>(count);
  };
  take(out.exterior.size(), out.predicted_exterior);
  for (int tau = 0; tau < radius; ++tau) {
    take(out.levels[static_cast<std::size_t>(tau)].size(),
         out.predicted_levels[static_cast<std::size_t>(tau)]);
  }
  out.predicted_interior.assign(cursor, order.end());
  return out;
}

EnergyLoss equipotential_line_loss(const PotentialFieldSet<double>& gt,
                                   const PotentialFieldSet<double>& pred, const LossConfig& cfg,
                                   int radius, bool with_gradient) {
  cfg.validate();
  require_same_shape(gt, pred, "equipotential_line_loss");
  if (radius < 1) throw DomainError("equipotential_line_loss: radius must be >= 1");
  EnergyLoss out;
  if (with_gradient) out.gradient.emplace(gt.directions(), gt.channels(), gt.rows(), gt.cols());
  out.value = line_loss_kernel(gt, pred, cfg.mu_exp, radius,
                               with_gradient ? &*out.gradient : nullptr, nullptr);
  return out;
}

std::vector<EdcTerm> equipotential_dice_terms(const PotentialFieldSet<double>& gt,
                                              const PotentialFieldSet<double>& pred, int mu_exp,
                                              int radius) {
  LossConfig cfg;
  cfg.mu_exp = mu_exp;
  cfg.validate();
  require_same_shape(gt, pred, "equipotential_dice_terms");
  std::vector<EdcTerm> terms;
  line_loss_kernel(gt, pred, mu_exp, radius, nullptr, &terms);
  return terms;
}

ProbabilityLoss cross_entropy_loss(const ProbabilityField& pred, const LabelMap& labels,
                                   bool with_gradient) {
  if (pred.rows() != labels.rows() || pred.cols() != labels.cols() ||
      pred.channels() < labels.classes()) {
    throw DomainError("cross_entropy_loss: shape mismatch");
  }
  const Index n = labels.rows() * labels.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  ProbabilityLoss out;
  if (with_gradient) out.gradient.emplace(pred.channels(), pred.rows(), pred.cols());
  double total = 0.0;
  for (Index p = 0; p < n; ++p) {
    const Index c = labels.data().data()[p];
    const double prob = pred[c].data()[p];
    total -= std::log(std::max(prob, kProbabilityClamp));
    if (with_gradient && prob >= kProbabilityClamp) {
      (*out.gradient)[c].data()[p] = -inv_n / prob;
    }
  }
  out.value = total * inv_n;
  return out;
}

ProbabilityLoss dice_loss(const ProbabilityField& pred, const ProbabilityField& gt,
                          bool with_gradient) {
  if (!pred.same_shape(gt)) throw DomainError("dice_loss: shape mismatch");
  ProbabilityLoss out;
  if (with_gradient) out.gradient.emplace(pred.channels(), pred.rows(), pred.cols());
  std::vector<Index> active;
  for (Index c = 0; c < gt.channels(); ++c) {
    if (gt[c].sum() > kEmptyLineThreshold) active.push_back(c);
  }
  if (active.empty()) return out;
  const double inv_m = 1.0 / static_cast<double>(active.size());
  double score = 0.0;
  for (Index c : active) {
    const double inter = pred[c].cwiseProduct(gt[c]).sum();
    const double denom = pred[c].sum() + gt[c].sum();
    score += 2.0 * inter / denom;
    if (with_gradient) {
      (*out.gradient)[c] = (-2.0 * inv_m / (denom * denom)) *
                           (gt[c].array() * denom - inter).matrix();
    }
  }
  out.value = 1.0 - score * inv_m;
  return out;
}

ProbabilityLoss pull_back(const EnergyLoss& loss, const ACConfig& ac, Conversion conversion) {
  ProbabilityLoss out;
  out.value = loss.value;
  if (loss.gradient) out.gradient = convert_adjoint(*loss.gradient, ac, conversion);
  return out;
}

ProbabilityLoss combine_losses(const ProbabilityLoss& ce, const ProbabilityLoss& point,
                               const ProbabilityLoss& line, const LossConfig& cfg) {
  if (!(cfg.lambda1 >= 0.0) || !(cfg.lambda2 >= 0.0)) throw DomainError("loss weights must be >= 0");
  ProbabilityLoss out;
  out.value = ce.value + cfg.lambda1 * point.value + cfg.lambda2 * line.value;
  if (ce.gradient) {
    out.gradient = *ce.gradient;
    if (point.gradient && cfg.lambda1 != 0.0) {
      for (Index c = 0; c < out.gradient->channels(); ++c) {
        (*out.gradient)[c] += cfg.lambda1 * (*point.gradient)[c];
      }
    }
    if (line.gradient && cfg.lambda2 != 0.0) {
      for (Index c = 0; c < out.gradient->channels(); ++c) {
        (*out.gradient)[c] += cfg.lambda2 * (*line.gradient)[c];
      }
    }
  }
  return out;
}

ProbabilityField softmax(const Field<double>& logits) {
  ProbabilityField out(logits.channels(), logits.rows(), logits.cols());
  const Index n = logits.rows() * logits.cols();
  for (Index p = 0; p < n; ++p) {
    double peak = -std::numeric_limits<double>::infinity();
    for (Index c = 0; c < logits.channels(); ++c) peak = std::max(peak, logits[c].data()[p]);
    double z = 0.0;
    for (Index c = 0; c < logits.channels(); ++c) {
      const double v = std::exp(logits[c].data()[p] - peak);
      out[c].data()[p] = v;
      z += v;
    }
    for (Index c = 0; c < logits.channels(); ++c) out[c].data()[p] /= z;
  }
  return out;
}

Field<double> softmax_backward(const ProbabilityField& probs, const ProbabilityField& grad_probs) {
  if (!probs.same_shape(grad_probs)) throw DomainError("softmax_backward: shape mismatch");
  Field<double> out(probs.channels(), probs.rows(), probs.cols());
  const Index n = probs.rows() * probs.cols();
  for (Index p = 0; p < n; ++p) {
    double dot = 0.0;
    for (Index c = 0; c < probs.channels(); ++c) {
      dot += probs[c].data()[p] * grad_probs[c].data()[p];
    }
    for (Index c = 0; c < probs.channels(); ++c) {
      out[c].data()[p] = probs[c].data()[p] * (grad_probs[c].data()[p] - dot);
    }
  }
  return out;
}

}  // namespace epl
