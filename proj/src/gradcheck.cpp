#include "epl/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "epl/datagen.hpp"
#include "epl/losses.hpp"

namespace epl {

namespace {

using Rng = std::mt19937_64;

LabelMap random_labels(Rng& rng, int classes, int rows, int cols) {
  std::uniform_int_distribution<int> pick(0, classes - 1);
  LabelPlane l(rows, cols);
  for (Index p = 0; p < l.size(); ++p) l.data()[p] = pick(rng);
  // Blocky regions give the potential fields proper level structure.
  LabelPlane blocky(rows, cols);
  for (Index y = 0; y < rows; ++y) {
    for (Index x = 0; x < cols; ++x) blocky(y, x) = l((y / 3) * 3, (x / 3) * 3);
  }
  return LabelMap(std::move(blocky), classes);
}

Field<double> random_logits(Rng& rng, int classes, int rows, int cols, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  Field<double> f(classes, rows, cols);
  for (auto& p : f.planes()) {
    for (Index i = 0; i < p.size(); ++i) p.data()[i] = n(rng);
  }
  return f;
}

// Builds the loss as a function of a flat vector and its analytic gradient at x0.
struct Problem {
  ScalarFunction f;
  Eigen::VectorXd x0;
  Eigen::VectorXd grad;
  std::function<bool(Index)> admissible = [](Index) { return true; };
};

Problem make_problem(const GradcheckOptions& o, Rng& rng) {
  const LabelMap labels = random_labels(rng, o.classes, o.rows, o.cols);
  const ProbabilityField gt_prob = one_hot(labels, o.classes);
  const Field<double> logits = random_logits(rng, o.classes, o.rows, o.cols, 1.5);
  const ProbabilityField probs = softmax(logits);

  ACConfig ac = make_ac_config(o.kernel_size, o.splitter);
  LossConfig lc;
  lc.mu_exp = o.mu_exp;
  lc.reduction = Reduction::Sum;
  lc.lambda1 = o.lambda1;
  lc.lambda2 = o.lambda2;

  Problem pb;
  switch (o.kind) {
    case GradLossKind::PointL1:
    case GradLossKind::PointL2:
    case GradLossKind::Line: {
      lc.norm = o.kind == GradLossKind::PointL1 ? Norm::L1 : Norm::L2;
      const auto gt_e = convert(gt_prob, ac, o.conversion);
      const auto pred_e = convert(probs, ac, o.conversion);
      pb.x0 = flatten(pred_e);
      const bool line = o.kind == GradLossKind::Line;
      const int radius = ac.radius();
      pb.f = [gt_e, lc, line, radius](const Eigen::VectorXd& x) {
        PotentialFieldSet<double> e(gt_e.directions(), gt_e.channels(), gt_e.rows(), gt_e.cols());
        unflatten(x, e);
        return line ? equipotential_line_loss(gt_e, e, lc, radius, false).value
                    : point_loss(gt_e, e, lc, false).value;
      };
      const EnergyLoss l = line ? equipotential_line_loss(gt_e, pred_e, lc, radius)
                                : point_loss(gt_e, pred_e, lc);
      pb.grad = flatten(*l.gradient);
      if (o.kind == GradLossKind::PointL1) {
        const Eigen::VectorXd delta = flatten(gt_e) - pb.x0;
        const double margin = o.kink_margin;
        pb.admissible = [delta, margin](Index i) { return std::abs(delta[i]) > margin; };
      }
      break;
    }
    case GradLossKind::CrossEntropy:
    case GradLossKind::Dice: {
      pb.x0 = flatten(probs);
      const bool ce = o.kind == GradLossKind::CrossEntropy;
      pb.f = [labels, gt_prob, ce](const Eigen::VectorXd& x) {
        ProbabilityField p(gt_prob.channels(), gt_prob.rows(), gt_prob.cols());
        unflatten(x, p);
        return ce ? cross_entropy_loss(p, labels, false).value : dice_loss(p, gt_prob, false).value;
      };
      const ProbabilityLoss l = ce ? cross_entropy_loss(probs, labels) : dice_loss(probs, gt_prob);
      pb.grad = flatten(*l.gradient);
      break;
    }
    case GradLossKind::Composite: {
      pb.x0 = flatten(logits);
      const auto gt_e = convert(gt_prob, ac, o.conversion);
      const Conversion conv = o.conversion;
      auto total = [labels, gt_e, ac, lc, conv](const Field<double>& z, bool with_grad) {
        const ProbabilityField p = softmax(z);
        const auto pred_e = convert(p, ac, conv);
        const ProbabilityLoss ce = cross_entropy_loss(p, labels, with_grad);
        const ProbabilityLoss pt = pull_back(point_loss(gt_e, pred_e, lc, with_grad), ac, conv);
        const ProbabilityLoss ln =
            pull_back(equipotential_line_loss(gt_e, pred_e, lc, ac.radius(), with_grad), ac, conv);
        ProbabilityLoss out = combine_losses(ce, pt, ln, lc);
        if (with_grad) out.gradient = softmax_backward(p, *out.gradient);
        return out;
      };
      const Index k = logits.channels(), r = logits.rows(), c = logits.cols();
      pb.f = [total, k, r, c](const Eigen::VectorXd& x) {
        Field<double> z(k, r, c);
        unflatten(x, z);
        return total(z, false).value;
      };
      pb.grad = flatten(*total(logits, true).gradient);
      break;
    }
  }
  return pb;
}

}  // namespace

double finite_diff_gradient(const ScalarFunction& f, const Eigen::VectorXd& x, Index coordinate,
                            double h) {
  if (!(h > 0.0)) throw DomainError("finite_diff_gradient: step must be positive");
  if (coordinate < 0 || coordinate >= x.size()) {
    throw DomainError("finite_diff_gradient: coordinate out of range");
  }
  Eigen::VectorXd probe = x;
  probe[coordinate] = x[coordinate] + h;
  const double up = f(probe);
  probe[coordinate] = x[coordinate] - h;
  const double down = f(probe);
  if (!std::isfinite(up) || !std::isfinite(down)) {
    throw std::runtime_error("finite_diff_gradient: non-finite loss evaluation");
  }
  return (up - down) / (2.0 * h);
}

GradLossKind parse_grad_loss_kind(std::string_view name) {
  if (name == "point_l1") return GradLossKind::PointL1;
  if (name == "point_l2") return GradLossKind::PointL2;
  if (name == "line") return GradLossKind::Line;
  if (name == "ce" || name == "cross_entropy") return GradLossKind::CrossEntropy;
  if (name == "dice") return GradLossKind::Dice;
  if (name == "composite") return GradLossKind::Composite;
  throw DomainError("unknown loss kind '" + std::string(name) +
                    "' (point_l1, point_l2, line, ce, dice, composite)");
}

std::string to_string(GradLossKind kind) {
  switch (kind) {
    case GradLossKind::PointL1:
      return "point_l1";
    case GradLossKind::PointL2:
      return "point_l2";
    case GradLossKind::Line:
      return "line";
    case GradLossKind::CrossEntropy:
      return "cross_entropy";
    case GradLossKind::Dice:
      return "dice";
    case GradLossKind::Composite:
      return "composite";
  }
  return "?";
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

nlohmann::json GradReport::to_json() const {
  return {{"loss_name", loss_name},
          {"coordinates", coordinates},
          {"max_relative_error", max_relative_error},
          {"fraction_passing", fraction_passing},
          {"step", step}};
}

GradReport run_gradcheck(const GradcheckOptions& o) {
  if (o.samples < 1) throw DomainError("run_gradcheck: samples must be >= 1");
  if (o.classes < 2 || o.rows < 1 || o.cols < 1) throw DomainError("run_gradcheck: bad dimensions");
  Rng rng(derive_seed(o.seed, 0x6772616463686bull));
  const Problem pb = make_problem(o, rng);

  std::uniform_int_distribution<Index> pick(0, pb.x0.size() - 1);
  GradReport report;
  report.loss_name = to_string(o.kind);
  if (o.kind == GradLossKind::Line) report.loss_name += "_mu" + std::to_string(o.mu_exp);
  report.step = o.step;
  int passing = 0;
  int attempts = 0;
  while (report.coordinates < o.samples && attempts < 1000 * o.samples) {
    ++attempts;
    const Index i = pick(rng);
    if (!pb.admissible(i)) continue;
    const double numeric = finite_diff_gradient(pb.f, pb.x0, i, o.step);
    const double err = relative_error(pb.grad[i], numeric, o.abs_floor);
    report.max_relative_error = std::max(report.max_relative_error, err);
    if (err < o.tolerance) ++passing;
    ++report.coordinates;
  }
  report.fraction_passing =
      report.coordinates > 0 ? static_cast<double>(passing) / report.coordinates : 0.0;
  return report;
}

}  // namespace epl
