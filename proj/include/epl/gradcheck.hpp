// Central finite-difference oracle and gradient verification harness.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "epl/field_core.hpp"

namespace epl {

using ScalarFunction = std::function<double(const Eigen::VectorXd&)>;

/// (f(x + h e_i) - f(x - h e_i)) / (2h). Throws DomainError for h <= 0 and
/// std::runtime_error when either evaluation is not finite.
double finite_diff_gradient(const ScalarFunction& f, const Eigen::VectorXd& x, Index coordinate,
                            double h);

enum class GradLossKind { PointL1, PointL2, Line, CrossEntropy, Dice, Composite };

GradLossKind parse_grad_loss_kind(std::string_view name);
std::string to_string(GradLossKind kind);

struct GradcheckOptions {
  GradLossKind kind = GradLossKind::PointL2;
  int classes = 3;
  int rows = 10;
  int cols = 10;
  int samples = 64;
  std::uint64_t seed = 0;
  double step = 1e-4;
  double tolerance = 1e-4;    // relative error bound per coordinate
  double abs_floor = 1e-8;    // relative error denominator floor
  double kink_margin = 1e-3;  // L1: skip coordinates with |gt - pred| below this
  int mu_exp = 2;
  int kernel_size = 5;
  SplitterKind splitter = SplitterKind::A;
  Conversion conversion = Conversion::Anisotropic;
  double lambda1 = 0.1;  // composite only
  double lambda2 = 0.01;
};

struct GradReport {
  std::string loss_name;
  int coordinates = 0;
  double max_relative_error = 0.0;
  double fraction_passing = 0.0;
  double step = 0.0;

  nlohmann::json to_json() const;
};

/// |a - b| / max(|a|, |b|, floor).
double relative_error(double analytic, double numeric, double floor);

/// Samples coordinates of randomly drawn fields and compares the analytic
/// gradient with the central difference. Deterministic for a fixed seed.
///
/// Point and line losses are differentiated with respect to the predicted
/// potential field, cross-entropy and dice with respect to the probability
/// field, and the composite objective with respect to softmax logits (so its
/// gradient passes through the conversion adjoint).
GradReport run_gradcheck(const GradcheckOptions& options);

}  // namespace epl
