#include <doctest.h>

#include <cmath>

#include "epl/gradcheck.hpp"

using namespace epl;

TEST_CASE("finite difference oracle") {
  const ScalarFunction cube = [](const Eigen::VectorXd& x) { return x[0] * x[0] * x[0] + 2.0 * x[1]; };
  Eigen::VectorXd x(2);
  x << 1.5, -1.0;
  CHECK(finite_diff_gradient(cube, x, 0, 1e-4) == doctest::Approx(3.0 * 1.5 * 1.5).epsilon(1e-7));
  CHECK(finite_diff_gradient(cube, x, 1, 1e-4) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK_THROWS_AS(finite_diff_gradient(cube, x, 0, 0.0), DomainError);
  CHECK_THROWS_AS(finite_diff_gradient(cube, x, 2, 1e-4), DomainError);
  const ScalarFunction bad = [](const Eigen::VectorXd& v) { return std::log(v[0]); };
  Eigen::VectorXd z = Eigen::VectorXd::Zero(1);
  CHECK_THROWS_AS(finite_diff_gradient(bad, z, 0, 1e-4), std::runtime_error);
}

TEST_CASE("relative error uses the floor") {
  CHECK(relative_error(1.0, 1.0, 1e-8) == 0.0);
  CHECK(relative_error(2.0, 1.0, 1e-8) == 0.5);
  CHECK(relative_error(0.0, 1e-10, 1e-8) == doctest::Approx(1e-2));
}

TEST_CASE("every loss passes the gradient check") {
  struct Case {
    GradLossKind kind;
    int mu;
    Conversion conversion;
  };
  const Case cases[] = {
      {GradLossKind::PointL1, 2, Conversion::Anisotropic},
      {GradLossKind::PointL2, 2, Conversion::Anisotropic},
      {GradLossKind::Line, 2, Conversion::Anisotropic},
      {GradLossKind::Line, 10, Conversion::Anisotropic},
      {GradLossKind::CrossEntropy, 2, Conversion::Anisotropic},
      {GradLossKind::Dice, 2, Conversion::Anisotropic},
      {GradLossKind::Composite, 10, Conversion::Anisotropic},
      {GradLossKind::Composite, 10, Conversion::Standard},
  };
  for (const Case& c : cases) {
    GradcheckOptions o;
    o.kind = c.kind;
    o.mu_exp = c.mu;
    o.conversion = c.conversion;
    o.samples = 64;
    o.seed = 7;
    const GradReport r = run_gradcheck(o);
    INFO(r.to_json().dump());
    CHECK(r.coordinates > 0);
    CHECK(r.fraction_passing >= 0.95);
  }
}

TEST_CASE("gradcheck is deterministic and reports its configuration") {
  GradcheckOptions o;
  o.kind = GradLossKind::Line;
  o.samples = 16;
  const GradReport a = run_gradcheck(o);
  const GradReport b = run_gradcheck(o);
  CHECK(a.max_relative_error == b.max_relative_error);
  CHECK(a.loss_name == "line_mu2");
  const auto j = a.to_json();
  CHECK(j.contains("fraction_passing"));
  CHECK(j["step"] == 1e-4);
  CHECK(parse_grad_loss_kind("composite") == GradLossKind::Composite);
  CHECK_THROWS_AS(parse_grad_loss_kind("focal"), DomainError);
  o.samples = 0;
  CHECK_THROWS_AS(run_gradcheck(o), DomainError);
}
