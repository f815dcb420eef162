#include <doctest.h>

#include <set>

#include "epl/field_core.hpp"
#include "test_support.hpp"

using namespace epl;
using epl::testing::Rng;

namespace {

// Ray sum written directly from the definition on a 1-row plane.
std::vector<double> ray_sum_row(const std::vector<double>& row, int r, int dx) {
  std::vector<double> out(row.size(), 0.0);
  for (int p = 0; p < static_cast<int>(row.size()); ++p) {
    for (int t = 0; t <= r; ++t) {
      const int q = p + t * dx;
      if (q >= 0 && q < static_cast<int>(row.size())) out[static_cast<std::size_t>(p)] += row[static_cast<std::size_t>(q)];
    }
  }
  return out;
}

Field<double> square_mask(int size, int lo, int hi) {
  Field<double> f(1, size, size);
  f[0].block(lo, lo, hi - lo, hi - lo).setOnes();
  return f;
}

std::set<double> values(const PotentialFieldSet<double>& e) {
  std::set<double> out;
  for (Index s = 0; s < e.directions(); ++s) {
    for (Index c = 0; c < e.channels(); ++c) {
      const auto& p = e.plane(s, c);
      out.insert(p.data(), p.data() + p.size());
    }
  }
  return out;
}

}  // namespace

TEST_CASE("one_hot encodes the class index per pixel") {
  LabelPlane one(1, 1);
  one << 0;
  const ProbabilityField a = one_hot(LabelMap(one, 2), 2);
  CHECK(a[0](0, 0) == 1.0);
  CHECK(a[1](0, 0) == 0.0);

  LabelPlane two(2, 2);
  two << 0, 1, 1, 0;
  const ProbabilityField b = one_hot(LabelMap(two, 2), 2);
  Plane<double> expect(2, 2);
  expect << 1, 0, 0, 1;
  CHECK(b[0] == expect);

  Rng rng(3);
  const LabelMap random = epl::testing::random_labels(rng, 4, 8, 8);
  const ProbabilityField c = one_hot(random, 4);
  for (Index y = 0; y < 8; ++y) {
    for (Index x = 0; x < 8; ++x) {
      double sum = 0.0;
      for (Index k = 0; k < 4; ++k) sum += c[k](y, x);
      CHECK(sum == 1.0);
      CHECK(c[random(y, x)](y, x) == 1.0);
    }
  }
}

TEST_CASE("one_hot rejects labels outside the class range") {
  LabelPlane l(1, 2);
  l << 0, 3;
  CHECK_THROWS_AS(one_hot(LabelMap(l, 4), 3), DomainError);
  CHECK_THROWS_AS(LabelMap(l, 3), DomainError);
}

TEST_CASE("splitters have the documented direction sets") {
  const Splitter a = make_splitter(SplitterKind::A);
  const Splitter b = make_splitter(SplitterKind::B);
  const Splitter c = make_splitter(SplitterKind::C);
  REQUIRE(a.size() == 4);
  REQUIRE(b.size() == 4);
  REQUIRE(c.size() == 8);
  CHECK(a.directions[0] == Offset{-1, 0});  // up
  CHECK(a.directions[1] == Offset{1, 0});   // down
  CHECK(a.directions[2] == Offset{0, -1});  // left
  CHECK(a.directions[3] == Offset{0, 1});   // right
  for (const auto& d : b.directions) {
    CHECK(std::abs(d.dy) == 1);
    CHECK(std::abs(d.dx) == 1);
    for (const auto& e : a.directions) CHECK_FALSE(d == e);
  }
  std::set<std::pair<int, int>> seen;
  for (const auto& d : c.directions) {
    CHECK_FALSE(d == Offset{0, 0});
    seen.insert({d.dy, d.dx});
  }
  CHECK(seen.size() == 8);
  CHECK_THROWS_AS(parse_splitter_kind("D"), DomainError);
}

TEST_CASE("AC config validation") {
  CHECK_THROWS_AS(make_ac_config(4, SplitterKind::A), DomainError);
  CHECK_THROWS_AS(make_ac_config(1, SplitterKind::A), DomainError);
  CHECK(make_ac_config(5, SplitterKind::A).radius() == 2);
  CHECK(make_ac_config(7, SplitterKind::C).radius() == 3);
}

TEST_CASE("anisotropic_convolve on a binary row") {
  const std::vector<double> row = {0, 0, 1, 1, 1, 0, 0};
  Field<double> f(1, 1, 7);
  for (int i = 0; i < 7; ++i) f[0](0, i) = row[static_cast<std::size_t>(i)];
  ACConfig cfg;
  cfg.kernel_size = 5;
  cfg.splitter.directions = {{0, 1}};
  const auto e = anisotropic_convolve(f, cfg);
  const auto oracle = ray_sum_row(row, 2, 1);
  const std::vector<double> expect = {1, 2, 3, 2, 1, 0, 0};
  CHECK(oracle == expect);
  for (int i = 0; i < 7; ++i) CHECK(e.plane(0, 0)(0, i) == expect[static_cast<std::size_t>(i)]);
}

TEST_CASE("all-zero field gives zero energies") {
  const Field<double> f(3, 9, 9);
  for (auto kind : {SplitterKind::A, SplitterKind::B, SplitterKind::C}) {
    const auto e = anisotropic_convolve(f, make_ac_config(5, kind));
    for (Index s = 0; s < e.directions(); ++s) {
      for (Index c = 0; c < 3; ++c) CHECK(e.plane(s, c).isZero(0.0));
    }
  }
}

TEST_CASE("centred square with w=5, splitter A spans energies 0..3") {
  const Field<double> f = square_mask(7, 2, 5);
  const auto e = anisotropic_convolve(f, make_ac_config(5, SplitterKind::A));
  CHECK(e.directions() == 4);
  CHECK(values(e) == std::set<double>{0, 1, 2, 3});
}

TEST_CASE("standard_convolve") {
  SUBCASE("zero in, zero out") {
    CHECK(standard_convolve(Field<double>(2, 5, 5), 3)[1].isZero(0.0));
  }
  SUBCASE("impulse response is a 3x3 patch") {
    Field<double> f(1, 5, 5);
    f[0](2, 2) = 1.0;
    const auto out = standard_convolve(f, 3);
    Plane<double> expect = Plane<double>::Zero(5, 5);
    expect.block(1, 1, 3, 3).setOnes();
    CHECK(out[0] == expect);
  }
  SUBCASE("random binary field matches a windowed double loop") {
    Rng rng(11);
    const auto f = epl::testing::random_binary_field(rng, 1, 8, 8);
    const auto out = standard_convolve(f, 5);
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        double acc = 0.0;
        for (int yy = y - 2; yy <= y + 2; ++yy) {
          for (int xx = x - 2; xx <= x + 2; ++xx) {
            if (yy >= 0 && yy < 8 && xx >= 0 && xx < 8) acc += f[0](yy, xx);
          }
        }
        CHECK(out[0](y, x) == acc);
      }
    }
  }
  CHECK_THROWS_AS(standard_convolve(Field<double>(1, 3, 3), 4), DomainError);
}

TEST_CASE("potential_oracle agrees with anisotropic_convolve") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto bin = epl::testing::random_binary_field(rng, 2, 8, 8);
    const ACConfig cfg = make_ac_config(5, SplitterKind::A);
    CHECK(max_abs_diff(anisotropic_convolve(bin, cfg), potential_oracle(bin, cfg)) == 0.0);

    const auto real = epl::testing::random_field(rng, 3, 9, 7);
    const ACConfig cfg_c = make_ac_config(7, SplitterKind::C);
    CHECK(max_abs_diff(anisotropic_convolve(real, cfg_c), potential_oracle(real, cfg_c)) < 1e-9);
  }
}

TEST_CASE("saturated interior of an all-ones field is r+1") {
  Field<double> f(1, 12, 12);
  f[0].setOnes();
  const ACConfig cfg = make_ac_config(7, SplitterKind::C);
  const auto e = potential_oracle(f, cfg);
  for (Index s = 0; s < e.directions(); ++s) {
    CHECK(e.plane(s, 0).block(3, 3, 6, 6).isApproxToConstant(4.0));
  }
}

TEST_CASE("energy range, linearity and monotonicity in w") {
  Rng rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    const auto f = epl::testing::random_field(rng, 2, 10, 11);
    const auto g = epl::testing::random_field(rng, 2, 10, 11);
    const auto bin = epl::testing::random_binary_field(rng, 2, 10, 11);
    for (int w : {3, 5, 7}) {
      const ACConfig cfg = make_ac_config(w, SplitterKind::C);
      const int r = cfg.radius();

      for (double v : values(anisotropic_convolve(bin, cfg))) {
        CHECK(v == std::round(v));
        CHECK(v >= 0.0);
        CHECK(v <= r + 1);
      }
      const auto ef = anisotropic_convolve(f, cfg);
      for (double v : values(ef)) {
        CHECK(v >= 0.0);
        CHECK(v <= r + 1 + 1e-12);
      }

      const double alpha = 0.3, beta = -1.7;
      Field<double> mix = f;
      for (Index c = 0; c < 2; ++c) mix[c] = alpha * f[c] + beta * g[c];
      const auto emix = anisotropic_convolve(mix, cfg);
      const auto eg = anisotropic_convolve(g, cfg);
      for (Index s = 0; s < emix.directions(); ++s) {
        for (Index c = 0; c < 2; ++c) {
          CHECK((emix.plane(s, c) - (alpha * ef.plane(s, c) + beta * eg.plane(s, c))).cwiseAbs().maxCoeff() <
                1e-12);
        }
      }

      if (w < 7) {
        const auto wider = anisotropic_convolve(f, make_ac_config(w + 2, SplitterKind::C));
        for (Index s = 0; s < wider.directions(); ++s) {
          for (Index c = 0; c < 2; ++c) {
            CHECK((wider.plane(s, c).array() >= ef.plane(s, c).array()).all());
          }
        }
      }
    }
  }
}

TEST_CASE("translation equivariance away from the border") {
  Rng rng(8);
  const ACConfig cfg = make_ac_config(5, SplitterKind::C);
  const int r = cfg.radius();
  const auto f = epl::testing::random_field(rng, 1, 16, 16);
  const int a = 2, b = -1;
  Field<double> shifted(1, 16, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      const int sy = y - a, sx = x - b;
      if (sy >= 0 && sy < 16 && sx >= 0 && sx < 16) shifted[0](y, x) = f[0](sy, sx);
    }
  }
  const auto e = anisotropic_convolve(f, cfg);
  const auto es = anisotropic_convolve(shifted, cfg);
  const int margin = r + std::max(std::abs(a), std::abs(b));
  for (Index s = 0; s < e.directions(); ++s) {
    for (int y = margin; y < 16 - margin; ++y) {
      for (int x = margin; x < 16 - margin; ++x) {
        CHECK(es.plane(s, 0)(y, x) == doctest::Approx(e.plane(s, 0)(y - a, x - b)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("right ray equals the mirrored left ray") {
  Rng rng(9);
  const auto f = epl::testing::random_field(rng, 2, 6, 9);
  Field<double> mirrored = f;
  for (Index c = 0; c < 2; ++c) mirrored[c] = f[c].rowwise().reverse();
  const ACConfig cfg = make_ac_config(5, SplitterKind::A);
  const auto e = anisotropic_convolve(f, cfg);
  const auto em = anisotropic_convolve(mirrored, cfg);
  // direction 3 = right (0,1), direction 2 = left (0,-1)
  for (Index c = 0; c < 2; ++c) {
    CHECK((e.plane(3, c) - Plane<double>(em.plane(2, c).rowwise().reverse())).cwiseAbs().maxCoeff() <
          1e-12);
  }
}

TEST_CASE("adjoint identities for AC and the box filter") {
  Rng rng(13);
  for (auto kind : {SplitterKind::A, SplitterKind::B, SplitterKind::C}) {
    const ACConfig cfg = make_ac_config(5, kind);
    const auto x = epl::testing::random_field(rng, 3, 7, 10);
    PotentialFieldSet<double> y(cfg.splitter.size(), 3, 7, 10);
    Eigen::VectorXd yv = Eigen::VectorXd::Random(y.size());
    unflatten(yv, y);
    for (Conversion conv : {Conversion::Anisotropic, Conversion::Standard}) {
      const auto ax = convert(x, cfg, conv);
      PotentialFieldSet<double> yy = conv == Conversion::Anisotropic
                                         ? y
                                         : PotentialFieldSet<double>(1, 3, 7, 10);
      if (conv == Conversion::Standard) unflatten(Eigen::VectorXd(yv.head(yy.size())), yy);
      const double lhs = flatten(ax).dot(flatten(yy));
      const double rhs = flatten(x).dot(flatten(convert_adjoint(yy, cfg, conv)));
      CHECK(std::abs(lhs - rhs) < 1e-9);
    }
  }
}
