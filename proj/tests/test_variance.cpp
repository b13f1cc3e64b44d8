#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "resntk/errors.hpp"
#include "resntk/net.hpp"
#include "resntk/variance.hpp"

using namespace resntk;

TEST_CASE("gen_inputs produces unit vectors with opposite drift") {
  const auto [x, xp] = gen_inputs(32, {1, 1});
  CHECK(std::abs(std::sqrt(squared_norm(x)) - 1.0) < 1e-12);
  CHECK(std::abs(std::sqrt(squared_norm(xp)) - 1.0) < 1e-12);
  double mean_x = 0.0, mean_xp = 0.0;
  for (double v : x) mean_x += v;
  for (double v : xp) mean_xp += v;
  CHECK(mean_x > 0.0);
  CHECK(mean_xp < 0.0);
}

TEST_CASE("gen_inputs at dimension 784 concentrates the inner product") {
  double acc = 0.0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto [x, xp] = gen_inputs(784, {2, i});
    acc += dot(x, xp);
  }
  acc /= 100.0;
  CHECK(acc > -0.3);
  CHECK(acc < -0.1);
}

TEST_CASE("normalized variance of a two-layer linear model matches theory") {
  // f = (1/sqrt(n)) w_f . (W0 x) with unit x: G(x,x) =
  // (|w_f|^2 + |W0 x|^2)/n, a sum of two independent chi-square(n)/n, so
  // V = Var/E^2 = (4n/n^2)/4 = 1/n.
  const std::size_t n = 64;
  const std::size_t draws = 20000;
  const VarianceReport report = estimate_normalized_variance_from(
      [&](std::size_t i) {
        RandomSequence seq(RngStream{3, i});
        double wf_sq = 0.0;
        Vector wx(n, 0.0);
        // |W0 x|^2 with unit x is a chi-square(n) draw as well.
        for (std::size_t j = 0; j < n; ++j) {
          const double wf = seq.next_gaussian();
          wf_sq += wf * wf;
          wx[j] = seq.next_gaussian();
        }
        return (wf_sq + squared_norm(wx)) / double(n);
      },
      draws);
  CHECK(std::abs(report.normalized_variance - 1.0 / double(n)) <=
        3.0 * report.normalized_variance_stderr);
  CHECK(report.eta == doctest::Approx(report.normalized_variance + 1.0));
}

TEST_CASE("degenerate mean is rejected") {
  CHECK_THROWS_AS(estimate_normalized_variance_from(
                      [](std::size_t i) { return i % 2 ? 1e-14 : -1e-14; },
                      1000),
                  DegenerateMean);
}

TEST_CASE("normalized variance reports are reproducible bit for bit") {
  const ArchitectureSpec spec = make_vanilla(8, 3, 16);
  const auto [x, xp] = gen_inputs(8, {4, 0});
  const VarianceReport a = estimate_normalized_variance(spec, x, xp, 400, {5, 0});
  const VarianceReport b = estimate_normalized_variance(spec, x, xp, 400, {5, 0});
  CHECK(a.normalized_variance == b.normalized_variance);
  CHECK(a.normalized_variance_stderr == b.normalized_variance_stderr);
  CHECK(a.mean_g.mean() == b.mean_g.mean());
  CHECK_FALSE(a.diag);
  const VarianceReport d = estimate_normalized_variance(spec, x, x, 400, {5, 0});
  CHECK(d.diag);
}

TEST_CASE("vanilla normalized variance grows with depth") {
  const auto [x, xp] = gen_inputs(8, {6, 0});
  const ArchitectureSpec shallow = make_vanilla(8, 4, 16);
  const ArchitectureSpec deep = make_vanilla(8, 32, 16);
  const VarianceReport a =
      estimate_normalized_variance(shallow, x, x, 2000, {7, 0});
  const VarianceReport b =
      estimate_normalized_variance(deep, x, x, 2000, {7, 1});
  const double gap = b.normalized_variance - a.normalized_variance;
  const double se = std::sqrt(
      a.normalized_variance_stderr * a.normalized_variance_stderr +
      b.normalized_variance_stderr * b.normalized_variance_stderr);
  CHECK(gap > 3.0 * se);
}

TEST_CASE("resnet with total alpha fixed is depth stable") {
  const auto [x, xp] = gen_inputs(8, {8, 0});
  const ArchitectureSpec shallow = make_resnet(8, 8, 32, 2, 0.1 / 8.0);
  const ArchitectureSpec deep = make_resnet(8, 64, 32, 2, 0.1 / 64.0);
  const VarianceReport a =
      estimate_normalized_variance(shallow, x, x, 2000, {9, 0});
  const VarianceReport b =
      estimate_normalized_variance(deep, x, x, 2000, {9, 1});
  const double ratio = b.normalized_variance / a.normalized_variance;
  const double rel_se = std::sqrt(
      std::pow(a.normalized_variance_stderr / a.normalized_variance, 2) +
      std::pow(b.normalized_variance_stderr / b.normalized_variance, 2));
  CHECK(ratio + 3.0 * ratio * rel_se < 2.0);
}

TEST_CASE("sweep emits diagonal and off-diagonal reports per cell") {
  const auto reports =
      sweep({ArchKind::DenseNet}, {2}, {16}, 300, {10, 0}, {});
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].diag);
  CHECK_FALSE(reports[1].diag);
  CHECK(reports[0].arch.depth == 2);
  CHECK(reports[0].n_draws == 300);

  const auto again =
      sweep({ArchKind::DenseNet}, {2}, {16}, 300, {10, 0}, {});
  CHECK(reports[0].normalized_variance == again[0].normalized_variance);
  CHECK(reports[1].normalized_variance == again[1].normalized_variance);
}

TEST_CASE("bound shapes evaluate the stated expressions") {
  {
    const ArchitectureSpec spec = make_resnet(8, 5, 32, 2, 0.4);
    const auto [lower, upper] = variance_ratio_bounds(spec, {2.0, 1.0, 1.0});
    const double expected_upper =
        std::exp(5.0 * 2.0 / 32.0 + 2.0 / 32.0 * 5.0 * (0.4 / 1.4));
    CHECK(upper == doctest::Approx(expected_upper).epsilon(1e-12));
    // Equal coefficients: sum alpha^2 / (sum alpha)^2 = 1/L.
    CHECK(lower == doctest::Approx(std::max(1.0, expected_upper / 5.0)));
  }
  {
    const ArchitectureSpec spec = make_densenet(8, 16, 32, 0.5);
    const auto [lower, upper] = variance_ratio_bounds(spec, {1.0, 2.0, 3.0});
    CHECK(upper == doctest::Approx(std::exp(3.0 / 32.0)));
    const double logl = std::log(16.0);
    CHECK(lower ==
          doctest::Approx(std::max(1.0, 2.0 / (16.0 * logl * logl) * upper)));
    // Width to infinity drives the envelope to 1.
    const ArchitectureSpec wide = make_densenet(8, 16, 1u << 30, 0.5);
    CHECK(variance_ratio_bounds(wide, {1.0, 2.0, 3.0}).second ==
          doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK_THROWS_AS(variance_ratio_bounds(make_vanilla(8, 2, 8), {}),
                  InvalidSpec);
}

TEST_CASE("densenet preset constant matches the trigamma closed form") {
  // 5 a^2 sum_{l>=1} (l+a-1)^-2 at a = 0.5 is 1.25 * pi^2/2; at a = 1 it is
  // 5 * pi^2/6.
  CHECK(densenet_c2_preset(0.5) == doctest::Approx(6.16850275068085).epsilon(1e-9));
  CHECK(densenet_c2_preset(1.0) == doctest::Approx(8.224670334241132).epsilon(1e-9));
}
