#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "resntk/errors.hpp"
#include "resntk/matrix.hpp"
#include "resntk/rng.hpp"
#include "resntk/stats.hpp"
#include "support/oracles.hpp"

using namespace resntk;

TEST_CASE("gaussian_matrix has standard-normal statistics") {
  const Matrix m = gaussian_matrix({42, 7}, 1000, 1000);
  double sum = 0.0, sq = 0.0;
  for (double v : m.data) {
    sum += v;
    sq += v * v;
  }
  const double mean = sum / double(m.data.size());
  const double var = sq / double(m.data.size()) - mean * mean;
  CHECK(std::abs(mean) < 4.0 / 1000.0);
  CHECK(std::abs(var - 1.0) < 0.01);
}

TEST_CASE("gaussian_matrix is deterministic in (seed, stream)") {
  const Matrix a = gaussian_matrix({9, 3}, 17, 5);
  const Matrix b = gaussian_matrix({9, 3}, 17, 5);
  CHECK(a.data == b.data);
  const Matrix c = gaussian_matrix({9, 4}, 17, 5);
  CHECK(a.data != c.data);
}

TEST_CASE("distinct streams pass a chi-square independence test") {
  RandomSequence sa(RngStream{3, 100});
  RandomSequence sb(RngStream{3, 101});
  std::size_t counts[10][10] = {};
  const std::size_t draws = 100000;
  auto bin = [](double v) {
    std::size_t b = 0;
    while (b < 9 && v > oracles::kNormalDeciles[b]) ++b;
    return b;
  };
  for (std::size_t i = 0; i < draws; ++i) {
    ++counts[bin(sa.next_gaussian())][bin(sb.next_gaussian())];
  }
  double rows[10] = {}, cols[10] = {};
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      rows[i] += double(counts[i][j]);
      cols[j] += double(counts[i][j]);
    }
  }
  double stat = 0.0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double expected = rows[i] * cols[j] / double(draws);
      const double d = double(counts[i][j]) - expected;
      stat += d * d / expected;
    }
  }
  CHECK(stat < oracles::kChi2Crit81);
}

TEST_CASE("spd_solve identity and scaled identity") {
  Matrix h(3, 3), b(3, 2);
  for (int i = 0; i < 3; ++i) h(i, i) = 1.0;
  b(0, 0) = 2.0;
  b(1, 1) = -3.0;
  b(2, 0) = 0.5;
  const Matrix x = spd_solve(h, b, 0.0);
  CHECK(x.data == b.data);

  Matrix h2(3, 3), id(3, 3);
  for (int i = 0; i < 3; ++i) {
    h2(i, i) = 2.0;
    id(i, i) = 1.0;
  }
  const Matrix x2 = spd_solve(h2, id, 0.0);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(x2(i, j) == doctest::Approx(i == j ? 0.5 : 0.0).epsilon(1e-15));
    }
  }
}

TEST_CASE("spd_solve matches an elimination oracle on a random SPD system") {
  const Matrix a = gaussian_matrix({11, 0}, 8, 8);
  Matrix h(8, 8);
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 8; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 8; ++k) s += a(i, k) * a(j, k);
      h(i, j) = s + (i == j ? 1.0 : 0.0);
    }
  }
  const Matrix b = gaussian_matrix({11, 1}, 8, 3);
  const Matrix x = spd_solve(h, b, 0.0);
  const Matrix ref = oracles::elimination_solve(h, b, 0.0);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    CHECK(x.data[i] == doctest::Approx(ref.data[i]).epsilon(1e-10));
  }

  // Residual contract.
  double bn = 0.0, rn = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      double hx = 0.0;
      for (std::size_t k = 0; k < 8; ++k) hx += h(i, k) * x(k, c);
      rn += (hx - b(i, c)) * (hx - b(i, c));
      bn += b(i, c) * b(i, c);
    }
  }
  CHECK(std::sqrt(rn) <= 1e-8 * std::sqrt(bn));
}

TEST_CASE("spd_solve is exact on diagonal systems") {
  Matrix h(4, 4), b(4, 1);
  const double d[4] = {3.0, 0.25, 7.5, 1e-3};
  for (int i = 0; i < 4; ++i) {
    h(i, i) = d[i];
    b(i, 0) = double(i) + 1.0;
  }
  const Matrix x = spd_solve(h, b, 0.0);
  for (int i = 0; i < 4; ++i) {
    CHECK(x(i, 0) == doctest::Approx(b(i, 0) / d[i]).epsilon(1e-15));
  }
}

TEST_CASE("spd_solve rejects singular matrices and accepts jitter") {
  // Gram of duplicated points: exactly singular.
  Matrix h(2, 2);
  h(0, 0) = h(0, 1) = h(1, 0) = h(1, 1) = 1.0;
  Matrix b(2, 1);
  b(0, 0) = 1.0;
  b(1, 0) = 1.0;
  CHECK_THROWS_AS(spd_solve(h, b, 0.0), NotPositiveDefinite);
  CHECK_NOTHROW(spd_solve(h, b, 1e-6));
}

TEST_CASE("accumulate small-sample values") {
  MomentEstimate est;
  est = accumulate(est, 1.0);
  est = accumulate(est, 2.0);
  est = accumulate(est, 3.0);
  CHECK(est.mean() == doctest::Approx(2.0));
  CHECK(est.second_central_moment() == doctest::Approx(2.0 / 3.0));
  CHECK(est.stderr_of_mean() ==
        doctest::Approx(std::sqrt(2.0 / 3.0 / 3.0)));
  CHECK_THROWS_AS(est.add(std::nan("")), NonFiniteSample);
}

TEST_CASE("accumulate merge equals streaming") {
  MomentEstimate ab, c, all;
  ab = accumulate(accumulate(MomentEstimate{}, 1.0), 2.0);
  c = accumulate(MomentEstimate{}, 3.0);
  const MomentEstimate merged = merge(ab, c);
  all = accumulate(accumulate(accumulate(MomentEstimate{}, 1.0), 2.0), 3.0);
  CHECK(merged.mean() == doctest::Approx(all.mean()).epsilon(1e-14));
  CHECK(merged.second_central_moment() ==
        doctest::Approx(all.second_central_moment()).epsilon(1e-14));
  CHECK(merged.count() == all.count());
}

TEST_CASE("accumulate merge is associative and order-insensitive") {
  RandomSequence seq(RngStream{77, 1});
  std::vector<double> samples(999);
  for (double& v : samples) v = 5.0 + 2.0 * seq.next_gaussian();

  MomentEstimate whole;
  for (double v : samples) whole.add(v);

  // Random split points, merged in different shapes.
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    RandomSequence cuts(RngStream{77, 2 + trial});
    const std::size_t c1 = 1 + cuts.next_u64() % 500;
    const std::size_t c2 = c1 + 1 + cuts.next_u64() % (998 - c1);
    MomentEstimate a, b, c;
    for (std::size_t i = 0; i < c1; ++i) a.add(samples[i]);
    for (std::size_t i = c1; i < c2; ++i) b.add(samples[i]);
    for (std::size_t i = c2; i < samples.size(); ++i) c.add(samples[i]);
    const MomentEstimate left = merge(merge(a, b), c);
    const MomentEstimate right = merge(a, merge(b, c));
    for (const MomentEstimate* m : {&left, &right}) {
      CHECK(m->mean() == doctest::Approx(whole.mean()).epsilon(1e-12));
      CHECK(m->second_central_moment() ==
            doctest::Approx(whole.second_central_moment()).epsilon(1e-12));
    }
  }
}

TEST_CASE("accumulate matches a two-pass oracle on a large normal sample") {
  RandomSequence seq(RngStream{123, 9});
  std::vector<double> samples(1000000);
  for (double& v : samples) v = 5.0 + 2.0 * seq.next_gaussian();

  MomentEstimate est;
  for (double v : samples) est.add(v);

  double sum = 0.0;
  for (double v : samples) sum += v;
  const double mean = sum / double(samples.size());
  double m2 = 0.0;
  for (double v : samples) m2 += (v - mean) * (v - mean);
  m2 /= double(samples.size());

  CHECK(est.mean() == doctest::Approx(mean).epsilon(1e-12));
  CHECK(est.second_central_moment() == doctest::Approx(m2).epsilon(1e-10));
  CHECK(std::abs(est.mean() - 5.0) < 0.01);
  CHECK(std::abs(est.second_central_moment() - 4.0) < 0.08);
}

TEST_CASE("jackknife ratio recovers a known ratio") {
  RandomSequence seq(RngStream{5, 5});
  std::vector<double> num(20000), den(20000);
  for (std::size_t i = 0; i < num.size(); ++i) {
    const double g = seq.next_gaussian();
    den[i] = 2.0 + 0.3 * g;
    num[i] = 3.0 * den[i] + 0.1 * seq.next_gaussian();
  }
  const RatioEstimate r = ratio_of_means_jackknife(num, den);
  CHECK(std::abs(r.value - 3.0) < 4.0 * r.stderr);
  CHECK(r.stderr > 0.0);
}

TEST_CASE("spearman and slope helpers") {
  CHECK(spearman_rank_correlation({1, 2, 3, 4}, {10, 20, 30, 40}) ==
        doctest::Approx(1.0));
  CHECK(spearman_rank_correlation({1, 2, 3, 4}, {4, 3, 2, 1}) ==
        doctest::Approx(-1.0));
  const SlopeFit fit =
      least_squares_slope({1, 2, 3, 4}, {2.0, 4.1, 5.9, 8.0});
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(0.05));
  CHECK(fit.t_stat > 3.0);
}
