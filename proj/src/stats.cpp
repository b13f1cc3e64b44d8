#include "resntk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "resntk/errors.hpp"

namespace resntk {

void MomentEstimate::add(double sample) {
  if (!std::isfinite(sample)) {
    throw NonFiniteSample("MomentEstimate: sample is not finite");
  }
  ++n_;
  const double delta = sample - mean_;
  mean_ += delta / double(n_);
  m2_ += delta * (sample - mean_);
}

void MomentEstimate::merge(const MomentEstimate& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = double(n_), nb = double(other.n_);
  const double delta = other.mean_ - mean_;
  const double total = na + nb;
  mean_ += delta * nb / total;
  m2_ += other.m2_ + delta * delta * na * nb / total;
  n_ += other.n_;
}

double MomentEstimate::stderr_of_mean() const {
  if (n_ < 2) return 0.0;
  return std::sqrt(second_central_moment() / double(n_));
}

MomentEstimate accumulate(MomentEstimate estimate, double sample) {
  estimate.add(sample);
  return estimate;
}

MomentEstimate merge(MomentEstimate a, const MomentEstimate& b) {
  a.merge(b);
  return a;
}

NormalizedVariance normalized_variance_jackknife(
    const std::vector<double>& samples) {
  const std::size_t n = samples.size();
  NormalizedVariance out;
  if (n < 3) return out;

  double s1 = 0.0;
  for (double v : samples) s1 += v;
  const double mean = s1 / double(n);
  double s2c = 0.0;  // centered second moment accumulates more accurately
  for (double v : samples) s2c += (v - mean) * (v - mean);

  const double var = s2c / double(n - 1);
  out.mean = mean;
  out.variance = var;
  out.value = var / (mean * mean);

  // Delete-1 replicates from the totals.
  const double nm1 = double(n - 1);
  std::vector<double> reps(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = samples[i] - mean;
    const double mean_i = (s1 - samples[i]) / nm1;
    // sum (x_j - mean_i)^2 over j != i, from the centered total.
    const double s2c_i = s2c - d * d - nm1 * (mean_i - mean) * (mean_i - mean);
    const double var_i = s2c_i / double(n - 2);
    reps[i] = var_i / (mean_i * mean_i);
  }
  double rep_mean = 0.0;
  for (double r : reps) rep_mean += r;
  rep_mean /= double(n);
  double ss = 0.0;
  for (double r : reps) ss += (r - rep_mean) * (r - rep_mean);
  out.stderr = std::sqrt(nm1 / double(n) * ss);
  return out;
}

RatioEstimate ratio_of_means_jackknife(const std::vector<double>& num,
                                       const std::vector<double>& den) {
  const std::size_t n = num.size();
  RatioEstimate out;
  if (n < 2 || den.size() != n) return out;
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sa += num[i];
    sb += den[i];
  }
  out.value = sa / sb;
  std::vector<double> reps(n);
  for (std::size_t i = 0; i < n; ++i) reps[i] = (sa - num[i]) / (sb - den[i]);
  double rep_mean = 0.0;
  for (double r : reps) rep_mean += r;
  rep_mean /= double(n);
  double ss = 0.0;
  for (double r : reps) ss += (r - rep_mean) * (r - rep_mean);
  out.stderr = std::sqrt(double(n - 1) / double(n) * ss);
  return out;
}

namespace {

std::vector<double> ranks_with_ties(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * (double(i) + double(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_rank_correlation(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  const std::size_t n = a.size();
  if (n < 2 || b.size() != n) return 0.0;
  const std::vector<double> ra = ranks_with_ties(a);
  const std::vector<double> rb = ranks_with_ties(b);
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= double(n);
  mb /= double(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

SlopeFit least_squares_slope(const std::vector<double>& x,
                             const std::vector<double>& y) {
  SlopeFit fit;
  const std::size_t n = x.size();
  if (n < 3 || y.size() != n) return fit;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  const double intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - intercept - fit.slope * x[i];
    ssr += r * r;
  }
  const double s2 = ssr / double(n - 2);
  fit.stderr = std::sqrt(s2 / sxx);
  fit.t_stat = fit.stderr > 0.0 ? fit.slope / fit.stderr
                                : (fit.slope > 0.0   ? 1e300
                                   : fit.slope < 0.0 ? -1e300
                                                     : 0.0);
  return fit;
}

}  // namespace resntk
