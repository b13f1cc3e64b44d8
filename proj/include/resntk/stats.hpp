#pragma once

#include <cstddef>
#include <vector>

namespace resntk {

// Streaming first/second central moments (Welford update, Chan merge).
// stderr_of_mean() == sqrt(second_central_moment / n_samples) by contract.
class MomentEstimate {
 public:
  void add(double sample);  // throws NonFiniteSample on NaN/Inf
  void merge(const MomentEstimate& other);

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double second_central_moment() const { return n_ ? m2_ / double(n_) : 0.0; }
  double stderr_of_mean() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;  // sum of squared deviations from the running mean
};

MomentEstimate accumulate(MomentEstimate estimate, double sample);
MomentEstimate merge(MomentEstimate a, const MomentEstimate& b);

// Var(x)/mean(x)^2 with a delete-1 jackknife standard error.
struct NormalizedVariance {
  double value = 0.0;
  double stderr = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};
NormalizedVariance normalized_variance_jackknife(const std::vector<double>& samples);

// mean(num)/mean(den) for paired samples, jackknife standard error.
struct RatioEstimate {
  double value = 0.0;
  double stderr = 0.0;
};
RatioEstimate ratio_of_means_jackknife(const std::vector<double>& num,
                                       const std::vector<double>& den);

double spearman_rank_correlation(const std::vector<double>& a,
                                 const std::vector<double>& b);

// Ordinary least squares y = a + b·x; t statistic of the slope against zero.
struct SlopeFit {
  double slope = 0.0;
  double stderr = 0.0;
  double t_stat = 0.0;
};
SlopeFit least_squares_slope(const std::vector<double>& x,
                             const std::vector<double>& y);

}  // namespace resntk
