#include "resntk/limit_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "resntk/errors.hpp"

namespace resntk {

namespace {

double correlation(const BivariateCov& cov) {
  const double ab = cov.a * cov.b;
  if (ab <= 0.0) return 0.0;
  // Floating-point drift can push |rho| slightly above 1.
  return std::clamp(cov.c / std::sqrt(ab), -1.0, 1.0);
}

BivariateCov input_cov(const Vector& x, const Vector& xp) {
  BivariateCov cov{squared_norm(x), squared_norm(xp), dot(x, xp)};
  if (cov.a == 0.0 || cov.b == 0.0) {
    throw ZeroInput("limit kernel: input has zero norm");
  }
  return cov;
}

}  // namespace

BivariateCov relu_cov_map(const BivariateCov& cov) {
  const double rho = correlation(cov);
  const double theta = std::acos(rho);
  const double root = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  BivariateCov out;
  out.a = cov.a;
  out.b = cov.b;
  out.c = std::sqrt(cov.a * cov.b) / std::numbers::pi *
          (root + (std::numbers::pi - theta) * rho);
  return out;
}

double relu_dot_map(const BivariateCov& cov) {
  const double rho = correlation(cov);
  return (std::numbers::pi - std::acos(rho)) / std::numbers::pi;
}

MomentEstimate mc_gauss_oracle(const BivariateCov& cov, GaussMapKind kind,
                               std::size_t n_samples, const RngStream& rng) {
  const double rho = correlation(cov);
  const double sa = std::sqrt(std::max(0.0, cov.a));
  const double sb = std::sqrt(std::max(0.0, cov.b));
  const double tail = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  MomentEstimate est;
  RandomSequence seq(rng);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double g1 = seq.next_gaussian();
    const double g2 = seq.next_gaussian();
    const double u = sa * g1;
    const double v = sb * (rho * g1 + tail * g2);
    if (kind == GaussMapKind::Cov) {
      est.add(2.0 * std::max(0.0, u) * std::max(0.0, v));
    } else {
      est.add(u > 0.0 && v > 0.0 ? 2.0 : 0.0);
    }
  }
  return est;
}

double ntk_limit_vanilla(const Vector& x, const Vector& xp,
                         std::size_t depth) {
  BivariateCov lambda = input_cov(x, xp);
  double theta = lambda.c;
  for (std::size_t l = 1; l <= depth; ++l) {
    const double sdot = relu_dot_map(lambda);
    const BivariateCov sigma = relu_cov_map(lambda);
    theta = theta * sdot + sigma.c;
    lambda = sigma;
  }
  return theta;
}

double ntk_limit_resnet(const Vector& x, const Vector& xp,
                        const ArchitectureSpec& spec) {
  if (spec.kind != ArchKind::ResNet) {
    throw InvalidSpec("ntk_limit_resnet: spec is not a resnet");
  }
  const std::size_t depth = spec.depth;
  const std::size_t m = spec.branch_depth;

  // Per block l (0-based b = l-1): sigma[b][h] is the covariance of
  // q^{l-1,h} for h = 1..m-1, with sigma[b][0] = Λ^{l-1}; sdot[b][h-1] is
  // Σ̇^{l-1,h} for h = 1..m-1.
  std::vector<std::vector<BivariateCov>> sigma(depth);
  std::vector<std::vector<double>> sdot(depth);
  BivariateCov lambda = input_cov(x, xp);
  for (std::size_t b = 0; b < depth; ++b) {
    sigma[b].resize(m);
    sdot[b].resize(m - 1);
    sigma[b][0] = lambda;
    BivariateCov pre = lambda;  // covariance of y^{l-1,h}
    for (std::size_t h = 1; h < m; ++h) {
      sdot[b][h - 1] = relu_dot_map(pre);
      sigma[b][h] = relu_cov_map(pre);
      pre = sigma[b][h];
    }
    const double alpha = spec.alpha(b + 1);
    lambda.a += alpha * sigma[b][m - 1].a;
    lambda.b += alpha * sigma[b][m - 1].b;
    lambda.c += alpha * sigma[b][m - 1].c;
  }

  // Suffix products over later blocks: Π_{l'=l}^{L-1}(α_{l'+1}·Π Σ̇ + 1).
  std::vector<double> block_dot(depth, 1.0);
  for (std::size_t b = 0; b < depth; ++b) {
    for (std::size_t h = 0; h + 1 < m; ++h) block_dot[b] *= sdot[b][h];
  }
  std::vector<double> suffix(depth + 1, 1.0);
  for (std::size_t l = depth; l >= 1; --l) {
    suffix[l - 1] = suffix[l] * (spec.alpha(l) * block_dot[l - 1] + 1.0);
  }
  // suffix[l] now holds Π_{l'=l}^{L-1}(α_{l'+1}·block_dot[l'] + 1).

  double k = 0.0;
  for (std::size_t l = 1; l <= depth; ++l) {
    const std::size_t b = l - 1;
    double branch_sum = 0.0;
    for (std::size_t h = 1; h <= m; ++h) {
      double tail = 1.0;
      for (std::size_t hp = h; hp < m; ++hp) tail *= sdot[b][hp - 1];
      branch_sum += sigma[b][h - 1].c * tail;
    }
    k += spec.alpha(l) * branch_sum * suffix[l];
  }
  return k;
}

double ntk_limit_densenet(const Vector& x, const Vector& xp,
                          const ArchitectureSpec& spec) {
  if (spec.kind != ArchKind::DenseNet) {
    throw InvalidSpec("ntk_limit_densenet: spec is not a densenet");
  }
  const double alpha = spec.alpha(1);
  const std::size_t depth = spec.depth;

  std::vector<BivariateCov> sigma(depth);  // Σ^0..Σ^{L-1}
  std::vector<double> sdot(depth, 1.0);    // Σ̇^0..Σ̇^{L-1}
  BivariateCov lambda = input_cov(x, xp);
  sigma[0] = relu_cov_map(lambda);
  sdot[0] = relu_dot_map(lambda);
  BivariateCov running{0.0, 0.0, 0.0};  // Σ_{h<l} Σ^h
  for (std::size_t l = 1; l < depth; ++l) {
    running.a += sigma[l - 1].a;
    running.b += sigma[l - 1].b;
    running.c += sigma[l - 1].c;
    const BivariateCov lam{alpha / double(l) * running.a,
                           alpha / double(l) * running.b,
                           alpha / double(l) * running.c};
    sigma[l] = relu_cov_map(lam);
    sdot[l] = relu_dot_map(lam);
  }

  double k = alpha * sigma[0].c;
  for (std::size_t l = 2; l <= depth; ++l) {
    k = k * (alpha * sdot[l - 1] + double(l - 1)) / double(l) +
        alpha * sigma[l - 1].c / double(l);
  }
  return k;
}

double ntk_limit(const ArchitectureSpec& spec, const Vector& x,
                 const Vector& xp) {
  switch (spec.kind) {
    case ArchKind::Vanilla: return ntk_limit_vanilla(x, xp, spec.depth);
    case ArchKind::ResNet: return ntk_limit_resnet(x, xp, spec);
    case ArchKind::DenseNet: return ntk_limit_densenet(x, xp, spec);
  }
  return 0.0;
}

Matrix limit_gram(const ArchitectureSpec& spec, const std::vector<Vector>& xs) {
  const std::size_t count = xs.size();
  Matrix gram(count, count);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i; j < count; ++j) {
      const double v = ntk_limit(spec, xs[i], xs[j]);
      gram(i, j) = v;
      gram(j, i) = v;
    }
  }
  return gram;
}

Matrix limit_cross_gram(const ArchitectureSpec& spec,
                        const std::vector<Vector>& test,
                        const std::vector<Vector>& train) {
  Matrix gram(test.size(), train.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    for (std::size_t j = 0; j < train.size(); ++j) {
      gram(i, j) = ntk_limit(spec, test[i], train[j]);
    }
  }
  return gram;
}

}  // namespace resntk
