#pragma once

#include <cstddef>

#include "resntk/arch.hpp"
#include "resntk/matrix.hpp"
#include "resntk/rng.hpp"
#include "resntk/stats.hpp"

namespace resntk {

// Covariance of a pair of jointly Gaussian scalars: Var u, Var v, Cov(u, v).
struct BivariateCov {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

// Covariance of (√2·φ(u), √2·φ(v)) for (u, v) ~ N(0, cov). Diagonals are
// preserved exactly; with ρ = c/√(ab) (0 when a·b = 0, clamped to [-1, 1]):
//   out.c = (√(ab)/π)·(√(1-ρ²) + (π - arccos ρ)·ρ)
BivariateCov relu_cov_map(const BivariateCov& cov);

// 2·E[φ'(u)·φ'(v)] = (π - arccos ρ)/π, in [0, 1].
double relu_dot_map(const BivariateCov& cov);

enum class GaussMapKind { Cov, Dot };

// Monte Carlo estimate of 2·E[φ(u)φ(v)] or 2·E[φ'(u)φ'(v)]; validation oracle
// for the closed forms above.
MomentEstimate mc_gauss_oracle(const BivariateCov& cov, GaussMapKind kind,
                               std::size_t n_samples, const RngStream& rng);

// Infinite-width kernels. Input covariance is taken verbatim from the
// vectors: Λ⁰ = (‖x‖², ‖x'‖², x·x').
//
// Vanilla baseline: Θ⁰ = Λ⁰; Θ^l = Θ^{l-1}·Σ̇^l + Σ^l, returned at l = L.
// The final linear projection is folded into the last step; the input
// projection's own gradient term is not included (see NtkScope).
double ntk_limit_vanilla(const Vector& x, const Vector& xp, std::size_t depth);

// Body-weight kernel of the ResNet, evaluated as the closed sum
//   Σ_{l=1}^L Σ_{h=1}^m α_l·(Σ^{l-1,h-1}·Π_{h'=h}^{m-1} Σ̇^{l-1,h'})
//       ·Π_{l'=l}^{L-1}(α_{l'+1}·Π_{h'=1}^{m-1} Σ̇^{l',h'} + 1)
// with Σ^{l,0} = Λ^l and block update Λ^l = Λ^{l-1} + α_l·Σ^{l-1,m-1}.
double ntk_limit_resnet(const Vector& x, const Vector& xp,
                        const ArchitectureSpec& spec);

// Body-weight kernel of the DenseNet:
//   K_1 = α·Σ⁰;  K_L = K_{L-1}·(α·Σ̇^{L-1} + L - 1)/L + α·Σ^{L-1}/L
// with Λ^l = (α/l)·Σ_{h<l} Σ^h, Σ^l = relu_cov_map(Λ^l), Σ̇^l from Λ^l.
double ntk_limit_densenet(const Vector& x, const Vector& xp,
                          const ArchitectureSpec& spec);

// Dispatch on spec.kind.
double ntk_limit(const ArchitectureSpec& spec, const Vector& x,
                 const Vector& xp);

Matrix limit_gram(const ArchitectureSpec& spec, const std::vector<Vector>& xs);
Matrix limit_cross_gram(const ArchitectureSpec& spec,
                        const std::vector<Vector>& test,
                        const std::vector<Vector>& train);

}  // namespace resntk
