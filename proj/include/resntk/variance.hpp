#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "resntk/arch.hpp"
#include "resntk/matrix.hpp"
#include "resntk/rng.hpp"
#include "resntk/stats.hpp"

namespace resntk {

// Normalized variance of the NTK entry G(x, x'; w) over weight draws:
// V = Var(G)/E[G]², stderr by delete-1 jackknife, eta = V + 1.
struct VarianceReport {
  ArchitectureSpec arch;
  bool diag = false;
  std::size_t n_draws = 0;
  MomentEstimate mean_g;
  double normalized_variance = 0.0;
  double normalized_variance_stderr = 0.0;
  double eta = 1.0;
};

// x with coordinates from N(0.5, 1), x' from N(-0.5, 1), both normalized to
// unit length.
std::pair<Vector, Vector> gen_inputs(std::size_t input_dim,
                                     const RngStream& rng);

VarianceReport estimate_normalized_variance(const ArchitectureSpec& spec,
                                            const Vector& x, const Vector& xp,
                                            std::size_t draws,
                                            const RngStream& rng);

// Same estimator driven by an arbitrary per-draw sampler (index → G value).
VarianceReport estimate_normalized_variance_from(
    const std::function<double(std::size_t)>& g_sampler, std::size_t draws);

struct SweepOptions {
  std::size_t input_dim = 16;
  std::size_t branch_depth = 2;      // ResNet m
  double resnet_alpha_total = 0.1;   // α_l = total / L
  double densenet_alpha = 0.5;
};

// Full factorial grid; per cell a fresh input pair and two reports, diagonal
// first, then off-diagonal.
std::vector<VarianceReport> sweep(const std::vector<ArchKind>& kinds,
                                  const std::vector<std::size_t>& depths,
                                  const std::vector<std::size_t>& widths,
                                  std::size_t draws, const RngStream& rng,
                                  const SweepOptions& options = {});

// User-supplied constants for the eta(n, L) envelope shapes. The proofs show
// existence only; constants default to 1 and are reported as shapes, not as
// calibrated bounds.
struct BoundParams {
  double constant_c = 1.0;   // ResNet C
  double constant_c1 = 1.0;  // DenseNet C₁
  double constant_c2 = 1.0;  // DenseNet C₂
};

// (lower, upper) envelope for eta:
//   ResNet   upper = exp[5m/n + (C/n)·Σ_l α_l/(1+α_l)]
//            lower = max(1, (Σ_l α_l² / (Σ_l α_l)²)·upper)
//   DenseNet upper = exp[C₂/n]
//            lower = max(1, C₁/(L·log(L)²)·upper)   (1 when L < 2)
// Throws InvalidSpec for vanilla networks.
std::pair<double, double> variance_ratio_bounds(const ArchitectureSpec& spec,
                                                const BoundParams& params);

// 5α²·Σ_{l≥1} (l+α-1)⁻²: the finite constant the DenseNet upper-bound proof
// produces, usable as a C₂ preset.
double densenet_c2_preset(double alpha);

}  // namespace resntk
