#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "resntk/arch.hpp"
#include "resntk/matrix.hpp"
#include "resntk/rng.hpp"
#include "resntk/stats.hpp"

namespace resntk {

// Result of one statistical equality / sandwich check. lhs and rhs are
// estimated on the same draw set; the gate combines their standard errors as
// sqrt(se_lhs² + se_rhs²).
struct DualityReport {
  WeightIndex k;
  std::size_t moment_order = 2;
  MomentEstimate lhs;
  MomentEstimate rhs;
  std::optional<double> sandwich_lower;
  double z_score = 0.0;
  bool pass = false;
};

struct JacobianDualityReport {
  DualityReport equality;  // E[‖J^k‖²] vs E[f_(k)²]
  DualityReport sandwich;  // E[f_(k)⁴]/3 ≤ E[‖J^k‖⁴] ≤ E[f_(k)⁴]
};

// E[f(x;w)^order] over independent weight draws.
MomentEstimate estimate_output_moments(const ArchitectureSpec& spec,
                                       const Vector& x, std::size_t order,
                                       std::size_t draws, const RngStream& rng);

// E[‖∂f/∂W^k‖^power] over independent weight draws.
MomentEstimate estimate_jacobian_moments(const ArchitectureSpec& spec,
                                         const Vector& x, const WeightIndex& k,
                                         std::size_t power, std::size_t draws,
                                         const RngStream& rng);

// Moments of the reduced network's output against moments of the through-path
// sum ⟨W^k, J^k⟩ on the full network; gate 4 combined standard errors.
DualityReport check_moment_equality(const ArchitectureSpec& spec,
                                    const Vector& x, const WeightIndex& k,
                                    std::size_t order, std::size_t draws,
                                    const RngStream& rng);

// Second-moment equality of ‖J^k‖ with the reduced output, and the
// fourth-moment sandwich, with 4 combined-stderr slack per side.
JacobianDualityReport check_jacobian_duality(const ArchitectureSpec& spec,
                                             const Vector& x,
                                             const WeightIndex& k,
                                             std::size_t draws,
                                             const RngStream& rng);

// All of the above from one shared draw set: moment equality at orders 2 and
// 4 (draws2 and draws4 draws respectively) plus the Jacobian duality checks
// at draws4 draws.
struct DualitySuite {
  DualityReport order2;
  DualityReport order4;
  JacobianDualityReport jacobian;
};
DualitySuite run_duality_suite(const ArchitectureSpec& spec, const Vector& x,
                               const WeightIndex& k, std::size_t draws2,
                               std::size_t draws4, const RngStream& rng);

// Per-layer norm-moment propagation through a constant-width chain
// y^l = √2·φ((1/√n)·W^l·y^{l-1}) (Relu) or y^l = (1/√n)·W^l·y^{l-1}
// (Linear). Predicted fourth-moment ratios at constant width: (n+5)/n for
// Relu, (n+2)/n for Linear; second-moment ratios 1. Gate 3 jackknife
// standard errors.
enum class ChainKind { Relu, Linear };

struct MomentRecursionReport {
  std::size_t layer = 0;
  std::size_t moment_order = 4;
  RatioEstimate observed_ratio;  // jackknife stderr
  double predicted_ratio = 1.0;
  bool pass = false;
};

std::vector<MomentRecursionReport> check_norm_recursion(ChainKind kind,
                                                        std::size_t n,
                                                        std::size_t depth,
                                                        std::size_t draws,
                                                        const RngStream& rng);

// E[w^power · z] for one weight feeding a ReLU site in the given layer
// (site and weight chosen from the stream). Even powers predict c_power/2 at
// any layer; the odd-power value is 0 only where the site's inputs are
// symmetrically distributed (layer 1).
MomentEstimate check_weight_mask_moment(const ArchitectureSpec& spec,
                                        const Vector& x, std::size_t layer,
                                        std::size_t power, std::size_t draws,
                                        const RngStream& rng);

// Uniformly sampled valid body indices.
std::vector<WeightIndex> sample_body_indices(const ArchitectureSpec& spec,
                                             std::size_t count,
                                             const RngStream& rng);

}  // namespace resntk
