#pragma once

#include <cstdint>
#include <vector>

#include "resntk/arch.hpp"
#include "resntk/matrix.hpp"
#include "resntk/rng.hpp"

namespace resntk {

inline constexpr double kSqrt2 = 1.4142135623730951;

// One network draw: i.i.d. standard Gaussian matrices, shapes fixed by the
// spec. Body matrices are stored in the canonical flat order of arch.hpp.
struct WeightSet {
  Matrix initial_projection;  // width × input_dim
  std::vector<Matrix> body;   // width × width each
  Matrix final_projection;    // 1 × width
};

WeightSet sample_weights(const ArchitectureSpec& spec, const RngStream& rng);

using Mask = std::vector<std::uint8_t>;

// Everything forward computes, retained for backprop.
//
// Activations are √2·max(0, ·); the mask at a site is 1 exactly when the
// pre-activation is > 0 (a pre-activation of exactly 0 gets mask 0).
struct ForwardTrace {
  Vector input;
  std::vector<Vector> block_outputs;  // y^0 .. y^L

  // ResNet branches, indexed [block-1][sublayer-1].
  std::vector<std::vector<Vector>> branch_preacts;  // y^{l-1,h}, h = 1..m
  std::vector<std::vector<Vector>> branch_acts;     // q^{l-1,h}, h = 1..m-1
  std::vector<std::vector<Mask>> branch_masks;      // sites h = 1..m-1

  // DenseNet activations q^0..q^{L-1}; empty otherwise.
  std::vector<Vector> acts;
  // Vanilla: masks of layers 1..L. DenseNet: masks of y^0..y^{L-1}.
  std::vector<Mask> masks;

  double output = 0.0;
};

// Runs the network. Honors spec.reduction. Throws ZeroInput when ‖x‖ = 0 and
// ShapeMismatch when x has the wrong dimension.
//
// Layer maps (widths constant at n):
//   input     y^0 = W^0·x
//   Vanilla   y^l = √2·φ((1/√n)·W^l·y^{l-1})
//   ResNet    y^l = y^{l-1} + √α_l·y^{l-1,m}
//             y^{l-1,1} = (1/√n)·W^{l,1}·y^{l-1}
//             y^{l-1,h} = (1/√n)·W^{l,h}·√2·φ(y^{l-1,h-1}),  h = 2..m
//   DenseNet  y^l = √(α/(n·l))·Σ_{h=0}^{l-1} W^{l,h}·q^h,  q^h = √2·φ(y^h)
//   output    f = (1/√n)·W^final·y^L
ForwardTrace forward(const ArchitectureSpec& spec, const WeightSet& w,
                     const Vector& x);

namespace detail {
// Dense inputs summed by layer l under an optional reduction: [first, l) for
// ordinary layers, exactly {sublayer} at the reduced layer itself.
struct DenseInputs {
  std::size_t first = 0;
  std::size_t last = 0;  // exclusive
  bool single = false;
  std::size_t single_h = 0;
};
DenseInputs dense_inputs(const ArchitectureSpec& spec, std::size_t layer);
}  // namespace detail

}  // namespace resntk
