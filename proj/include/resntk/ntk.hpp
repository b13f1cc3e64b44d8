#pragma once

#include <cstddef>
#include <vector>

#include "resntk/arch.hpp"
#include "resntk/matrix.hpp"
#include "resntk/net.hpp"

namespace resntk {

// Reverse-mode gradient of f with respect to every weight matrix, masks
// treated as constants (the ReLU sub-gradient at 0 is 0, matching forward's
// mask convention). Shapes mirror WeightSet.
struct GradientSet {
  Matrix d_initial;
  std::vector<Matrix> d_body;
  Matrix d_final;
};

// Same gradients in rank-1 form: grad = scale · left · rightᵀ. Every
// per-matrix gradient of the scalar output factors this way, which turns
// Frobenius inner products between gradients into O(n) dot products.
struct FactoredGradient {
  struct Block {
    double scale = 0.0;
    Vector left;
    Vector right;
  };
  Block initial;
  std::vector<Block> body;
  Block head;  // final projection
};

// Which weight matrices enter a kernel sum. All is the full parameter
// Jacobian. The other two match what the infinite-width recursions cover:
// ExcludeInput for the vanilla baseline (its recursion folds the final
// projection in but not the input projection), BodyOnly for the ResNet and
// DenseNet limits.
enum class NtkScope { All, ExcludeInput, BodyOnly };

NtkScope limit_scope(ArchKind kind);

GradientSet backward(const ArchitectureSpec& spec, const WeightSet& w,
                     const ForwardTrace& trace);
FactoredGradient backward_factored(const ArchitectureSpec& spec,
                                   const WeightSet& w,
                                   const ForwardTrace& trace);
GradientSet materialize(const ArchitectureSpec& spec, const FactoredGradient& g);

// ⟨∂f(x)/∂w, ∂f(x')/∂w⟩ summed over the matrices in scope.
double ntk_entry(const ArchitectureSpec& spec, const WeightSet& w,
                 const Vector& x, const Vector& xp,
                 NtkScope scope = NtkScope::All);

double gradient_inner_product(const FactoredGradient& a,
                              const FactoredGradient& b, NtkScope scope);
double gradient_squared_norm(const FactoredGradient& a, NtkScope scope);

struct GramMatrix {
  std::size_t size = 0;
  Matrix entries;  // symmetric size × size
};

// One backward pass per input, then all pairwise inner products.
GramMatrix ntk_gram(const ArchitectureSpec& spec, const WeightSet& w,
                    const std::vector<Vector>& xs,
                    NtkScope scope = NtkScope::All);

// Mean of t independent Gram matrices; draw i uses stream base + i, i = 1..t.
GramMatrix avg_ntk_gram(const ArchitectureSpec& spec,
                        const std::vector<Vector>& xs, const RngStream& base,
                        std::size_t t, NtkScope scope = NtkScope::All);

// Train/train and test/train kernels from the same weight draws.
struct SplitGrams {
  Matrix train;  // m × m
  Matrix cross;  // t × m
};
SplitGrams avg_ntk_grams_split(const ArchitectureSpec& spec,
                               const std::vector<Vector>& train,
                               const std::vector<Vector>& test,
                               const RngStream& base, std::size_t t,
                               NtkScope scope = NtkScope::All);

// ⟨W^k, ∂f/∂W^k⟩: the sum of all input→output path products that traverse
// W^k, exact at fixed masks because every such path is degree 1 in W^k.
double f_through(const ArchitectureSpec& spec, const WeightSet& w,
                 const ForwardTrace& trace, const GradientSet& grads,
                 const WeightIndex& k);

}  // namespace resntk
