#include "resntk/ntk.hpp"

#include <cmath>

#include "resntk/errors.hpp"
#include "resntk/parallel.hpp"

namespace resntk {

namespace {

void check_trace(const ArchitectureSpec& spec, const WeightSet& w,
                 const ForwardTrace& trace) {
  if (trace.block_outputs.size() != spec.depth + 1 ||
      trace.input.size() != spec.input_dim ||
      trace.block_outputs[0].size() != spec.width) {
    throw TraceMismatch("backward: trace does not match spec");
  }
  if (w.body.size() != body_matrix_count(spec)) {
    throw TraceMismatch("backward: weight set does not match spec");
  }
  switch (spec.kind) {
    case ArchKind::Vanilla:
      if (trace.masks.size() != spec.depth) {
        throw TraceMismatch("backward: vanilla trace is missing masks");
      }
      break;
    case ArchKind::ResNet:
      if (trace.branch_preacts.size() != spec.depth ||
          trace.branch_masks.size() != spec.depth) {
        throw TraceMismatch("backward: resnet trace is missing branch data");
      }
      break;
    case ArchKind::DenseNet:
      if (trace.acts.size() != spec.depth ||
          trace.masks.size() != spec.depth) {
        throw TraceMismatch("backward: densenet trace is missing activations");
      }
      break;
  }
}

// d = √2 · mask ⊙ v
Vector mask_backward(const Mask& mask, const Vector& v) {
  Vector d(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    d[i] = mask[i] ? kSqrt2 * v[i] : 0.0;
  }
  return d;
}

}  // namespace

NtkScope limit_scope(ArchKind kind) {
  return kind == ArchKind::Vanilla ? NtkScope::ExcludeInput
                                   : NtkScope::BodyOnly;
}

FactoredGradient backward_factored(const ArchitectureSpec& spec,
                                   const WeightSet& w,
                                   const ForwardTrace& trace) {
  check_trace(spec, w, trace);
  const std::size_t n = spec.width;
  const std::size_t depth = spec.depth;
  const double inv_sqrt_n = 1.0 / std::sqrt(double(n));

  FactoredGradient g;
  g.body.resize(body_matrix_count(spec));

  // ∂f/∂W^final = (1/√n)·(y^L)ᵀ
  g.head.scale = inv_sqrt_n;
  g.head.left = {1.0};
  g.head.right = trace.block_outputs[depth];

  // Adjoint of y^L.
  Vector adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    adj[i] = inv_sqrt_n * w.final_projection.data[i];
  }

  switch (spec.kind) {
    case ArchKind::Vanilla: {
      for (std::size_t l = depth; l >= 1; --l) {
        Vector d = mask_backward(trace.masks[l - 1], adj);
        auto& blk = g.body[l - 1];
        blk.scale = inv_sqrt_n;
        blk.left = d;
        blk.right = trace.block_outputs[l - 1];
        adj = matvec_transposed(w.body[l - 1], d);
        for (double& v : adj) v *= inv_sqrt_n;
      }
      break;
    }
    case ArchKind::ResNet: {
      const std::size_t m = spec.branch_depth;
      for (std::size_t l = depth; l >= 1; --l) {
        const bool reduced = spec.reduction && spec.reduction->layer == l;
        const double root_alpha = std::sqrt(spec.alpha(l));
        // Adjoint of the branch output y^{l-1,m}.
        Vector b(n);
        for (std::size_t i = 0; i < n; ++i) b[i] = root_alpha * adj[i];
        for (std::size_t h = m; h >= 1; --h) {
          auto& blk = g.body[body_flat_index(spec, {l, h})];
          blk.scale = inv_sqrt_n;
          blk.left = b;
          blk.right = h == 1 ? trace.block_outputs[l - 1]
                             : trace.branch_acts[l - 1][h - 2];
          Vector back =
              matvec_transposed(w.body[body_flat_index(spec, {l, h})], b);
          for (double& v : back) v *= inv_sqrt_n;
          if (h == 1) {
            // Skip path adds the block adjoint unless the skip was removed.
            if (reduced) {
              adj = std::move(back);
            } else {
              for (std::size_t i = 0; i < n; ++i) adj[i] += back[i];
            }
          } else {
            b = mask_backward(trace.branch_masks[l - 1][h - 2], back);
          }
        }
      }
      break;
    }
    case ArchKind::DenseNet: {
      const double alpha = spec.alpha(1);
      // Adjoints of the activations q^0..q^{L-1}.
      std::vector<Vector> act_adj(depth, Vector(n, 0.0));
      for (std::size_t l = depth; l >= 1; --l) {
        const double scale = std::sqrt(alpha / (double(n) * double(l)));
        const auto in = detail::dense_inputs(spec, l);
        auto touch_input = [&](std::size_t h) {
          auto& blk = g.body[body_flat_index(spec, {l, h})];
          blk.scale = scale;
          blk.left = adj;
          blk.right = trace.acts[h];
          Vector back =
              matvec_transposed(w.body[body_flat_index(spec, {l, h})], adj);
          for (std::size_t i = 0; i < n; ++i) {
            act_adj[h][i] += scale * back[i];
          }
        };
        if (in.single) {
          touch_input(in.single_h);
        } else {
          for (std::size_t h = in.first; h < in.last; ++h) touch_input(h);
        }
        // All consumers of q^{l-1} live in layers >= l, so its adjoint is
        // complete; pull it back through the ReLU to y^{l-1}.
        adj = mask_backward(trace.masks[l - 1], act_adj[l - 1]);
      }
      break;
    }
  }

  // Layers whose adjoint never got touched (pruned by a reduction) leave
  // empty blocks; give them explicit zero rank-1 factors.
  for (auto& blk : g.body) {
    if (blk.left.empty()) {
      blk.scale = 0.0;
      blk.left = Vector(n, 0.0);
      blk.right = Vector(n, 0.0);
    }
  }

  g.initial.scale = 1.0;
  g.initial.left = adj;  // adjoint of y^0
  g.initial.right = trace.input;
  return g;
}

GradientSet materialize(const ArchitectureSpec& spec,
                        const FactoredGradient& g) {
  auto outer = [](const FactoredGradient::Block& blk) {
    Matrix m(blk.left.size(), blk.right.size());
    for (std::size_t i = 0; i < blk.left.size(); ++i) {
      const double li = blk.scale * blk.left[i];
      for (std::size_t j = 0; j < blk.right.size(); ++j) {
        m(i, j) = li * blk.right[j];
      }
    }
    return m;
  };
  GradientSet out;
  out.d_initial = outer(g.initial);
  out.d_body.reserve(g.body.size());
  for (const auto& blk : g.body) out.d_body.push_back(outer(blk));
  out.d_final = outer(g.head);
  (void)spec;
  return out;
}

GradientSet backward(const ArchitectureSpec& spec, const WeightSet& w,
                     const ForwardTrace& trace) {
  return materialize(spec, backward_factored(spec, w, trace));
}

namespace {

double block_inner(const FactoredGradient::Block& a,
                   const FactoredGradient::Block& b) {
  return a.scale * b.scale * dot(a.left, b.left) * dot(a.right, b.right);
}

}  // namespace

double gradient_inner_product(const FactoredGradient& a,
                              const FactoredGradient& b, NtkScope scope) {
  double s = 0.0;
  if (scope == NtkScope::All) s += block_inner(a.initial, b.initial);
  for (std::size_t i = 0; i < a.body.size(); ++i) {
    s += block_inner(a.body[i], b.body[i]);
  }
  if (scope != NtkScope::BodyOnly) s += block_inner(a.head, b.head);
  return s;
}

double gradient_squared_norm(const FactoredGradient& a, NtkScope scope) {
  return gradient_inner_product(a, a, scope);
}

double ntk_entry(const ArchitectureSpec& spec, const WeightSet& w,
                 const Vector& x, const Vector& xp, NtkScope scope) {
  const FactoredGradient gx = backward_factored(spec, w, forward(spec, w, x));
  if (&x == &xp || x == xp) return gradient_squared_norm(gx, scope);
  const FactoredGradient gy = backward_factored(spec, w, forward(spec, w, xp));
  return gradient_inner_product(gx, gy, scope);
}

GramMatrix ntk_gram(const ArchitectureSpec& spec, const WeightSet& w,
                    const std::vector<Vector>& xs, NtkScope scope) {
  const std::size_t count = xs.size();
  std::vector<FactoredGradient> grads;
  grads.reserve(count);
  for (const Vector& x : xs) {
    grads.push_back(backward_factored(spec, w, forward(spec, w, x)));
  }
  GramMatrix gram;
  gram.size = count;
  gram.entries = Matrix(count, count);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i; j < count; ++j) {
      const double v = gradient_inner_product(grads[i], grads[j], scope);
      gram.entries(i, j) = v;
      gram.entries(j, i) = v;
    }
  }
  return gram;
}

GramMatrix avg_ntk_gram(const ArchitectureSpec& spec,
                        const std::vector<Vector>& xs, const RngStream& base,
                        std::size_t t, NtkScope scope) {
  const std::size_t count = xs.size();
  const std::size_t chunk = 8;
  const std::size_t chunks = chunk_count(t, chunk);
  std::vector<Matrix> partial(chunks);
  parallel_chunks(t, chunk, [&](std::size_t c, std::size_t begin,
                                std::size_t end) {
    Matrix acc(count, count);
    for (std::size_t i = begin; i < end; ++i) {
      const WeightSet w = sample_weights(spec, base.offset(i + 1));
      const GramMatrix g = ntk_gram(spec, w, xs, scope);
      for (std::size_t e = 0; e < acc.data.size(); ++e) {
        acc.data[e] += g.entries.data[e];
      }
    }
    partial[c] = std::move(acc);
  });
  GramMatrix out;
  out.size = count;
  out.entries = Matrix(count, count);
  for (const Matrix& p : partial) {
    if (p.data.empty()) continue;
    for (std::size_t e = 0; e < out.entries.data.size(); ++e) {
      out.entries.data[e] += p.data[e];
    }
  }
  for (double& v : out.entries.data) v /= double(t);
  return out;
}

SplitGrams avg_ntk_grams_split(const ArchitectureSpec& spec,
                               const std::vector<Vector>& train,
                               const std::vector<Vector>& test,
                               const RngStream& base, std::size_t t,
                               NtkScope scope) {
  const std::size_t m = train.size();
  const std::size_t tn = test.size();
  const std::size_t chunk = 4;
  const std::size_t chunks = chunk_count(t, chunk);
  std::vector<Matrix> partial_train(chunks), partial_cross(chunks);
  parallel_chunks(t, chunk, [&](std::size_t c, std::size_t begin,
                                std::size_t end) {
    Matrix acc_train(m, m), acc_cross(tn, m);
    for (std::size_t i = begin; i < end; ++i) {
      const WeightSet w = sample_weights(spec, base.offset(i + 1));
      std::vector<FactoredGradient> gtrain, gtest;
      gtrain.reserve(m);
      gtest.reserve(tn);
      for (const Vector& x : train) {
        gtrain.push_back(backward_factored(spec, w, forward(spec, w, x)));
      }
      for (const Vector& x : test) {
        gtest.push_back(backward_factored(spec, w, forward(spec, w, x)));
      }
      for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
          const double v = gradient_inner_product(gtrain[a], gtrain[b], scope);
          acc_train(a, b) += v;
          if (b != a) acc_train(b, a) += v;
        }
      }
      for (std::size_t a = 0; a < tn; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
          acc_cross(a, b) +=
              gradient_inner_product(gtest[a], gtrain[b], scope);
        }
      }
    }
    partial_train[c] = std::move(acc_train);
    partial_cross[c] = std::move(acc_cross);
  });
  SplitGrams out;
  out.train = Matrix(m, m);
  out.cross = Matrix(tn, m);
  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t e = 0; e < out.train.data.size(); ++e) {
      out.train.data[e] += partial_train[c].data[e];
    }
    for (std::size_t e = 0; e < out.cross.data.size(); ++e) {
      out.cross.data[e] += partial_cross[c].data[e];
    }
  }
  for (double& v : out.train.data) v /= double(t);
  for (double& v : out.cross.data) v /= double(t);
  return out;
}

double f_through(const ArchitectureSpec& spec, const WeightSet& w,
                 const ForwardTrace& trace, const GradientSet& grads,
                 const WeightIndex& k) {
  (void)trace;
  const std::size_t idx = body_flat_index(spec, k);
  return frobenius_dot(w.body[idx], grads.d_body[idx]);
}

}  // namespace resntk
