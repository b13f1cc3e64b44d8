#include "resntk/net.hpp"

#include <cmath>

#include "resntk/errors.hpp"

namespace resntk {

namespace {

void fill_gaussian(Matrix& m, RandomSequence& seq) {
  for (double& v : m.data) v = seq.next_gaussian();
}

// act = √2·max(0, pre); mask 1 iff pre > 0 (exact zeros get mask 0).
void relu_site(const Vector& pre, Vector& act, Mask& mask) {
  const std::size_t n = pre.size();
  act.resize(n);
  mask.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool on = pre[i] > 0.0;
    mask[i] = on ? 1 : 0;
    act[i] = on ? kSqrt2 * pre[i] : 0.0;
  }
}

void scale_in_place(Vector& v, double s) {
  for (double& x : v) x *= s;
}

}  // namespace

WeightSet sample_weights(const ArchitectureSpec& spec, const RngStream& rng) {
  WeightSet w;
  RandomSequence seq(rng);
  w.initial_projection = Matrix(spec.width, spec.input_dim);
  fill_gaussian(w.initial_projection, seq);
  const std::size_t count = body_matrix_count(spec);
  w.body.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    w.body.emplace_back(spec.width, spec.width);
    fill_gaussian(w.body.back(), seq);
  }
  w.final_projection = Matrix(1, spec.width);
  fill_gaussian(w.final_projection, seq);
  return w;
}

namespace detail {

DenseInputs dense_inputs(const ArchitectureSpec& spec, std::size_t layer) {
  DenseInputs in;
  in.last = layer;
  if (!spec.reduction) return in;
  const std::size_t lk = spec.reduction->layer;
  if (layer == lk) {
    in.single = true;
    in.single_h = spec.reduction->sublayer;
  } else if (layer > lk) {
    in.first = lk;
  }
  return in;
}

}  // namespace detail

ForwardTrace forward(const ArchitectureSpec& spec, const WeightSet& w,
                     const Vector& x) {
  if (x.size() != spec.input_dim) {
    throw ShapeMismatch("forward: input dimension mismatch");
  }
  if (squared_norm(x) == 0.0) throw ZeroInput("forward: input has zero norm");

  const std::size_t n = spec.width;
  const std::size_t depth = spec.depth;
  const double inv_sqrt_n = 1.0 / std::sqrt(double(n));

  ForwardTrace tr;
  tr.input = x;
  tr.block_outputs.reserve(depth + 1);
  tr.block_outputs.push_back(matvec(w.initial_projection, x));

  switch (spec.kind) {
    case ArchKind::Vanilla: {
      tr.masks.resize(depth);
      for (std::size_t l = 1; l <= depth; ++l) {
        Vector pre = matvec(w.body[l - 1], tr.block_outputs[l - 1]);
        scale_in_place(pre, inv_sqrt_n);
        Vector act;
        relu_site(pre, act, tr.masks[l - 1]);
        tr.block_outputs.push_back(std::move(act));
      }
      break;
    }
    case ArchKind::ResNet: {
      const std::size_t m = spec.branch_depth;
      tr.branch_preacts.resize(depth);
      tr.branch_acts.resize(depth);
      tr.branch_masks.resize(depth);
      for (std::size_t l = 1; l <= depth; ++l) {
        auto& preacts = tr.branch_preacts[l - 1];
        auto& acts = tr.branch_acts[l - 1];
        auto& masks = tr.branch_masks[l - 1];
        preacts.resize(m);
        acts.resize(m - 1);
        masks.resize(m - 1);
        const Vector& y_prev = tr.block_outputs[l - 1];
        for (std::size_t h = 1; h <= m; ++h) {
          const Matrix& wm = w.body[body_flat_index(spec, {l, h})];
          const Vector& in = h == 1 ? y_prev : acts[h - 2];
          preacts[h - 1] = matvec(wm, in);
          scale_in_place(preacts[h - 1], inv_sqrt_n);
          if (h < m) relu_site(preacts[h - 1], acts[h - 1], masks[h - 1]);
        }
        const bool reduced =
            spec.reduction && spec.reduction->layer == l;
        const double root_alpha = std::sqrt(spec.alpha(l));
        Vector y(n);
        const Vector& branch_out = preacts[m - 1];
        for (std::size_t i = 0; i < n; ++i) {
          y[i] = (reduced ? 0.0 : y_prev[i]) + root_alpha * branch_out[i];
        }
        tr.block_outputs.push_back(std::move(y));
      }
      break;
    }
    case ArchKind::DenseNet: {
      const double alpha = spec.alpha(1);
      tr.acts.resize(depth);
      tr.masks.resize(depth);
      // q^0 .. q^{L-1}; q^L is never consumed.
      relu_site(tr.block_outputs[0], tr.acts[0], tr.masks[0]);
      for (std::size_t l = 1; l <= depth; ++l) {
        const double scale = std::sqrt(alpha / (double(n) * double(l)));
        Vector y(n, 0.0);
        const auto in = detail::dense_inputs(spec, l);
        auto add_input = [&](std::size_t h) {
          const Matrix& wm = w.body[body_flat_index(spec, {l, h})];
          const Vector& q = tr.acts[h];
          for (std::size_t i = 0; i < n; ++i) {
            const double* row = wm.data.data() + i * n;
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += row[j] * q[j];
            y[i] += s;
          }
        };
        if (in.single) {
          add_input(in.single_h);
        } else {
          for (std::size_t h = in.first; h < in.last; ++h) add_input(h);
        }
        scale_in_place(y, scale);
        tr.block_outputs.push_back(y);
        if (l < depth) relu_site(y, tr.acts[l], tr.masks[l]);
      }
      break;
    }
  }

  tr.output = inv_sqrt_n * dot(w.final_projection.data,
                               tr.block_outputs[depth]);
  return tr;
}

}  // namespace resntk
