#include "resntk/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "resntk/errors.hpp"
#include "resntk/net.hpp"
#include "resntk/ntk.hpp"
#include "resntk/parallel.hpp"

namespace resntk {

namespace {

constexpr std::size_t kChunk = 2048;

// Merge per-chunk estimates in chunk order so results are independent of the
// worker count.
MomentEstimate merge_ordered(std::vector<MomentEstimate>& parts) {
  MomentEstimate out;
  for (const auto& p : parts) out.merge(p);
  return out;
}

double combined_stderr(const MomentEstimate& a, const MomentEstimate& b) {
  const double sa = a.stderr_of_mean();
  const double sb = b.stderr_of_mean();
  return std::sqrt(sa * sa + sb * sb);
}

double z_against(double diff, double se) {
  if (se > 0.0) return diff / se;
  return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

DualityReport equality_report(const WeightIndex& k, std::size_t order,
                              const MomentEstimate& lhs,
                              const MomentEstimate& rhs, double gate) {
  DualityReport r;
  r.k = k;
  r.moment_order = order;
  r.lhs = lhs;
  r.rhs = rhs;
  r.z_score = z_against(lhs.mean() - rhs.mean(), combined_stderr(lhs, rhs));
  r.pass = std::abs(r.z_score) <= gate;
  return r;
}

// ‖J^k‖² and ⟨W^k, J^k⟩ from the rank-1 gradient block.
struct PerDraw {
  double f_reduced = 0.0;
  double f_through = 0.0;
  double j_sq = 0.0;
};

PerDraw eval_draw(const ArchitectureSpec& spec, const ArchitectureSpec& reduced,
                  const Vector& x, std::size_t flat, const WeightSet& w) {
  PerDraw out;
  out.f_reduced = forward(reduced, w, x).output;
  const ForwardTrace trace = forward(spec, w, x);
  const FactoredGradient g = backward_factored(spec, w, trace);
  const auto& blk = g.body[flat];
  out.j_sq = blk.scale * blk.scale * squared_norm(blk.left) *
             squared_norm(blk.right);
  out.f_through =
      blk.scale * dot(blk.left, matvec(w.body[flat], blk.right));
  return out;
}

}  // namespace

MomentEstimate estimate_output_moments(const ArchitectureSpec& spec,
                                       const Vector& x, std::size_t order,
                                       std::size_t draws,
                                       const RngStream& rng) {
  std::vector<MomentEstimate> parts(chunk_count(draws, kChunk));
  parallel_chunks(draws, kChunk,
                  [&](std::size_t c, std::size_t begin, std::size_t end) {
                    MomentEstimate est;
                    for (std::size_t i = begin; i < end; ++i) {
                      const WeightSet w = sample_weights(spec, rng.offset(i));
                      est.add(std::pow(forward(spec, w, x).output,
                                       double(order)));
                    }
                    parts[c] = est;
                  });
  return merge_ordered(parts);
}

MomentEstimate estimate_jacobian_moments(const ArchitectureSpec& spec,
                                         const Vector& x, const WeightIndex& k,
                                         std::size_t power, std::size_t draws,
                                         const RngStream& rng) {
  const std::size_t flat = body_flat_index(spec, k);
  std::vector<MomentEstimate> parts(chunk_count(draws, kChunk));
  parallel_chunks(
      draws, kChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
        MomentEstimate est;
        for (std::size_t i = begin; i < end; ++i) {
          const WeightSet w = sample_weights(spec, rng.offset(i));
          const ForwardTrace trace = forward(spec, w, x);
          const FactoredGradient g = backward_factored(spec, w, trace);
          const auto& blk = g.body[flat];
          const double j_sq = blk.scale * blk.scale *
                              squared_norm(blk.left) *
                              squared_norm(blk.right);
          est.add(std::pow(j_sq, double(power) / 2.0));
        }
        parts[c] = est;
      });
  return merge_ordered(parts);
}

DualityReport check_moment_equality(const ArchitectureSpec& spec,
                                    const Vector& x, const WeightIndex& k,
                                    std::size_t order, std::size_t draws,
                                    const RngStream& rng) {
  const ArchitectureSpec red = reduce(spec, k);
  const std::size_t flat = body_flat_index(spec, k);
  std::vector<MomentEstimate> lhs_parts(chunk_count(draws, kChunk));
  std::vector<MomentEstimate> rhs_parts(lhs_parts.size());
  parallel_chunks(draws, kChunk,
                  [&](std::size_t c, std::size_t begin, std::size_t end) {
                    MomentEstimate lhs, rhs;
                    for (std::size_t i = begin; i < end; ++i) {
                      const WeightSet w = sample_weights(spec, rng.offset(i));
                      const PerDraw d = eval_draw(spec, red, x, flat, w);
                      lhs.add(std::pow(d.f_reduced, double(order)));
                      rhs.add(std::pow(d.f_through, double(order)));
                    }
                    lhs_parts[c] = lhs;
                    rhs_parts[c] = rhs;
                  });
  return equality_report(k, order, merge_ordered(lhs_parts),
                         merge_ordered(rhs_parts), 4.0);
}

JacobianDualityReport check_jacobian_duality(const ArchitectureSpec& spec,
                                             const Vector& x,
                                             const WeightIndex& k,
                                             std::size_t draws,
                                             const RngStream& rng) {
  const DualitySuite suite = run_duality_suite(spec, x, k, draws, draws, rng);
  return suite.jacobian;
}

DualitySuite run_duality_suite(const ArchitectureSpec& spec, const Vector& x,
                               const WeightIndex& k, std::size_t draws2,
                               std::size_t draws4, const RngStream& rng) {
  const ArchitectureSpec red = reduce(spec, k);
  const std::size_t flat = body_flat_index(spec, k);
  const std::size_t total = std::max(draws2, draws4);

  struct Chunk {
    MomentEstimate f2_red, f2_thr;        // order 2, first draws2 draws
    MomentEstimate f4_red, f4_thr;        // order 4
    MomentEstimate j2, j4, f2_red_full;   // jacobian duality
  };
  std::vector<Chunk> parts(chunk_count(total, kChunk));
  parallel_chunks(
      total, kChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
        Chunk acc;
        for (std::size_t i = begin; i < end; ++i) {
          const WeightSet w = sample_weights(spec, rng.offset(i));
          const PerDraw d = eval_draw(spec, red, x, flat, w);
          const double fr2 = d.f_reduced * d.f_reduced;
          const double ft2 = d.f_through * d.f_through;
          if (i < draws2) {
            acc.f2_red.add(fr2);
            acc.f2_thr.add(ft2);
          }
          if (i < draws4) {
            acc.f4_red.add(fr2 * fr2);
            acc.f4_thr.add(ft2 * ft2);
            acc.j2.add(d.j_sq);
            acc.j4.add(d.j_sq * d.j_sq);
            acc.f2_red_full.add(fr2);
          }
        }
        parts[c] = acc;
      });

  Chunk all;
  for (const auto& p : parts) {
    all.f2_red.merge(p.f2_red);
    all.f2_thr.merge(p.f2_thr);
    all.f4_red.merge(p.f4_red);
    all.f4_thr.merge(p.f4_thr);
    all.j2.merge(p.j2);
    all.j4.merge(p.j4);
    all.f2_red_full.merge(p.f2_red_full);
  }

  DualitySuite suite;
  suite.order2 = equality_report(k, 2, all.f2_red, all.f2_thr, 4.0);
  suite.order4 = equality_report(k, 4, all.f4_red, all.f4_thr, 4.0);
  suite.jacobian.equality = equality_report(k, 2, all.j2, all.f2_red_full, 4.0);

  DualityReport sandwich;
  sandwich.k = k;
  sandwich.moment_order = 4;
  sandwich.lhs = all.j4;
  sandwich.rhs = all.f4_red;
  sandwich.sandwich_lower = all.f4_red.mean() / 3.0;
  const double se_up = combined_stderr(all.j4, all.f4_red);
  const double se_j = all.j4.stderr_of_mean();
  const double se_f3 = all.f4_red.stderr_of_mean() / 3.0;
  const double se_lo = std::sqrt(se_j * se_j + se_f3 * se_f3);
  const double z_up = z_against(all.j4.mean() - all.f4_red.mean(), se_up);
  const double z_lo =
      z_against(all.f4_red.mean() / 3.0 - all.j4.mean(), se_lo);
  sandwich.z_score = std::max(z_up, z_lo);
  sandwich.pass = z_up <= 4.0 && z_lo <= 4.0;
  suite.jacobian.sandwich = sandwich;
  return suite;
}

std::vector<MomentRecursionReport> check_norm_recursion(ChainKind kind,
                                                        std::size_t n,
                                                        std::size_t depth,
                                                        std::size_t draws,
                                                        const RngStream& rng) {
  // Per-draw squared norms of every layer of the chain, y^0 fixed unit.
  std::vector<std::vector<double>> sq(depth + 1,
                                      std::vector<double>(draws, 1.0));
  const double inv_sqrt_n = 1.0 / std::sqrt(double(n));
  parallel_chunks(draws, kChunk, [&](std::size_t, std::size_t begin,
                                     std::size_t end) {
    for (std::size_t d = begin; d < end; ++d) {
      Vector y(n, inv_sqrt_n);  // ‖y^0‖ = 1
      RandomSequence seq(rng.offset(d));
      Matrix w(n, n);
      for (std::size_t l = 1; l <= depth; ++l) {
        for (double& v : w.data) v = seq.next_gaussian();
        Vector next = matvec(w, y);
        for (double& v : next) {
          v *= inv_sqrt_n;
          if (kind == ChainKind::Relu) v = v > 0.0 ? kSqrt2 * v : 0.0;
        }
        y = std::move(next);
        sq[l][d] = squared_norm(y);
      }
    }
  });

  const double predicted4 =
      kind == ChainKind::Relu ? double(n + 5) / double(n)
                              : double(n + 2) / double(n);
  std::vector<MomentRecursionReport> reports;
  std::vector<double> num(draws), den(draws);
  for (std::size_t l = 1; l <= depth; ++l) {
    for (std::size_t d = 0; d < draws; ++d) {
      num[d] = sq[l][d] * sq[l][d];
      den[d] = sq[l - 1][d] * sq[l - 1][d];
    }
    MomentRecursionReport fourth;
    fourth.layer = l;
    fourth.moment_order = 4;
    fourth.observed_ratio = ratio_of_means_jackknife(num, den);
    fourth.predicted_ratio = predicted4;
    fourth.pass = std::abs(fourth.observed_ratio.value - predicted4) <=
                  3.0 * fourth.observed_ratio.stderr;
    reports.push_back(fourth);

    MomentRecursionReport second;
    second.layer = l;
    second.moment_order = 2;
    second.observed_ratio = ratio_of_means_jackknife(sq[l], sq[l - 1]);
    second.predicted_ratio = 1.0;
    second.pass = std::abs(second.observed_ratio.value - 1.0) <=
                  3.0 * second.observed_ratio.stderr;
    reports.push_back(second);
  }
  return reports;
}

MomentEstimate check_weight_mask_moment(const ArchitectureSpec& spec,
                                        const Vector& x, std::size_t layer,
                                        std::size_t power, std::size_t draws,
                                        const RngStream& rng) {
  if (layer < 1 || layer > spec.depth ||
      (spec.kind == ArchKind::DenseNet && layer >= spec.depth)) {
    throw InvalidIndex("check_weight_mask_moment: layer out of range");
  }

  // Pick the ReLU site, the feeding matrix, and one of its weights.
  RandomSequence pick(rng.derived(0x5157));
  const std::size_t unit = std::size_t(pick.next_u64() % spec.width);
  const std::size_t in_idx = std::size_t(pick.next_u64() % spec.width);

  WeightIndex feed;
  switch (spec.kind) {
    case ArchKind::Vanilla: feed = {layer, 0}; break;
    case ArchKind::ResNet: feed = {layer, 1}; break;
    case ArchKind::DenseNet:
      feed = {layer, std::size_t(pick.next_u64() % layer)};
      break;
  }
  const std::size_t flat = body_flat_index(spec, feed);

  std::vector<MomentEstimate> parts(chunk_count(draws, kChunk));
  parallel_chunks(
      draws, kChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
        MomentEstimate est;
        for (std::size_t i = begin; i < end; ++i) {
          const WeightSet w = sample_weights(spec, rng.offset(i));
          const ForwardTrace tr = forward(spec, w, x);
          double mask = 0.0;
          switch (spec.kind) {
            case ArchKind::Vanilla:
              mask = tr.masks[layer - 1][unit];
              break;
            case ArchKind::ResNet:
              mask = tr.branch_masks[layer - 1][0][unit];
              break;
            case ArchKind::DenseNet:
              mask = tr.masks[layer][unit];
              break;
          }
          const double weight = w.body[flat](unit, in_idx);
          est.add(std::pow(weight, double(power)) * mask);
        }
        parts[c] = est;
      });
  return merge_ordered(parts);
}

std::vector<WeightIndex> sample_body_indices(const ArchitectureSpec& spec,
                                             std::size_t count,
                                             const RngStream& rng) {
  std::vector<WeightIndex> all = body_indices(spec);
  RandomSequence seq(rng);
  // Partial Fisher-Yates; without replacement when possible.
  const std::size_t take = std::min(count, all.size());
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + std::size_t(seq.next_u64() % (all.size() - i));
    std::swap(all[i], all[j]);
  }
  all.resize(take);
  while (all.size() < count) {
    all.push_back(all[std::size_t(seq.next_u64() % take)]);
  }
  return all;
}

}  // namespace resntk
