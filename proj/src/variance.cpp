#include "resntk/variance.hpp"

#include <cmath>

#include "resntk/errors.hpp"
#include "resntk/net.hpp"
#include "resntk/ntk.hpp"
#include "resntk/parallel.hpp"

namespace resntk {

namespace {
constexpr std::size_t kChunk = 64;
}

std::pair<Vector, Vector> gen_inputs(std::size_t input_dim,
                                     const RngStream& rng) {
  RandomSequence seq(rng);
  Vector x(input_dim), xp(input_dim);
  for (double& v : x) v = 0.5 + seq.next_gaussian();
  for (double& v : xp) v = -0.5 + seq.next_gaussian();
  const double nx = std::sqrt(squared_norm(x));
  const double np = std::sqrt(squared_norm(xp));
  for (double& v : x) v /= nx;
  for (double& v : xp) v /= np;
  return {x, xp};
}

VarianceReport estimate_normalized_variance_from(
    const std::function<double(std::size_t)>& g_sampler, std::size_t draws) {
  std::vector<double> samples(draws, 0.0);
  parallel_chunks(draws, kChunk,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) {
                      samples[i] = g_sampler(i);
                    }
                  });
  MomentEstimate mean_g;
  for (double v : samples) mean_g.add(v);
  if (std::abs(mean_g.mean()) < 1e-12) {
    throw DegenerateMean(
        "normalized variance: |sample mean| < 1e-12, normalization unusable");
  }
  const NormalizedVariance nv = normalized_variance_jackknife(samples);
  VarianceReport report;
  report.n_draws = draws;
  report.mean_g = mean_g;
  report.normalized_variance = nv.value;
  report.normalized_variance_stderr = nv.stderr;
  report.eta = nv.value + 1.0;
  return report;
}

VarianceReport estimate_normalized_variance(const ArchitectureSpec& spec,
                                            const Vector& x, const Vector& xp,
                                            std::size_t draws,
                                            const RngStream& rng) {
  VarianceReport report = estimate_normalized_variance_from(
      [&](std::size_t i) {
        const WeightSet w = sample_weights(spec, rng.offset(i));
        return ntk_entry(spec, w, x, xp, NtkScope::All);
      },
      draws);
  report.arch = spec;
  report.diag = x == xp;
  return report;
}

std::vector<VarianceReport> sweep(const std::vector<ArchKind>& kinds,
                                  const std::vector<std::size_t>& depths,
                                  const std::vector<std::size_t>& widths,
                                  std::size_t draws, const RngStream& rng,
                                  const SweepOptions& options) {
  std::vector<VarianceReport> reports;
  for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
    for (std::size_t li = 0; li < depths.size(); ++li) {
      for (std::size_t wi = 0; wi < widths.size(); ++wi) {
        const ArchKind kind = kinds[ki];
        const std::size_t depth = depths[li];
        const std::size_t width = widths[wi];
        ArchitectureSpec spec;
        switch (kind) {
          case ArchKind::Vanilla:
            spec = make_vanilla(options.input_dim, depth, width);
            break;
          case ArchKind::ResNet:
            spec = make_resnet(options.input_dim, depth, width,
                               options.branch_depth,
                               options.resnet_alpha_total / double(depth));
            break;
          case ArchKind::DenseNet:
            spec = make_densenet(options.input_dim, depth, width,
                                 options.densenet_alpha);
            break;
        }
        const RngStream cell =
            rng.derived(ki + 1).derived(depth).derived(width);
        const auto [x, xp] = gen_inputs(options.input_dim, cell.derived(1));
        VarianceReport diag = estimate_normalized_variance(
            spec, x, x, draws, cell.derived(2));
        VarianceReport off = estimate_normalized_variance(
            spec, x, xp, draws, cell.derived(3));
        reports.push_back(std::move(diag));
        reports.push_back(std::move(off));
      }
    }
  }
  return reports;
}

std::pair<double, double> variance_ratio_bounds(const ArchitectureSpec& spec,
                                                const BoundParams& params) {
  const double n = double(spec.width);
  switch (spec.kind) {
    case ArchKind::Vanilla:
      throw InvalidSpec(
          "variance_ratio_bounds: no envelope is defined for vanilla nets");
    case ArchKind::ResNet: {
      double sum_frac = 0.0, sum_a = 0.0, sum_a2 = 0.0;
      for (std::size_t l = 1; l <= spec.depth; ++l) {
        const double a = spec.alpha(l);
        sum_frac += a / (1.0 + a);
        sum_a += a;
        sum_a2 += a * a;
      }
      const double upper = std::exp(5.0 * double(spec.branch_depth) / n +
                                    params.constant_c / n * sum_frac);
      const double ratio = sum_a2 / (sum_a * sum_a);
      return {std::max(1.0, ratio * upper), upper};
    }
    case ArchKind::DenseNet: {
      const double upper = std::exp(params.constant_c2 / n);
      if (spec.depth < 2) return {1.0, upper};
      const double logl = std::log(double(spec.depth));
      const double lower =
          params.constant_c1 / (double(spec.depth) * logl * logl) * upper;
      return {std::max(1.0, lower), upper};
    }
  }
  return {1.0, 1.0};
}

double densenet_c2_preset(double alpha) {
  if (!(alpha > 0.0)) throw InvalidSpec("densenet_c2_preset: alpha must be > 0");
  const std::size_t terms = 200000;
  double sum = 0.0;
  for (std::size_t l = terms; l >= 1; --l) {
    const double d = double(l) + alpha - 1.0;
    sum += 1.0 / (d * d);
  }
  // Midpoint tail for the remainder of the series.
  sum += 1.0 / (double(terms) + alpha - 0.5);
  return 5.0 * alpha * alpha * sum;
}

}  // namespace resntk
