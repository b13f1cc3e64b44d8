// Command-line frontend: variance sweeps, duality checks, moment estimators,
// kernel comparisons, and kernel regression experiments. Results go to
// --out as CSV or JSON lines; a human-readable summary and the effective
// configuration are printed to standard output, progress only to stderr.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "resntk/duality.hpp"
#include "resntk/errors.hpp"
#include "resntk/io.hpp"
#include "resntk/kreg.hpp"
#include "resntk/limit_kernel.hpp"
#include "resntk/net.hpp"
#include "resntk/ntk.hpp"
#include "resntk/parallel.hpp"
#include "resntk/variance.hpp"

using namespace resntk;

namespace {

struct CommonOpts {
  std::uint64_t seed = 1;
  std::size_t draws = 2000;
  std::string out;
  std::string format = "csv";
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--draws", c.draws, "Monte Carlo draws");
  cmd->add_option("--out", c.out, "Output file path");
  cmd->add_option("--format", c.format, "Output format: csv | jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  cmd->add_option("--threads", c.threads, "Worker thread cap (0 = all cores)");
}

struct ArchOpts {
  std::string arch = "vanilla";
  std::size_t input_dim = 16;
  std::size_t width = 16;
  std::size_t depth = 2;
  std::size_t m = 2;
  std::vector<double> alphas;
  double alpha = 0.5;
};

void add_arch(CLI::App* cmd, ArchOpts& a, bool with_depth = true) {
  cmd->add_option("--arch", a.arch, "vanilla | resnet | densenet")
      ->check(CLI::IsMember({"vanilla", "resnet", "densenet"}));
  cmd->add_option("--input-dim", a.input_dim, "Input dimension");
  cmd->add_option("--width", a.width, "Layer width n");
  if (with_depth) cmd->add_option("--depth", a.depth, "Depth L");
  cmd->add_option("--m", a.m, "ResNet branch depth");
  cmd->add_option("--alphas", a.alphas,
                  "ResNet per-layer coefficients (comma separated)")
      ->delimiter(',');
  cmd->add_option("--alpha", a.alpha,
                  "DenseNet coefficient, or the value broadcast to every "
                  "ResNet layer when --alphas is absent");
}

ArchitectureSpec build_from_opts(const ArchOpts& a, std::size_t depth) {
  const ArchKind kind = kind_from_name(a.arch);
  switch (kind) {
    case ArchKind::Vanilla:
      return make_vanilla(a.input_dim, depth, a.width);
    case ArchKind::ResNet: {
      std::vector<double> alphas = a.alphas;
      if (alphas.empty()) alphas.assign(depth, a.alpha);
      if (alphas.size() == 1 && depth > 1) alphas.assign(depth, alphas[0]);
      return make_resnet(a.input_dim, depth, a.width, a.m, alphas);
    }
    case ArchKind::DenseNet:
      return make_densenet(a.input_dim, depth, a.width, a.alpha);
  }
  throw InvalidSpec("unknown architecture");
}

void emit(const CommonOpts& c, const std::string& csv,
          const std::vector<nlohmann::json>& records) {
  if (c.out.empty()) return;
  if (c.format == "csv") {
    write_text_file(c.out, csv);
  } else {
    std::ostringstream lines;
    for (const auto& r : records) lines << r.dump() << '\n';
    write_text_file(c.out, lines.str());
  }
}

void echo_config(const std::string& subcommand, const nlohmann::json& config) {
  nlohmann::json j = config;
  j["subcommand"] = subcommand;
  std::cout << "config: " << j.dump() << '\n';
}

NtkScope scope_from_name(const std::string& name, ArchKind kind) {
  if (name == "all") return NtkScope::All;
  if (name == "body") return NtkScope::BodyOnly;
  if (name == "no-input") return NtkScope::ExcludeInput;
  return limit_scope(kind);  // "auto"
}

int run_variance(const CommonOpts& c, const ArchOpts& a,
                 const std::vector<std::size_t>& depths,
                 const std::vector<std::size_t>& widths, double alpha_total) {
  SweepOptions options;
  options.input_dim = a.input_dim;
  options.branch_depth = a.m;
  options.resnet_alpha_total = alpha_total;
  options.densenet_alpha = a.alpha;
  const std::vector<ArchKind> kinds = {kind_from_name(a.arch)};
  const std::vector<std::size_t> ws =
      widths.empty() ? std::vector<std::size_t>{a.width} : widths;
  echo_config("variance",
              {{"arch", a.arch},
               {"input_dim", a.input_dim},
               {"depths", depths},
               {"widths", ws},
               {"m", a.m},
               {"alpha", a.alpha},
               {"alpha_total", alpha_total},
               {"draws", c.draws},
               {"seed", c.seed},
               {"format", c.format}});
  const auto reports =
      sweep(kinds, depths, ws, c.draws, RngStream{c.seed, 0}, options);
  std::vector<nlohmann::json> records;
  for (const auto& r : reports) {
    records.push_back(variance_report_to_json(r));
    std::printf("%s n=%zu L=%zu %s V=%.6g +- %.2g eta=%.6g\n",
                kind_name(r.arch.kind).c_str(), r.arch.width, r.arch.depth,
                r.diag ? "diag" : "offdiag", r.normalized_variance,
                r.normalized_variance_stderr, r.eta);
  }
  emit(c, variance_reports_to_csv(reports), records);
  return 0;
}

int run_duality(const CommonOpts& c, const ArchOpts& a, const WeightIndex& k,
                std::size_t order, std::size_t draws2) {
  const ArchitectureSpec spec = build_from_opts(a, a.depth);
  validate_index(spec, k);
  const Vector x =
      gen_inputs(a.input_dim, RngStream{c.seed, 0}.derived(1)).first;
  echo_config("duality", {{"arch", arch_to_json(spec)},
                          {"k", {{"layer", k.layer}, {"sublayer", k.sublayer}}},
                          {"order", order},
                          {"draws", c.draws},
                          {"draws2", draws2},
                          {"seed", c.seed},
                          {"format", c.format}});
  const DualitySuite suite = run_duality_suite(
      spec, x, k, draws2 ? draws2 : c.draws, c.draws, RngStream{c.seed, 1});
  std::vector<DualityReport> reports;
  if (order >= 4) {
    reports = {suite.order2, suite.order4, suite.jacobian.equality,
               suite.jacobian.sandwich};
  } else {
    reports = {suite.order2, suite.jacobian.equality, suite.jacobian.sandwich};
  }
  bool all_pass = true;
  std::vector<nlohmann::json> records;
  for (const auto& r : reports) {
    all_pass = all_pass && r.pass;
    records.push_back(duality_report_to_json(spec, r));
    std::printf("order=%zu lhs=%.6g rhs=%.6g z=%.3g %s\n", r.moment_order,
                r.lhs.mean(), r.rhs.mean(), r.z_score,
                r.pass ? "pass" : "FAIL");
  }
  emit(c, duality_reports_to_csv(spec, reports), records);
  return all_pass ? 0 : 1;
}

int run_moments(const CommonOpts& c, const ArchOpts& a,
                const std::string& recursion, std::size_t order,
                bool sign_flip, std::size_t layer, std::size_t power,
                std::size_t layers) {
  std::vector<nlohmann::json> records;
  std::ostringstream csv;
  bool all_pass = true;
  if (!recursion.empty()) {
    echo_config("moments", {{"recursion", recursion},
                            {"width", a.width},
                            {"layers", layers},
                            {"draws", c.draws},
                            {"seed", c.seed}});
    const ChainKind kind =
        recursion == "linear" ? ChainKind::Linear : ChainKind::Relu;
    const auto reports =
        check_norm_recursion(kind, a.width, layers, c.draws, {c.seed, 2});
    csv << "layer,moment_order,observed,stderr,predicted,pass\n";
    for (const auto& r : reports) {
      all_pass = all_pass && r.pass;
      csv << r.layer << ',' << r.moment_order << ','
          << format_double(r.observed_ratio.value) << ','
          << format_double(r.observed_ratio.stderr) << ','
          << format_double(r.predicted_ratio) << ',' << (r.pass ? 1 : 0)
          << '\n';
      records.push_back({{"layer", r.layer},
                         {"moment_order", r.moment_order},
                         {"observed", r.observed_ratio.value},
                         {"stderr", r.observed_ratio.stderr},
                         {"predicted", r.predicted_ratio},
                         {"pass", r.pass}});
      std::printf("layer %zu order %zu ratio %.5f (pred %.5f) %s\n", r.layer,
                  r.moment_order, r.observed_ratio.value, r.predicted_ratio,
                  r.pass ? "pass" : "FAIL");
    }
  } else if (sign_flip) {
    const ArchitectureSpec spec = build_from_opts(a, a.depth);
    const Vector x =
        gen_inputs(a.input_dim, RngStream{c.seed, 0}.derived(1)).first;
    echo_config("moments", {{"arch", arch_to_json(spec)},
                            {"sign_flip", true},
                            {"layer", layer},
                            {"power", power},
                            {"draws", c.draws},
                            {"seed", c.seed}});
    const MomentEstimate est =
        check_weight_mask_moment(spec, x, layer, power, c.draws, {c.seed, 3});
    std::optional<double> predicted;
    if (power == 2) predicted = 0.5;
    if (power == 4) predicted = 1.5;
    if (power % 2 == 1 && layer == 1) predicted = 0.0;
    bool pass = true;
    if (predicted) {
      pass = std::abs(est.mean() - *predicted) <= 3.0 * est.stderr_of_mean();
      all_pass = pass;
    }
    csv << "layer,power,mean,stderr,predicted,pass\n"
        << layer << ',' << power << ',' << format_double(est.mean()) << ','
        << format_double(est.stderr_of_mean()) << ','
        << (predicted ? format_double(*predicted) : std::string("-")) << ','
        << (pass ? 1 : 0) << '\n';
    nlohmann::json rec = {{"layer", layer},
                          {"power", power},
                          {"estimate", moment_estimate_to_json(est)},
                          {"pass", pass}};
    if (predicted) rec["predicted"] = *predicted;
    records.push_back(rec);
    std::printf("E[w^%zu z] = %.5f +- %.5f %s\n", power, est.mean(),
                est.stderr_of_mean(), pass ? "pass" : "FAIL");
  } else {
    const ArchitectureSpec spec = build_from_opts(a, a.depth);
    const Vector x =
        gen_inputs(a.input_dim, RngStream{c.seed, 0}.derived(1)).first;
    echo_config("moments", {{"arch", arch_to_json(spec)},
                            {"order", order},
                            {"draws", c.draws},
                            {"seed", c.seed}});
    const MomentEstimate est =
        estimate_output_moments(spec, x, order, c.draws, {c.seed, 4});
    csv << "order,mean,stderr,n\n"
        << order << ',' << format_double(est.mean()) << ','
        << format_double(est.stderr_of_mean()) << ',' << est.count() << '\n';
    records.push_back(
        {{"order", order}, {"estimate", moment_estimate_to_json(est)}});
    std::printf("E[f^%zu] = %.6g +- %.2g\n", order, est.mean(),
                est.stderr_of_mean());
  }
  emit(c, csv.str(), records);
  return all_pass ? 0 : 1;
}

int run_kernel(const CommonOpts& c, const ArchOpts& a, std::size_t pairs,
               std::size_t t, bool compare, double tol,
               const std::string& scope_name, const std::string& gram_out) {
  const ArchitectureSpec spec = build_from_opts(a, a.depth);
  const NtkScope scope = scope_from_name(scope_name, spec.kind);
  echo_config("kernel", {{"arch", arch_to_json(spec)},
                         {"pairs", pairs},
                         {"T", t},
                         {"compare_empirical", compare},
                         {"tol", tol},
                         {"scope", scope_name},
                         {"seed", c.seed},
                         {"format", c.format}});
  std::vector<Vector> xs;
  for (std::size_t p = 0; p < pairs; ++p) {
    const auto [x, xp] =
        gen_inputs(a.input_dim, RngStream{c.seed, 0}.derived(10 + p));
    xs.push_back(x);
    xs.push_back(xp);
  }
  const Matrix limit = limit_gram(spec, xs);
  GramMatrix avg;
  if (compare) avg = avg_ntk_gram(spec, xs, {c.seed, 100}, t, scope);

  if (!gram_out.empty()) {
    const GramMatrix lim_gram{xs.size(), limit};
    if (c.format == "csv") {
      write_text_file(gram_out, gram_to_csv(lim_gram));
      if (compare) write_text_file(gram_out + ".empirical", gram_to_csv(avg));
    } else {
      std::ostringstream lines;
      nlohmann::json jl = gram_to_json(lim_gram);
      jl["kind"] = "limit";
      lines << jl.dump() << '\n';
      if (compare) {
        nlohmann::json je = gram_to_json(avg);
        je["kind"] = "empirical";
        lines << je.dump() << '\n';
      }
      write_text_file(gram_out, lines.str());
    }
  }

  std::ostringstream csv;
  csv << "pair,entry,limit" << (compare ? ",empirical,rel_err" : "") << '\n';
  std::vector<nlohmann::json> records;
  bool all_pass = true;
  const char* names[3] = {"xx", "xy", "yy"};
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::size_t i = 2 * p, j = 2 * p + 1;
    const std::size_t rows[3] = {i, i, j};
    const std::size_t cols[3] = {i, j, j};
    const double diag = std::max(limit(i, i), limit(j, j));
    for (int e = 0; e < 3; ++e) {
      const double lim = limit(rows[e], cols[e]);
      csv << p << ',' << names[e] << ',' << format_double(lim);
      nlohmann::json rec = {{"pair", p}, {"entry", names[e]}, {"limit", lim}};
      if (compare) {
        const double emp = avg.entries(rows[e], cols[e]);
        const double rel = std::abs(emp - lim) / diag;
        all_pass = all_pass && rel <= tol;
        csv << ',' << format_double(emp) << ',' << format_double(rel);
        rec["empirical"] = emp;
        rec["rel_err"] = rel;
        std::printf("pair %zu %s limit %.6g empirical %.6g rel %.4f %s\n", p,
                    names[e], lim, emp, rel, rel <= tol ? "pass" : "FAIL");
      } else {
        std::printf("pair %zu %s limit %.6g\n", p, names[e], lim);
      }
      csv << '\n';
      records.push_back(rec);
    }
  }
  emit(c, csv.str(), records);
  return all_pass ? 0 : 1;
}

struct RegressOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> t;
  std::optional<std::size_t> repeats;
  std::optional<std::string> kernel;
};

int run_regress(const CommonOpts& c, const std::string& config_path,
                const RegressOverrides& over) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "cannot open config '" << config_path << "'\n";
    return 2;
  }
  nlohmann::json j;
  in >> j;
  ExperimentConfig config = experiment_config_from_json(j);
  if (over.seed) config.seed = *over.seed;
  if (over.t) config.t = *over.t;
  if (over.repeats) config.repeats = *over.repeats;
  if (over.kernel) {
    config.kernel = *over.kernel == "empirical" ? KernelSource::Empirical
                                                : KernelSource::Limit;
  }
  echo_config("regress", experiment_config_to_json(config));
  const auto results = run_experiment(config);
  std::vector<nlohmann::json> records;
  for (const auto& r : results) {
    records.push_back(cell_result_to_json(r));
    std::printf("%s n=%zu L=%zu acc %.4f +- %.4f (jitter %.3g)\n",
                kind_name(r.arch.kind).c_str(), r.arch.width, r.arch.depth,
                r.mean_accuracy, r.std_accuracy, r.jitter_used);
  }
  emit(c, cell_results_to_csv(results), records);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-width NTK toolkit: exact kernels, infinite-width "
               "limits, moment dualities, and kernel regression"};
  app.require_subcommand(1);

  CommonOpts common;
  ArchOpts arch;

  auto* variance = app.add_subcommand(
      "variance", "Normalized NTK variance sweep over depth/width grids");
  std::vector<std::size_t> depths = {2, 4};
  std::vector<std::size_t> widths;
  double alpha_total = 0.1;
  add_common(variance, common);
  add_arch(variance, arch, false);
  variance->add_option("--depths", depths, "Depth grid")->delimiter(',');
  variance->add_option("--widths", widths, "Width grid (defaults to --width)")
      ->delimiter(',');
  variance->add_option("--alpha-total", alpha_total,
                       "ResNet total coefficient; per layer = total/L");

  auto* duality = app.add_subcommand(
      "duality", "Reduced-network moment equality and Jacobian sandwich");
  std::vector<std::size_t> k_fields = {1, 1};
  std::size_t order = 2, draws2 = 0;
  add_common(duality, common);
  add_arch(duality, arch);
  duality->add_option("--k", k_fields, "Weight index: layer,sublayer")
      ->delimiter(',');
  duality->add_option("--order", order, "Moment order (2 or 4)");
  duality->add_option("--draws2", draws2,
                      "Order-2 draw count (defaults to --draws)");

  auto* moments = app.add_subcommand(
      "moments", "Output moments, norm-moment recursions, masked weights");
  std::string recursion;
  bool sign_flip = false;
  std::size_t layer = 1, power = 2, layers = 3;
  add_common(moments, common);
  add_arch(moments, arch);
  moments->add_option("--order", order, "Output moment order");
  moments->add_option("--recursion", recursion,
                      "Chain kind for per-layer norm ratios: relu | linear")
      ->check(CLI::IsMember({"relu", "linear"}));
  moments->add_option("--layers", layers, "Chain depth for --recursion");
  moments->add_flag("--sign-flip", sign_flip,
                    "Estimate E[w^power z] at a ReLU site");
  moments->add_option("--layer", layer, "Layer of the ReLU site");
  moments->add_option("--power", power, "Weight power for --sign-flip");

  auto* kernel = app.add_subcommand(
      "kernel", "Limit kernels, optionally against the averaged empirical NTK");
  std::size_t pairs = 5, t = 10;
  bool compare = false;
  double tol = 0.05;
  std::string scope_name = "auto";
  add_common(kernel, common);
  add_arch(kernel, arch);
  kernel->add_option("--pairs", pairs, "Number of generated input pairs");
  kernel->add_option("--T", t, "Weight draws averaged into the empirical NTK");
  kernel->add_flag("--compare-empirical", compare,
                   "Also compute the averaged empirical kernel");
  kernel->add_option("--tol", tol,
                     "Relative error gate for --compare-empirical");
  kernel->add_option("--scope", scope_name,
                     "Weight matrices in the empirical sum: auto | all | "
                     "body | no-input")
      ->check(CLI::IsMember({"auto", "all", "body", "no-input"}));
  std::string gram_out;
  kernel->add_option("--gram-out", gram_out,
                     "Also write the full Gram matrices to this path");

  auto* regress = app.add_subcommand(
      "regress", "Kernel regression over random gradient features");
  std::string config_path;
  std::size_t regress_t = 0, regress_repeats = 0;
  std::string regress_kernel;
  add_common(regress, common);
  regress->add_option("--config", config_path, "Experiment JSON config")
      ->required();
  regress->add_option("--T", regress_t, "Override the config's T");
  regress->add_option("--repeats", regress_repeats,
                      "Override the config's repeats");
  regress->add_option("--kernel", regress_kernel,
                      "Override the config's kernel: limit | empirical")
      ->check(CLI::IsMember({"limit", "empirical"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (common.threads > 0) set_max_threads(common.threads);

  try {
    if (variance->parsed()) {
      return run_variance(common, arch, depths, widths, alpha_total);
    }
    if (duality->parsed()) {
      if (k_fields.size() != 2) {
        std::cerr << "--k expects layer,sublayer\n";
        return 2;
      }
      return run_duality(common, arch, {k_fields[0], k_fields[1]}, order,
                         draws2);
    }
    if (moments->parsed()) {
      return run_moments(common, arch, recursion, order, sign_flip, layer,
                         power, layers);
    }
    if (kernel->parsed()) {
      return run_kernel(common, arch, pairs, t, compare, tol, scope_name,
                        gram_out);
    }
    if (regress->parsed()) {
      RegressOverrides over;
      if (regress->count("--seed") > 0) over.seed = common.seed;
      if (regress->count("--T") > 0) over.t = regress_t;
      if (regress->count("--repeats") > 0) over.repeats = regress_repeats;
      if (regress->count("--kernel") > 0) over.kernel = regress_kernel;
      return run_regress(common, config_path, over);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
