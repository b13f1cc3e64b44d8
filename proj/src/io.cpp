#include "resntk/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "resntk/errors.hpp"

namespace resntk {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string gram_to_csv(const GramMatrix& gram) {
  std::ostringstream out;
  out << "index";
  for (std::size_t j = 0; j < gram.size; ++j) out << ',' << j;
  out << '\n';
  for (std::size_t i = 0; i < gram.size; ++i) {
    out << i;
    for (std::size_t j = 0; j < gram.size; ++j) {
      out << ',' << format_double(gram.entries(i, j));
    }
    out << '\n';
  }
  return out.str();
}

nlohmann::json gram_to_json(const GramMatrix& gram) {
  nlohmann::json j;
  j["size"] = gram.size;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < gram.size; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < gram.size; ++c) row.push_back(gram.entries(i, c));
    rows.push_back(std::move(row));
  }
  j["entries"] = std::move(rows);
  return j;
}

GramMatrix gram_from_json(const nlohmann::json& j) {
  GramMatrix gram;
  gram.size = j.at("size").get<std::size_t>();
  gram.entries = Matrix(gram.size, gram.size);
  const auto& rows = j.at("entries");
  for (std::size_t i = 0; i < gram.size; ++i) {
    for (std::size_t c = 0; c < gram.size; ++c) {
      gram.entries(i, c) = rows.at(i).at(c).get<double>();
    }
  }
  return gram;
}

std::string alpha_summary(const ArchitectureSpec& spec) {
  if (spec.kind == ArchKind::Vanilla) return "-";
  if (spec.kind == ArchKind::DenseNet) return format_double(spec.alphas[0]);
  // Constant coefficients collapse to one value.
  bool constant = true;
  for (double a : spec.alphas) constant &= a == spec.alphas[0];
  if (constant) return format_double(spec.alphas[0]);
  std::string out;
  for (std::size_t i = 0; i < spec.alphas.size(); ++i) {
    if (i) out += ';';
    out += format_double(spec.alphas[i]);
  }
  return out;
}

std::string variance_reports_to_csv(
    const std::vector<VarianceReport>& reports) {
  std::ostringstream out;
  out << "kind,n,L,m,alpha_summary,diag,draws,mean_g,var_g,"
         "normalized_variance,nv_stderr,eta\n";
  for (const auto& r : reports) {
    const double var_g =
        r.normalized_variance * r.mean_g.mean() * r.mean_g.mean();
    out << kind_name(r.arch.kind) << ',' << r.arch.width << ','
        << r.arch.depth << ','
        << (r.arch.kind == ArchKind::ResNet
                ? std::to_string(r.arch.branch_depth)
                : std::string("-"))
        << ',' << alpha_summary(r.arch) << ',' << (r.diag ? 1 : 0) << ','
        << r.n_draws << ',' << format_double(r.mean_g.mean()) << ','
        << format_double(var_g) << ','
        << format_double(r.normalized_variance) << ','
        << format_double(r.normalized_variance_stderr) << ','
        << format_double(r.eta) << '\n';
  }
  return out.str();
}

nlohmann::json variance_report_to_json(const VarianceReport& r) {
  nlohmann::json j;
  j["arch"] = arch_to_json(r.arch);
  j["diag"] = r.diag;
  j["n_draws"] = r.n_draws;
  j["mean_g"] = moment_estimate_to_json(r.mean_g);
  j["normalized_variance"] = r.normalized_variance;
  j["normalized_variance_stderr"] = r.normalized_variance_stderr;
  j["eta"] = r.eta;
  // The eta bounds are proved for diagonal entries only.
  if (!r.diag) j["eta_label"] = "empirical extension";
  return j;
}

std::string duality_reports_to_csv(const ArchitectureSpec& spec,
                                   const std::vector<DualityReport>& reports) {
  std::ostringstream out;
  out << "arch,n,L,k_layer,k_sublayer,order,lhs_mean,rhs_mean,stderr,z,pass\n";
  for (const auto& r : reports) {
    const double sa = r.lhs.stderr_of_mean();
    const double sb = r.rhs.stderr_of_mean();
    out << kind_name(spec.kind) << ',' << spec.width << ',' << spec.depth
        << ',' << r.k.layer << ',' << r.k.sublayer << ',' << r.moment_order
        << ',' << format_double(r.lhs.mean()) << ','
        << format_double(r.rhs.mean()) << ','
        << format_double(std::sqrt(sa * sa + sb * sb)) << ','
        << format_double(r.z_score) << ',' << (r.pass ? 1 : 0) << '\n';
  }
  return out.str();
}

nlohmann::json moment_estimate_to_json(const MomentEstimate& m) {
  return {{"n_samples", m.count()},
          {"mean", m.mean()},
          {"second_central_moment", m.second_central_moment()},
          {"stderr_of_mean", m.stderr_of_mean()}};
}

nlohmann::json duality_report_to_json(const ArchitectureSpec& spec,
                                      const DualityReport& r) {
  nlohmann::json j;
  j["arch"] = arch_to_json(spec);
  j["k"] = {{"layer", r.k.layer}, {"sublayer", r.k.sublayer}};
  j["moment_order"] = r.moment_order;
  j["lhs"] = moment_estimate_to_json(r.lhs);
  j["rhs"] = moment_estimate_to_json(r.rhs);
  if (r.sandwich_lower) j["sandwich_lower"] = *r.sandwich_lower;
  j["z_score"] = r.z_score;
  j["pass"] = r.pass;
  return j;
}

std::string cell_results_to_csv(const std::vector<CellResult>& results) {
  std::ostringstream out;
  out << "kind,n,L,T,repeat_count,mean_accuracy,std_accuracy\n";
  for (const auto& r : results) {
    out << kind_name(r.arch.kind) << ',' << r.arch.width << ','
        << r.arch.depth << ','
        << (r.kernel == KernelSource::Empirical ? std::to_string(r.t)
                                                : std::string("limit"))
        << ',' << r.repeats << ',' << format_double(r.mean_accuracy) << ','
        << format_double(r.std_accuracy) << '\n';
  }
  return out.str();
}

nlohmann::json cell_result_to_json(const CellResult& r) {
  nlohmann::json j;
  j["arch"] = arch_to_json(r.arch);
  j["kernel"] = r.kernel == KernelSource::Empirical ? "empirical" : "limit";
  j["T"] = r.t;
  j["repeats"] = r.repeats;
  j["mean_accuracy"] = r.mean_accuracy;
  j["std_accuracy"] = r.std_accuracy;
  j["jitter"] = r.jitter_used;
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

}  // namespace resntk
