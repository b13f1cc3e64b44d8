#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "resntk/duality.hpp"
#include "resntk/kreg.hpp"
#include "resntk/matrix.hpp"
#include "resntk/ntk.hpp"
#include "resntk/variance.hpp"

namespace resntk {

// Shortest round-trippable decimal form; locale-independent.
std::string format_double(double v);

std::string gram_to_csv(const GramMatrix& gram);
nlohmann::json gram_to_json(const GramMatrix& gram);
GramMatrix gram_from_json(const nlohmann::json& j);

std::string alpha_summary(const ArchitectureSpec& spec);

// kind,n,L,m,alpha_summary,diag,draws,mean_g,var_g,normalized_variance,nv_stderr,eta
std::string variance_reports_to_csv(const std::vector<VarianceReport>& reports);
nlohmann::json variance_report_to_json(const VarianceReport& report);

// arch,n,L,k_layer,k_sublayer,order,lhs_mean,rhs_mean,stderr,z,pass
std::string duality_reports_to_csv(const ArchitectureSpec& spec,
                                   const std::vector<DualityReport>& reports);
nlohmann::json duality_report_to_json(const ArchitectureSpec& spec,
                                      const DualityReport& report);

nlohmann::json moment_estimate_to_json(const MomentEstimate& m);

// kind,n,L,T,repeat_count,mean_accuracy,std_accuracy
std::string cell_results_to_csv(const std::vector<CellResult>& results);
nlohmann::json cell_result_to_json(const CellResult& result);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace resntk
