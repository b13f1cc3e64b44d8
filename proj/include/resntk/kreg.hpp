#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "resntk/arch.hpp"
#include "resntk/matrix.hpp"
#include "resntk/ntk.hpp"
#include "resntk/rng.hpp"

namespace resntk {

struct Dataset {
  Matrix features;  // rows are unit-norm samples
  std::vector<std::size_t> labels;
  std::size_t class_count = 0;
  std::vector<std::string> label_names;  // dense id -> original label
};

// CSV with a header row; all non-label columns must be numeric. Rows are
// normalized to unit norm; labels are mapped to dense ids in first-appearance
// order.
Dataset load_csv_dataset(const std::string& path,
                         const std::string& label_column);

// Gaussian blobs: class c is N(mu_c, I) with mean vectors at pairwise
// distance separation·√dim, rows normalized. Requires classes ≤ dim.
Dataset gen_synthetic(std::size_t classes, std::size_t dim,
                      std::size_t per_class, double separation,
                      const RngStream& rng);

Matrix one_hot(const std::vector<std::size_t>& labels, std::size_t class_count);

struct RegressionModel {
  Matrix dual_weights;  // m × k, (H + jitter·I)⁻¹·Y
  double jitter = 0.0;
};

// Closed-form fit: dual_weights = spd_solve(gram, one_hot(labels), jitter).
RegressionModel fit(const Matrix& gram_train,
                    const std::vector<std::size_t>& labels,
                    std::size_t class_count, double jitter);

// argmax of gram_cross · dual_weights per row; ties break to the lowest id.
std::vector<std::size_t> predict(const RegressionModel& model,
                                 const Matrix& gram_cross);

double accuracy(const std::vector<std::size_t>& predicted,
                const std::vector<std::size_t>& truth);

enum class KernelSource { Empirical, Limit };

struct ExperimentConfig {
  // Dataset: either a CSV path or synthetic parameters.
  std::string csv_path;
  std::string label_column = "label";
  bool synthetic = false;
  std::size_t synth_classes = 2;
  std::size_t synth_dim = 32;
  std::size_t synth_per_class = 100;
  double synth_separation = 1.0;

  std::vector<ArchitectureSpec> archs;
  KernelSource kernel = KernelSource::Limit;
  std::size_t t = 1;        // draws averaged into the empirical kernel
  std::size_t repeats = 1;  // independent weight samplings
  double split = 0.7;       // train fraction
  double jitter_relative = 1e-8;  // jitter = rel · trace(H)/m
  double jitter_absolute = -1.0;  // overrides relative when >= 0
  std::uint64_t seed = 1;
  NtkScope scope = NtkScope::All;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);

struct CellResult {
  ArchitectureSpec arch;
  KernelSource kernel = KernelSource::Limit;
  std::size_t t = 1;
  std::size_t repeats = 1;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double jitter_used = 0.0;
};

// Per-arch mean/std accuracy over `repeats` independent weight samplings,
// deterministic in the master seed.
std::vector<CellResult> run_experiment(const ExperimentConfig& config);

}  // namespace resntk
