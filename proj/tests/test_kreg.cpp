#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "resntk/errors.hpp"
#include "resntk/kreg.hpp"
#include "resntk/limit_kernel.hpp"
#include "resntk/net.hpp"

using namespace resntk;

namespace {

std::string write_temp_csv(const std::string& name, const std::string& body) {
  const std::string path = std::string("/tmp/") + name;
  std::ofstream out(path);
  out << body;
  return path;
}

std::vector<Vector> dataset_rows(const Dataset& ds) {
  std::vector<Vector> rows;
  for (std::size_t i = 0; i < ds.features.rows; ++i) {
    Vector r(ds.features.cols);
    for (std::size_t j = 0; j < ds.features.cols; ++j) r[j] = ds.features(i, j);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

TEST_CASE("load_csv_dataset maps labels in first-appearance order") {
  const std::string path = write_temp_csv(
      "kreg_basic.csv", "f1,f2,label\n3,4,a\n1,0,b\n0,2,a\n");
  const Dataset ds = load_csv_dataset(path, "label");
  CHECK(ds.class_count == 2);
  CHECK(ds.labels == std::vector<std::size_t>{0, 1, 0});
  CHECK(ds.label_names == std::vector<std::string>{"a", "b"});
  CHECK(ds.features(0, 0) == doctest::Approx(0.6));
  CHECK(ds.features(0, 1) == doctest::Approx(0.8));
  CHECK(ds.features(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("load_csv_dataset reports parse failures with file coordinates") {
  const std::string path = write_temp_csv(
      "kreg_bad.csv", "f1,f2,label\n1,2,a\n1,oops,b\n");
  try {
    load_csv_dataset(path, "label");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
    CHECK(e.column == 2);
  }
  const std::string zero = write_temp_csv(
      "kreg_zero.csv", "f1,f2,label\n0,0,a\n1,1,b\n");
  CHECK_THROWS_AS(load_csv_dataset(zero, "label"), ZeroRow);
  CHECK_THROWS_AS(load_csv_dataset(path, "missing"), ParseError);
}

TEST_CASE("gen_synthetic is seeded and respects the geometry") {
  const Dataset a = gen_synthetic(2, 32, 50, 1.0, {1, 1});
  const Dataset b = gen_synthetic(2, 32, 50, 1.0, {1, 1});
  CHECK(a.features.data == b.features.data);
  CHECK(a.labels == b.labels);
  CHECK(a.features.rows == 100);
  for (std::size_t i = 0; i < a.features.rows; ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < 32; ++j) sq += a.features(i, j) * a.features(i, j);
    CHECK(std::abs(sq - 1.0) < 1e-10);
  }
  CHECK_THROWS_AS(gen_synthetic(1, 32, 10, 1.0, {1, 2}), InvalidSpec);
  CHECK_THROWS_AS(gen_synthetic(40, 32, 10, 1.0, {1, 2}), InvalidSpec);
}

TEST_CASE("one_hot argmax round-trips") {
  const std::vector<std::size_t> labels = {2, 0, 1, 2};
  const Matrix y = one_hot(labels, 3);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < 3; ++c) {
      if (y(i, c) > y(i, best)) best = c;
    }
    CHECK(best == labels[i]);
  }
}

TEST_CASE("identity gram fits the one-hot targets exactly") {
  Matrix gram(3, 3);
  for (int i = 0; i < 3; ++i) gram(i, i) = 1.0;
  const RegressionModel model = fit(gram, {0, 1, 2}, 3, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(model.dual_weights(i, c) == doctest::Approx(i == c ? 1.0 : 0.0));
    }
  }
  const std::vector<std::size_t> preds = predict(model, gram);
  CHECK(preds == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("duplicated training points need jitter") {
  const Dataset ds = gen_synthetic(2, 8, 4, 1.0, {2, 1});
  std::vector<Vector> rows = dataset_rows(ds);
  rows.push_back(rows[0]);  // exact duplicate
  std::vector<std::size_t> labels = ds.labels;
  labels.push_back(ds.labels[0]);
  const ArchitectureSpec spec = make_densenet(8, 2, 4, 0.5);
  const Matrix gram = limit_gram(spec, rows);
  CHECK_THROWS_AS(fit(gram, labels, 2, 0.0), NotPositiveDefinite);
  CHECK_NOTHROW(fit(gram, labels, 2, 1e-6));
}

TEST_CASE("full-rank limit kernel interpolates the training labels") {
  const Dataset ds = gen_synthetic(2, 16, 10, 1.0, {3, 1});
  const std::vector<Vector> rows = dataset_rows(ds);
  const ArchitectureSpec spec = make_densenet(16, 3, 4, 0.5);
  const Matrix gram = limit_gram(spec, rows);
  const RegressionModel model = fit(gram, ds.labels, 2, 1e-8);
  CHECK(predict(model, gram) == ds.labels);
}

TEST_CASE("all-zero score rows break ties toward class 0") {
  Matrix gram(2, 2);
  gram(0, 0) = gram(1, 1) = 1.0;
  const RegressionModel model = fit(gram, {1, 0}, 3, 0.0);
  Matrix cross(1, 2);  // zero row
  CHECK(predict(model, cross) == std::vector<std::size_t>{0});
}

TEST_CASE("predictions are invariant under joint gram and jitter scaling") {
  const Dataset ds = gen_synthetic(3, 16, 12, 0.8, {4, 1});
  const std::vector<Vector> rows = dataset_rows(ds);
  const ArchitectureSpec spec = make_resnet(16, 2, 4, 2, 0.3);
  Matrix gram = limit_gram(spec, rows);
  Matrix cross(2, rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    cross(0, j) = gram(0, j);
    cross(1, j) = gram(5, j);
  }
  const double jitter = 1e-6;
  const auto base =
      predict(fit(gram, ds.labels, 3, jitter), cross);
  Matrix scaled = gram;
  Matrix scaled_cross = cross;
  for (double& v : scaled.data) v *= 37.5;
  for (double& v : scaled_cross.data) v *= 37.5;
  const auto same =
      predict(fit(scaled, ds.labels, 3, jitter * 37.5), scaled_cross);
  CHECK(base == same);
}

TEST_CASE("synthetic separation controls achievable accuracy") {
  // Nearest-centroid baseline on the separated set.
  const Dataset ds = gen_synthetic(2, 32, 100, 1.0, {5, 1});
  const std::size_t half = 100;
  Vector c0(32, 0.0), c1(32, 0.0);
  for (std::size_t i = 0; i < ds.features.rows; ++i) {
    for (std::size_t j = 0; j < 32; ++j) {
      (ds.labels[i] == 0 ? c0[j] : c1[j]) += ds.features(i, j) / double(half);
    }
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ds.features.rows; ++i) {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t j = 0; j < 32; ++j) {
      const double v = ds.features(i, j);
      d0 += (v - c0[j]) * (v - c0[j]);
      d1 += (v - c1[j]) * (v - c1[j]);
    }
    hits += (d0 < d1 ? 0 : 1) == ds.labels[i];
  }
  CHECK(double(hits) / double(ds.features.rows) >= 0.95);
}

TEST_CASE("run_experiment: limit kernel accuracy and determinism") {
  ExperimentConfig config;
  config.synthetic = true;
  config.synth_classes = 2;
  config.synth_dim = 32;
  config.synth_per_class = 100;
  config.synth_separation = 1.0;
  config.archs = {make_densenet(32, 3, 8, 0.5)};
  config.kernel = KernelSource::Limit;
  config.repeats = 1;
  config.seed = 99;
  const auto results = run_experiment(config);
  REQUIRE(results.size() == 1);
  CHECK(results[0].mean_accuracy >= 0.95);
  CHECK(results[0].std_accuracy == 0.0);
  const auto again = run_experiment(config);
  CHECK(results[0].mean_accuracy == again[0].mean_accuracy);
}

TEST_CASE("run_experiment: chance-level accuracy without separation") {
  ExperimentConfig config;
  config.synthetic = true;
  config.synth_classes = 2;
  config.synth_dim = 16;
  config.synth_per_class = 60;
  config.synth_separation = 0.0;
  config.archs = {make_densenet(16, 2, 8, 0.5)};
  config.kernel = KernelSource::Limit;
  config.repeats = 1;
  config.seed = 7;
  const auto results = run_experiment(config);
  CHECK(results[0].mean_accuracy < 0.75);
}

TEST_CASE("empirical kernel tracks the limit kernel accuracy") {
  ExperimentConfig config;
  config.synthetic = true;
  config.synth_classes = 2;
  config.synth_dim = 32;
  config.synth_per_class = 40;
  config.synth_separation = 1.0;
  config.archs = {make_densenet(32, 3, 64, 0.5)};
  config.kernel = KernelSource::Limit;
  config.repeats = 1;
  config.seed = 3;
  const double limit_acc = run_experiment(config).at(0).mean_accuracy;

  config.kernel = KernelSource::Empirical;
  config.t = 8;
  config.repeats = 5;
  const auto emp = run_experiment(config);
  CHECK(std::abs(emp.at(0).mean_accuracy - limit_acc) <= 0.05);
}

TEST_CASE("experiment config json round-trips") {
  ExperimentConfig config;
  config.synthetic = true;
  config.archs = {make_vanilla(32, 3, 8), make_vanilla(32, 9, 8)};
  config.kernel = KernelSource::Empirical;
  config.t = 4;
  config.repeats = 3;
  config.seed = 11;
  const nlohmann::json j = experiment_config_to_json(config);
  const ExperimentConfig back = experiment_config_from_json(j);
  CHECK(back.archs.size() == 2);
  CHECK(back.kernel == KernelSource::Empirical);
  CHECK(back.t == 4);
  CHECK(back.seed == 11);

  // depths expansion
  const ExperimentConfig grid = experiment_config_from_json(nlohmann::json::parse(R"({
    "dataset": {"synthetic": {"classes": 2, "dim": 8, "per_class": 10}},
    "archs": [{"kind": "resnet", "input_dim": 8, "width": 4,
               "branch_depth": 2, "alphas": 0.05, "depths": [2, 4]}],
    "kernel": "limit", "seed": 5})"));
  REQUIRE(grid.archs.size() == 2);
  CHECK(grid.archs[0].depth == 2);
  CHECK(grid.archs[1].depth == 4);
  CHECK(grid.archs[1].alphas.size() == 4);
}

TEST_CASE("training scores approach one-hot as jitter shrinks") {
  const Dataset ds = gen_synthetic(2, 16, 12, 1.0, {6, 1});
  const std::vector<Vector> rows = dataset_rows(ds);
  const ArchitectureSpec spec = make_densenet(16, 2, 4, 0.5);
  const Matrix gram = limit_gram(spec, rows);
  const Matrix y = one_hot(ds.labels, 2);
  auto max_score_error = [&](double jitter) {
    const RegressionModel model = fit(gram, ds.labels, 2, jitter);
    const Matrix scores = matmul(gram, model.dual_weights);
    double worst = 0.0;
    for (std::size_t i = 0; i < scores.data.size(); ++i) {
      worst = std::max(worst, std::abs(scores.data[i] - y.data[i]));
    }
    return worst;
  };
  const double coarse = max_score_error(1e-3);
  const double fine = max_score_error(1e-7);
  CHECK(fine < coarse);
  CHECK(fine < 1e-4);
}
