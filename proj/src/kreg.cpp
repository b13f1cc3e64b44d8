#include "resntk/kreg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "resntk/errors.hpp"
#include "resntk/limit_kernel.hpp"
#include "resntk/net.hpp"
#include "resntk/parallel.hpp"

namespace resntk {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? ""
                                            : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_cell(const std::string& cell, std::size_t line,
                  std::size_t column) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || cell.empty()) {
    throw ParseError("invalid numeric cell '" + cell + "'", line, column);
  }
  return value;
}

void normalize_row(Matrix& features, std::size_t row, std::size_t file_line) {
  double sq = 0.0;
  for (std::size_t j = 0; j < features.cols; ++j) {
    sq += features(row, j) * features(row, j);
  }
  if (sq == 0.0) {
    throw ZeroRow("feature row at line " + std::to_string(file_line) +
                  " is all zeros and cannot be normalized");
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (std::size_t j = 0; j < features.cols; ++j) features(row, j) *= inv;
}

std::vector<Vector> rows_of(const Matrix& m, const std::vector<std::size_t>& idx) {
  std::vector<Vector> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) {
    Vector row(m.cols);
    for (std::size_t j = 0; j < m.cols; ++j) row[j] = m(i, j);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

Dataset load_csv_dataset(const std::string& path,
                         const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 1, 1);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file", 1, 1);
  const std::vector<std::string> header = split_csv_line(line);
  std::size_t label_idx = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == label_column) label_idx = i;
  }
  if (label_idx == header.size()) {
    throw ParseError("label column '" + label_column + "' not found", 1, 1);
  }
  const std::size_t dim = header.size() - 1;

  std::vector<double> values;
  std::vector<std::string> raw_labels;
  std::size_t file_line = 1;
  std::vector<std::size_t> row_lines;
  while (std::getline(in, line)) {
    ++file_line;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) +
                           " fields, got " + std::to_string(fields.size()),
                       file_line, 1);
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i == label_idx) {
        raw_labels.push_back(fields[i]);
      } else {
        values.push_back(parse_cell(fields[i], file_line, i + 1));
      }
    }
    row_lines.push_back(file_line);
  }

  Dataset ds;
  const std::size_t count = raw_labels.size();
  ds.features = Matrix(count, dim);
  ds.features.data = std::move(values);
  ds.labels.reserve(count);
  for (const std::string& name : raw_labels) {
    auto it = std::find(ds.label_names.begin(), ds.label_names.end(), name);
    if (it == ds.label_names.end()) {
      ds.label_names.push_back(name);
      ds.labels.push_back(ds.label_names.size() - 1);
    } else {
      ds.labels.push_back(std::size_t(it - ds.label_names.begin()));
    }
  }
  ds.class_count = ds.label_names.size();
  for (std::size_t r = 0; r < count; ++r) {
    normalize_row(ds.features, r, row_lines[r]);
  }
  return ds;
}

Dataset gen_synthetic(std::size_t classes, std::size_t dim,
                      std::size_t per_class, double separation,
                      const RngStream& rng) {
  if (classes < 2) throw InvalidSpec("gen_synthetic: classes must be >= 2");
  if (classes > dim) {
    throw InvalidSpec("gen_synthetic: needs classes <= dim for mean placement");
  }
  // Means on orthogonal axes at pairwise distance separation·√dim.
  const double radius = separation * std::sqrt(double(dim)) / kSqrt2;
  Dataset ds;
  ds.class_count = classes;
  ds.features = Matrix(classes * per_class, dim);
  ds.labels.resize(classes * per_class);
  for (std::size_t c = 0; c < classes; ++c) {
    ds.label_names.push_back(std::to_string(c));
  }
  RandomSequence seq(rng);
  std::size_t row = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t s = 0; s < per_class; ++s, ++row) {
      for (std::size_t j = 0; j < dim; ++j) {
        ds.features(row, j) = seq.next_gaussian() + (j == c ? radius : 0.0);
      }
      ds.labels[row] = c;
      normalize_row(ds.features, row, row + 1);
    }
  }
  return ds;
}

Matrix one_hot(const std::vector<std::size_t>& labels,
               std::size_t class_count) {
  Matrix y(labels.size(), class_count);
  for (std::size_t i = 0; i < labels.size(); ++i) y(i, labels[i]) = 1.0;
  return y;
}

RegressionModel fit(const Matrix& gram_train,
                    const std::vector<std::size_t>& labels,
                    std::size_t class_count, double jitter) {
  if (gram_train.rows != gram_train.cols ||
      gram_train.rows != labels.size()) {
    throw ShapeMismatch("fit: gram size does not match label count");
  }
  RegressionModel model;
  model.jitter = jitter;
  model.dual_weights =
      spd_solve(gram_train, one_hot(labels, class_count), jitter);
  return model;
}

std::vector<std::size_t> predict(const RegressionModel& model,
                                 const Matrix& gram_cross) {
  if (gram_cross.cols != model.dual_weights.rows) {
    throw ShapeMismatch("predict: cross-gram columns must match train size");
  }
  const Matrix scores = matmul(gram_cross, model.dual_weights);
  std::vector<std::size_t> out(scores.rows);
  for (std::size_t i = 0; i < scores.rows; ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.cols; ++c) {
      if (scores(i, c) > scores(i, best)) best = c;
    }
    out[i] = best;
  }
  return out;
}

double accuracy(const std::vector<std::size_t>& predicted,
                const std::vector<std::size_t>& truth) {
  if (predicted.size() != truth.size() || predicted.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == truth[i]) ++hits;
  }
  return double(hits) / double(predicted.size());
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  const auto& d = j.at("dataset");
  if (d.contains("path")) {
    c.csv_path = d.at("path").get<std::string>();
    if (d.contains("label_column")) {
      c.label_column = d.at("label_column").get<std::string>();
    }
  } else {
    const auto& s = d.at("synthetic");
    c.synthetic = true;
    c.synth_classes = s.value("classes", c.synth_classes);
    c.synth_dim = s.value("dim", c.synth_dim);
    c.synth_per_class = s.value("per_class", c.synth_per_class);
    c.synth_separation = s.value("separation", c.synth_separation);
  }
  for (const auto& a : j.at("archs")) {
    if (a.contains("depths")) {
      for (const auto& depth : a.at("depths")) {
        nlohmann::json one = a;
        one.erase("depths");
        one["depth"] = depth.get<std::size_t>();
        c.archs.push_back(arch_from_json(one));
      }
    } else {
      c.archs.push_back(arch_from_json(a));
    }
  }
  const std::string kernel = j.value("kernel", std::string("limit"));
  c.kernel = kernel == "empirical" ? KernelSource::Empirical
                                   : KernelSource::Limit;
  c.t = j.value("T", c.t);
  c.repeats = j.value("repeats", c.repeats);
  c.split = j.value("split", c.split);
  if (j.contains("jitter")) {
    const auto& jit = j.at("jitter");
    if (jit.is_number()) {
      c.jitter_absolute = jit.get<double>();
    } else {
      c.jitter_relative = jit.value("relative", c.jitter_relative);
      if (jit.contains("absolute")) {
        c.jitter_absolute = jit.at("absolute").get<double>();
      }
    }
  }
  c.seed = j.value("seed", c.seed);
  const std::string scope = j.value("scope", std::string("all"));
  c.scope = scope == "body" ? NtkScope::BodyOnly
            : scope == "no-input" ? NtkScope::ExcludeInput
                                  : NtkScope::All;
  return c;
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  if (c.synthetic) {
    j["dataset"] = {{"synthetic",
                     {{"classes", c.synth_classes},
                      {"dim", c.synth_dim},
                      {"per_class", c.synth_per_class},
                      {"separation", c.synth_separation}}}};
  } else {
    j["dataset"] = {{"path", c.csv_path}, {"label_column", c.label_column}};
  }
  j["archs"] = nlohmann::json::array();
  for (const auto& a : c.archs) j["archs"].push_back(arch_to_json(a));
  j["kernel"] = c.kernel == KernelSource::Empirical ? "empirical" : "limit";
  j["T"] = c.t;
  j["repeats"] = c.repeats;
  j["split"] = c.split;
  if (c.jitter_absolute >= 0.0) {
    j["jitter"] = {{"absolute", c.jitter_absolute}};
  } else {
    j["jitter"] = {{"relative", c.jitter_relative}};
  }
  j["seed"] = c.seed;
  j["scope"] = c.scope == NtkScope::BodyOnly      ? "body"
               : c.scope == NtkScope::ExcludeInput ? "no-input"
                                                   : "all";
  return j;
}

std::vector<CellResult> run_experiment(const ExperimentConfig& config) {
  const RngStream master{config.seed, 0};
  Dataset ds = config.synthetic
                   ? gen_synthetic(config.synth_classes, config.synth_dim,
                                   config.synth_per_class,
                                   config.synth_separation,
                                   master.derived(0xDA7A))
                   : load_csv_dataset(config.csv_path, config.label_column);

  // Seeded permutation split.
  const std::size_t count = ds.features.rows;
  std::vector<std::size_t> perm(count);
  std::iota(perm.begin(), perm.end(), 0);
  RandomSequence shuffle(master.derived(0x5B117));
  for (std::size_t i = count; i > 1; --i) {
    std::swap(perm[i - 1], perm[std::size_t(shuffle.next_u64() % i)]);
  }
  const std::size_t train_count =
      std::max<std::size_t>(1, std::size_t(config.split * double(count)));
  const std::vector<std::size_t> train_idx(perm.begin(),
                                           perm.begin() + train_count);
  const std::vector<std::size_t> test_idx(perm.begin() + train_count,
                                          perm.end());
  const std::vector<Vector> train_x = rows_of(ds.features, train_idx);
  const std::vector<Vector> test_x = rows_of(ds.features, test_idx);
  std::vector<std::size_t> train_y, test_y;
  for (std::size_t i : train_idx) train_y.push_back(ds.labels[i]);
  for (std::size_t i : test_idx) test_y.push_back(ds.labels[i]);

  std::vector<CellResult> results;
  for (std::size_t cell = 0; cell < config.archs.size(); ++cell) {
    const ArchitectureSpec& spec = config.archs[cell];
    const RngStream cell_rng = master.derived(0xCE11).derived(cell);
    const std::size_t repeats = config.repeats;

    std::vector<double> accs(repeats, 0.0);
    double jitter_used = 0.0;
    Matrix limit_train, limit_cross;
    if (config.kernel == KernelSource::Limit) {
      limit_train = limit_gram(spec, train_x);
      limit_cross = limit_cross_gram(spec, test_x, train_x);
    }
    for (std::size_t r = 0; r < repeats; ++r) {
      Matrix train_gram, cross_gram;
      if (config.kernel == KernelSource::Limit) {
        train_gram = limit_train;
        cross_gram = limit_cross;
      } else {
        const SplitGrams grams =
            avg_ntk_grams_split(spec, train_x, test_x,
                                cell_rng.derived(r).derived(0x12AB), config.t,
                                config.scope);
        train_gram = grams.train;
        cross_gram = grams.cross;
      }
      double jitter = config.jitter_absolute;
      if (jitter < 0.0) {
        double trace = 0.0;
        for (std::size_t i = 0; i < train_gram.rows; ++i) {
          trace += train_gram(i, i);
        }
        jitter = config.jitter_relative * trace / double(train_gram.rows);
      }
      jitter_used = jitter;
      const RegressionModel model =
          fit(train_gram, train_y, ds.class_count, jitter);
      accs[r] = accuracy(predict(model, cross_gram), test_y);
    }
    CellResult res;
    res.arch = spec;
    res.kernel = config.kernel;
    res.t = config.t;
    res.repeats = repeats;
    res.jitter_used = jitter_used;
    double mean = 0.0;
    for (double a : accs) mean += a;
    mean /= double(repeats);
    double var = 0.0;
    for (double a : accs) var += (a - mean) * (a - mean);
    res.mean_accuracy = mean;
    res.std_accuracy = repeats > 1 ? std::sqrt(var / double(repeats - 1)) : 0.0;
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace resntk
