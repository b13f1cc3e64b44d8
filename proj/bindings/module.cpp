#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "resntk/duality.hpp"
#include "resntk/errors.hpp"
#include "resntk/io.hpp"
#include "resntk/kreg.hpp"
#include "resntk/limit_kernel.hpp"
#include "resntk/net.hpp"
#include "resntk/ntk.hpp"
#include "resntk/parallel.hpp"
#include "resntk/variance.hpp"

namespace py = pybind11;
using namespace resntk;

namespace {

Vector to_vector(const py::array_t<double>& arr) {
  const auto buf = arr.request();
  if (buf.ndim != 1) throw ShapeMismatch("expected a 1-d array");
  const double* data = static_cast<const double*>(buf.ptr);
  return Vector(data, data + buf.shape[0]);
}

std::vector<Vector> to_rows(const py::array_t<double>& arr) {
  const auto buf = arr.request();
  if (buf.ndim != 2) throw ShapeMismatch("expected a 2-d array");
  const double* data = static_cast<const double*>(buf.ptr);
  std::vector<Vector> rows(buf.shape[0]);
  for (py::ssize_t i = 0; i < buf.shape[0]; ++i) {
    rows[i].assign(data + i * buf.shape[1], data + (i + 1) * buf.shape[1]);
  }
  return rows;
}

py::array_t<double> from_matrix(const Matrix& m) {
  py::array_t<double> out({m.rows, m.cols});
  std::copy(m.data.begin(), m.data.end(), out.mutable_data());
  return out;
}

Matrix to_matrix(const py::array_t<double>& arr) {
  const auto buf = arr.request();
  if (buf.ndim != 2) throw ShapeMismatch("expected a 2-d array");
  Matrix m(buf.shape[0], buf.shape[1]);
  const double* data = static_cast<const double*>(buf.ptr);
  std::copy(data, data + m.data.size(), m.data.begin());
  return m;
}

NtkScope parse_scope(const std::string& name) {
  if (name == "all") return NtkScope::All;
  if (name == "body") return NtkScope::BodyOnly;
  if (name == "no-input") return NtkScope::ExcludeInput;
  throw InvalidSpec("scope must be all | body | no-input");
}

py::dict moment_dict(const MomentEstimate& est) {
  py::dict d;
  d["n_samples"] = est.count();
  d["mean"] = est.mean();
  d["second_central_moment"] = est.second_central_moment();
  d["stderr_of_mean"] = est.stderr_of_mean();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Finite-width neural tangent kernels of vanilla, residual and "
            "densely connected ReLU networks, with their infinite-width "
            "limits and kernel regression utilities";

  py::class_<WeightIndex>(m, "WeightIndex")
      .def(py::init<std::size_t, std::size_t>(), py::arg("layer"),
           py::arg("sublayer") = 0)
      .def_readwrite("layer", &WeightIndex::layer)
      .def_readwrite("sublayer", &WeightIndex::sublayer)
      .def("__repr__", [](const WeightIndex& k) {
        return "WeightIndex(layer=" + std::to_string(k.layer) +
               ", sublayer=" + std::to_string(k.sublayer) + ")";
      });

  py::class_<ArchitectureSpec>(m, "ArchitectureSpec")
      .def_property_readonly("kind", [](const ArchitectureSpec& s) {
        return kind_name(s.kind);
      })
      .def_readonly("input_dim", &ArchitectureSpec::input_dim)
      .def_readonly("depth", &ArchitectureSpec::depth)
      .def_readonly("width", &ArchitectureSpec::width)
      .def_readonly("branch_depth", &ArchitectureSpec::branch_depth)
      .def_readonly("alphas", &ArchitectureSpec::alphas)
      .def("to_json", [](const ArchitectureSpec& s) {
        return arch_to_json(s).dump();
      })
      .def("__repr__", [](const ArchitectureSpec& s) {
        return "ArchitectureSpec(" + arch_to_json(s).dump() + ")";
      });

  m.def("vanilla", &make_vanilla, py::arg("input_dim"), py::arg("depth"),
        py::arg("width"));
  m.def("resnet",
        py::overload_cast<std::size_t, std::size_t, std::size_t, std::size_t,
                          std::vector<double>>(&make_resnet),
        py::arg("input_dim"), py::arg("depth"), py::arg("width"),
        py::arg("branch_depth"), py::arg("alphas"));
  m.def("resnet",
        py::overload_cast<std::size_t, std::size_t, std::size_t, std::size_t,
                          double>(&make_resnet),
        py::arg("input_dim"), py::arg("depth"), py::arg("width"),
        py::arg("branch_depth"), py::arg("alpha"));
  m.def("densenet", &make_densenet, py::arg("input_dim"), py::arg("depth"),
        py::arg("width"), py::arg("alpha"));
  m.def("arch_from_json", [](const std::string& text) {
    return arch_from_json(nlohmann::json::parse(text));
  });
  m.def("reduce", &reduce, py::arg("spec"), py::arg("k"),
        "Spec with every connection bypassing weight k removed");

  py::class_<WeightSet>(m, "WeightSet")
      .def_property_readonly("initial_projection", [](const WeightSet& w) {
        return from_matrix(w.initial_projection);
      })
      .def_property_readonly("final_projection", [](const WeightSet& w) {
        return from_matrix(w.final_projection);
      })
      .def("body", [](const WeightSet& w, std::size_t flat) {
        return from_matrix(w.body.at(flat));
      });

  m.def("sample_weights",
        [](const ArchitectureSpec& spec, std::uint64_t seed,
           std::uint64_t stream) {
          return sample_weights(spec, {seed, stream});
        },
        py::arg("spec"), py::arg("seed"), py::arg("stream") = 0);

  m.def("forward",
        [](const ArchitectureSpec& spec, const WeightSet& w,
           const py::array_t<double>& x) {
          return forward(spec, w, to_vector(x)).output;
        },
        py::arg("spec"), py::arg("weights"), py::arg("x"),
        "Network output f(x; w)");

  m.def("ntk_entry",
        [](const ArchitectureSpec& spec, const WeightSet& w,
           const py::array_t<double>& x, const py::array_t<double>& xp,
           const std::string& scope) {
          return ntk_entry(spec, w, to_vector(x), to_vector(xp),
                           parse_scope(scope));
        },
        py::arg("spec"), py::arg("weights"), py::arg("x"), py::arg("xp"),
        py::arg("scope") = "all");

  m.def("ntk_gram",
        [](const ArchitectureSpec& spec, const WeightSet& w,
           const py::array_t<double>& xs, const std::string& scope) {
          return from_matrix(
              ntk_gram(spec, w, to_rows(xs), parse_scope(scope)).entries);
        },
        py::arg("spec"), py::arg("weights"), py::arg("xs"),
        py::arg("scope") = "all");

  m.def("avg_ntk_gram",
        [](const ArchitectureSpec& spec, const py::array_t<double>& xs,
           std::uint64_t seed, std::uint64_t stream, std::size_t t,
           const std::string& scope) {
          return from_matrix(
              avg_ntk_gram(spec, to_rows(xs), {seed, stream}, t,
                           parse_scope(scope))
                  .entries);
        },
        py::arg("spec"), py::arg("xs"), py::arg("seed"),
        py::arg("stream") = 0, py::arg("t") = 1, py::arg("scope") = "all");

  m.def("relu_cov_map", [](double a, double b, double c) {
    const BivariateCov out = relu_cov_map({a, b, c});
    return py::make_tuple(out.a, out.b, out.c);
  });
  m.def("relu_dot_map",
        [](double a, double b, double c) { return relu_dot_map({a, b, c}); });

  m.def("ntk_limit",
        [](const ArchitectureSpec& spec, const py::array_t<double>& x,
           const py::array_t<double>& xp) {
          return ntk_limit(spec, to_vector(x), to_vector(xp));
        },
        py::arg("spec"), py::arg("x"), py::arg("xp"),
        "Infinite-width kernel value for the given architecture");
  m.def("ntk_limit_vanilla",
        [](const py::array_t<double>& x, const py::array_t<double>& xp,
           std::size_t depth) {
          return ntk_limit_vanilla(to_vector(x), to_vector(xp), depth);
        });
  m.def("limit_gram",
        [](const ArchitectureSpec& spec, const py::array_t<double>& xs) {
          return from_matrix(limit_gram(spec, to_rows(xs)));
        });

  m.def("estimate_normalized_variance",
        [](const ArchitectureSpec& spec, const py::array_t<double>& x,
           const py::array_t<double>& xp, std::size_t draws,
           std::uint64_t seed) {
          const VarianceReport r = estimate_normalized_variance(
              spec, to_vector(x), to_vector(xp), draws, {seed, 0});
          py::dict d;
          d["normalized_variance"] = r.normalized_variance;
          d["stderr"] = r.normalized_variance_stderr;
          d["eta"] = r.eta;
          d["mean"] = r.mean_g.mean();
          d["diag"] = r.diag;
          d["n_draws"] = r.n_draws;
          return d;
        },
        py::arg("spec"), py::arg("x"), py::arg("xp"), py::arg("draws"),
        py::arg("seed"));

  m.def("gen_inputs",
        [](std::size_t input_dim, std::uint64_t seed, std::uint64_t stream) {
          const auto [x, xp] = gen_inputs(input_dim, {seed, stream});
          py::array_t<double> ax(std::vector<py::ssize_t>{
              py::ssize_t(input_dim)});
          py::array_t<double> axp(std::vector<py::ssize_t>{
              py::ssize_t(input_dim)});
          std::copy(x.begin(), x.end(), ax.mutable_data());
          std::copy(xp.begin(), xp.end(), axp.mutable_data());
          return py::make_tuple(ax, axp);
        },
        py::arg("input_dim"), py::arg("seed"), py::arg("stream") = 0);

  m.def("check_moment_equality",
        [](const ArchitectureSpec& spec, const py::array_t<double>& x,
           const WeightIndex& k, std::size_t order, std::size_t draws,
           std::uint64_t seed) {
          const DualityReport r = check_moment_equality(
              spec, to_vector(x), k, order, draws, {seed, 0});
          py::dict d;
          d["lhs"] = moment_dict(r.lhs);
          d["rhs"] = moment_dict(r.rhs);
          d["z_score"] = r.z_score;
          d["pass"] = r.pass;
          return d;
        },
        py::arg("spec"), py::arg("x"), py::arg("k"), py::arg("order"),
        py::arg("draws"), py::arg("seed"));

  m.def("gen_synthetic",
        [](std::size_t classes, std::size_t dim, std::size_t per_class,
           double separation, std::uint64_t seed) {
          const Dataset ds =
              gen_synthetic(classes, dim, per_class, separation, {seed, 0});
          py::array_t<std::size_t> labels(py::ssize_t(ds.labels.size()));
          std::copy(ds.labels.begin(), ds.labels.end(),
                    labels.mutable_data());
          return py::make_tuple(from_matrix(ds.features), labels);
        },
        py::arg("classes"), py::arg("dim"), py::arg("per_class"),
        py::arg("separation"), py::arg("seed"));

  m.def("fit_predict",
        [](const py::array_t<double>& gram_train,
           const std::vector<std::size_t>& labels, std::size_t class_count,
           double jitter, const py::array_t<double>& gram_cross) {
          const RegressionModel model =
              fit(to_matrix(gram_train), labels, class_count, jitter);
          return predict(model, to_matrix(gram_cross));
        },
        py::arg("gram_train"), py::arg("labels"), py::arg("class_count"),
        py::arg("jitter"), py::arg("gram_cross"),
        "Closed-form kernel regression followed by argmax prediction");

  m.def("set_max_threads", &set_max_threads);

  m.attr("__version__") = "0.1.0";
}
