#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lss/app/commands.hpp"
#include "lss/dynamics.hpp"
#include "lss/error.hpp"
#include "lss/estimators.hpp"
#include "lss/flows.hpp"
#include "lss/geometry.hpp"
#include "lss/models.hpp"
#include "lss/verify.hpp"

namespace py = pybind11;
using namespace lss;

namespace {

// Python sees plain dynamic Eigen objects; the library's bounded types are
// converted at the boundary.
using PyVec = Eigen::VectorXd;
using PyMat = Eigen::MatrixXd;

Vec to_vec(const PyVec& v) {
  if (v.size() > kMaxDim) throw Error(ErrorKind::UnsupportedDimension, "dimension above 16");
  return Vec(v);
}
Mat to_mat(const PyMat& m) {
  if (m.rows() > kMaxDim || m.cols() > kMaxDim) {
    throw Error(ErrorKind::UnsupportedDimension, "dimension above 16");
  }
  return Mat(m);
}

py::dict flow_dict(const FlowResult& r) {
  py::dict d;
  d["point"] = PyVec(r.point);
  d["iters"] = r.iters;
  d["final_xi_norm"] = r.final_xi_norm;
  d["trace"] = r.trace;
  return d;
}

py::dict chain_dict(const ChainReport& r) {
  py::dict avg;
  for (std::size_t i = 0; i < r.names.size(); ++i) avg[py::str(r.names[i])] = r.averages[i];
  py::dict d;
  d["averages"] = avg;
  d["steps"] = r.steps;
  d["max_xi"] = r.max_xi;
  d["mean_flow_iters"] = r.mean_flow_iters;
  d["angles"] = r.angles;
  d["final_x"] = PyVec(r.final_x);
  d["aborted"] = r.aborted;
  d["abort_step"] = r.abort_step;
  d["abort_reason"] = r.abort_reason;
  return d;
}

std::vector<Observable> observables(const std::vector<py::object>& items, const ManifoldModel& model) {
  std::vector<Observable> out;
  for (const auto& item : items) {
    if (py::isinstance<py::str>(item)) {
      auto named = app::make_observables({item.cast<std::string>()}, model);
      out.push_back(named.front());
    } else {
      py::function f = item.cast<py::function>();
      const std::string name = py::hasattr(item, "__name__") ? item.attr("__name__").cast<std::string>() : "f";
      out.push_back({name, [f](const Vec& x) {
                       py::gil_scoped_acquire gil;
                       return f(PyVec(x)).cast<double>();
                     }});
    }
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_lss, m) {
  m.doc() = "Constrained Langevin samplers on level sets";
  m.attr("__version__") = LSS_VERSION;

  py::register_exception<Error>(m, "LssError", PyExc_RuntimeError);
  py::register_exception<app::ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<ModelPair>(m, "Model")
      .def_property_readonly("name", [](const ModelPair& p) { return p.model.name; })
      .def_property_readonly("d", [](const ModelPair& p) { return p.model.d; })
      .def_property_readonly("k", [](const ModelPair& p) { return p.model.k; })
      .def_property_readonly("field_tag", [](const ModelPair& p) { return p.field.tag; })
      .def_property_readonly("start", [](const ModelPair& p) { return PyVec(p.model.start); })
      .def("xi", [](const ModelPair& p, const PyVec& x) { return PyVec(p.model.xi(to_vec(x))); })
      .def("grad_xi", [](const ModelPair& p, const PyVec& x) { return PyMat(p.model.grad_xi(to_vec(x))); })
      .def("a", [](const ModelPair& p, const PyVec& x) { return PyMat(p.field.a_at(to_vec(x))); })
      .def("drift", [](const ModelPair& p, const PyVec& x) {
        return PyVec(drift(p.model, p.field, to_vec(x)));
      });

  m.def("ellipse", [](double c, double beta) { return make_ellipse(c, beta); },
        py::arg("c") = 3.0, py::arg("beta") = 1.0);
  m.def("sphere",
        [](int d, bool precond, double eps, double beta) { return make_sphere(d, precond, eps, beta); },
        py::arg("d") = 3, py::arg("precond") = false, py::arg("eps") = 0.1, py::arg("beta") = 1.0);
  m.def("linear",
        [](int d, int k, const PyMat& a, double beta, double kappa) {
          return static_cast<ModelPair>(make_linear(d, k, to_mat(a), beta, kappa));
        },
        py::arg("d"), py::arg("k"), py::arg("a"), py::arg("beta") = 1.0, py::arg("kappa") = 0.0);

  m.def("psi", [](const ModelPair& p, const PyVec& x) { return PyMat(eval_psi(p.model, p.field, to_vec(x))); });
  m.def("projection", [](const ModelPair& p, const PyVec& x) {
    const auto pd = eval_projection(p.model, p.field, to_vec(x));
    return py::make_tuple(PyMat(pd.P), PyMat(pd.Psi), PyMat(pd.Pa));
  });
  m.def("pa_divergence", [](const ModelPair& p, const PyVec& x) {
    return PyVec(eval_pa_divergence(p.model, p.field, to_vec(x)));
  });
  m.def("mean_curvature", [](const ModelPair& p, const PyVec& x) {
    return PyVec(eval_mean_curvature_id(p.model, p.field, to_vec(x)));
  });

  py::class_<FlowConfig>(m, "FlowConfig")
      .def(py::init<>())
      .def_readwrite("dt0", &FlowConfig::dt0)
      .def_readwrite("growth", &FlowConfig::growth)
      .def_readwrite("eps_tol", &FlowConfig::eps_tol)
      .def_readwrite("max_iters", &FlowConfig::max_iters)
      .def_readwrite("gd_step", &FlowConfig::gd_step)
      .def_readwrite("gd_tol", &FlowConfig::gd_tol)
      .def_readwrite("record_trace", &FlowConfig::record_trace);

  m.def("theta", [](const ModelPair& p, const PyVec& x, const FlowConfig& cfg) {
    return flow_dict(theta(p.model, p.field, to_vec(x), cfg));
  }, py::arg("model"), py::arg("x"), py::arg("cfg") = FlowConfig{});
  m.def("theta_skew", [](const ModelPair& p, const PyVec& x, const PyMat& A, const FlowConfig& cfg) {
    return flow_dict(theta_skew(p.model, p.field, to_vec(x), to_mat(A), cfg));
  }, py::arg("model"), py::arg("x"), py::arg("A"), py::arg("cfg") = FlowConfig{});
  m.def("pi", [](const ModelPair& p, const PyVec& x, const FlowConfig& cfg) {
    return flow_dict(pi_nearest(p.model, to_vec(x), cfg));
  }, py::arg("model"), py::arg("x"), py::arg("cfg") = FlowConfig{});

  m.def(
      "run_chain",
      [](const ModelPair& p, const std::string& kind, double h, long n, std::uint64_t seed,
         const std::vector<py::object>& obs, std::optional<PyMat> A, std::optional<double> eps_soft,
         double burn_in, bool record_angles, const FlowConfig& flow) {
        SchemeConfig cfg;
        cfg.kind = scheme_from_string(kind);
        cfg.h = h;
        cfg.n = n;
        cfg.seed = seed;
        cfg.beta = p.field.beta;
        if (A) cfg.A = to_mat(*A);
        cfg.eps_soft = eps_soft;
        cfg.flow = flow;
        ChainOptions opts;
        opts.observables = observables(obs, p.model);
        opts.burn_in = burn_in;
        opts.record_angles = record_angles;
        py::gil_scoped_release nogil;
        return run_chain(p.model, p.field, cfg, opts);
      },
      py::arg("model"), py::arg("kind"), py::arg("h"), py::arg("n"), py::arg("seed") = 0,
      py::arg("observables") = std::vector<py::object>{}, py::arg("A") = py::none(),
      py::arg("eps_soft") = py::none(), py::arg("burn_in") = 0.0, py::arg("record_angles") = false,
      py::arg("flow") = FlowConfig{});
  // run_chain returns the C++ report; expose it as a dict
  py::class_<ChainReport>(m, "ChainReport")
      .def("as_dict", &chain_dict)
      .def_readonly("steps", &ChainReport::steps)
      .def_readonly("max_xi", &ChainReport::max_xi)
      .def_readonly("mean_flow_iters", &ChainReport::mean_flow_iters)
      .def_readonly("aborted", &ChainReport::aborted)
      .def_readonly("angles", &ChainReport::angles)
      .def_property_readonly("averages", [](const ChainReport& r) {
        py::dict avg;
        for (std::size_t i = 0; i < r.names.size(); ++i) avg[py::str(r.names[i])] = r.averages[i];
        return avg;
      });

  m.def("reference_density",
        [](const std::string& id, const std::string& measure, double t, double c, double beta, double eps) {
          return reference_density(id, measure_from_string(measure), t, {c, beta, eps});
        },
        py::arg("model_id"), py::arg("measure"), py::arg("t"), py::arg("c") = 3.0, py::arg("beta") = 1.0,
        py::arg("eps") = 0.1);
  m.def("tv_distance", &tv_distance);

  m.def("verify", [](const std::string& selector, bool corrupt) {
    py::list out;
    for (const auto& r : app::run_checks(selector, corrupt)) {
      py::dict d;
      d["name"] = r.name;
      d["max_abs_error"] = r.max_abs_error;
      d["max_rel_error"] = r.max_rel_error;
      d["points"] = r.points_tested;
      d["tolerance"] = r.tolerance;
      d["pass"] = r.pass;
      out.append(d);
    }
    return out;
  }, py::arg("selector") = "all", py::arg("corrupt") = false);

  m.def("philox4x32", &philox4x32);
}
