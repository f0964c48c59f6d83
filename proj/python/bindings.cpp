#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <vector>

#include "quantboost/booster.hpp"
#include "quantboost/data.hpp"
#include "quantboost/error.hpp"
#include "quantboost/experiment.hpp"
#include "quantboost/metrics.hpp"
#include "quantboost/model_io.hpp"
#include "quantboost/objective.hpp"

namespace py = pybind11;
namespace qb = quantboost;

namespace {

using Vec = std::vector<double>;

Vec to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gradient-boosted trees with a smoothed quantile objective";

  static py::exception<qb::Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<qb::ParameterError> parameter_error(m, "ParameterError", error.ptr());
  static py::exception<qb::DataError> data_error(m, "DataError", error.ptr());
  static py::exception<qb::SchemaError> schema_error(m, "SchemaError", error.ptr());
  static py::exception<qb::DegenerateLeafError> degenerate(m, "DegenerateLeafError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const qb::ParameterError& e) {
      PyErr_SetString(parameter_error.ptr(), e.what());
    } catch (const qb::DataError& e) {
      PyErr_SetString(data_error.ptr(), e.what());
    } catch (const qb::SchemaError& e) {
      PyErr_SetString(schema_error.ptr(), e.what());
    } catch (const qb::DegenerateLeafError& e) {
      PyErr_SetString(degenerate.ptr(), e.what());
    } catch (const qb::Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  // Objective
  m.def("pinball_loss", &qb::pinball_loss, py::arg("t"), py::arg("tau"));
  m.def("huber_norm", &qb::huber_norm, py::arg("t"), py::arg("upsilon"));
  m.def(
      "quantile_huber_loss",
      [](double t, double tau, double upsilon) {
        return qb::quantile_huber_loss(t, {tau, upsilon});
      },
      py::arg("t"), py::arg("tau"), py::arg("upsilon"),
      "Smoothed quantile loss of the residual t = y - prediction.");
  m.def(
      "quantile_huber_grad_hess",
      [](double y, double yhat, double tau, double upsilon) {
        const qb::GradHess gh = qb::quantile_huber_grad_hess(y, yhat, {tau, upsilon});
        return py::make_tuple(gh.g, gh.h);
      },
      py::arg("y"), py::arg("prediction"), py::arg("tau"), py::arg("upsilon"),
      "(gradient, hessian) with respect to the prediction.");
  m.def(
      "empirical_quantile",
      [](const Vec& v, double q) { return qb::empirical_quantile(v, q); },
      py::arg("values"), py::arg("q"));

  py::class_<qb::ObjectiveSpec>(m, "ObjectiveSpec")
      .def_static("squared_error", &qb::ObjectiveSpec::squared_error)
      .def_static("quantile_huber", &qb::ObjectiveSpec::quantile_huber,
                  py::arg("tau"), py::arg("upsilon"))
      .def_property_readonly("name", &qb::ObjectiveSpec::name)
      .def_property_readonly("tau", [](const qb::ObjectiveSpec& s) { return s.quantile.tau; })
      .def_property_readonly("upsilon",
                             [](const qb::ObjectiveSpec& s) { return s.quantile.upsilon; })
      .def(py::self == py::self)
      .def("__repr__", [](const qb::ObjectiveSpec& s) {
        if (s.kind == qb::ObjectiveKind::kSquaredError) return std::string("ObjectiveSpec.squared_error()");
        return "ObjectiveSpec.quantile_huber(tau=" + qb::format_double(s.quantile.tau) +
               ", upsilon=" + qb::format_double(s.quantile.upsilon) + ")";
      });

  // Data
  py::class_<qb::Dataset>(m, "Dataset")
      .def(py::init<std::vector<std::string>, std::vector<Vec>, Vec, std::string>(),
           py::arg("feature_names"), py::arg("columns"), py::arg("targets") = Vec{},
           py::arg("target_name") = "y",
           "Column-major feature matrix with optional targets.")
      .def_property_readonly("n_rows", &qb::Dataset::n_rows)
      .def_property_readonly("n_features", &qb::Dataset::n_features)
      .def_property_readonly("feature_names", &qb::Dataset::feature_names)
      .def_property_readonly("target_name", &qb::Dataset::target_name)
      .def_property_readonly("targets", [](const qb::Dataset& d) { return to_vec(d.targets()); })
      .def("column", [](const qb::Dataset& d, std::size_t j) {
        if (j >= d.n_features()) throw py::index_error("feature index out of range");
        return to_vec(d.column(j));
      })
      .def("row", [](const qb::Dataset& d, std::size_t i) {
        if (i >= d.n_rows()) throw py::index_error("row index out of range");
        return d.row(i);
      })
      .def("__len__", &qb::Dataset::n_rows);

  m.def(
      "simulate",
      [](std::size_t n, std::uint64_t seed, double x_min, double x_max, double sigma_min,
         double sigma_max) {
        qb::SimulationParams p;
        p.n = n;
        p.seed = seed;
        p.x_min = x_min;
        p.x_max = x_max;
        p.sigma_min = sigma_min;
        p.sigma_max = sigma_max;
        return qb::simulate(p);
      },
      py::arg("n") = 1000, py::arg("seed") = 0, py::arg("x_min") = 0.0,
      py::arg("x_max") = 10.0, py::arg("sigma_min") = 1.5, py::arg("sigma_max") = 2.5,
      "Heteroscedastic toy data: y = 1.5 x sin(x) + N(0, sigma^2), sigma ~ U(sigma_min, sigma_max).");
  m.def("train_test_split", &qb::train_test_split, py::arg("data"),
        py::arg("train_fraction") = 0.75, py::arg("seed") = 0);
  m.def("load_csv", &qb::load_csv, py::arg("path"), py::arg("target") = "y");
  m.def("save_csv", &qb::save_csv, py::arg("data"), py::arg("path"));

  // Booster
  py::class_<qb::TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("n_estimators", &qb::TrainConfig::n_estimators)
      .def_readwrite("max_depth", &qb::TrainConfig::max_depth)
      .def_readwrite("learning_rate", &qb::TrainConfig::learning_rate)
      .def_readwrite("lambda_", &qb::TrainConfig::lambda)
      .def_readwrite("gamma", &qb::TrainConfig::gamma)
      .def_readwrite("min_child_weight", &qb::TrainConfig::min_child_weight)
      .def_readwrite("base_score", &qb::TrainConfig::base_score)
      .def_readwrite("seed", &qb::TrainConfig::seed)
      .def_readwrite("n_threads", &qb::TrainConfig::n_threads)
      .def("validate", &qb::TrainConfig::validate);

  py::class_<qb::Ensemble>(m, "Ensemble")
      .def_property_readonly("objective", &qb::Ensemble::objective)
      .def_property_readonly("base_score", &qb::Ensemble::base_score)
      .def_property_readonly("learning_rate", &qb::Ensemble::learning_rate)
      .def_property_readonly("feature_names", &qb::Ensemble::feature_names)
      .def_property_readonly("n_trees", [](const qb::Ensemble& e) { return e.trees().size(); })
      .def_property_readonly("loss_history", &qb::Ensemble::loss_history)
      .def("predict", py::overload_cast<const qb::Dataset&>(&qb::Ensemble::predict, py::const_),
           py::arg("data"))
      .def(
          "predict_row",
          [](const qb::Ensemble& e, const Vec& x) { return e.predict(std::span<const double>(x)); },
          py::arg("features"))
      .def("to_json", [](const qb::Ensemble& e) { return qb::serialize_model(e); })
      .def_static("from_json", [](const std::string& s) { return qb::parse_model(s); })
      .def("save", [](const qb::Ensemble& e, const std::filesystem::path& p) { qb::save_model(e, p); })
      .def_static("load", [](const std::filesystem::path& p) { return qb::load_model(p); });

  m.def(
      "train",
      [](const qb::Dataset& data, const qb::ObjectiveSpec& objective,
         const qb::TrainConfig& config) {
        objective.validate();
        const auto obj = qb::make_objective(objective);
        py::gil_scoped_release release;
        return qb::train(data, *obj, config);
      },
      py::arg("data"), py::arg("objective"), py::arg("config") = qb::TrainConfig{});

  // Metrics
  m.def("picp", [](const Vec& t, const Vec& lo, const Vec& hi) { return qb::picp(t, lo, hi); },
        py::arg("targets"), py::arg("lower"), py::arg("upper"));
  m.def("pinaw",
        [](const Vec& lo, const Vec& hi, double range) { return qb::pinaw(lo, hi, range); },
        py::arg("lower"), py::arg("upper"), py::arg("target_range"));
  m.def("cwc", &qb::cwc, py::arg("picp"), py::arg("pinaw"), py::arg("mu"),
        py::arg("eta") = qb::kDefaultCwcEta);
  m.def(
      "pad_intervals",
      [](const Vec& lo, const Vec& hi, double pad) {
        qb::Intervals r = qb::pad_intervals(lo, hi, pad);
        return py::make_tuple(r.lower, r.upper);
      },
      py::arg("lower"), py::arg("upper"), py::arg("pad"));

  py::class_<qb::IntervalReport>(m, "IntervalReport")
      .def_readonly("picp", &qb::IntervalReport::picp)
      .def_readonly("pinaw", &qb::IntervalReport::pinaw)
      .def_readonly("cwc", &qb::IntervalReport::cwc)
      .def_readonly("nominal_coverage", &qb::IntervalReport::nominal_coverage)
      .def_readonly("eta", &qb::IntervalReport::eta);
  m.def(
      "evaluate_intervals",
      [](const Vec& t, const Vec& lo, const Vec& hi, double mu, double eta) {
        return qb::evaluate_intervals(t, lo, hi, mu, eta);
      },
      py::arg("targets"), py::arg("lower"), py::arg("upper"), py::arg("mu") = 0.9,
      py::arg("eta") = qb::kDefaultCwcEta);

  // Experiment
  m.def(
      "run_experiment",
      [](const std::string& spec_json, const std::optional<std::filesystem::path>& out_dir) {
        const qb::ExperimentSpec spec = qb::parse_experiment_spec(spec_json);
        qb::ExperimentResult r = [&] {
          py::gil_scoped_release release;
          return qb::run_experiment(spec);
        }();
        if (out_dir) qb::write_experiment_artifacts(r, *out_dir);
        return qb::format_pi_table(r.evaluation);
      },
      py::arg("spec_json") = "{}", py::arg("out_dir") = py::none(),
      "Runs an interval experiment and returns the metrics table.");
}
