// Copyright 2026 The gdssm Authors. Apache 2.0 License.
//
// Python bindings. Arrays cross the boundary as float64 numpy arrays; tasks
// hold inputs as (N+1, f_in) and targets as (N+1, f_out).

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "gdssm/checkpoint.hpp"
#include "gdssm/config.hpp"
#include "gdssm/metrics.hpp"
#include "gdssm/runner.hpp"
#include "gdssm/training.hpp"

namespace py = pybind11;
using namespace gdssm;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const Matrix& m) {
  Array a({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), a.mutable_data());
  return a;
}

Array to_array(const Vector& v) {
  Array a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

Array rows_to_array(const std::vector<Vector>& rows) {
  const std::size_t c = rows.empty() ? 0 : rows[0].size();
  Array a({rows.size(), c});
  for (std::size_t r = 0; r < rows.size(); ++r) std::copy(rows[r].begin(), rows[r].end(), a.mutable_data() + r * c);
  return a;
}

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  return Matrix(a.shape(0), a.shape(1), Vector(a.data(), a.data() + a.size()));
}

std::vector<Vector> array_rows(const Array& a) {
  const Matrix m = to_matrix(a);
  std::vector<Vector> out;
  for (std::size_t r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).begin(), m.row(r).end());
  return out;
}

RegressionTask make_task(const Array& xs, const Array& ys, const std::optional<Array>& w_true,
                         const std::string& kind, double alpha) {
  RegressionTask t;
  t.kind = task_kind_from_string(kind);
  t.xs = array_rows(xs);
  t.ys = array_rows(ys);
  if (t.xs.size() != t.ys.size() || t.xs.size() < 2)
    throw std::invalid_argument("xs and ys need the same N+1 >= 2 rows");
  t.f_in = t.xs[0].size();
  t.f_out = t.ys[0].size();
  t.n_context = t.xs.size() - 1;
  t.alpha = alpha;
  t.w_true = w_true ? to_matrix(*w_true) : Matrix(t.f_out, t.f_in);
  return t;
}

RunConfig config_from(const std::map<std::string, std::string>& overrides) {
  RunConfig cfg;
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  return cfg;
}

py::list history_rows(const std::vector<HistoryRow>& rows) {
  py::list out;
  for (const auto& r : rows) {
    py::dict d;
    d["step"] = r.step;
    d["lr_ssm"] = r.lr_ssm;
    d["lr_global"] = r.lr_global;
    d["train_loss"] = r.train_loss;
    d["eval_loss"] = r.eval_loss;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_gdssm, m) {
  m.doc() = "GD-SSM constructions, oracles, training and metrics";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NonFiniteLoss>(m, "NonFiniteLoss", PyExc_ArithmeticError);

  py::class_<RegressionTask>(m, "Task")
      .def(py::init(&make_task), py::arg("xs"), py::arg("ys"), py::arg("w_true") = std::nullopt,
           py::arg("kind") = "linear", py::arg("alpha") = 1.0)
      .def_property_readonly("xs", [](const RegressionTask& t) { return rows_to_array(t.xs); })
      .def_property_readonly("ys", [](const RegressionTask& t) { return rows_to_array(t.ys); })
      .def_property_readonly("w_true", [](const RegressionTask& t) { return to_array(t.w_true); })
      .def_property_readonly("kind", [](const RegressionTask& t) { return to_string(t.kind); })
      .def_readonly("f_in", &RegressionTask::f_in)
      .def_readonly("f_out", &RegressionTask::f_out)
      .def_readonly("n_context", &RegressionTask::n_context)
      .def_readonly("alpha", &RegressionTask::alpha);

  m.def(
      "sample_tasks",
      [](std::size_t n, std::size_t f_in, std::size_t f_out, std::size_t n_context, double alpha,
         const std::string& kind, std::uint64_t seed) {
        return sample_task_set({task_kind_from_string(kind), f_in, f_out, n_context, alpha}, n, seed, kEvalDomain);
      },
      py::arg("n"), py::arg("f_in") = 10, py::arg("f_out") = 10, py::arg("n_context") = 10, py::arg("alpha") = 1.0,
      py::arg("kind") = "linear", py::arg("seed") = 0,
      "Tasks from the shared eval stream; task i is the same for any n.");

  m.def(
      "tasks_to_csv",
      [](const std::vector<RegressionTask>& tasks) {
        std::ostringstream os;
        write_tasks_csv(os, tasks);
        return os.str();
      },
      py::arg("tasks"));
  m.def(
      "tasks_from_csv",
      [](const std::string& text) {
        std::istringstream is(text);
        return read_tasks_csv(is);
      },
      py::arg("text"));

  m.def(
      "gd_predict",
      [](const RegressionTask& t, double eta, std::size_t steps, double l2_lambda) {
        return to_array(gd_predict(t, {eta, steps, l2_lambda}));
      },
      py::arg("task"), py::arg("eta") = 1.0, py::arg("steps") = 1, py::arg("l2_lambda") = 0.0);
  m.def(
      "newton_predict",
      [](const RegressionTask& t, double ridge) { return to_array(newton_predict(t, ridge).prediction); },
      py::arg("task"), py::arg("ridge") = 1e-8);
  m.def(
      "lsa_predict", [](const RegressionTask& t, double eta) {
        return to_array(lsa_predict(t, construct_lsa_gd(t.f_in, t.f_out, eta, t.n_context)));
      },
      py::arg("task"), py::arg("eta") = 1.0, "Linear self-attention with the GD construction.");
  m.def(
      "weighted_outer_sum", [](const Array& c, const Array& q) {
        return to_array(weighted_outer_sum(to_matrix(c), to_matrix(q)));
      },
      py::arg("c"), py::arg("q"));

  py::class_<Model>(m, "Model")
      .def_property_readonly("variant", [](const Model& mo) { return to_string(mo.spec.variant); })
      .def_property_readonly("f", [](const Model& mo) { return mo.spec.f; })
      .def_property_readonly("n_context", [](const Model& mo) { return mo.spec.n_context; })
      .def("predict", [](const Model& mo, const RegressionTask& t) { return to_array(predict(mo, t)); })
      .def(
          "sensitivity",
          [](const Model& mo, const RegressionTask& t, bool analytic) {
            return to_array(sensitivity(mo, t, analytic ? SensitivityMethod::kAnalytic : SensitivityMethod::kCentralFd));
          },
          py::arg("task"), py::arg("analytic") = true)
      .def("params",
           [](const Model& mo) {
             py::dict d;
             for (const auto& p : param_views(mo)) {
               Array a({p.rows, p.cols});
               std::copy(p.values.begin(), p.values.end(), a.mutable_data());
               d[py::str(p.name)] = a;
             }
             return d;
           })
      .def(
          "loss", [](const Model& mo, const std::vector<RegressionTask>& batch) { return batch_loss(mo, batch); },
          py::arg("batch"))
      .def(
          "grad_check",
          [](const Model& mo, const std::vector<RegressionTask>& batch, double h) {
            const GradCheckReport r = grad_check(mo, batch, h);
            return py::make_tuple(r.max_rel_error, r.worst_param);
          },
          py::arg("batch"), py::arg("h") = 1e-5)
      .def(
          "save",
          [](const Model& mo, const std::string& prefix, std::optional<double> eta) {
            save_checkpoint(prefix, mo, {mo.spec, eta, 0});
          },
          py::arg("prefix"), py::arg("eta") = std::nullopt);

  const auto spec_from = [](const std::map<std::string, std::string>& overrides) {
    return model_spec_from(config_from(overrides));
  };
  m.def(
      "constructed_model",
      [spec_from](double eta, const std::map<std::string, std::string>& config) {
        return constructed_model(spec_from(config), eta);
      },
      py::arg("eta"), py::arg("config") = std::map<std::string, std::string>{},
      "Exact GD construction; config takes model.* keys.");
  m.def(
      "init_model",
      [spec_from](const std::map<std::string, std::string>& config, std::uint64_t seed, double init_std) {
        RngStream rng(seed, stream_key(kInitDomain, 0));
        return init_model(spec_from(config), rng, init_std);
      },
      py::arg("config") = std::map<std::string, std::string>{}, py::arg("seed") = 0, py::arg("init_std") = 0.02);
  m.def(
      "load_model", [](const std::string& prefix) { return load_checkpoint(prefix).first; }, py::arg("prefix"));

  m.def(
      "train",
      [](const std::map<std::string, std::string>& config) {
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(train_config_from(config_from(config)));
        }
        return py::make_tuple(r.model, history_rows(r.history), r.aborted ? py::object(py::str(r.abort_reason))
                                                                         : py::object(py::none()));
      },
      py::arg("config") = std::map<std::string, std::string>{},
      "Returns (model, history rows, abort reason or None).");

  m.def(
      "tune_gd_eta",
      [](const std::vector<RegressionTask>& tasks) { return tune_gd_eta(tasks, GdConfig{}).eta; },
      py::arg("tasks"));
  m.def(
      "eval_loss",
      [](const std::string& predictor, const std::vector<RegressionTask>& tasks, double eta,
         std::optional<Model> model) {
        Predictor p;
        if (predictor == "model") {
          if (!model) throw std::invalid_argument("eval_loss: predictor 'model' needs model=");
          p = model_predictor(*model, "model");
        } else if (predictor == "gd") {
          GdConfig g;
          g.eta = eta;
          p = gd_predictor(g);
        } else if (predictor == "newton") {
          p = newton_predictor();
        } else if (predictor == "zero") {
          p = zero_predictor();
        } else {
          throw std::invalid_argument("eval_loss: unknown predictor " + predictor);
        }
        const LossStats s = eval_loss(p, tasks);
        return py::make_tuple(s.mean, s.sem);
      },
      py::arg("predictor"), py::arg("tasks"), py::arg("eta") = 1.0, py::arg("model") = std::nullopt,
      "Mean and sem of the query loss for 'model', 'gd', 'newton' or 'zero'.");

  m.def(
      "run",
      [](const std::string& command, const std::map<std::string, std::string>& config) {
        const RunConfig cfg = config_from(config);
        std::ostringstream log;
        RunOutcome out;
        {
          py::gil_scoped_release release;
          out = run_command(command, cfg, log);
        }
        py::dict d;
        d["exit_code"] = out.exit_code;
        d["run_id"] = out.run_id;
        d["manifest"] = out.manifest_path;
        d["artifacts"] = out.artifacts;
        d["failure"] = out.failure;
        d["log"] = log.str();
        return d;
      },
      py::arg("command"), py::arg("config") = std::map<std::string, std::string>{},
      "Runs a CLI command with dotted-key overrides; returns exit code and artifact paths.");
}
