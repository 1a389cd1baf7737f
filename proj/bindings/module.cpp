#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>

#include "dcfair/dataset.hpp"
#include "dcfair/metrics.hpp"
#include "dcfair/model.hpp"
#include "dcfair/problems.hpp"
#include "dcfair/run.hpp"
#include "dcfair/solvers.hpp"

namespace py = pybind11;
using namespace dcfair;

namespace {

Dataset dataset_from_arrays(const std::vector<std::vector<double>>& features,
                            const std::vector<double>& labels,
                            const std::vector<int>& groups) {
  if (features.empty()) throw DataError("empty feature matrix");
  const int d = static_cast<int>(features[0].size());
  std::vector<double> flat;
  flat.reserve(features.size() * d);
  for (const auto& row : features) {
    if (static_cast<int>(row.size()) != d) throw DataError("ragged feature matrix");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return Dataset(std::move(flat), d, labels, groups);
}

py::dict report_to_dict(const FairnessReport& rep) {
  py::dict out;
  py::list pairs;
  for (const auto& p : rep.pairs) {
    py::dict e;
    e["k"] = p.k;
    e["k_prime"] = p.kp;
    e["dp"] = p.dp;
    e["wdp"] = p.wdp;
    e["pdp"] = p.pdp;
    e["wpdp"] = p.wpdp;
    pairs.append(e);
  }
  out["pairs"] = pairs;
  py::dict mx;
  mx["dp"] = rep.max.dp;
  mx["wdp"] = rep.max.wdp;
  mx["pdp"] = rep.max.pdp;
  mx["wpdp"] = rep.max.wpdp;
  out["max"] = mx;
  out["accuracy"] = rep.accuracy;
  out["interval"] = py::make_tuple(rep.interval.alpha, rep.interval.beta);
  out["theta_hat"] = rep.theta_hat;
  return out;
}

py::dict train(const Dataset& data, const std::string& family, double param,
               std::pair<double, double> interval, const std::string& surrogate,
               const std::string& solver, long long outer, long long inner,
               double eps, double rho, double theta_hat, std::uint64_t seed,
               std::tuple<double, double, double> split_fracs, double step_size,
               int pgrid) {
  RunConfig cfg;
  cfg.family = family;
  cfg.surrogate = surrogate;
  cfg.solver = solver;
  cfg.alpha = interval.first;
  cfg.beta = interval.second;
  cfg.outer = outer;
  cfg.inner = inner;
  cfg.eps = eps;
  cfg.rho = rho;
  cfg.theta_hat = theta_hat;
  cfg.train_frac = std::get<0>(split_fracs);
  cfg.val_frac = std::get<1>(split_fracs);
  cfg.test_frac = std::get<2>(split_fracs);
  cfg.step_size = step_size;
  cfg.pgrid_count = pgrid;

  const TrainOutcome r = run_single_train(cfg, data, seed, param);
  if (!r.ok) throw std::runtime_error(r.error);
  py::dict out;
  out["weights"] = Vec(r.solution.packed.begin(),
                       r.solution.packed.begin() + LinearCrossModel::weight_len(data.d()));
  out["packed"] = r.solution.packed;
  out["accuracy"] = r.accuracy;
  out["dp"] = r.metrics.dp;
  out["wdp"] = r.metrics.wdp;
  out["pdp"] = r.metrics.pdp;
  out["wpdp"] = r.metrics.wpdp;
  out["objective"] = r.objective;
  out["max_infeas"] = r.max_infeas;
  out["oracle_count"] = r.oracle_count;
  out["feasible_found"] = r.feasible_found;
  return out;
}

}  // namespace

PYBIND11_MODULE(_dcfair, m) {
  m.doc() = "partially fair linear classifiers via DC-constrained training";

  py::register_exception<DataError>(m, "DataError");
  py::register_exception<MetricError>(m, "MetricError");
  py::register_exception<ProblemError>(m, "ProblemError");
  py::register_exception<SolverError>(m, "SolverError");

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("n", &Dataset::n)
      .def_property_readonly("d", &Dataset::d)
      .def_property_readonly("num_groups", &Dataset::num_groups)
      .def_property_readonly("labels", &Dataset::labels)
      .def_property_readonly("groups", &Dataset::groups)
      .def("__repr__", [](const Dataset& d) {
        return "<Dataset n=" + std::to_string(d.n()) + " d=" +
               std::to_string(d.d()) + " groups=" +
               std::to_string(d.num_groups()) + ">";
      });

  m.def("dataset_from_arrays", &dataset_from_arrays, py::arg("features"),
        py::arg("labels"), py::arg("groups"));
  m.def(
      "load_libsvm",
      [](const std::string& path, const py::object& group_source) {
        if (py::isinstance<py::int_>(group_source)) {
          return load_libsvm(path, GroupSource(group_source.cast<int>()));
        }
        return load_libsvm(path, GroupSource(group_source.cast<std::string>()));
      },
      py::arg("path"), py::arg("group_source"),
      "group_source: 1-based feature column index or side-file path");
  m.def(
      "load_csv",
      [](const std::string& path, const std::string& label_col,
         const std::string& group_col, const std::vector<std::string>& feature_cols) {
        return load_csv(path, CsvSchema{label_col, group_col, feature_cols});
      },
      py::arg("path"), py::arg("label_col"), py::arg("group_col"),
      py::arg("feature_cols") = std::vector<std::string>{});

  m.def(
      "split",
      [](const Dataset& data, double train, double val, double test,
         std::uint64_t seed) {
        const SplitResult r = split(data, SplitSpec{train, val, test, seed});
        return py::make_tuple(r.train, r.val, r.test);
      },
      py::arg("data"), py::arg("train") = 0.6, py::arg("val") = 0.2,
      py::arg("test") = 0.2, py::arg("seed") = 0);

  m.def("featurize", &featurize, py::arg("x"), py::arg("group"));
  m.def(
      "score",
      [](const Vec& weights, const Vec& x, int group) {
        const int d = static_cast<int>(x.size());
        return score(LinearCrossModel(d, weights), x, group);
      },
      py::arg("weights"), py::arg("x"), py::arg("group"));

  m.def("hinge_surrogate", [](double x) {
    const auto s = hinge_surrogate(x);
    return py::make_tuple(s.value, s.plus_value, s.minus_value, s.plus_slope,
                          s.minus_slope);
  });
  m.def("sigmoid_surrogate", [](double x) {
    const auto s = sigmoid_surrogate(x);
    return py::make_tuple(s.value, s.derivative);
  });

  auto as_samples = [](const std::vector<std::vector<double>>& groups) {
    return ScoredGroupSample(groups);
  };
  m.def("dp_metric", [as_samples](const std::vector<std::vector<double>>& g,
                                  int k, int kp) {
    return dp_metric(as_samples(g), k, kp);
  });
  m.def("pdp_metric", [as_samples](const std::vector<std::vector<double>>& g,
                                   int k, int kp, double alpha, double beta) {
    return pdp_metric(as_samples(g), k, kp, Interval(alpha, beta));
  });
  m.def("wdp_metric", [as_samples](const std::vector<std::vector<double>>& g,
                                   int k, int kp, double theta_hat) {
    return wdp_metric(as_samples(g), k, kp, theta_hat);
  });
  m.def("wpdp_metric", [as_samples](const std::vector<std::vector<double>>& g,
                                    int k, int kp, double alpha, double beta,
                                    double theta_hat) {
    return wpdp_metric(as_samples(g), k, kp, Interval(alpha, beta), theta_hat);
  });

  m.def(
      "fairness_report",
      [](const Vec& weights, const Dataset& data, double alpha, double beta,
         double theta_hat) {
        return report_to_dict(fairness_report(LinearCrossModel(data.d(), weights),
                                              data, Interval(alpha, beta),
                                              theta_hat));
      },
      py::arg("weights"), py::arg("data"), py::arg("alpha") = 0.0,
      py::arg("beta") = 1.0, py::arg("theta_hat") = 0.0);

  m.def(
      "accuracy",
      [](const Vec& weights, const Dataset& data, double theta_hat) {
        return accuracy(LinearCrossModel(data.d(), weights), data, theta_hat);
      },
      py::arg("weights"), py::arg("data"), py::arg("theta_hat") = 0.0);

  m.def(
      "select_interval",
      [](const Dataset& data, const Vec& weights, double theta_hat, double width,
         double grid_step) {
        const auto sel = select_interval(
            data, LinearCrossModel(data.d(), weights), theta_hat, width, grid_step);
        py::dict out;
        out["interval"] = py::make_tuple(sel.chosen.alpha, sel.chosen.beta);
        out["pooled_rate"] = sel.pooled_rate;
        py::list cands;
        for (const auto& c : sel.candidates) {
          cands.append(py::make_tuple(c.interval.alpha, c.interval.beta, c.max_pdp));
        }
        out["candidates"] = cands;
        return out;
      },
      py::arg("data"), py::arg("weights"), py::arg("theta_hat") = 0.0,
      py::arg("width") = 0.25, py::arg("grid_step") = 0.05);

  m.def("theoretical_schedule",
        [](double M, double mu, double nu, double eps, double f0, double f_lb) {
          const IdcaSchedule s = theoretical_schedule(M, mu, nu, eps, f0, f_lb);
          py::dict out;
          out["K"] = s.K;
          out["eps_k"] = s.eps_k[0];
          out["T_0"] = s.T_at(0);
          out["Lambda"] = s.constants->Lambda;
          return out;
        },
        py::arg("M"), py::arg("mu"), py::arg("nu"), py::arg("eps"), py::arg("f0"),
        py::arg("f_lb"));

  m.def("train", &train, py::arg("data"), py::arg("family") = "unconstrained",
        py::arg("param") = 0.0,
        py::arg("interval") = std::pair<double, double>(0.0, 1.0),
        py::arg("surrogate") = "hinge", py::arg("solver") = "idca",
        py::arg("outer") = 50, py::arg("inner") = 150, py::arg("eps") = 1e-3,
        py::arg("rho") = 1e-3, py::arg("theta_hat") = 0.0, py::arg("seed") = 0,
        py::arg("split") = std::tuple<double, double, double>(0.6, 0.2, 0.2),
        py::arg("step_size") = 1e-3, py::arg("pgrid") = 10,
        "train one model; param is kappa (constrained families) or lambda "
        "(regularized families); returns test-split metrics");
}
