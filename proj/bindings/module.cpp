#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "metricforge/attack.hpp"
#include "metricforge/errors.hpp"
#include "metricforge/version.hpp"

namespace py = pybind11;
using namespace metricforge;

namespace {

DistanceSpec spec_from_matrix(const Eigen::MatrixXd& deltas, int m) {
  if (deltas.rows() != m || deltas.cols() != m) {
    throw InputError("deltas must be an m x m matrix");
  }
  return DistanceSpec::from_function(m, [&](int i, int j) {
    const double a = deltas(i, j);
    const double b = deltas(j, i);
    if (a != b) throw InputError("deltas matrix must be symmetric");
    return a;
  });
}

NoiseFunction::Scheme scheme_from_name(const std::string& name) {
  if (name == "hashed") return NoiseFunction::Scheme::Hashed;
  // "product-sum" is the descriptive alias for the formula-seeded variant.
  if (name == "paper" || name == "product-sum") return NoiseFunction::Scheme::ProductSum;
  throw InputError("noise must be 'hashed' or 'paper'");
}

DistanceFn distance_from_object(const py::object& obj) {
  if (py::isinstance<EpsilonSemimetric>(obj)) {
    return obj.cast<const EpsilonSemimetric&>().fn();
  }
  auto fn = obj.cast<py::function>();
  return [fn](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return fn(x, y).cast<double>();
  };
}

py::dict separation_dict(const SeparationTable& t) {
  py::list within;
  for (const auto& w : t.within) {
    within.append(py::dict(py::arg("label") = w.label, py::arg("pairs") = w.pairs,
                           py::arg("max_distance") = w.max_distance));
  }
  py::list between;
  for (const auto& b : t.between) {
    between.append(py::dict(py::arg("label_a") = b.label_a, py::arg("label_b") = b.label_b,
                            py::arg("min_distance") = b.min_distance));
  }
  py::dict d(py::arg("within") = within, py::arg("between") = between);
  d["max_within"] = t.max_within ? py::cast(*t.max_within) : py::none();
  d["min_between"] = t.min_between ? py::cast(*t.min_between) : py::none();
  d["ratio"] = t.ratio ? py::cast(*t.ratio) : py::none();
  return d;
}

py::dict forge_dict(const ForgeResult& forged) {
  py::list warnings;
  for (const auto& w : forged.warnings) {
    warnings.append(py::dict(py::arg("kind") = w.kind, py::arg("message") = w.message));
  }
  return py::dict(py::arg("semimetric") = forged.semimetric,
                  py::arg("matrix") = forged.semimetric.form.matrix,
                  py::arg("eps_used") = forged.eps_used,
                  py::arg("realized") = forged.realized,
                  py::arg("max_rel_error") = forged.max_rel_error,
                  py::arg("alpha") = forged.alpha, py::arg("lambda_max") = forged.lambda_max,
                  py::arg("warnings") = warnings);
}

AttackPlan build_plan(const Eigen::MatrixXd& points, const std::vector<int>& labels, double eps,
                      const std::string& noise, bool scaled) {
  PointCloud cloud;
  cloud.points = points;
  cloud.labels = labels;
  AttackPlan plan = assign_target_distances(cloud);
  plan.eps = eps;
  plan.noise = scheme_from_name(noise);
  plan.scaled = scaled;
  return plan;
}

py::dict attack_dict(const AttackReport& r) {
  py::dict d;
  d["algorithm"] = r.algorithm;
  d["success"] = r.success;
  d["desired"] = r.desired;
  d["recovered"] = r.recovered;
  d["bijection"] = r.bijection ? py::cast(*r.bijection) : py::none();
  d["separation"] = separation_dict(r.separation);
  d["eps_used"] = r.eps_used;
  d["delta_small"] = r.delta_small;
  d["delta_large"] = r.delta_large;
  d["realized_max_rel_error"] = r.realized_max_rel_error;
  d["alpha"] = r.alpha;
  d["lambda_max"] = r.lambda_max;
  if (r.algorithm == "kmeans") {
    d["iterations"] = r.iterations;
    d["empty_cluster_events"] = r.empty_cluster_events;
  } else {
    d["dbscan_eps"] = r.dbscan_eps;
    d["min_pts"] = r.min_pts;
    d["recovered_raw"] = r.recovered_raw;
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quadratic-form semimetrics with designated pairwise distances";
  m.attr("__version__") = kVersion;

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<RankError>(m, "RankError", PyExc_ArithmeticError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<EpsilonSemimetric>(m, "Semimetric")
      .def("__call__", &EpsilonSemimetric::eval, py::arg("x"), py::arg("y"))
      .def_property_readonly("matrix",
                             [](const EpsilonSemimetric& s) { return s.form.matrix; })
      .def_readonly("eps", &EpsilonSemimetric::eps)
      .def_readonly("alpha", &EpsilonSemimetric::alpha)
      .def_readonly("scaled", &EpsilonSemimetric::scaled)
      .def(
          "distance_matrix",
          [](const EpsilonSemimetric& s, const Eigen::MatrixXd& points) {
            Eigen::MatrixXd out(points.rows(), points.rows());
            for (int i = 0; i < points.rows(); ++i) {
              for (int j = 0; j < points.rows(); ++j) {
                out(i, j) = i == j ? 0.0
                                   : s.eval(points.row(i).transpose(), points.row(j).transpose());
              }
            }
            return out;
          },
          py::arg("points"));

  m.def("capacity", &check_capacity, py::arg("dim"),
        "Largest point count whose pair count fits the given dimension");

  m.def("pair_order", &pair_order, py::arg("m"));

  m.def(
      "forge",
      [](const Eigen::MatrixXd& points, const Eigen::MatrixXd& deltas, double eps,
         bool scaled, const std::string& noise) {
        AttackPlan plan;
        plan.cloud.points = points;
        plan.spec = spec_from_matrix(deltas, static_cast<int>(points.rows()));
        plan.eps = eps;
        plan.noise = scheme_from_name(noise);
        plan.scaled = scaled;
        return forge_dict(forge_semimetric(plan));
      },
      py::arg("points"), py::arg("deltas"), py::arg("eps") = 0.0, py::arg("scaled") = false,
      py::arg("noise") = "hashed",
      "Build a semimetric realizing the designated pairwise distances");

  m.def(
      "check_axioms",
      [](const py::object& distance, const Eigen::MatrixXd& points, double eps,
         std::uint64_t seed) {
        std::vector<Eigen::VectorXd> sample;
        for (int i = 0; i < points.rows(); ++i) sample.push_back(points.row(i).transpose());
        AxiomOptions options;
        options.eps = eps;
        options.seed = seed;
        const AxiomReport r = check_axioms(distance_from_object(distance), sample, options);
        py::dict d;
        d["classification"] = metric_class_name(r.classification);
        d["identity_defect"] = r.identity_defect;
        d["positivity_violations"] = r.positivity_violations;
        d["asymmetry_defect"] = r.asymmetry_defect;
        d["triangle_defect"] = r.triangle_defect;
        d["triples_checked"] = r.triples_checked;
        d["exhaustive"] = r.exhaustive;
        d["eps"] = r.eps;
        return d;
      },
      py::arg("distance"), py::arg("points"), py::arg("eps") = 0.0, py::arg("seed") = 1,
      "Audit identity, positivity, symmetry, and the (relaxed) triangle inequality");

  m.def(
      "attack",
      [](const std::string& algorithm, const Eigen::MatrixXd& points,
         const std::vector<int>& labels, double eps, bool scaled, const std::string& noise,
         int iterations, const std::string& centers, std::uint64_t seed) {
        const AttackPlan plan = build_plan(points, labels, eps, noise, scaled);
        if (algorithm == "kmeans") {
          KMeansAttackOptions options;
          options.iterations = iterations;
          options.seed = seed;
          if (centers == "z-neighbor") {
            options.centers = CentersMode::ZNeighbor;
          } else if (centers == "class-mean") {
            options.centers = CentersMode::ClassMean;
          } else {
            throw InputError("centers must be 'class-mean' or 'z-neighbor'");
          }
          return attack_dict(attack_kmeans(plan, options));
        }
        if (algorithm == "dbscan") return attack_dict(attack_dbscan(plan));
        throw InputError("algorithm must be 'kmeans' or 'dbscan'");
      },
      py::arg("algorithm"), py::arg("points"), py::arg("labels"), py::arg("eps") = 0.0,
      py::arg("scaled") = false, py::arg("noise") = "hashed",
      py::arg("iterations") = defaults::kmeans_iterations, py::arg("centers") = "class-mean",
      py::arg("seed") = defaults::master_seed,
      "Forge a semimetric under which the clustering recovers the given labels");

  m.def(
      "kmeans",
      [](const Eigen::MatrixXd& points, const Eigen::MatrixXd& init_centers,
         const py::object& distance, int iterations) {
        const ClusterAssignment a =
            kmeans(points, init_centers, distance_from_object(distance), iterations);
        return py::make_tuple(a.labels, a.centers, a.empty_cluster_events);
      },
      py::arg("points"), py::arg("init_centers"), py::arg("distance"),
      py::arg("iterations") = defaults::kmeans_iterations);

  m.def(
      "dbscan",
      [](const Eigen::MatrixXd& points, double eps, int min_pts, const py::object& distance) {
        const ClusterAssignment a = dbscan(points, eps, min_pts, distance_from_object(distance));
        return py::make_tuple(a.labels, a.n_clusters);
      },
      py::arg("points"), py::arg("eps"), py::arg("min_pts"), py::arg("distance"));
}
