// Command-line driver: forge quadratic-form semimetrics from designated
// distance tables, audit distance axioms, and run the clustering attacks.
//
// Exit codes: 0 success, 1 verification failure, 2 input error, 3 numerical
// failure.

#include <sys/wait.h>
#include <unistd.h>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "metricforge/attack.hpp"
#include "metricforge/io.hpp"
#include "metricforge/version.hpp"

using json = nlohmann::json;
using namespace metricforge;

namespace {

struct RunConfig {
  std::string command;
  std::string points_path;
  std::string distances_path;
  std::string out_path;
  std::string distance_source = "euclidean";
  std::string algorithm;
  std::string centers = "class-mean";
  std::string noise_variant = "hashed";
  std::string format = "json";
  std::vector<int> random_dims;  // m, ell, classes
  double eps = 0.0;              // 0 -> auto
  double tol = 1e-8;
  std::uint64_t seed = defaults::master_seed;
  bool scaled = false;
  int iterations = defaults::kmeans_iterations;
};

json config_json(const RunConfig& c) {
  json j{{"command", c.command},
         {"seed", c.seed},
         {"eps", c.eps},
         {"tol", c.tol},
         {"noise", c.noise_variant},
         {"scaled", c.scaled},
         {"format", c.format}};
  if (!c.points_path.empty()) j["points"] = c.points_path;
  if (!c.distances_path.empty()) j["distances"] = c.distances_path;
  if (!c.out_path.empty()) j["out"] = c.out_path;
  if (!c.random_dims.empty()) j["random"] = c.random_dims;
  if (c.command == "attack") {
    j["algorithm"] = c.algorithm;
    j["centers"] = c.centers;
    j["iterations"] = c.iterations;
  }
  if (c.command == "check-axioms") j["distance"] = c.distance_source;
  return j;
}

json report_skeleton(const RunConfig& c) {
  return json{{"version", kVersion}, {"seed", c.seed}, {"config", config_json(c)}};
}

json warnings_json(const std::vector<Warning>& warnings) {
  json arr = json::array();
  for (const Warning& w : warnings) arr.push_back({{"kind", w.kind}, {"message", w.message}});
  return arr;
}

json separation_json(const SeparationTable& t) {
  json within = json::array();
  for (const auto& w : t.within) {
    within.push_back({{"label", w.label}, {"pairs", w.pairs}, {"max_distance", w.max_distance}});
  }
  json between = json::array();
  for (const auto& b : t.between) {
    between.push_back(
        {{"label_a", b.label_a}, {"label_b", b.label_b}, {"min_distance", b.min_distance}});
  }
  json j{{"within", within}, {"between", between}};
  j["max_within"] = t.max_within ? json(*t.max_within) : json(nullptr);
  j["min_between"] = t.min_between ? json(*t.min_between) : json(nullptr);
  j["ratio"] = t.ratio ? json(*t.ratio) : json(nullptr);
  return j;
}

NoiseFunction::Scheme parse_noise(const std::string& name) {
  if (name == "hashed") return NoiseFunction::Scheme::Hashed;
  // "product-sum" is the descriptive alias for the formula-seeded variant.
  if (name == "paper" || name == "product-sum") return NoiseFunction::Scheme::ProductSum;
  throw InputError("unknown noise variant '" + name + "' (expected hashed|paper)");
}

std::uint64_t seed_from_env() {
  const char* env = std::getenv("METRICFORGE_SEED");
  if (!env || !*env) return defaults::master_seed;
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0' || errno == ERANGE) {
    throw InputError(std::string("METRICFORGE_SEED is not an unsigned integer: ") + env);
  }
  return v;
}

// Co-process distance adapter: one query per line (x then y coordinates,
// comma separated), one distance per response line.
class ExecDistance {
 public:
  explicit ExecDistance(const std::string& command) {
    // A child that exits early must surface as a diagnosable error, not as a
    // SIGPIPE kill of this process.
    std::signal(SIGPIPE, SIG_IGN);
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) {
      throw InputError("adapter: cannot create pipes");
    }
    pid_ = fork();
    if (pid_ < 0) throw InputError("adapter: fork failed");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    to_ = fdopen(to_child[1], "w");
    from_ = fdopen(from_child[0], "r");
    if (!to_ || !from_) throw InputError("adapter: cannot open streams");
  }

  ExecDistance(const ExecDistance&) = delete;
  ExecDistance& operator=(const ExecDistance&) = delete;

  ~ExecDistance() {
    if (to_) fclose(to_);
    if (from_) fclose(from_);
    if (pid_ > 0) waitpid(pid_, nullptr, 0);
  }

  double eval(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    std::ostringstream line;
    for (int i = 0; i < x.size(); ++i) {
      if (i) line << ',';
      line << format_double(x[i]);
    }
    for (int i = 0; i < y.size(); ++i) line << ',' << format_double(y[i]);
    line << '\n';
    const std::string s = line.str();
    // Whether a dead child shows up on the write or on the read is a race;
    // both collapse to the same diagnostic.
    const bool wrote =
        std::fwrite(s.data(), 1, s.size(), to_) == s.size() && std::fflush(to_) == 0;
    char buf[256];
    if (!wrote || !std::fgets(buf, sizeof(buf), from_)) {
      throw InputError("adapter: no response from the distance command");
    }
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(buf, &end);
    if (end == buf || errno == ERANGE) {
      throw InputError(std::string("adapter: cannot parse response: ") + buf);
    }
    return v;
  }

 private:
  pid_t pid_ = -1;
  FILE* to_ = nullptr;
  FILE* from_ = nullptr;
};

AttackPlan plan_from_config(const PointCloud& cloud, const RunConfig& config) {
  AttackPlan plan = assign_target_distances(cloud);
  plan.eps = config.eps;
  plan.noise = parse_noise(config.noise_variant);
  plan.scaled = config.scaled;
  return plan;
}

int cmd_capacity(const RunConfig& config, int dim) {
  const int m = check_capacity(dim);
  if (config.format == "json") {
    json report = report_skeleton(config);
    report["result"] = {{"dim", dim}, {"max_points", m}};
    std::cout << report.dump(2) << '\n';
  } else {
    std::cout << m << '\n';
  }
  return 0;
}

int cmd_forge(const RunConfig& config) {
  const PointsFile pf = read_points_csv_file(config.points_path);
  const PointCloud cloud = pf.to_cloud();
  AttackPlan plan;
  plan.cloud = cloud;
  plan.spec = read_distance_csv_file(config.distances_path, cloud.size());
  plan.eps = config.eps;
  plan.noise = parse_noise(config.noise_variant);
  plan.scaled = config.scaled;

  const ForgeResult forged = forge_semimetric(plan);
  const bool verified = forged.max_rel_error <= config.tol;
  const double target_scale = config.scaled ? std::sqrt(forged.alpha) : 1.0;
  const auto pairs = pair_order(cloud.size());

  if (!config.out_path.empty()) {
    write_matrix_csv_file(config.out_path, forged.semimetric.form.matrix);
  }

  if (config.format == "json") {
    json rows = json::array();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const double want = target_scale * plan.spec.values()[k];
      rows.push_back({{"i", pairs[k].first + 1},
                      {"j", pairs[k].second + 1},
                      {"delta", plan.spec.values()[k]},
                      {"target", want},
                      {"realized", forged.realized[k]},
                      {"rel_error", std::abs(forged.realized[k] - want) / want}});
    }
    json matrix = json::array();
    for (int r = 0; r < forged.semimetric.form.matrix.rows(); ++r) {
      json row = json::array();
      for (int c = 0; c < forged.semimetric.form.matrix.cols(); ++c) {
        row.push_back(forged.semimetric.form.matrix(r, c));
      }
      matrix.push_back(row);
    }
    json report = report_skeleton(config);
    report["result"] = {{"verified", verified},
                        {"tolerance", config.tol},
                        {"max_rel_error", forged.max_rel_error},
                        {"eps_used", forged.eps_used},
                        {"alpha", forged.alpha},
                        {"lambda_max", forged.lambda_max},
                        {"lambda_min", forged.diagnostics.lambda_min},
                        {"spread", forged.diagnostics.spread()},
                        {"scaled", config.scaled},
                        {"matrix", matrix},
                        {"distances", rows},
                        {"warnings", warnings_json(forged.warnings)}};
    std::cout << report.dump(2) << '\n';
  } else if (config.format == "csv") {
    std::cout << "i,j,delta,target,realized,rel_error\n";
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const double want = target_scale * plan.spec.values()[k];
      std::cout << pairs[k].first + 1 << ',' << pairs[k].second + 1 << ','
                << format_double(plan.spec.values()[k]) << ',' << format_double(want) << ','
                << format_double(forged.realized[k]) << ','
                << format_double(std::abs(forged.realized[k] - want) / want) << '\n';
    }
  } else {
    std::cout << "points: " << cloud.size() << "  dim: " << cloud.dim()
              << "  lifted dim: " << pair_count(cloud.size()) << '\n'
              << "eps: " << forged.eps_used << "  alpha: " << forged.alpha
              << "  lambda_max: " << forged.lambda_max
              << "  spread: " << forged.diagnostics.spread() << '\n';
    std::cout << std::setw(4) << "i" << std::setw(4) << "j" << std::setw(16) << "target"
              << std::setw(16) << "realized" << std::setw(12) << "rel_error" << '\n';
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const double want = target_scale * plan.spec.values()[k];
      std::cout << std::setw(4) << pairs[k].first + 1 << std::setw(4) << pairs[k].second + 1
                << std::setw(16) << std::setprecision(8) << want << std::setw(16)
                << forged.realized[k] << std::setw(12) << std::setprecision(2)
                << std::abs(forged.realized[k] - want) / want << '\n';
    }
    for (const Warning& w : forged.warnings) {
      std::cout << "warning [" << w.kind << "]: " << w.message << '\n';
    }
    std::cout << "verified: " << (verified ? "yes" : "no") << " (tolerance " << config.tol
              << ")\n";
  }
  return verified ? 0 : 1;
}

int cmd_check_axioms(const RunConfig& config) {
  const PointsFile pf = read_points_csv_file(config.points_path);
  const PointCloud cloud = pf.to_cloud();
  std::vector<Eigen::VectorXd> sample;
  for (int i = 0; i < cloud.size(); ++i) sample.push_back(cloud.point(i));

  DistanceFn distance;
  AxiomOptions options;
  options.seed = config.seed;
  options.eps = config.eps;

  if (config.distance_source == "euclidean") {
    distance = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
      return (x - y).norm();
    };
  } else if (config.distance_source == "forged") {
    if (config.distances_path.empty()) {
      throw InputError("check-axioms --distance forged requires --distances");
    }
    AttackPlan plan;
    plan.cloud = cloud;
    plan.spec = read_distance_csv_file(config.distances_path, cloud.size());
    plan.eps = config.eps;
    plan.noise = parse_noise(config.noise_variant);
    plan.scaled = config.scaled;
    const ForgeResult forged = forge_semimetric(plan);
    distance = forged.semimetric.fn();
    if (options.eps == 0.0) options.eps = forged.eps_used;
  } else if (config.distance_source.rfind("exec:", 0) == 0) {
    auto adapter = std::make_shared<ExecDistance>(config.distance_source.substr(5));
    distance = [adapter](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
      return adapter->eval(x, y);
    };
  } else {
    throw InputError("unknown distance source '" + config.distance_source +
                     "' (expected euclidean, forged, or exec:<command>)");
  }

  const AxiomReport report = check_axioms(distance, sample, options);

  const auto witness_json = [](const std::optional<std::array<int, 3>>& w) {
    return w ? json({(*w)[0], (*w)[1], (*w)[2]}) : json(nullptr);
  };
  const auto pair_witness_json = [](const std::optional<std::array<int, 2>>& w) {
    return w ? json({(*w)[0], (*w)[1]}) : json(nullptr);
  };

  if (config.format == "json") {
    json out = report_skeleton(config);
    out["result"] = {{"classification", metric_class_name(report.classification)},
                     {"eps", report.eps},
                     {"identity_defect", report.identity_defect},
                     {"positivity_violations", report.positivity_violations},
                     {"asymmetry_defect", report.asymmetry_defect},
                     {"triangle_defect", report.triangle_defect},
                     {"triples_checked", report.triples_checked},
                     {"exhaustive", report.exhaustive},
                     {"max_distance", report.max_distance},
                     {"asymmetry_witness", pair_witness_json(report.asymmetry_witness)},
                     {"triangle_witness", witness_json(report.triangle_witness)}};
    std::cout << out.dump(2) << '\n';
  } else if (config.format == "csv") {
    std::cout << "quantity,value\n"
              << "classification," << metric_class_name(report.classification) << '\n'
              << "eps," << format_double(report.eps) << '\n'
              << "identity_defect," << format_double(report.identity_defect) << '\n'
              << "positivity_violations," << report.positivity_violations << '\n'
              << "asymmetry_defect," << format_double(report.asymmetry_defect) << '\n'
              << "triangle_defect," << format_double(report.triangle_defect) << '\n'
              << "triples_checked," << report.triples_checked << '\n';
  } else {
    std::cout << "classification: " << metric_class_name(report.classification) << '\n'
              << "identity defect:      " << report.identity_defect << '\n'
              << "positivity violations: " << report.positivity_violations << '\n'
              << "asymmetry defect:     " << report.asymmetry_defect << '\n'
              << "triangle defect:      " << report.triangle_defect
              << (report.eps > 0 ? "  (eps " + std::to_string(report.eps) + ")" : "") << '\n'
              << "triples checked:      " << report.triples_checked
              << (report.exhaustive ? " (exhaustive)" : " (sampled)") << '\n';
    if (report.triangle_witness) {
      const auto& w = *report.triangle_witness;
      std::cout << "worst triangle:       (" << w[0] << ", " << w[1] << ", " << w[2] << ")\n";
    }
  }
  return 0;
}

int cmd_attack(const RunConfig& config) {
  PointCloud cloud;
  if (!config.random_dims.empty()) {
    SplitMix64 gen(config.seed);
    cloud = random_cloud(config.random_dims[0], config.random_dims[1], gen);
    cloud.labels = random_labels(config.random_dims[0], config.random_dims[2], gen);
  } else if (!config.points_path.empty()) {
    cloud = read_points_csv_file(config.points_path).to_cloud();
  } else {
    throw InputError("attack: provide --points or --random m ell classes");
  }

  const AttackPlan plan = plan_from_config(cloud, config);
  AttackReport report;
  if (config.algorithm == "kmeans") {
    KMeansAttackOptions options;
    options.iterations = config.iterations;
    options.seed = config.seed;
    options.centers =
        config.centers == "z-neighbor" ? CentersMode::ZNeighbor : CentersMode::ClassMean;
    report = attack_kmeans(plan, options);
  } else {
    report = attack_dbscan(plan);
  }

  if (config.format == "json") {
    json points = json::array();
    for (int i = 0; i < cloud.size(); ++i) {
      json coords = json::array();
      for (int c = 0; c < cloud.dim(); ++c) coords.push_back(cloud.points(i, c));
      points.push_back({{"index", i + 1},
                        {"coords", coords},
                        {"desired", report.desired[i]},
                        {"recovered", report.recovered[i]}});
    }
    json bijection = json(nullptr);
    if (report.bijection) {
      bijection = json::object();
      for (const auto& [from, to] : *report.bijection) bijection[std::to_string(from)] = to;
    }
    json result{{"algorithm", report.algorithm},
                {"success", report.success},
                {"points", points},
                {"bijection", bijection},
                {"separation", separation_json(report.separation)},
                {"eps_used", report.eps_used},
                {"delta_small", report.delta_small},
                {"delta_large", report.delta_large},
                {"realized_max_rel_error", report.realized_max_rel_error},
                {"alpha", report.alpha},
                {"lambda_max", report.lambda_max},
                {"warnings", warnings_json(report.warnings)}};
    if (report.algorithm == "kmeans") {
      result["iterations"] = report.iterations;
      result["empty_cluster_events"] = report.empty_cluster_events;
    } else {
      result["dbscan_eps"] = report.dbscan_eps;
      result["min_pts"] = report.min_pts;
      result["recovered_raw"] = report.recovered_raw;
    }
    json out = report_skeleton(config);
    out["result"] = result;
    std::cout << out.dump(2) << '\n';
  } else if (config.format == "csv") {
    std::cout << "index";
    for (int c = 0; c < cloud.dim(); ++c) std::cout << ",x" << (c + 1);
    std::cout << ",desired,recovered\n";
    for (int i = 0; i < cloud.size(); ++i) {
      std::cout << (i + 1);
      for (int c = 0; c < cloud.dim(); ++c) std::cout << ',' << format_double(cloud.points(i, c));
      std::cout << ',' << report.desired[i] << ',' << report.recovered[i] << '\n';
    }
  } else {
    std::cout << report.algorithm << " attack on " << cloud.size() << " points in R^"
              << cloud.dim() << '\n'
              << "delta_small: " << report.delta_small << "  delta_large: " << report.delta_large
              << "  eps: " << report.eps_used << '\n';
    if (report.algorithm == "dbscan") {
      std::cout << "dbscan eps: " << report.dbscan_eps << "  min_pts: " << report.min_pts << '\n';
    }
    std::cout << std::setw(6) << "index" << std::setw(10) << "desired" << std::setw(11)
              << "recovered" << '\n';
    for (int i = 0; i < cloud.size(); ++i) {
      std::cout << std::setw(6) << (i + 1) << std::setw(10) << report.desired[i] << std::setw(11)
                << report.recovered[i] << '\n';
    }
    if (report.separation.ratio) {
      std::cout << "separation: max within " << *report.separation.max_within << ", min between "
                << *report.separation.min_between << ", ratio " << *report.separation.ratio
                << '\n';
    }
    if (report.bijection) {
      std::cout << "bijection:";
      for (const auto& [from, to] : *report.bijection) {
        std::cout << ' ' << from << "->" << to;
      }
      std::cout << '\n';
    }
    for (const Warning& w : report.warnings) {
      std::cout << "warning [" << w.kind << "]: " << w.message << '\n';
    }
    std::cout << "success: " << (report.success ? "yes" : "no") << '\n';
  }
  return report.success ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig config;
  int dim = 0;

  CLI::App app{"Designated-distance semimetrics and clustering attacks"};
  app.require_subcommand(1);

  try {
    config.seed = seed_from_env();
  } catch (const InputError& e) {
    std::cerr << json{{"error", {{"type", "input"}, {"stage", "startup"}, {"message", e.what()}}}}
                     .dump()
              << '\n';
    return 2;
  }

  const auto add_common = [&](CLI::App* cmd, bool default_scaled) {
    cmd->add_option("--seed", config.seed, "Master seed (default: METRICFORGE_SEED or 1)");
    cmd->add_option("--eps", config.eps, "Neighbor ball radius (default: 0.45 * min distance)");
    cmd->add_option("--noise", config.noise_variant, "Noise variant: hashed|paper")
        ->check(CLI::IsMember({"hashed", "paper", "product-sum"}));
    cmd->add_option("--format", config.format, "Output format: json|table|csv")
        ->check(CLI::IsMember({"json", "table", "csv"}));
    auto* scaled = cmd->add_flag("--scaled", "Use the 1/lambda_max rescaled form");
    auto* unscaled = cmd->add_flag("--unscaled", "Use the raw interpolating form");
    scaled->excludes(unscaled);
    unscaled->excludes(scaled);
    cmd->callback([&config, scaled, unscaled, default_scaled]() {
      config.scaled = default_scaled;
      if (scaled->count()) config.scaled = true;
      if (unscaled->count()) config.scaled = false;
    });
  };

  CLI::App* capacity = app.add_subcommand("capacity", "Largest point count a dimension can host");
  capacity->add_option("--dim", dim, "Point dimension")->required()->check(CLI::PositiveNumber);
  capacity->add_option("--format", config.format, "Output format: json|table|csv")
      ->check(CLI::IsMember({"json", "table", "csv"}));
  capacity->add_option("--seed", config.seed, "Master seed (recorded in the report)");
  capacity->preparse_callback([&config](std::size_t) { config.format = "table"; });

  CLI::App* forge = app.add_subcommand("forge", "Build a form realizing designated distances");
  forge->add_option("--points", config.points_path, "Points CSV")->required();
  forge->add_option("--distances", config.distances_path, "Distance spec CSV (i,j,delta)")
      ->required();
  forge->add_option("--out", config.out_path, "Write the form matrix CSV here");
  forge->add_option("--tol", config.tol, "Verification tolerance on relative error");
  add_common(forge, /*default_scaled=*/false);

  CLI::App* axioms = app.add_subcommand("check-axioms", "Classify a distance function");
  axioms->add_option("--points", config.points_path, "Sample points CSV")->required();
  axioms->add_option("--distance", config.distance_source,
                     "euclidean | forged | exec:<command>");
  axioms->add_option("--distances", config.distances_path,
                     "Distance spec CSV (with --distance forged)");
  add_common(axioms, /*default_scaled=*/true);

  CLI::App* attack = app.add_subcommand("attack", "Forge a metric that steers a clustering");
  attack->add_option("algorithm", config.algorithm, "kmeans | dbscan")
      ->required()
      ->check(CLI::IsMember({"kmeans", "dbscan"}));
  attack->add_option("--points", config.points_path, "Labeled points CSV (class column)");
  attack->add_option("--random", config.random_dims, "Generate m points in R^ell with k classes")
      ->expected(3);
  attack->add_option("--iterations", config.iterations, "k-Means iterations")
      ->check(CLI::PositiveNumber);
  attack->add_option("--centers", config.centers, "Initial centers: class-mean | z-neighbor")
      ->check(CLI::IsMember({"class-mean", "z-neighbor"}));
  add_common(attack, /*default_scaled=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string stage = "startup";
  try {
    if (capacity->parsed()) {
      config.command = "capacity";
      stage = config.command;
      return cmd_capacity(config, dim);
    }
    if (forge->parsed()) {
      config.command = "forge";
      stage = config.command;
      return cmd_forge(config);
    }
    if (axioms->parsed()) {
      config.command = "check-axioms";
      stage = config.command;
      return cmd_check_axioms(config);
    }
    config.command = "attack";
    stage = config.command;
    return cmd_attack(config);
  } catch (const NumericalError& e) {
    std::cerr << json{{"error",
                       {{"type", "numerical"}, {"stage", e.stage}, {"message", e.what()}}}}
                     .dump()
              << '\n';
    return 3;
  } catch (const RankError& e) {
    std::cerr << json{{"error", {{"type", "rank"}, {"stage", stage}, {"message", e.what()}}}}
                     .dump()
              << '\n';
    return 3;
  } catch (const InputError& e) {
    std::cerr << json{{"error", {{"type", "input"}, {"stage", stage}, {"message", e.what()}}}}
                     .dump()
              << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"type", "internal"}, {"stage", stage}, {"message", e.what()}}}}
                     .dump()
              << '\n';
    return 3;
  }
}
