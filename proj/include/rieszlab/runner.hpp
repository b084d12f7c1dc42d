#pragma once
// Declarative experiment runner behind the CLI. Parses versioned JSON configs
// (unknown keys are errors), builds named sets and measures, runs one task,
// and produces deterministic JSON reports plus optional CSV. Reports carry no
// timestamps or machine state, so identical configs give identical bytes.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rieszlab/io.hpp"
#include "rieszlab/wiener.hpp"

#ifndef RIESZLAB_VERSION
#define RIESZLAB_VERSION "dev"
#endif

namespace rieszlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;  // exit code 1
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;  // exit code 2
};
struct InconclusiveError : std::runtime_error {
  using std::runtime_error::runtime_error;  // exit code 3
};

struct RunOptions {
  int level = -1;        // >= 0 overrides every level-bearing set
  double tol = 0.0;      // > 0 overrides the solver tolerance
  double beta = 0.0;     // > 0 overrides the kernel beta
  int threads = 1;       // validated only; evaluation is single-threaded
  bool require_conclusive = false;
  bool check_symmetry = false;
  bool check_restriction = false;
  bool check_superposition = false;
};

struct RunResult {
  Json report;
  std::vector<std::pair<std::string, std::string>> files;  // relative path -> content
};

namespace detail {

inline void check_keys(const Json& obj, const std::set<std::string>& allowed,
                       const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ConfigError(path + ": unknown key '" + key + "'");
}

inline Vec vec_from(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a number array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(path + ": expected numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline Mat mat_from(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected an array of points");
  const std::size_t cols = j[0].size();
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != cols) throw ConfigError(path + ": ragged point array");
    for (std::size_t d = 0; d < cols; ++d) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = j[i][d].get<double>();
  }
  return m;
}

inline Json kkt_to_json(const KktReport& k) {
  return Json{{"stationarity", k.stationarity},
              {"complementarity", k.complementarity},
              {"primal_negativity", k.primal_negativity}};
}

inline Json series_to_json(const SeriesDiagnostic& d) {
  Json j;
  j["k"] = d.ks;
  j["terms"] = d.terms;
  j["partial_sums"] = d.partial_sums;
  j["tail_ratio"] = d.tail_ratio;
  if (std::isfinite(d.geo_resid)) j["geo_resid"] = d.geo_resid;
  if (std::isfinite(d.harm_resid)) j["harm_resid"] = d.harm_resid;
  j["verdict"] = to_string(d.verdict);
  j["k_max"] = d.k_max;
  if (!d.note.empty()) j["note"] = d.note;
  return j;
}

// deterministic pseudo-random fixture atoms (bit-portable mapping)
struct FixtureRng {
  std::mt19937_64 gen;
  explicit FixtureRng(std::uint64_t seed) : gen(seed) {}
  double uniform() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
};

}  // namespace detail

inline Json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // translate the byte offset into line:column
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path.filename().string() + ":" + std::to_string(line) + ":" +
                      std::to_string(col) + ": " + e.what());
  }
}

class Runner {
 public:
  Runner(Json config, RunOptions opts) : config_(std::move(config)), opts_(opts) {
    if (opts_.threads < 1) throw ConfigError("--threads must be >= 1");
    detail::check_keys(config_, {"version", "kernel", "sets", "measures", "task", "output"}, "config");
    if (!config_.contains("version") || config_.at("version") != 1)
      throw ConfigError("config: version must be 1");
    if (!config_.contains("task")) throw ConfigError("config: missing task");

    const Json kernel = config_.value("kernel", Json{{"n", 3}, {"alpha", 2.0}, {"beta", 0.5}});
    detail::check_keys(kernel, {"n", "alpha", "beta"}, "config.kernel");
    model_.params.n = kernel.value("n", 3);
    model_.params.alpha = kernel.value("alpha", 2.0);
    model_.beta = opts_.beta > 0.0 ? opts_.beta : kernel.value("beta", 0.5);
    model_.diag_rule = DiagRule::spacing_scaled;
    try {
      validate_params(model_.params);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config.kernel: ") + e.what());
    }
    if (!(model_.beta > 0.0)) throw ConfigError("config.kernel: beta must be > 0");
    solver_.tol = opts_.tol > 0.0 ? opts_.tol : 1e-10;
  }

  RunResult run(const std::string& command) {
    const Json& task = config_.at("task");
    const std::string type = task.value("type", std::string());
    if (type != command)
      throw ConfigError("config.task.type is '" + type + "' but the subcommand is '" + command + "'");

    RunResult result;
    result.report["tool"] = Json{{"name", "rieszlab"}, {"version", RIESZLAB_VERSION}};
    Json echo = config_;
    if (opts_.level >= 0) echo["applied_overrides"]["level"] = opts_.level;
    if (opts_.tol > 0.0) echo["applied_overrides"]["tol"] = opts_.tol;
    if (opts_.beta > 0.0) echo["applied_overrides"]["beta"] = opts_.beta;
    result.report["config"] = std::move(echo);
    result.report["tolerances"] =
        Json{{"solver_tol", solver_.tol}, {"kernel_beta", model_.beta}};

    if (type == "capacity") cmd_capacity(task, result);
    else if (type == "balayage") cmd_balayage(task, result);
    else if (type == "wiener") cmd_wiener(task, result);
    else if (type == "kelvin_check") cmd_kelvin_check(task, result);
    else if (type == "mass_deficit") cmd_mass_deficit(task, result);
    else throw ConfigError("config.task: unknown type '" + type + "'");

    const Json output = config_.value("output", Json::object());
    detail::check_keys(output, {"report", "csv"}, "config.output");
    result.files.emplace_back(output.value("report", std::string("report.json")),
                              result.report.dump(2) + "\n");
    return result;
  }

  const KernelModel& model() const { return model_; }
  const SolverOptions& solver() const { return solver_; }

  // --- set and measure builders -------------------------------------------

  PointCloud build_set(const std::string& name, int level_override = -1) {
    const Json sets = config_.value("sets", Json::object());
    if (!sets.contains(name)) throw ConfigError("config.sets: no set named '" + name + "'");
    return build_set_json(sets.at(name), "config.sets." + name, level_override);
  }

  PointCloud build_set_json(const Json& spec, const std::string& path, int level_override = -1) {
    const std::string kind = spec.value("kind", std::string());
    const int forced = level_override >= 0 ? level_override : opts_.level;
    try {
      if (kind == "sphere") {
        detail::check_keys(spec, {"kind", "center", "radius", "level"}, path);
        const int level = forced >= 0 ? forced : spec.value("level", 0);
        return sample_sphere(detail::vec_from(spec.at("center"), path + ".center"),
                             spec.value("radius", 1.0), level);
      }
      if (kind == "ball") {
        detail::check_keys(spec, {"kind", "center", "radius", "level"}, path);
        const int level = forced >= 0 ? forced : spec.value("level", 0);
        return sample_ball(detail::vec_from(spec.at("center"), path + ".center"),
                           spec.value("radius", 1.0), level);
      }
      if (kind == "rotation_body") {
        detail::check_keys(spec, {"kind", "profile", "s", "x1_max", "base_pitch", "radius_cap", "level"}, path);
        const RotationBodySpec body = rotation_spec_from(spec, path);
        const int level = forced >= 0 ? forced : spec.value("level", 0);
        return sample_rotation_body(body, level);
      }
      if (kind == "points") {
        detail::check_keys(spec, {"kind", "points", "spacing", "label"}, path);
        PointCloud cloud;
        cloud.points = detail::mat_from(spec.at("points"), path + ".points");
        cloud.spacing = spec.contains("spacing")
                            ? detail::vec_from(spec.at("spacing"), path + ".spacing")
                            : Vec(nearest_neighbor_distances(cloud.points));
        cloud.label = spec.value("label", std::string("points"));
        validate_cloud(cloud);
        return cloud;
      }
      if (kind == "invert") {
        detail::check_keys(spec, {"kind", "of", "y"}, path);
        const PointCloud base = build_set(spec.at("of").get<std::string>(), level_override);
        return invert_cloud(base, detail::vec_from(spec.at("y"), path + ".y"));
      }
      if (kind == "file") {
        detail::check_keys(spec, {"kind", "path"}, path);
        return cloud_from_json(load_config_file(spec.at("path").get<std::string>()));
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(path + ": " + e.what());
    }
    throw ConfigError(path + ": unknown set kind '" + kind + "'");
  }

  RotationBodySpec rotation_spec_from(const Json& spec, const std::string& path) {
    RotationBodySpec body;
    const std::string profile = spec.value("profile", std::string("power"));
    if (profile == "power") body.profile = Profile::power;
    else if (profile == "stretched_exp") body.profile = Profile::stretched_exp;
    else if (profile == "super_exp") body.profile = Profile::super_exp;
    else throw ConfigError(path + ": unknown profile '" + profile + "'");
    body.s = spec.value("s", 0.0);
    body.x1_max = spec.value("x1_max", 16.0);
    body.base_pitch = spec.value("base_pitch", 0.3);
    body.radius_cap = spec.value("radius_cap", 0.0);
    try {
      validate_spec(body);
    } catch (const std::exception& e) {
      throw ConfigError(path + ": " + e.what());
    }
    return body;
  }

  DiscreteMeasure build_measure(const std::string& name, int level_override = -1) {
    const Json measures = config_.value("measures", Json::object());
    if (!measures.contains(name)) throw ConfigError("config.measures: no measure named '" + name + "'");
    const Json& spec = measures.at(name);
    const std::string path = "config.measures." + name;
    const std::string kind = spec.value("kind", std::string());
    if (kind == "diracs") {
      detail::check_keys(spec, {"kind", "points", "weights", "spacing"}, path);
      const Mat pts = detail::mat_from(spec.at("points"), path + ".points");
      const Vec w = detail::vec_from(spec.at("weights"), path + ".weights");
      if (w.size() != pts.rows()) throw ConfigError(path + ": weights length mismatch");
      return diracs(pts, w, spec.value("spacing", 1.0));
    }
    if (kind == "equilibrium_of") {
      detail::check_keys(spec, {"kind", "set"}, path);
      const PointCloud cloud = build_set(spec.at("set").get<std::string>(), level_override);
      const EquilibriumResult eq = equilibrium(model_, cloud, Mat(), solver_);
      if (!eq.converged) throw NumericalError(path + ": equilibrium solve did not converge");
      return eq.gamma;
    }
    throw ConfigError(path + ": unknown measure kind '" + kind + "'");
  }

 private:
  // --- commands -------------------------------------------------------------

  std::vector<int> levels_from(const Json& task) {
    std::vector<int> levels;
    if (opts_.level >= 0) {
      levels.push_back(opts_.level);
    } else if (task.contains("levels")) {
      for (const auto& l : task.at("levels")) levels.push_back(l.get<int>());
      if (levels.empty()) throw ConfigError("config.task.levels: empty");
    } else {
      levels.push_back(-1);  // the set's own level
    }
    return levels;
  }

  void cmd_capacity(const Json& task, RunResult& result) {
    detail::check_keys(task, {"type", "set", "levels"}, "config.task");
    const std::string set = task.at("set").get<std::string>();
    Json per_level = Json::array();
    std::vector<double> hs, caps;
    PointCloud finest;
    Vec finest_w, finest_u;
    for (const int level : levels_from(task)) {
      const PointCloud cloud = build_set(set, level);
      const EquilibriumResult eq = equilibrium(model_, cloud, Mat(), solver_);
      if (!eq.converged) throw NumericalError("capacity: equilibrium solve did not converge");
      const double h = cloud.spacing.maxCoeff();
      hs.push_back(h);
      caps.push_back(eq.capacity);
      per_level.push_back(Json{{"level", level},
                               {"nodes", cloud.size()},
                               {"max_spacing", h},
                               {"capacity", eq.capacity},
                               {"energy", eq.energy},
                               {"mass", eq.gamma.total_mass()},
                               {"kkt", detail::kkt_to_json(eq.kkt)},
                               {"potential",
                                Json{{"node_min", eq.potential_stats.node_min},
                                     {"node_max", eq.potential_stats.node_max},
                                     {"support_min", eq.potential_stats.support_min}}}});
      finest = cloud;
      finest_w = eq.gamma.weights;
      finest_u = kernel_matrix(model_, cloud) * eq.gamma.weights;
    }
    Json res;
    res["per_level"] = std::move(per_level);
    res["extrapolated_capacity"] = extrapolate_in_h(hs, caps);
    result.report["results"] = std::move(res);

    const Json output = config_.value("output", Json::object());
    if (output.contains("csv"))
      result.files.emplace_back(output.at("csv").get<std::string>(),
                                equilibrium_csv(finest, finest_w, finest_u));
  }

  static double extrapolate_in_h(const std::vector<double>& hs, const std::vector<double>& caps) {
    if (hs.size() < 2) return caps.back();
    // least-squares c(h) = c0 + a h; first-order bias in the mesh size
    double sh = 0, sc = 0, shh = 0, shc = 0;
    const double m = static_cast<double>(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
      sh += hs[i];
      sc += caps[i];
      shh += hs[i] * hs[i];
      shc += hs[i] * caps[i];
    }
    const double denom = m * shh - sh * sh;
    if (denom == 0.0) return caps.back();
    const double a = (m * shc - sh * sc) / denom;
    return (sc - a * sh) / m;
  }

  void cmd_balayage(const Json& task, RunResult& result) {
    detail::check_keys(task, {"type", "measure", "target", "levels", "checks"}, "config.task");
    const DiscreteMeasure mu = build_measure(task.at("measure").get<std::string>());
    Json checks = task.value("checks", Json::object());
    detail::check_keys(checks, {"symmetry", "restriction", "superposition"}, "config.task.checks");

    Json per_level = Json::array();
    PointCloud finest_target;
    Vec finest_w;
    for (const int level : levels_from(task)) {
      const PointCloud target = build_set(task.at("target").get<std::string>(), level);
      const BalayageResult r = sweep(model_, mu, target, Mat(), solver_);
      if (!r.converged) throw NumericalError("balayage: sweep did not converge");
      Json entry{{"level", level},
                 {"nodes", target.size()},
                 {"source_mass", r.source_mass},
                 {"swept_mass", r.swept_mass},
                 {"deficit_ratio", 1.0 - r.swept_mass / r.source_mass},
                 {"potential_match", r.potential_match},
                 {"domination_excess", r.domination_excess},
                 {"kkt", detail::kkt_to_json(r.kkt)},
                 {"iterations", r.iterations}};

      if (opts_.check_symmetry || checks.contains("symmetry")) {
        const std::string lname = checks.contains("symmetry")
                                      ? checks.at("symmetry").get<std::string>()
                                      : task.at("measure").get<std::string>();
        const DiscreteMeasure lambda = build_measure(lname);
        entry["symmetry_gap"] = check_symmetry(model_, mu, lambda, target, solver_).gap;
      }
      if (opts_.check_restriction || checks.contains("restriction")) {
        if (!checks.contains("restriction"))
          throw ConfigError("balayage: restriction check needs task.checks.restriction (a subset set)");
        const PointCloud q = build_set(checks.at("restriction").get<std::string>(), level);
        const RestrictionReport rr =
            check_restriction(model_, mu, target, q, default_probes(target, &mu), solver_);
        entry["restriction"] = Json{{"energy_distance", rr.energy_distance},
                                    {"rel_potential_gap", rr.rel_potential_gap}};
      }
      if (opts_.check_superposition || checks.value("superposition", false)) {
        const SuperpositionReport sr = superpose_diracs(
            model_, mu.cloud->points, mu.weights, target, default_probes(target, &mu), solver_);
        entry["superposition"] = Json{{"energy_gap", sr.energy_gap},
                                      {"probe_gap", sr.probe_gap},
                                      {"source_inside_hull", sr.source_inside_hull}};
      }
      finest_target = target;
      finest_w = r.swept.weights;
      per_level.push_back(std::move(entry));
    }
    result.report["results"] = Json{{"per_level", std::move(per_level)}};

    const Json output = config_.value("output", Json::object());
    if (output.contains("csv")) {
      const Vec b = detail::target_potentials(model_, mu, finest_target);
      const Vec u = kernel_matrix(model_, finest_target) * finest_w;
      result.files.emplace_back(output.at("csv").get<std::string>(),
                                balayage_csv(finest_target, finest_w, b, u));
    }
  }

  void cmd_wiener(const Json& task, RunResult& result) {
    detail::check_keys(task,
                       {"type", "mode", "set", "center", "y", "q", "k_min", "k_max", "x1_max_list"},
                       "config.task");
    const std::string mode = task.value("mode", std::string("series"));
    const int k_min = task.value("k_min", 0);
    const int k_max = task.value("k_max", 6);

    if (mode == "classify") {
      const PointCloud cloud = build_set(task.at("set").get<std::string>());
      const Vec y = detail::vec_from(task.at("y"), "config.task.y");
      const double q = task.value("q", 0.5);
      const PointClassification cls = classify_point(model_, cloud, y, q, k_min, k_max, solver_);
      Json res{{"verdict", to_string(cls.verdict)},
               {"series_route", detail::series_to_json(cls.series_route)},
               {"inversion_route", detail::series_to_json(cls.inversion_route)},
               {"routes_disagree", cls.routes_disagree},
               {"k_max_used", cls.k_max_used}};
      if (!cls.warning.empty()) res["warning"] = cls.warning;
      result.report["results"] = std::move(res);
      if (opts_.require_conclusive && cls.verdict == Regularity::inconclusive)
        throw InconclusiveError("wiener classify: inconclusive verdict");
      return;
    }
    if (mode != "series") throw ConfigError("config.task.mode: expected 'series' or 'classify'");

    const double q = task.value("q", 2.0);
    const Vec center = task.contains("center") ? detail::vec_from(task.at("center"), "config.task.center")
                                               : Vec(Vec::Zero(model_.params.n));
    std::vector<double> x1_list;
    if (task.contains("x1_max_list"))
      for (const auto& v : task.at("x1_max_list")) x1_list.push_back(v.get<double>());
    else
      x1_list.push_back(-1.0);

    const Json sets = config_.value("sets", Json::object());
    const std::string set_name = task.at("set").get<std::string>();

    Json runs = Json::array();
    std::string csv = "x1_max,k,node_count,c_k,term,partial_sum\n";
    for (const double x1 : x1_list) {
      Json set_spec = sets.contains(set_name) ? sets.at(set_name) : Json();
      if (x1 > 0.0) {
        if (set_spec.value("kind", std::string()) != "rotation_body")
          throw ConfigError("wiener: x1_max_list needs a rotation_body set");
        set_spec["x1_max"] = x1;
      }
      const PointCloud cloud = build_set_json(set_spec, "config.sets." + set_name);
      const ShellDecomposition decomp =
          shell_capacities(model_, cloud, center, q, k_min, k_max, solver_);
      for (const auto& shell : decomp.shells)
        if (!shell.valid) throw NumericalError("wiener: shell k=" + std::to_string(shell.k) + ": " + shell.error);
      const SeriesDiagnostic existence = equilibrium_existence_series(decomp);
      const SeriesDiagnostic finiteness = capacity_finiteness_series(decomp);

      Json run{{"x1_max", x1 > 0.0 ? Json(x1) : Json(nullptr)},
               {"nodes", cloud.size()},
               {"equilibrium_existence", detail::series_to_json(existence)},
               {"capacity_finiteness", detail::series_to_json(finiteness)}};
      Json shell_rows = Json::array();
      for (std::size_t i = 0; i < decomp.shells.size(); ++i) {
        const auto& s = decomp.shells[i];
        shell_rows.push_back(Json{{"k", s.k}, {"nodes", s.cloud.size()}, {"capacity", s.capacity}});
        csv += fmt15(x1) + ',' + std::to_string(s.k) + ',' + std::to_string(s.cloud.size()) + ',' +
               fmt15(s.capacity) + ',' + fmt15(existence.terms[i]) + ',' +
               fmt15(existence.partial_sums[i]) + '\n';
      }
      run["shells"] = std::move(shell_rows);
      if (opts_.require_conclusive && existence.verdict == Verdict::inconclusive)
        throw InconclusiveError("wiener: inconclusive existence verdict");
      runs.push_back(std::move(run));
    }
    result.report["results"] = Json{{"runs", std::move(runs)}};

    const Json output = config_.value("output", Json::object());
    if (output.contains("csv")) result.files.emplace_back(output.at("csv").get<std::string>(), csv);
  }

  void cmd_kelvin_check(const Json& task, RunResult& result) {
    detail::check_keys(task, {"type", "y", "fixture", "target", "levels"}, "config.task");
    const Vec y = detail::vec_from(task.at("y"), "config.task.y");
    const Json fixture = task.value("fixture", Json{{"atoms", 100}, {"seed", 1}});
    detail::check_keys(fixture, {"atoms", "seed"}, "config.task.fixture");
    const int count = fixture.value("atoms", 100);
    if (count < 2) throw ConfigError("kelvin fixture: need at least 2 atoms");
    detail::FixtureRng rng(static_cast<std::uint64_t>(fixture.value("seed", 1)));

    // atoms in a shell around y, away from the center
    Mat pts(count, y.size());
    Vec w(count);
    for (int i = 0; i < count; ++i) {
      Vec dir(y.size());
      double norm2 = 0.0;
      do {
        for (Eigen::Index d = 0; d < y.size(); ++d) dir[d] = 2.0 * rng.uniform() - 1.0;
        norm2 = dir.squaredNorm();
      } while (norm2 < 1e-4 || norm2 > 1.0);
      const double radius = 0.8 + 1.4 * rng.uniform();
      pts.row(i) = (y + dir * (radius / std::sqrt(norm2))).transpose();
      w[i] = 0.5 + rng.uniform();
    }
    const DiscreteMeasure nu = diracs(pts, w);
    const KelvinContext ctx{y, model_.params};

    const DiscreteMeasure nu_star = kelvin_transform(ctx, nu);
    const DiscreteMeasure nu_back = kelvin_transform(ctx, nu_star);
    double invol = (nu_back.cloud->points - nu.cloud->points).cwiseAbs().maxCoeff();
    invol = std::max(invol, (nu_back.weights - nu.weights).cwiseAbs().maxCoeff());

    const KernelModel raw{model_.params, DiagRule::unregularized, model_.beta};
    const double mass_gap =
        std::abs(nu.total_mass() - eval_potential_at(raw, nu_star, y)) / nu.total_mass();

    Mat probes(20, y.size());
    for (int p = 0; p < 20; ++p) {
      Vec dir(y.size());
      double norm2 = 0.0;
      do {
        for (Eigen::Index d = 0; d < y.size(); ++d) dir[d] = 2.0 * rng.uniform() - 1.0;
        norm2 = dir.squaredNorm();
      } while (norm2 < 1e-4 || norm2 > 1.0);
      probes.row(p) = (y + dir * ((3.0 + rng.uniform()) / std::sqrt(norm2))).transpose();
    }
    const double potential_gap = check_kelvin_potential(ctx, nu, probes);

    std::vector<Eigen::Index> half_a, half_b;
    for (Eigen::Index i = 0; i < nu.size(); ++i) (i % 2 == 0 ? half_a : half_b).push_back(i);
    const DiscreteMeasure mu_half = make_measure(subset_cloud(*nu.cloud, half_a), [&] {
      Vec v(static_cast<Eigen::Index>(half_a.size()));
      for (std::size_t i = 0; i < half_a.size(); ++i) v[static_cast<Eigen::Index>(i)] = w[half_a[i]];
      return v;
    }());
    const DiscreteMeasure nu_half = make_measure(subset_cloud(*nu.cloud, half_b), [&] {
      Vec v(static_cast<Eigen::Index>(half_b.size()));
      for (std::size_t i = 0; i < half_b.size(); ++i) v[static_cast<Eigen::Index>(i)] = w[half_b[i]];
      return v;
    }());
    const double energy_gap = check_kelvin_energy(ctx, mu_half, nu_half);

    Json res{{"involution_gap", invol},
             {"mass_gap", mass_gap},
             {"potential_gap", potential_gap},
             {"energy_gap", energy_gap}};

    if (task.contains("target")) {
      Json duality = Json::array();
      for (const int level : levels_from(task)) {
        const PointCloud target = build_set(task.at("target").get<std::string>(), level);
        const DualityReport d = dirac_balayage_duality(model_, y, target, Mat(), solver_);
        if (!d.sweep_path.converged || !d.equilibrium_path.converged)
          throw NumericalError("kelvin duality: a solve did not converge");
        duality.push_back(Json{{"level", level},
                               {"nodes", target.size()},
                               {"mass_sweep", d.mass_sweep},
                               {"mass_kelvin", d.mass_kelvin},
                               {"mass_rel_gap", d.mass_rel_gap},
                               {"probe_rel_gap", d.probe_rel_gap}});
      }
      res["duality"] = std::move(duality);
    }
    result.report["results"] = std::move(res);
  }

  void cmd_mass_deficit(const Json& task, RunResult& result) {
    detail::check_keys(task, {"type", "measure", "body", "x1_max_list", "level"}, "config.task");
    const DiscreteMeasure mu = build_measure(task.at("measure").get<std::string>());
    const Json body_spec = task.at("body");
    detail::check_keys(body_spec, {"kind", "profile", "s", "x1_max", "base_pitch", "radius_cap", "level"},
                       "config.task.body");
    RotationBodySpec body = rotation_spec_from(body_spec, "config.task.body");
    const int level = opts_.level >= 0 ? opts_.level : task.value("level", body_spec.value("level", 0));

    std::vector<double> x1_list;
    if (task.contains("x1_max_list"))
      for (const auto& v : task.at("x1_max_list")) x1_list.push_back(v.get<double>());
    else
      x1_list.push_back(body.x1_max);

    Json rows = Json::array();
    for (const double x1 : x1_list) {
      body.x1_max = x1;
      const PointCloud target = sample_rotation_body(body, level);
      const MassDeficit d = mass_deficit(model_, mu, target, solver_);
      rows.push_back(Json{{"x1_max", x1},
                          {"nodes", target.size()},
                          {"source_mass", d.source_mass},
                          {"swept_mass", d.swept_mass},
                          {"deficit_ratio", d.deficit_ratio}});
    }
    result.report["results"] = Json{{"trend", std::move(rows)}};
  }

  Json config_;
  RunOptions opts_;
  KernelModel model_;
  SolverOptions solver_;
};

/// Parse + run + return the report and files (no disk writes).
inline RunResult run_config(const Json& config, const std::string& command,
                            const RunOptions& opts) {
  Runner runner(config, opts);
  return runner.run(command);
}

/// Write every produced file under out_dir (atomic; creates the directory).
inline void write_run_result(const RunResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& [name, content] : result.files) atomic_write_text(out_dir / name, content);
}

}  // namespace rieszlab
