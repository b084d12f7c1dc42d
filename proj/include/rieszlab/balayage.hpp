#pragma once
// Inner balayage of discrete measures: sweeping mu onto a target cloud is the
// cone projection with target potentials U^mu as the linear term. At target
// nodes the swept potential matches U^mu up to the solver tolerance (with
// complementarity on the support); off the target the domination excess is a
// measured diagnostic expected to decay under refinement.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rieszlab/equilibrium.hpp"
#include "rieszlab/kernel.hpp"
#include "rieszlab/nnqp.hpp"

namespace rieszlab {

struct BalayageResult {
  DiscreteMeasure swept;
  double source_mass = 0.0;
  double swept_mass = 0.0;
  double potential_match = 0.0;     // max over target nodes of max(0, U^mu - U^swept)
  double domination_excess = 0.0;   // max over probes of max(0, U^swept - U^mu)/U^mu
  double b_inf = 0.0;               // ||U^mu||_inf over target nodes
  KktReport kkt;
  bool converged = false;
  int iterations = 0;
};

namespace detail {

/// Target potentials of mu; atoms sitting exactly on a target node use the
/// target's spacing for the regularized self-term.
inline Vec target_potentials(const KernelModel& model, const DiscreteMeasure& mu,
                             const PointCloud& target) {
  Vec b = Vec::Zero(target.size());
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    const Vec t = target.node(i);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < mu.size(); ++j) {
      if (mu.weights[j] == 0.0) continue;
      const double r2 = (t - mu.cloud->node(j)).squaredNorm();
      acc += mu.weights[j] * (r2 == 0.0 ? model.diag(target.spacing[i]) : model.off_diag_r2(r2));
    }
    b[i] = acc;
  }
  return b;
}

inline Mat fibonacci_sphere(const Vec& center, double radius, Eigen::Index count) {
  Mat pts(count, 3);
  const double golden_angle = std::numbers::pi * (std::sqrt(5.0) + 1.0);
  for (Eigen::Index i = 0; i < count; ++i) {
    const double z = -1.0 + (static_cast<double>(i) + 0.5) * 2.0 / static_cast<double>(count);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double th = golden_angle * static_cast<double>(i);
    pts(i, 0) = center[0] + radius * (r * std::cos(th));
    pts(i, 1) = center[1] + radius * (r * std::sin(th));
    pts(i, 2) = center[2] + radius * z;
  }
  return pts;
}

}  // namespace detail

/// Default probe set: 20 points on two spheres bracketing the target plus the
/// source atoms.
inline Mat default_probes(const PointCloud& target, const DiscreteMeasure* mu = nullptr) {
  Vec c = Vec::Zero(target.dim());
  for (Eigen::Index i = 0; i < target.size(); ++i) c += target.node(i);
  c /= static_cast<double>(target.size());
  double radius = 0.0;
  for (Eigen::Index i = 0; i < target.size(); ++i)
    radius = std::max(radius, (target.node(i) - c).norm());
  radius = std::max(radius, 1e-6);
  const Eigen::Index extra = mu ? mu->size() : 0;
  if (target.dim() != 3) {
    // bracketing spheres are a 3-D convenience; fall back to sources only
    Mat pts(extra, target.dim());
    for (Eigen::Index j = 0; j < extra; ++j) pts.row(j) = mu->cloud->points.row(j);
    return pts;
  }
  Mat pts(20 + extra, 3);
  pts.topRows(10) = detail::fibonacci_sphere(c, 1.5 * radius, 10);
  pts.middleRows(10, 10) = detail::fibonacci_sphere(c, 3.0 * radius, 10);
  for (Eigen::Index j = 0; j < extra; ++j) pts.row(20 + j) = mu->cloud->points.row(j);
  return pts;
}

/// Inner balayage of mu onto the target cloud.
inline BalayageResult sweep(const KernelModel& model, const DiscreteMeasure& mu,
                            const PointCloud& target, const Mat& probes = Mat(),
                            const SolverOptions& opts = {}, const Vec& warm_start = Vec()) {
  if (target.size() == 0) throw std::invalid_argument("sweep: empty target");
  NnqpProblem problem{kernel_matrix(model, target), detail::target_potentials(model, mu, target),
                      opts.tol, opts.max_iter};
  const NnqpSolution sol = solve(problem, warm_start);

  BalayageResult out;
  out.swept = make_measure(target, sol.w);
  out.source_mass = mu.total_mass();
  out.swept_mass = sol.w.sum();
  out.b_inf = problem.b.cwiseAbs().maxCoeff();
  out.kkt = sol.kkt;
  out.converged = sol.converged;
  out.iterations = sol.iterations;
  out.potential_match = std::max(0.0, (problem.b - problem.K * sol.w).maxCoeff());

  const Mat& pr = probes.rows() > 0 ? probes : default_probes(target, &mu);
  if (pr.rows() > 0) {
    const Vec u_swept = eval_potential(model, out.swept, pr);
    const Vec u_mu = eval_potential(model, mu, pr);
    double excess = 0.0;
    for (Eigen::Index p = 0; p < pr.rows(); ++p)
      if (u_mu[p] > 0.0) excess = std::max(excess, (u_swept[p] - u_mu[p]) / u_mu[p]);
    out.domination_excess = std::max(0.0, excess);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Monotone families
// ---------------------------------------------------------------------------

namespace detail {
// exact-coordinate membership map of `small` inside `big`; spacings must
// agree on shared nodes so nested sweeps live in one energy metric
inline bool nested_in(const PointCloud& small, const PointCloud& big) {
  for (Eigen::Index i = 0; i < small.size(); ++i) {
    bool found = false;
    for (Eigen::Index j = 0; j < big.size(); ++j) {
      if ((small.points.row(i) - big.points.row(j)).cwiseAbs().maxCoeff() == 0.0) {
        if (small.spacing[i] != big.spacing[j]) return false;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}
}  // namespace detail

struct SweepSequence {
  std::vector<BalayageResult> levels;
  std::vector<double> energy_distance;  // ||mu - mu^K_j|| in the energy metric
  Mat probe_potentials;                 // one row per level
};

/// Sweeps onto an increasing nested family of node sets. The distances
/// ||mu - mu^K|| never increase, and probe potentials never decrease
/// (discrete transcription of the compact-exhaustion limits).
inline SweepSequence sweep_increasing(const KernelModel& model, const DiscreteMeasure& mu,
                                      const std::vector<PointCloud>& targets, const Mat& probes,
                                      const SolverOptions& opts = {}) {
  if (targets.empty()) throw std::invalid_argument("sweep_increasing: no targets");
  for (std::size_t l = 0; l + 1 < targets.size(); ++l)
    if (!detail::nested_in(targets[l], targets[l + 1]))
      throw std::invalid_argument("sweep_increasing: targets are not nested increasing");

  SweepSequence seq;
  const double e_mu = mutual_energy(model, mu, mu);
  seq.probe_potentials.resize(static_cast<Eigen::Index>(targets.size()), probes.rows());
  for (std::size_t l = 0; l < targets.size(); ++l) {
    BalayageResult r = sweep(model, mu, targets[l], probes, opts);
    const Vec b = detail::target_potentials(model, mu, targets[l]);
    const Mat k = kernel_matrix(model, targets[l]);
    const double d2 = e_mu - 2.0 * b.dot(r.swept.weights) + r.swept.weights.dot(k * r.swept.weights);
    seq.energy_distance.push_back(std::sqrt(std::max(0.0, d2)));
    if (probes.rows() > 0)
      seq.probe_potentials.row(static_cast<Eigen::Index>(l)) =
          eval_potential(model, r.swept, probes).transpose();
    seq.levels.push_back(std::move(r));
  }
  return seq;
}

/// Sweeps onto a decreasing nested family; the last level is the intersection,
/// and its sweep must agree with the direct sweep onto that set.
inline SweepSequence sweep_decreasing(const KernelModel& model, const DiscreteMeasure& mu,
                                      const std::vector<PointCloud>& targets, const Mat& probes,
                                      const SolverOptions& opts = {}) {
  if (targets.empty()) throw std::invalid_argument("sweep_decreasing: no targets");
  for (std::size_t l = 0; l + 1 < targets.size(); ++l)
    if (!detail::nested_in(targets[l + 1], targets[l]))
      throw std::invalid_argument("sweep_decreasing: targets are not nested decreasing");
  if (targets.back().size() == 0) throw std::invalid_argument("sweep_decreasing: empty intersection");

  SweepSequence seq;
  const double e_mu = mutual_energy(model, mu, mu);
  seq.probe_potentials.resize(static_cast<Eigen::Index>(targets.size()), probes.rows());
  for (std::size_t l = 0; l < targets.size(); ++l) {
    BalayageResult r = sweep(model, mu, targets[l], probes, opts);
    const Vec b = detail::target_potentials(model, mu, targets[l]);
    const Mat k = kernel_matrix(model, targets[l]);
    const double d2 = e_mu - 2.0 * b.dot(r.swept.weights) + r.swept.weights.dot(k * r.swept.weights);
    seq.energy_distance.push_back(std::sqrt(std::max(0.0, d2)));
    if (probes.rows() > 0)
      seq.probe_potentials.row(static_cast<Eigen::Index>(l)) =
          eval_potential(model, r.swept, probes).transpose();
    seq.levels.push_back(std::move(r));
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Identity checks
// ---------------------------------------------------------------------------

struct RestrictionReport {
  double energy_distance = 0.0;   // || mu^Q - (mu^A)^Q || in the Q metric
  double rel_potential_gap = 0.0; // sup over probes, relative
  BalayageResult to_q;
  BalayageResult via_a;
};

/// Discrete check of the restriction identity mu^Q = (mu^A)^Q for Q inside A.
inline RestrictionReport check_restriction(const KernelModel& model, const DiscreteMeasure& mu,
                                           const PointCloud& target_a, const PointCloud& target_q,
                                           const Mat& probes, const SolverOptions& opts = {}) {
  if (!detail::nested_in(target_q, target_a))
    throw std::invalid_argument("check_restriction: Q is not a subset of A");
  RestrictionReport rep;
  const BalayageResult to_a = sweep(model, mu, target_a, probes, opts);
  rep.via_a = sweep(model, to_a.swept, target_q, probes, opts);
  rep.to_q = sweep(model, mu, target_q, probes, opts);

  const Mat kq = kernel_matrix(model, target_q);
  const Vec dw = rep.to_q.swept.weights - rep.via_a.swept.weights;
  rep.energy_distance = std::sqrt(std::max(0.0, dw.dot(kq * dw)));

  if (probes.rows() > 0) {
    const Vec u1 = eval_potential(model, rep.to_q.swept, probes);
    const Vec u2 = eval_potential(model, rep.via_a.swept, probes);
    double gap = 0.0;
    for (Eigen::Index p = 0; p < probes.rows(); ++p) {
      const double scale = std::max({std::abs(u1[p]), std::abs(u2[p]), 1e-300});
      gap = std::max(gap, std::abs(u1[p] - u2[p]) / scale);
    }
    rep.rel_potential_gap = gap;
  }
  return rep;
}

struct SymmetryReport {
  double gap = 0.0;  // relative gap of E(mu, lambda^A) vs E(mu^A, lambda)
  double e_mu_lambda_a = 0.0;
  double e_mu_a_lambda = 0.0;
};

/// Symmetry identity E(mu, lambda^A) = E(mu^A, lambda), the defining relation
/// of inner balayage.
inline SymmetryReport check_symmetry(const KernelModel& model, const DiscreteMeasure& mu,
                                     const DiscreteMeasure& lambda, const PointCloud& target,
                                     const SolverOptions& opts = {}) {
  const BalayageResult mu_a = sweep(model, mu, target, Mat(), opts);
  const BalayageResult lambda_a = sweep(model, lambda, target, Mat(), opts);
  SymmetryReport rep;
  rep.e_mu_lambda_a = mutual_energy(model, mu, lambda_a.swept);
  rep.e_mu_a_lambda = mutual_energy(model, mu_a.swept, lambda);
  const double scale = std::max(std::abs(rep.e_mu_lambda_a), std::abs(rep.e_mu_a_lambda));
  rep.gap = scale > 0.0 ? std::abs(rep.e_mu_lambda_a - rep.e_mu_a_lambda) / scale : 0.0;
  return rep;
}

struct ExtremalReport {
  double max_violation = 0.0;      // max over probes of max(0, U^{mu^A} - U^xi)
  double max_violation_rel = 0.0;  // relative to U^xi
  bool feasible = true;
};

/// Extremal property: U^{mu^A} is minimal among potentials dominating U^mu on
/// the target. The candidate must dominate U^mu at every target node.
inline ExtremalReport check_extremal(const KernelModel& model, const DiscreteMeasure& mu,
                                     const PointCloud& target, const DiscreteMeasure& candidate,
                                     const Mat& probes, const SolverOptions& opts = {}) {
  const Vec b = detail::target_potentials(model, mu, target);
  const Vec u_xi_nodes = eval_potential(model, candidate, target.points);
  const double slack = 10.0 * opts.tol * std::max(1.0, b.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < target.size(); ++i)
    if (u_xi_nodes[i] < b[i] - slack)
      throw std::invalid_argument("check_extremal: infeasible candidate");

  const BalayageResult mu_a = sweep(model, mu, target, probes, opts);
  ExtremalReport rep;
  const Vec u_a = eval_potential(model, mu_a.swept, probes);
  const Vec u_xi = eval_potential(model, candidate, probes);
  for (Eigen::Index p = 0; p < probes.rows(); ++p) {
    const double v = u_a[p] - u_xi[p];
    rep.max_violation = std::max(rep.max_violation, v);
    if (u_xi[p] > 0.0) rep.max_violation_rel = std::max(rep.max_violation_rel, v / u_xi[p]);
  }
  rep.max_violation = std::max(0.0, rep.max_violation);
  rep.max_violation_rel = std::max(0.0, rep.max_violation_rel);
  return rep;
}

struct SuperpositionReport {
  double energy_gap = 0.0;     // ||direct - sum|| / ||direct|| in the target metric
  double probe_gap = 0.0;      // sup relative probe-potential difference
  bool source_inside_hull = false;
  BalayageResult direct;
};

/// Integral-representation check: sweeping sum c_i eps_{y_i} directly vs
/// summing the individual swept Diracs. Sources inside the target's bounding
/// sphere are outside the theorem's hypothesis and get flagged.
inline SuperpositionReport superpose_diracs(const KernelModel& model, const Mat& source_points,
                                            const Vec& source_weights, const PointCloud& target,
                                            const Mat& probes, const SolverOptions& opts = {}) {
  if (source_points.rows() != source_weights.size() || source_points.rows() == 0)
    throw std::invalid_argument("superpose_diracs: bad sources");
  SuperpositionReport rep;

  Vec c = Vec::Zero(target.dim());
  for (Eigen::Index i = 0; i < target.size(); ++i) c += target.node(i);
  c /= static_cast<double>(target.size());
  double radius = 0.0;
  for (Eigen::Index i = 0; i < target.size(); ++i)
    radius = std::max(radius, (target.node(i) - c).norm());
  for (Eigen::Index s = 0; s < source_points.rows(); ++s)
    if ((source_points.row(s).transpose() - c).norm() <= radius) rep.source_inside_hull = true;

  const DiscreteMeasure combined = diracs(source_points, source_weights);
  rep.direct = sweep(model, combined, target, probes, opts);

  Vec summed = Vec::Zero(target.size());
  for (Eigen::Index s = 0; s < source_points.rows(); ++s) {
    const DiscreteMeasure one = dirac(source_points.row(s).transpose(), 1.0);
    summed += source_weights[s] * sweep(model, one, target, probes, opts).swept.weights;
  }

  const Mat k = kernel_matrix(model, target);
  const Vec dw = rep.direct.swept.weights - summed;
  const double norm_direct =
      std::sqrt(std::max(1e-300, rep.direct.swept.weights.dot(k * rep.direct.swept.weights)));
  rep.energy_gap = std::sqrt(std::max(0.0, dw.dot(k * dw))) / norm_direct;

  if (probes.rows() > 0) {
    const DiscreteMeasure sum_measure = make_measure(target, summed);
    const Vec u1 = eval_potential(model, rep.direct.swept, probes);
    const Vec u2 = eval_potential(model, sum_measure, probes);
    for (Eigen::Index p = 0; p < probes.rows(); ++p) {
      const double scale = std::max({std::abs(u1[p]), std::abs(u2[p]), 1e-300});
      rep.probe_gap = std::max(rep.probe_gap, std::abs(u1[p] - u2[p]) / scale);
    }
  }
  return rep;
}

struct MassDeficit {
  double source_mass = 0.0;
  double swept_mass = 0.0;
  double deficit_ratio = 0.0;  // 1 - swept/source
};

/// Swept-mass deficit, the Section-9 existence detector: a strict deficit for
/// some exterior measure certifies an inner equilibrium measure.
inline MassDeficit mass_deficit(const KernelModel& model, const DiscreteMeasure& mu,
                                const PointCloud& target, const SolverOptions& opts = {}) {
  MassDeficit d;
  d.source_mass = mu.total_mass();
  if (d.source_mass <= 0.0) throw std::invalid_argument("mass_deficit: zero source mass");
  d.swept_mass = sweep(model, mu, target, Mat(), opts).swept_mass;
  d.deficit_ratio = 1.0 - d.swept_mass / d.source_mass;
  return d;
}

}  // namespace rieszlab
