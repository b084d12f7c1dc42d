#pragma once
// Equilibrium measures and capacities of compact node clouds: the cone
// projection with unit target potentials. By the KKT conditions the solution
// has potential 1 on its support and >= 1 at every node, so total mass,
// quadratic energy, and capacity coincide.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rieszlab/nnqp.hpp"

namespace rieszlab {

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 20000;
};

struct PotentialStats {
  double node_min = std::numeric_limits<double>::quiet_NaN();
  double node_max = std::numeric_limits<double>::quiet_NaN();
  double support_min = std::numeric_limits<double>::quiet_NaN();
  double probe_min = std::numeric_limits<double>::quiet_NaN();
  double probe_max = std::numeric_limits<double>::quiet_NaN();
};

struct EquilibriumResult {
  DiscreteMeasure gamma;
  double capacity = 0.0;  // = total mass of gamma
  double energy = 0.0;    // w'Kw
  PotentialStats potential_stats;
  double interior_mass_fraction = -1.0;  // -1 when the cloud carries no tags
  KktReport kkt;
  bool converged = false;
  int iterations = 0;
};

/// Equilibrium measure of a cloud: solve min 1/2 w'Kw - 1'w over w >= 0.
/// Throws on an empty cloud (the empty set has capacity 0 by convention;
/// callers that want the convention catch this error and use 0).
inline EquilibriumResult equilibrium(const KernelModel& model, const PointCloud& cloud,
                                     const Mat& probes = Mat(), const SolverOptions& opts = {},
                                     const Vec& warm_start = Vec()) {
  if (cloud.size() == 0)
    throw std::invalid_argument("equilibrium: empty cloud (capacity of the empty set is 0 by convention)");
  NnqpProblem problem{kernel_matrix(model, cloud), Vec::Ones(cloud.size()), opts.tol, opts.max_iter};
  const NnqpSolution sol = solve(problem, warm_start);

  EquilibriumResult out;
  out.gamma = make_measure(cloud, sol.w);
  out.capacity = sol.w.sum();
  out.energy = sol.w.dot(problem.K * sol.w);
  out.kkt = sol.kkt;
  out.converged = sol.converged;
  out.iterations = sol.iterations;

  const Vec u = problem.K * sol.w;
  out.potential_stats.node_min = u.minCoeff();
  out.potential_stats.node_max = u.maxCoeff();
  double smin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < sol.w.size(); ++i)
    if (sol.w[i] > 0.0) smin = std::min(smin, u[i]);
  out.potential_stats.support_min = smin;
  if (probes.rows() > 0) {
    const Vec up = eval_potential(model, out.gamma, probes);
    out.potential_stats.probe_min = up.minCoeff();
    out.potential_stats.probe_max = up.maxCoeff();
  }
  if (cloud.has_tags()) {
    double interior = 0.0;
    for (Eigen::Index i = 0; i < cloud.size(); ++i)
      if (cloud.tags[static_cast<std::size_t>(i)] == kTagInterior) interior += sol.w[i];
    out.interior_mass_fraction = out.capacity > 0.0 ? interior / out.capacity : 0.0;
  }
  return out;
}

/// Capacity = equilibrium mass. Monotone under node-set inclusion.
inline double capacity(const KernelModel& model, const PointCloud& cloud,
                       const SolverOptions& opts = {}) {
  return equilibrium(model, cloud, Mat(), opts).capacity;
}

struct SupportProfile {
  double interior_mass_fraction = 0.0;
  double boundary_mass_fraction = 0.0;
  double capacity = 0.0;
  EquilibriumResult equilibrium;
};

/// Where does the equilibrium mass sit on a tagged ball cloud? For alpha = 2
/// the interior fraction should vanish under refinement; for alpha < 2 it
/// stays bounded away from zero.
inline SupportProfile support_profile(const KernelModel& model, const PointCloud& ball_cloud,
                                      const Mat& probes = Mat(), const SolverOptions& opts = {}) {
  if (!ball_cloud.has_tags())
    throw std::invalid_argument("support_profile: cloud has no interior/boundary tags");
  SupportProfile prof;
  prof.equilibrium = equilibrium(model, ball_cloud, probes, opts);
  prof.capacity = prof.equilibrium.capacity;
  prof.interior_mass_fraction = prof.equilibrium.interior_mass_fraction;
  prof.boundary_mass_fraction = 1.0 - prof.interior_mass_fraction;
  return prof;
}

/// Reduced-kernel heuristic: drop nodes with no other node within
/// radius_rule * h_i. A neighbor-count test, not a per-node capacity test.
inline PointCloud reduced_kernel(const KernelModel& model, const PointCloud& cloud,
                                 double radius_rule = 3.0) {
  validate_params(model.params);
  if (cloud.size() == 0) throw std::invalid_argument("reduced_kernel: empty cloud");
  const Vec nn = nearest_neighbor_distances(cloud.points);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < cloud.size(); ++i)
    if (cloud.size() == 1 || nn[i] <= radius_rule * cloud.spacing[i]) keep.push_back(i);
  if (keep.empty()) throw std::runtime_error("reduced_kernel: all nodes isolated");
  return subset_cloud(cloud, keep, cloud.label + "_reduced");
}

}  // namespace rieszlab
