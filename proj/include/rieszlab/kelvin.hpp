#pragma once
// Kelvin transform of atomic measures under the inversion J_y, and the
// balayage-equilibrium duality: sweeping a Dirac onto A equals the Kelvin
// transform of the equilibrium measure of the inverted set. The transform
// identities are floating-point exact; the duality is two independent
// numerical paths whose agreement is the test.

#include <cmath>
#include <stdexcept>

#include "rieszlab/balayage.hpp"
#include "rieszlab/equilibrium.hpp"
#include "rieszlab/kernel.hpp"

namespace rieszlab {

struct KelvinContext {
  Vec y;
  RieszParams params;
};

/// Atom (x, w) maps to (J_y(x), w |x-y|^(alpha-n)). Requires no atom at y.
inline DiscreteMeasure kelvin_transform(const KelvinContext& ctx, const DiscreteMeasure& nu) {
  validate_params(ctx.params);
  const double expo = 0.5 * (ctx.params.alpha - ctx.params.n);
  for (Eigen::Index i = 0; i < nu.size(); ++i)
    if ((nu.cloud->node(i) - ctx.y).squaredNorm() < 1e-28 && nu.weights[i] != 0.0)
      throw std::invalid_argument("kelvin_transform: atom at the inversion center");
  PointCloud image = invert_cloud(*nu.cloud, ctx.y);
  Vec w(nu.size());
  for (Eigen::Index i = 0; i < nu.size(); ++i) {
    const double r2 = (nu.cloud->node(i) - ctx.y).squaredNorm();
    w[i] = nu.weights[i] * std::pow(r2, expo);
  }
  return make_measure(std::move(image), std::move(w));
}

/// Max relative gap of U^{nu*}(x*) = |x-y|^(n-alpha) U^nu(x) over the probe
/// rows (unregularized evaluation; probes must avoid atoms and y).
inline double check_kelvin_potential(const KelvinContext& ctx, const DiscreteMeasure& nu,
                                     const Mat& probes) {
  const KernelModel raw{ctx.params, DiagRule::unregularized, 0.5};
  const DiscreteMeasure nu_star = kelvin_transform(ctx, nu);
  double gap = 0.0;
  for (Eigen::Index p = 0; p < probes.rows(); ++p) {
    const Vec x = probes.row(p).transpose();
    const double d2 = (x - ctx.y).squaredNorm();
    if (d2 < 1e-28) throw std::invalid_argument("check_kelvin_potential: probe at the inversion center");
    const Vec x_star = ctx.y + (x - ctx.y) / d2;
    const double lhs = eval_potential_at(raw, nu_star, x_star);
    const double rhs = std::pow(d2, 0.5 * (ctx.params.n - ctx.params.alpha)) *
                       eval_potential_at(raw, nu, x);
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    gap = std::max(gap, std::abs(lhs - rhs) / scale);
  }
  return gap;
}

/// Relative gap of the energy identity E(mu*, nu*) = E(mu, nu). Supports must
/// be disjoint and avoid y (regularized self-terms do not transform exactly).
inline double check_kelvin_energy(const KelvinContext& ctx, const DiscreteMeasure& mu,
                                  const DiscreteMeasure& nu) {
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    for (Eigen::Index j = 0; j < nu.size(); ++j)
      if (mu.weights[i] != 0.0 && nu.weights[j] != 0.0 &&
          (mu.cloud->node(i) - nu.cloud->node(j)).squaredNorm() == 0.0)
        throw std::invalid_argument("check_kelvin_energy: overlapping supports");
  const KernelModel raw{ctx.params, DiagRule::unregularized, 0.5};
  const double lhs = mutual_energy(raw, kelvin_transform(ctx, mu), kelvin_transform(ctx, nu));
  const double rhs = mutual_energy(raw, mu, nu);
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  return std::abs(lhs - rhs) / scale;
}

struct DualityReport {
  double mass_sweep = 0.0;       // mass of eps_y^A by direct balayage
  double mass_kelvin = 0.0;      // mass of K_y(gamma_{A*})
  double mass_rel_gap = 0.0;
  double probe_rel_gap = 0.0;    // sup relative potential difference at probes
  BalayageResult sweep_path;
  EquilibriumResult equilibrium_path;
  DiscreteMeasure kelvin_of_equilibrium;
};

/// (gamma_{A*})* = eps_y^A: compares the direct sweep of a unit Dirac at y
/// with the Kelvin transform of the equilibrium measure of the inverted cloud.
inline DualityReport dirac_balayage_duality(const KernelModel& model, const Vec& y,
                                            const PointCloud& target, const Mat& probes = Mat(),
                                            const SolverOptions& opts = {}) {
  DualityReport rep;
  const DiscreteMeasure eps = dirac(y, 1.0);
  const Mat& pr = probes.rows() > 0 ? probes : default_probes(target, &eps);

  rep.sweep_path = sweep(model, eps, target, pr, opts);
  rep.mass_sweep = rep.sweep_path.swept_mass;

  const PointCloud inverted = invert_cloud(target, y);
  rep.equilibrium_path = equilibrium(model, inverted, Mat(), opts);
  const KelvinContext ctx{y, model.params};
  rep.kelvin_of_equilibrium = kelvin_transform(ctx, rep.equilibrium_path.gamma);
  rep.mass_kelvin = rep.kelvin_of_equilibrium.total_mass();

  const double mscale = std::max({rep.mass_sweep, rep.mass_kelvin, 1e-300});
  rep.mass_rel_gap = std::abs(rep.mass_sweep - rep.mass_kelvin) / mscale;

  const Vec u1 = eval_potential(model, rep.sweep_path.swept, pr);
  const Vec u2 = eval_potential(model, rep.kelvin_of_equilibrium, pr);
  for (Eigen::Index p = 0; p < pr.rows(); ++p) {
    const double scale = std::max({std::abs(u1[p]), std::abs(u2[p]), 1e-300});
    rep.probe_rel_gap = std::max(rep.probe_rel_gap, std::abs(u1[p] - u2[p]) / scale);
  }
  return rep;
}

}  // namespace rieszlab
