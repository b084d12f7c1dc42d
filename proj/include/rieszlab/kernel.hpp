#pragma once
// Riesz kernel |x-y|^(alpha-n), its diagonal regularization, and the
// potential / mutual-energy / Gram-matrix evaluators for atomic measures.

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <stdexcept>

#include "rieszlab/geometry.hpp"

namespace rieszlab {

struct RieszParams {
  int n = 3;
  double alpha = 2.0;
};

inline void validate_params(const RieszParams& p) {
  if (p.n < 3) throw std::invalid_argument("RieszParams: n must be >= 3");
  if (!(p.alpha > 0.0 && p.alpha <= 2.0)) throw std::invalid_argument("RieszParams: alpha must be in (0, 2]");
}

enum class DiagRule { unregularized, spacing_scaled };

/// Kernel model: off-diagonal value is exactly |x-y|^(alpha-n); the diagonal
/// (atomic self-interaction) is (beta*h_i)^(alpha-n) under spacing_scaled and
/// an error under unregularized.
struct KernelModel {
  RieszParams params;
  DiagRule diag_rule = DiagRule::spacing_scaled;
  double beta = 0.5;

  double exponent() const { return 0.5 * (params.alpha - params.n); }

  /// |x-y|^(alpha-n) from the squared distance.
  double off_diag_r2(double r2) const { return std::pow(r2, exponent()); }

  double off_diag(const Vec& x, const Vec& y) const { return off_diag_r2((x - y).squaredNorm()); }

  double diag(double h) const {
    if (diag_rule != DiagRule::spacing_scaled)
      throw std::invalid_argument("kernel: diagonal evaluation requires the spacing_scaled rule");
    return std::pow(beta * h, params.alpha - params.n);
  }
};

inline KernelModel newtonian_model(double beta = 0.5) {
  return KernelModel{RieszParams{3, 2.0}, DiagRule::spacing_scaled, beta};
}

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

/// Nonnegative atomic measure on a cloud; the carrier for mu, gamma, eps_y
/// and every swept measure.
struct DiscreteMeasure {
  std::shared_ptr<const PointCloud> cloud;
  Vec weights;

  Eigen::Index size() const { return weights.size(); }
  double total_mass() const { return weights.sum(); }
  std::vector<Eigen::Index> support() const {
    std::vector<Eigen::Index> s;
    for (Eigen::Index i = 0; i < weights.size(); ++i)
      if (weights[i] > 0.0) s.push_back(i);
    return s;
  }
};

inline DiscreteMeasure make_measure(PointCloud cloud, Vec weights) {
  if (weights.size() != cloud.points.rows())
    throw std::invalid_argument("make_measure: weights length mismatch");
  if ((weights.array() < 0.0).any()) throw std::invalid_argument("make_measure: negative weight");
  return DiscreteMeasure{std::make_shared<const PointCloud>(std::move(cloud)), std::move(weights)};
}

inline DiscreteMeasure make_measure(std::shared_ptr<const PointCloud> cloud, Vec weights) {
  if (!cloud || weights.size() != cloud->points.rows())
    throw std::invalid_argument("make_measure: weights length mismatch");
  if ((weights.array() < 0.0).any()) throw std::invalid_argument("make_measure: negative weight");
  return DiscreteMeasure{std::move(cloud), std::move(weights)};
}

/// Point masses at the given locations. Spacing defaults to 1 (only relevant
/// if a regularized self-term is ever requested for these atoms).
inline DiscreteMeasure diracs(const Mat& points, const Vec& weights, double spacing = 1.0) {
  PointCloud cloud;
  cloud.points = points;
  cloud.spacing = Vec::Constant(points.rows(), spacing);
  cloud.label = "diracs";
  return make_measure(std::move(cloud), weights);
}

inline DiscreteMeasure dirac(const Vec& at, double weight = 1.0, double spacing = 1.0) {
  Mat pts(1, at.size());
  pts.row(0) = at.transpose();
  return diracs(pts, Vec::Constant(1, weight), spacing);
}

// ---------------------------------------------------------------------------
// Potentials and energies
// ---------------------------------------------------------------------------

namespace detail {
// Kernel value between probe p and atom i of mu; exact coincidences take the
// regularized diagonal with the atom's spacing.
inline double kernel_at(const KernelModel& model, const Vec& p, const DiscreteMeasure& mu,
                        Eigen::Index i) {
  const double r2 = (p - mu.cloud->node(i)).squaredNorm();
  if (r2 == 0.0) {
    if (model.diag_rule != DiagRule::spacing_scaled)
      throw std::invalid_argument("eval_potential: probe on an atom under the unregularized rule");
    return model.diag(mu.cloud->spacing[i]);
  }
  return model.off_diag_r2(r2);
}
}  // namespace detail

/// U^mu(p) = sum_i w_i K(p, x_i), one value per probe row. Atom order is the
/// node order, so results are bit-reproducible.
inline Vec eval_potential(const KernelModel& model, const DiscreteMeasure& mu, const Mat& probes) {
  validate_params(model.params);
  if (probes.cols() != mu.cloud->dim()) throw std::invalid_argument("eval_potential: dimension mismatch");
  Vec out = Vec::Zero(probes.rows());
  for (Eigen::Index p = 0; p < probes.rows(); ++p) {
    const Vec probe = probes.row(p).transpose();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      if (mu.weights[i] == 0.0) continue;
      acc += mu.weights[i] * detail::kernel_at(model, probe, mu, i);
    }
    out[p] = acc;
  }
  return out;
}

inline double eval_potential_at(const KernelModel& model, const DiscreteMeasure& mu, const Vec& p) {
  Mat probes(1, p.size());
  probes.row(0) = p.transpose();
  return eval_potential(model, mu, probes)[0];
}

namespace detail {
inline double mutual_energy_ordered(const KernelModel& model, const DiscreteMeasure& a,
                                    const DiscreteMeasure& b) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a.weights[i] == 0.0) continue;
    const Vec xi = a.cloud->node(i);
    double row = 0.0;
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      if (b.weights[j] == 0.0) continue;
      const double r2 = (xi - b.cloud->node(j)).squaredNorm();
      double k;
      if (r2 == 0.0) {
        if (model.diag_rule != DiagRule::spacing_scaled)
          throw std::invalid_argument("mutual_energy: coinciding atoms under the unregularized rule");
        k = model.diag(b.cloud->spacing[j]);
      } else {
        k = model.off_diag_r2(r2);
      }
      row += b.weights[j] * k;
    }
    acc += a.weights[i] * row;
  }
  return acc;
}

// Deterministic content key so E(mu,nu) and E(nu,mu) run the identical
// summation and agree to the last bit.
inline bool energy_order_before(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    for (int d = 0; d < a.cloud->dim() && d < b.cloud->dim(); ++d) {
      const double x = a.cloud->points(i, d), y = b.cloud->points(i, d);
      if (x != y) return x < y;
    }
    if (a.weights[i] != b.weights[i]) return a.weights[i] < b.weights[i];
  }
  return false;
}
}  // namespace detail

/// E(mu, nu) = sum_ij w_i v_j K(x_i, y_j); row-major over a canonical argument
/// order, hence exactly symmetric in its arguments.
inline double mutual_energy(const KernelModel& model, const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu) {
  validate_params(model.params);
  if (mu.cloud->dim() != nu.cloud->dim()) throw std::invalid_argument("mutual_energy: dimension mismatch");
  return detail::energy_order_before(nu, mu) ? detail::mutual_energy_ordered(model, nu, mu)
                                             : detail::mutual_energy_ordered(model, mu, nu);
}

struct EnergyReport {
  double energy = 0.0;
  double norm = 0.0;
};

inline EnergyReport energy_report(const KernelModel& model, const DiscreteMeasure& mu) {
  EnergyReport r;
  r.energy = mutual_energy(model, mu, mu);
  r.norm = std::sqrt(std::max(0.0, r.energy));
  return r;
}

// ---------------------------------------------------------------------------
// Kernel (Gram) matrix
// ---------------------------------------------------------------------------

/// Dense symmetric kernel matrix: K_ij = |x_i - x_j|^(alpha-n) off the
/// diagonal, K_ii = (beta h_i)^(alpha-n). Requires the spacing_scaled rule.
inline Mat kernel_matrix(const KernelModel& model, const PointCloud& cloud) {
  validate_params(model.params);
  if (model.diag_rule != DiagRule::spacing_scaled)
    throw std::invalid_argument("kernel_matrix: requires the spacing_scaled rule");
  const Eigen::Index n = cloud.size();
  Mat K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = model.diag(cloud.spacing[i]);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double r2 = (cloud.points.row(i) - cloud.points.row(j)).squaredNorm();
      if (r2 == 0.0) throw std::invalid_argument("kernel_matrix: duplicate nodes");
      const double v = model.off_diag_r2(r2);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

struct SpdDiagnostic {
  bool positive_definite = false;
  double min_eigenvalue_estimate = 0.0;
};

/// Flags non-positive-definiteness. Uses a Cholesky attempt plus (for desk
/// sizes) a dense smallest-eigenvalue estimate.
inline SpdDiagnostic spd_diagnostic(const Mat& K) {
  SpdDiagnostic d;
  Eigen::LLT<Mat> llt(K);
  d.positive_definite = llt.info() == Eigen::Success;
  if (K.rows() <= 1200) {
    Eigen::SelfAdjointEigenSolver<Mat> es(K, Eigen::EigenvaluesOnly);
    d.min_eigenvalue_estimate = es.eigenvalues().minCoeff();
    d.positive_definite = d.positive_definite && d.min_eigenvalue_estimate > 0.0;
  }
  return d;
}

}  // namespace rieszlab
