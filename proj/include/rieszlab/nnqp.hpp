#pragma once
// Projection onto the nonnegative cone in the energy metric:
//   minimize 1/2 w'Kw - b'w  subject to w >= 0,
// solved by cyclic coordinate descent (exact 1-D minimization with clamping,
// fixed sweep order), with deterministic support-Cholesky restarts to reach
// tight KKT tolerances at desk scale. Convergence is declared on the KKT
// residuals recomputed from scratch, never on iterate movement.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rieszlab/kernel.hpp"

namespace rieszlab {

struct NnqpProblem {
  Mat K;                 // symmetric positive definite Gram matrix
  Vec b;                 // target potentials at the nodes
  double tol = 1e-10;    // KKT tolerance
  int max_iter = 20000;  // full sweeps
};

/// Residuals of the discrete projection characterization: dual feasibility
/// (Kw - b)_i >= 0, complementarity w_i (Kw - b)_i = 0, and primal w >= 0.
struct KktReport {
  double stationarity = 0.0;       // max(0, max_i (b - Kw)_i)
  double complementarity = 0.0;    // max_i |w_i (Kw - b)_i| / ||b||_inf
  double primal_negativity = 0.0;  // max(0, -min_i w_i)

  double max_residual() const { return std::max({stationarity, complementarity, primal_negativity}); }
  bool within(double tol) const { return max_residual() <= tol; }
};

struct NnqpSolution {
  Vec w;
  KktReport kkt;
  int iterations = 0;
  bool converged = false;
};

/// Pure recomputation of the KKT residuals for any candidate w; independent
/// of solver internals.
inline KktReport verify_kkt(const Mat& K, const Vec& b, const Vec& w) {
  if (K.rows() != K.cols() || K.rows() != b.size() || w.size() != b.size())
    throw std::invalid_argument("verify_kkt: shape mismatch");
  const Vec r = K * w - b;
  KktReport rep;
  rep.stationarity = std::max(0.0, -r.minCoeff());
  const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
  rep.complementarity = (w.array() * r.array()).abs().maxCoeff() / scale;
  rep.primal_negativity = std::max(0.0, -w.minCoeff());
  return rep;
}

namespace detail {

inline double objective(const Vec& w, const Vec& r, const Vec& b) {
  // f = 1/2 w'Kw - b'w, with r = Kw - b
  return 0.5 * (w.dot(r) - w.dot(b));
}

// Direct solve on the current support; returns a clamped candidate or false
// if the subsystem is not Cholesky-factorizable.
inline bool support_candidate(const Mat& K, const Vec& b, const Vec& w, Vec& cand) {
  std::vector<Eigen::Index> s;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w[i] > 0.0) s.push_back(i);
  if (s.empty()) return false;
  const Eigen::Index m = static_cast<Eigen::Index>(s.size());
  Mat Ks(m, m);
  Vec bs(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    bs[a] = b[s[static_cast<std::size_t>(a)]];
    for (Eigen::Index c = 0; c < m; ++c)
      Ks(a, c) = K(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(c)]);
  }
  Eigen::LLT<Mat> llt(Ks);
  if (llt.info() != Eigen::Success) return false;
  const Vec z = llt.solve(bs);
  cand = Vec::Zero(w.size());
  for (Eigen::Index a = 0; a < m; ++a) cand[s[static_cast<std::size_t>(a)]] = std::max(0.0, z[a]);
  return true;
}

}  // namespace detail

inline NnqpSolution solve(const NnqpProblem& problem, const Vec& warm_start) {
  const Mat& K = problem.K;
  const Vec& b = problem.b;
  const Eigen::Index n = b.size();
  if (K.rows() != n || K.cols() != n) throw std::invalid_argument("nnqp: shape mismatch");
  if (!K.allFinite() || !b.allFinite()) throw std::invalid_argument("nnqp: non-finite input");
  if (!(problem.tol > 0.0)) throw std::invalid_argument("nnqp: tol must be > 0");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(K(i, i) > 0.0)) throw std::invalid_argument("nnqp: diagonal must be positive");

  NnqpSolution sol;
  sol.w = warm_start.size() == n ? warm_start.cwiseMax(0.0).eval() : Vec::Zero(n);
  if (n == 0) {
    sol.converged = true;
    return sol;
  }

  Vec r = K * sol.w - b;       // maintained incrementally, refreshed at checks
  int next_polish = 24;        // deterministic support-solve schedule
  int polish_gap = 48;
  const int check_every = 4;

  for (int sweep = 1; sweep <= problem.max_iter; ++sweep) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double wi = std::max(0.0, sol.w[i] - r[i] / K(i, i));
      const double delta = wi - sol.w[i];
      if (delta != 0.0) {
        sol.w[i] = wi;
        r.noalias() += delta * K.col(i);
      }
    }
    sol.iterations = sweep;

    if (sweep % check_every == 0 || sweep == problem.max_iter) {
      r.noalias() = K * sol.w - b;  // drop incremental drift
      sol.kkt = verify_kkt(K, b, sol.w);
      if (sol.kkt.within(problem.tol)) {
        sol.converged = true;
        return sol;
      }
    }
    if (sweep >= next_polish) {
      next_polish += polish_gap;
      polish_gap *= 2;
      Vec cand;
      if (detail::support_candidate(K, b, sol.w, cand)) {
        const Vec rc = K * cand - b;
        if (detail::objective(cand, rc, b) < detail::objective(sol.w, r, b)) {
          sol.w = cand;
          r = rc;
          sol.kkt = verify_kkt(K, b, sol.w);
          if (sol.kkt.within(problem.tol)) {
            sol.converged = true;
            return sol;
          }
        }
      }
    }
  }
  sol.kkt = verify_kkt(K, b, sol.w);
  sol.converged = sol.kkt.within(problem.tol);
  return sol;
}

inline NnqpSolution solve(const NnqpProblem& problem) { return solve(problem, Vec()); }

}  // namespace rieszlab
