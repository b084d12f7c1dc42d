#pragma once
// Shell-capacity series: the equilibrium-existence criterion (outward shells),
// the capacity-finiteness series, and the Wiener-type irregularity test
// (inward shells), plus the two-route point classifier that cross-validates
// the inward series against equilibrium existence for the inverted set.
//
// A finite computation cannot prove convergence; verdicts are explicit
// tail heuristics with an inconclusive state and the k range recorded.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rieszlab/equilibrium.hpp"
#include "rieszlab/geometry.hpp"
#include "rieszlab/kelvin.hpp"

namespace rieszlab {

enum class ShellDirection { outward, inward };

struct ShellEntry {
  int k = 0;
  PointCloud cloud;
  double capacity = 0.0;
  bool valid = true;
  std::string error;
};

struct ShellDecomposition {
  Vec center;
  double q = 2.0;
  ShellDirection direction = ShellDirection::outward;
  RieszParams params;
  std::vector<ShellEntry> shells;
};

/// Per-shell equilibrium capacities of the radial decomposition about
/// `center`. Empty shells get capacity 0; solver failures mark the shell
/// invalid rather than aborting the decomposition.
inline ShellDecomposition shell_capacities(const KernelModel& model, const PointCloud& cloud,
                                           const Vec& center, double q, int k_min, int k_max,
                                           const SolverOptions& opts = {}) {
  ShellDecomposition decomp;
  decomp.center = center;
  decomp.q = q;
  decomp.direction = q > 1.0 ? ShellDirection::outward : ShellDirection::inward;
  decomp.params = model.params;
  const auto clouds = shell_clouds(cloud, center, q, k_min, k_max);
  for (std::size_t s = 0; s < clouds.size(); ++s) {
    ShellEntry entry;
    entry.k = k_min + static_cast<int>(s);
    entry.cloud = clouds[s];
    if (entry.cloud.size() > 0) {
      try {
        const EquilibriumResult eq = equilibrium(model, entry.cloud, Mat(), opts);
        entry.capacity = eq.capacity;
        entry.valid = eq.converged;
        if (!eq.converged) entry.error = "solver did not converge";
      } catch (const std::exception& e) {
        entry.valid = false;
        entry.error = e.what();
      }
    }
    decomp.shells.push_back(std::move(entry));
  }
  return decomp;
}

enum class Verdict { converging, diverging, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::converging: return "converging";
    case Verdict::diverging: return "diverging";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct SeriesDiagnostic {
  std::vector<int> ks;
  std::vector<double> terms;
  std::vector<double> partial_sums;
  double tail_ratio = 0.0;     // geometric-fit estimate of t_{k+1}/t_k on the tail
  double geo_resid = std::numeric_limits<double>::quiet_NaN();   // rms log residual, t = a r^k
  double harm_resid = std::numeric_limits<double>::quiet_NaN();  // rms log residual, t = a/(k+b)
  double harm_offset = std::numeric_limits<double>::quiet_NaN();
  Verdict verdict = Verdict::inconclusive;
  int k_max = 0;
  std::string note;
};

namespace detail {

struct LineFit {
  double slope = 0.0;
  double resid = 0.0;  // rms residual
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t m = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = m * sxx - sx * sx;
  LineFit f;
  f.slope = denom != 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
  const double icept = (sy - f.slope * sx) / static_cast<double>(m);
  double rss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = ys[i] - (icept + f.slope * xs[i]);
    rss += e * e;
  }
  f.resid = std::sqrt(rss / static_cast<double>(m));
  return f;
}

struct HarmonicFit {
  double offset = 0.0;
  double resid = 0.0;
};

// t = a / (k + b), fitted in log space; b by grid search, a in closed form.
// Every member of this family has a divergent sum.
inline HarmonicFit fit_harmonic(const std::vector<double>& ks, const std::vector<double>& ys) {
  const std::size_t m = ks.size();
  const double k_first = *std::min_element(ks.begin(), ks.end());
  HarmonicFit best{0.0, std::numeric_limits<double>::infinity()};
  for (double b = -k_first + 0.05; b <= 20.0; b += 0.01) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += ys[i] + std::log(ks[i] + b);
    mean /= static_cast<double>(m);
    double rss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double e = ys[i] + std::log(ks[i] + b) - mean;
      rss += e * e;
    }
    const double resid = std::sqrt(rss / static_cast<double>(m));
    if (resid < best.resid) best = {b, resid};
  }
  return best;
}

}  // namespace detail

/// Classify a nonnegative term sequence. Converging needs a vanished tail or
/// a geometric tail with fitted ratio <= 0.9. Diverging needs non-vanishing
/// terms, defined as: fitted tail ratio >= 0.95 (flat or growing), or the
/// harmonic family a/(k+b) (whose sums always diverge) fitting the tail
/// clearly better than a geometric law. Everything else is inconclusive.
inline SeriesDiagnostic analyze_series(const std::vector<int>& ks, const std::vector<double>& terms) {
  if (ks.size() != terms.size() || terms.empty())
    throw std::invalid_argument("analyze_series: bad input");
  SeriesDiagnostic d;
  d.ks = ks;
  d.terms = terms;
  d.k_max = *std::max_element(ks.begin(), ks.end());
  d.partial_sums.resize(terms.size());
  double acc = 0.0;
  double tmax = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i] < 0.0) throw std::invalid_argument("analyze_series: negative term");
    acc += terms[i];
    d.partial_sums[i] = acc;
    tmax = std::max(tmax, terms[i]);
  }

  const double zero_tol = 1e-14 * std::max(tmax, 1.0);
  std::size_t live = terms.size();
  while (live > 0 && terms[live - 1] <= zero_tol) --live;
  if (live == 0) {
    d.verdict = Verdict::converging;
    d.tail_ratio = 0.0;
    d.note = "all terms vanish at this truncation";
    return d;
  }
  if (live < terms.size()) {
    d.verdict = Verdict::converging;
    d.tail_ratio = 0.0;
    d.note = "tail vanishes at this truncation";
    return d;
  }

  // tail window: the last third of the terms, at least 3 when available
  const std::size_t want = std::max<std::size_t>(3, (terms.size() + 2) / 3);
  const std::size_t start = terms.size() > want ? terms.size() - want : 0;
  std::vector<double> xs_k, ys;
  for (std::size_t i = start; i < terms.size(); ++i) {
    if (terms[i] <= zero_tol) continue;  // interior gaps are skipped in the fit
    xs_k.push_back(static_cast<double>(ks[i]));
    ys.push_back(std::log(terms[i]));
  }

  if (ys.size() < 2) {
    d.verdict = Verdict::inconclusive;
    d.note = "too few positive terms";
    return d;
  }
  if (ys.size() == 2) {
    d.tail_ratio = std::exp((ys[1] - ys[0]) / (xs_k[1] - xs_k[0]));
    if (d.tail_ratio <= 0.9)
      d.verdict = Verdict::converging;
    else if (d.tail_ratio >= 0.95)
      d.verdict = Verdict::diverging;
    else
      d.verdict = Verdict::inconclusive;
    d.note = "two-term tail";
    return d;
  }

  const detail::LineFit geo = detail::fit_line(xs_k, ys);
  const detail::HarmonicFit harm = detail::fit_harmonic(xs_k, ys);
  d.tail_ratio = std::exp(geo.slope);
  d.geo_resid = geo.resid;
  d.harm_resid = harm.resid;
  d.harm_offset = harm.offset;

  if (d.tail_ratio >= 0.95) {
    d.verdict = Verdict::diverging;
    d.note = "non-vanishing terms: flat or growing tail";
  } else if (harm.resid <= 0.7 * geo.resid) {
    d.verdict = Verdict::diverging;
    d.note = "non-vanishing terms: harmonic-type tail a/(k+b)";
  } else if (d.tail_ratio <= 0.9) {
    d.verdict = Verdict::converging;
  } else {
    d.verdict = Verdict::inconclusive;
  }
  return d;
}

namespace detail {
inline std::vector<int> shell_ks(const ShellDecomposition& decomp) {
  std::vector<int> ks;
  for (const auto& s : decomp.shells) ks.push_back(s.k);
  return ks;
}
}  // namespace detail

/// Existence series for the inner equilibrium measure: terms
/// c_k / q^(k(n-alpha)) over outward shells.
inline SeriesDiagnostic equilibrium_existence_series(const ShellDecomposition& decomp) {
  if (decomp.direction != ShellDirection::outward)
    throw std::invalid_argument("equilibrium_existence_series: needs an outward decomposition");
  const double e = decomp.params.n - decomp.params.alpha;
  std::vector<double> terms;
  for (const auto& s : decomp.shells)
    terms.push_back(s.capacity / std::pow(decomp.q, e * static_cast<double>(s.k)));
  return analyze_series(detail::shell_ks(decomp), terms);
}

/// Capacity-finiteness series: same capacities with weight q^(2k(n-alpha)).
/// Reported alongside the existence series; the interpretation is left to the
/// reader of the report.
inline SeriesDiagnostic capacity_finiteness_series(const ShellDecomposition& decomp) {
  if (decomp.direction != ShellDirection::outward)
    throw std::invalid_argument("capacity_finiteness_series: needs an outward decomposition");
  const double e = decomp.params.n - decomp.params.alpha;
  std::vector<double> terms;
  for (const auto& s : decomp.shells)
    terms.push_back(s.capacity / std::pow(decomp.q, 2.0 * e * static_cast<double>(s.k)));
  return analyze_series(detail::shell_ks(decomp), terms);
}

/// Wiener-type series at a boundary point: inward shells, terms
/// c_k / q^(k(n-alpha)) with q in (0,1). Converging => the point is inner
/// alpha-irregular; diverging => regular.
inline SeriesDiagnostic irregularity_series(const ShellDecomposition& decomp) {
  if (decomp.direction != ShellDirection::inward)
    throw std::invalid_argument("irregularity_series: needs an inward decomposition");
  const double e = decomp.params.n - decomp.params.alpha;
  std::vector<double> terms;
  for (const auto& s : decomp.shells)
    terms.push_back(s.capacity / std::pow(decomp.q, e * static_cast<double>(s.k)));
  return analyze_series(detail::shell_ks(decomp), terms);
}

enum class Regularity { regular, irregular, inconclusive };

inline const char* to_string(Regularity r) {
  switch (r) {
    case Regularity::regular: return "regular";
    case Regularity::irregular: return "irregular";
    case Regularity::inconclusive: return "inconclusive";
  }
  return "?";
}

struct PointClassification {
  Regularity verdict = Regularity::inconclusive;
  SeriesDiagnostic series_route;     // inward Wiener series at y
  SeriesDiagnostic inversion_route;  // equilibrium-existence series of the inverted cloud
  bool routes_disagree = false;
  bool removed_center_node = false;
  int k_max_used = 0;
  std::string warning;
};

namespace detail {
inline Regularity regularity_of(Verdict v) {
  switch (v) {
    case Verdict::converging: return Regularity::irregular;
    case Verdict::diverging: return Regularity::regular;
    case Verdict::inconclusive: return Regularity::inconclusive;
  }
  return Regularity::inconclusive;
}
}  // namespace detail

/// Two-route regularity classifier for a point y of the cloud's closure:
/// the inward Wiener series at y, cross-validated against the equilibrium
/// existence series of the cloud inverted about y. Conclusive routes must
/// agree; disagreement comes back inconclusive with a warning.
inline PointClassification classify_point(const KernelModel& model, const PointCloud& cloud,
                                          const Vec& y, double q_inward, int k_min, int k_max,
                                          const SolverOptions& opts = {}) {
  if (!(q_inward > 0.0 && q_inward < 1.0))
    throw std::invalid_argument("classify_point: q must be in (0,1)");
  PointClassification out;

  // drop a node coinciding with y (the series looks at A \ {y})
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    if ((cloud.node(i) - y).squaredNorm() < 1e-28) {
      out.removed_center_node = true;
      continue;
    }
    keep.push_back(i);
  }
  if (keep.empty()) throw std::invalid_argument("classify_point: no nodes besides y");
  const PointCloud body =
      out.removed_center_node ? subset_cloud(cloud, keep, cloud.label + "_noy") : cloud;

  // k_max is the caller's choice (no automatic truncation selection); shells
  // finer than the cloud's resolution near y read as genuinely empty, so pick
  // k_max accordingly. Sub-resolution ranges are flagged, not repaired.
  out.k_max_used = k_max;
  double h_loc = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < body.size(); ++i)
    if ((body.node(i) - y).norm() <= std::pow(q_inward, k_min))
      h_loc = std::min(h_loc, body.spacing[i]);
  if (std::isfinite(h_loc) && std::pow(q_inward, k_max) < h_loc)
    out.warning = "finest shells lie below the local node spacing";

  const ShellDecomposition inward =
      shell_capacities(model, body, y, q_inward, k_min, k_max, opts);
  out.series_route = irregularity_series(inward);

  const PointCloud inverted = invert_cloud(body, y);
  const ShellDecomposition outward =
      shell_capacities(model, inverted, y, 1.0 / q_inward, k_min, k_max, opts);
  out.inversion_route = equilibrium_existence_series(outward);

  const Regularity r1 = detail::regularity_of(out.series_route.verdict);
  const Regularity r2 = detail::regularity_of(out.inversion_route.verdict);
  if (r1 != Regularity::inconclusive && r2 != Regularity::inconclusive) {
    if (r1 == r2) {
      out.verdict = r1;
    } else {
      out.verdict = Regularity::inconclusive;
      out.routes_disagree = true;
      out.warning += std::string(out.warning.empty() ? "" : "; ") +
                     "series route and inversion route disagree";
    }
  } else if (r1 != Regularity::inconclusive) {
    out.verdict = r1;
  } else {
    out.verdict = r2;
  }
  return out;
}

}  // namespace rieszlab
