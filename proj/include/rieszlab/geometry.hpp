#pragma once
// Point cloud generators for the canonical sets: spheres, balls, rotation
// bodies, sphere-inversion images, and radial shell decompositions.
// All samplers are deterministic functions of their arguments.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace rieszlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr const char* kTagInterior = "interior";
inline constexpr const char* kTagBoundary = "boundary";

/// A finite node set standing in for a subset of R^n. `spacing` holds the
/// per-node mesh size h_i (nearest-neighbor distance or the sampler's pitch).
struct PointCloud {
  Mat points;                     // N x n, one node per row
  Vec spacing;                    // h_i > 0, one per node
  std::vector<std::string> tags;  // empty, or one tag per node
  std::string label;

  Eigen::Index size() const { return points.rows(); }
  int dim() const { return static_cast<int>(points.cols()); }
  Vec node(Eigen::Index i) const { return points.row(i).transpose(); }
  bool has_tags() const { return !tags.empty(); }
};

/// Nearest-neighbor distance of every node (O(N^2), desk scale).
inline Vec nearest_neighbor_distances(const Mat& points) {
  const Eigen::Index n = points.rows();
  Vec out = Vec::Constant(n, std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (points.row(i) - points.row(j)).norm();
      out[i] = std::min(out[i], d);
      out[j] = std::min(out[j], d);
    }
  }
  return out;
}

/// Enforces the PointCloud invariants: n >= 3, finite distinct nodes,
/// h_i > 0 and h_i <= 2 x nearest-neighbor distance.
inline void validate_cloud(const PointCloud& cloud) {
  if (cloud.points.rows() == 0) throw std::invalid_argument("cloud '" + cloud.label + "': empty");
  if (cloud.dim() < 3) throw std::invalid_argument("cloud '" + cloud.label + "': dimension must be >= 3");
  if (cloud.spacing.size() != cloud.points.rows())
    throw std::invalid_argument("cloud '" + cloud.label + "': spacing length mismatch");
  if (cloud.has_tags() && static_cast<Eigen::Index>(cloud.tags.size()) != cloud.points.rows())
    throw std::invalid_argument("cloud '" + cloud.label + "': tags length mismatch");
  if (!cloud.points.allFinite() || !cloud.spacing.allFinite())
    throw std::invalid_argument("cloud '" + cloud.label + "': non-finite data");
  const Vec nn = nearest_neighbor_distances(cloud.points);
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    if (!(cloud.spacing[i] > 0.0))
      throw std::invalid_argument("cloud '" + cloud.label + "': nonpositive spacing");
    if (cloud.size() > 1) {
      if (nn[i] == 0.0) throw std::invalid_argument("cloud '" + cloud.label + "': duplicate nodes");
      if (cloud.spacing[i] > 2.0 * nn[i] * (1.0 + 1e-12))
        throw std::invalid_argument("cloud '" + cloud.label + "': spacing exceeds 2x nearest-neighbor distance");
    }
  }
}

/// Sub-cloud by node indices; spacings and tags are inherited, which keeps
/// kernel diagonals (and hence the energy metric) consistent across nested
/// node sets.
inline PointCloud subset_cloud(const PointCloud& cloud, const std::vector<Eigen::Index>& idx,
                               std::string label = {}) {
  PointCloud out;
  out.points.resize(static_cast<Eigen::Index>(idx.size()), cloud.dim());
  out.spacing.resize(static_cast<Eigen::Index>(idx.size()));
  if (cloud.has_tags()) out.tags.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || idx[r] >= cloud.size()) throw std::out_of_range("subset_cloud: index");
    out.points.row(static_cast<Eigen::Index>(r)) = cloud.points.row(idx[r]);
    out.spacing[static_cast<Eigen::Index>(r)] = cloud.spacing[idx[r]];
    if (cloud.has_tags()) out.tags.push_back(cloud.tags[static_cast<std::size_t>(idx[r])]);
  }
  out.label = label.empty() ? cloud.label + "_sub" : std::move(label);
  return out;
}

// ---------------------------------------------------------------------------
// Sphere and ball samplers
// ---------------------------------------------------------------------------

/// Node count of sample_sphere at a given level. 3x per level keeps a 4-level
/// ladder inside desk scale while the max spacing shrinks by ~sqrt(3) >= 1.5.
inline Eigen::Index sphere_node_count(int level) {
  Eigen::Index n = 100;
  for (int l = 0; l < level; ++l) n *= 3;
  return n;
}

/// Quasi-uniform nodes on the sphere S(center, radius) via the golden-angle
/// (Fibonacci) spiral; deterministic. Only n = 3 has the quasi-uniform scheme;
/// pass generic_lattice = true to accept other dimensions (low-discrepancy
/// directions, plumbing quality).
inline PointCloud sample_sphere(const Vec& center, double radius, int level,
                                bool generic_lattice = false) {
  if (!(radius > 0.0)) throw std::invalid_argument("sample_sphere: radius must be > 0");
  if (level < 0) throw std::invalid_argument("sample_sphere: level must be >= 0");
  const int n = static_cast<int>(center.size());
  if (n < 3) throw std::invalid_argument("sample_sphere: dimension must be >= 3");
  if (n != 3 && !generic_lattice)
    throw std::invalid_argument("sample_sphere: n != 3 requires the generic-lattice flag");

  const Eigen::Index count = sphere_node_count(level);
  PointCloud cloud;
  cloud.points.resize(count, n);
  if (n == 3) {
    const double golden_angle = std::numbers::pi * (std::sqrt(5.0) + 1.0);
    const double dz = 2.0 / static_cast<double>(count);
    for (Eigen::Index i = 0; i < count; ++i) {
      const double z = -1.0 + (static_cast<double>(i) + 0.5) * dz;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double theta = golden_angle * static_cast<double>(i);
      cloud.points(i, 0) = center[0] + radius * (r * std::cos(theta));
      cloud.points(i, 1) = center[1] + radius * (r * std::sin(theta));
      cloud.points(i, 2) = center[2] + radius * z;
    }
  } else {
    // Weyl-sequence Box-Muller directions, normalized to the sphere.
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double u = 0.12345;
    for (Eigen::Index i = 0; i < count; ++i) {
      Vec dir(n);
      for (int d = 0; d < n; d += 2) {
        u = std::fmod(u + phi, 1.0);
        double u1 = std::max(u, 1e-12);
        u = std::fmod(u + phi * phi, 1.0);
        double u2 = u;
        const double mag = std::sqrt(-2.0 * std::log(u1));
        dir[d] = mag * std::cos(2.0 * std::numbers::pi * u2);
        if (d + 1 < n) dir[d + 1] = mag * std::sin(2.0 * std::numbers::pi * u2);
      }
      dir.normalize();
      cloud.points.row(i) = (center + radius * dir).transpose();
    }
  }
  cloud.spacing = nearest_neighbor_distances(cloud.points);
  cloud.label = "sphere_l" + std::to_string(level);
  return cloud;
}

/// Solid ball: boundary nodes are exactly sample_sphere(center, radius, level)
/// tagged "boundary"; interior nodes are a cubic lattice at 1.6x the median
/// boundary spacing, tagged "interior" (lattice pitch as spacing).
inline PointCloud sample_ball(const Vec& center, double radius, int level) {
  if (!(radius > 0.0)) throw std::invalid_argument("sample_ball: radius must be > 0");
  PointCloud shell = sample_sphere(center, radius, level);

  std::vector<double> sp(shell.spacing.data(), shell.spacing.data() + shell.spacing.size());
  std::nth_element(sp.begin(), sp.begin() + sp.size() / 2, sp.end());
  const double pitch = 1.6 * sp[sp.size() / 2];

  std::vector<Vec> interior;
  const int m = static_cast<int>(std::floor(radius / pitch)) + 1;
  for (int i = -m; i <= m; ++i)
    for (int j = -m; j <= m; ++j)
      for (int k = -m; k <= m; ++k) {
        Vec p(3);
        p << i * pitch, j * pitch, k * pitch;
        if (p.norm() <= radius - 0.5 * pitch) interior.push_back(center + p);
      }

  PointCloud cloud;
  const Eigen::Index nb = shell.size();
  const Eigen::Index ni = static_cast<Eigen::Index>(interior.size());
  cloud.points.resize(nb + ni, 3);
  cloud.spacing.resize(nb + ni);
  cloud.tags.resize(static_cast<std::size_t>(nb + ni));
  cloud.points.topRows(nb) = shell.points;
  cloud.spacing.head(nb) = shell.spacing;
  for (Eigen::Index i = 0; i < nb; ++i) cloud.tags[static_cast<std::size_t>(i)] = kTagBoundary;
  for (Eigen::Index i = 0; i < ni; ++i) {
    cloud.points.row(nb + i) = interior[static_cast<std::size_t>(i)].transpose();
    cloud.spacing[nb + i] = pitch;
    cloud.tags[static_cast<std::size_t>(nb + i)] = kTagInterior;
  }
  cloud.label = "ball_l" + std::to_string(level);
  return cloud;
}

// ---------------------------------------------------------------------------
// Rotation bodies (Example 5.9 geometries)
// ---------------------------------------------------------------------------

enum class Profile { power, stretched_exp, super_exp };

/// Rotation body around the x1 axis: {0 <= x1 <= x1_max, x2^2 + x3^2 <= rho^2(x1)}
/// with rho = x1^(-s) (power), exp(-x1^s) with s in (0,1] (stretched_exp), or
/// exp(-x1^s) with s > 1 (super_exp).
struct RotationBodySpec {
  Profile profile = Profile::power;
  double s = 0.0;
  double x1_max = 16.0;
  double base_pitch = 0.3;  // target node spacing at level 0
  double radius_cap = 0.0;  // 0 = cap power profiles at rho(first station)

  double rho(double x) const {
    switch (profile) {
      case Profile::power: return s == 0.0 ? 1.0 : std::pow(std::max(x, 1e-300), -s);
      case Profile::stretched_exp:
      case Profile::super_exp: return std::exp(-std::pow(std::max(x, 0.0), s));
    }
    return 0.0;
  }
};

inline void validate_spec(const RotationBodySpec& spec) {
  if (!(spec.x1_max > 1.0)) throw std::invalid_argument("rotation body: x1_max must be > 1");
  if (!(spec.base_pitch > 0.0)) throw std::invalid_argument("rotation body: base_pitch must be > 0");
  switch (spec.profile) {
    case Profile::power:
      if (!(spec.s >= 0.0)) throw std::invalid_argument("power profile needs s >= 0");
      break;
    case Profile::stretched_exp:
      if (!(spec.s > 0.0 && spec.s <= 1.0)) throw std::invalid_argument("stretched_exp profile needs s in (0,1]");
      break;
    case Profile::super_exp:
      if (!(spec.s > 1.0)) throw std::invalid_argument("super_exp profile needs s > 1");
      break;
  }
}

/// Fills the (truncated) rotation body with nodes. Axial stations advance by
/// min(pitch, rho(x)); cross-sections are concentric rings at the pitch, or a
/// single axis node once rho < pitch (thin-tube degeneration, spacing = axial
/// step). Stations stop once rho < pitch/16: a tail thinner than that is not
/// resolvable at this level and is dropped. Power profiles with s > 0 flare
/// toward x1 = 0; the region beyond 4 pitches of radius is sampled by
/// radius-proportional graded rings (pitch r/4) up to the radius cap, which
/// keeps the wide mouth affordable.
inline PointCloud sample_rotation_body(const RotationBodySpec& spec, int level) {
  validate_spec(spec);
  if (level < 0) throw std::invalid_argument("sample_rotation_body: level must be >= 0");
  const double h = spec.base_pitch / std::pow(2.0, level);
  const double h_stop = h / 16.0;

  double cap = spec.radius_cap;
  if (cap <= 0.0) cap = (spec.profile == Profile::power && spec.s > 0.0) ? spec.rho(h) : 1.0;
  const double flare_start = 4.0 * h;  // graded mouth takes over beyond this radius
  const auto rho_eff = [&](double x) { return std::min(spec.rho(x), std::min(cap, flare_start)); };

  std::vector<Vec> pts;
  std::vector<double> sps;
  const double golden = std::numbers::pi * (std::sqrt(5.0) - 1.0);
  long station = 0;
  double x = 0.0;
  while (x <= spec.x1_max * (1.0 + 1e-12)) {
    const double r = rho_eff(x);
    if (r < h_stop) break;
    const double step = std::min(h, r);
    if (r < h) {
      // thin tube: axis chain, h_i = axial spacing
      Vec p(3);
      p << x, 0.0, 0.0;
      pts.push_back(p);
      sps.push_back(step);
    } else {
      Vec c(3);
      c << x, 0.0, 0.0;
      pts.push_back(c);
      sps.push_back(h);
      const int rings = static_cast<int>(std::floor(r / h + 1e-12));
      for (int j = 1; j <= rings; ++j) {
        const double rj = j * h;
        const int mj = std::max(6, static_cast<int>(std::llround(2.0 * std::numbers::pi * j)));
        const double off = golden * static_cast<double>(station + j);
        for (int t = 0; t < mj; ++t) {
          const double th = 2.0 * std::numbers::pi * t / mj + off;
          Vec p(3);
          p << x, rj * std::cos(th), rj * std::sin(th);
          pts.push_back(p);
          sps.push_back(h);
        }
      }
      // outermost ring on the true boundary when the lattice leaves a gap
      if (r - rings * h >= 0.5 * h) {
        const int mb = std::max(3, static_cast<int>(std::llround(2.0 * std::numbers::pi * r / h)));
        const double off = golden * static_cast<double>(station + rings + 1);
        for (int t = 0; t < mb; ++t) {
          const double th = 2.0 * std::numbers::pi * t / mb + off;
          Vec p(3);
          p << x, r * std::cos(th), r * std::sin(th);
          pts.push_back(p);
          sps.push_back(h);
        }
      }
    }
    ++station;
    x += step;
    if (pts.size() > 60000) throw std::runtime_error("sample_rotation_body: node budget exceeded; lower the level");
  }

  // graded flare: nested ring shells at radius-proportional pitch r/6, each
  // placed on the axial slab where the profile still reaches radius r
  if (spec.profile == Profile::power && spec.s > 0.0 && cap > flare_start) {
    const double grade = 6.0;
    double r = cap * (1.0 - 0.5 / grade);  // half-pitch inset from the cap
    long ring_idx = 0;
    while (r > flare_start) {
      const double pitch = r / grade;
      const double x_extent = std::min(std::pow(r, -1.0 / spec.s), spec.x1_max);
      const int m = static_cast<int>(std::llround(2.0 * std::numbers::pi * grade));
      for (double xs = 0.0; xs <= x_extent + 1e-12; xs += pitch) {
        const double off = golden * static_cast<double>(1000 + ring_idx);
        for (int t = 0; t < m; ++t) {
          const double th = 2.0 * std::numbers::pi * t / m + off;
          Vec p(3);
          p << xs, r * std::cos(th), r * std::sin(th);
          pts.push_back(p);
          sps.push_back(pitch);
        }
        ++ring_idx;
      }
      r -= pitch;
      if (pts.size() > 60000) throw std::runtime_error("sample_rotation_body: node budget exceeded; lower the level");
    }
  }
  if (pts.empty()) throw std::runtime_error("sample_rotation_body: no resolvable nodes");

  PointCloud cloud;
  cloud.points.resize(static_cast<Eigen::Index>(pts.size()), 3);
  cloud.spacing.resize(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    cloud.points.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
    cloud.spacing[static_cast<Eigen::Index>(i)] = sps[i];
  }
  // spacing must not exceed 2x the true nearest-neighbor distance
  const Vec nn = nearest_neighbor_distances(cloud.points);
  for (Eigen::Index i = 0; i < cloud.size(); ++i)
    cloud.spacing[i] = std::min(cloud.spacing[i], 2.0 * nn[i]);
  cloud.label = "body_l" + std::to_string(level);
  return cloud;
}

// ---------------------------------------------------------------------------
// Inversion and shells
// ---------------------------------------------------------------------------

/// Image of the cloud under the inversion J_y: x -> y + (x-y)/|x-y|^2
/// (so |x-y| |x*-y| = 1). Spacings are recomputed from image distances.
inline PointCloud invert_cloud(const PointCloud& cloud, const Vec& y) {
  if (y.size() != cloud.dim()) throw std::invalid_argument("invert_cloud: dimension mismatch");
  PointCloud out;
  out.points.resize(cloud.size(), cloud.dim());
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const Vec d = cloud.node(i) - y;
    const double d2 = d.squaredNorm();
    if (d2 < 1e-28) throw std::invalid_argument("invert_cloud: center coincides with a node");
    out.points.row(i) = (y + d / d2).transpose();
  }
  out.spacing = nearest_neighbor_distances(out.points);
  if (cloud.size() == 1) {
    // no neighbor to measure; the local Jacobian of J_y scales lengths by 1/|x-y|^2
    out.spacing[0] = cloud.spacing[0] / (cloud.node(0) - y).squaredNorm();
  }
  out.tags = cloud.tags;
  out.label = cloud.label + "_inv";
  return out;
}

/// Radial shell partition about `center`. Outward (q > 1): shell k is
/// {q^k <= |x-c| < q^(k+1)}; inward (q in (0,1)): {q^(k+1) < |x-c| <= q^k}.
/// Shells are returned for k = k_min..k_max; empty shells come back empty.
inline std::vector<PointCloud> shell_clouds(const PointCloud& cloud, const Vec& center, double q,
                                            int k_min, int k_max) {
  if (!(q > 0.0) || q == 1.0) throw std::invalid_argument("shell_clouds: q must be positive and != 1");
  if (k_min > k_max) throw std::invalid_argument("shell_clouds: empty k_range");
  if (center.size() != cloud.dim()) throw std::invalid_argument("shell_clouds: dimension mismatch");
  const bool outward = q > 1.0;
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(k_max - k_min + 1));
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const double d = (cloud.node(i) - center).norm();
    if (d <= 0.0) continue;
    const double kf = std::log(d) / std::log(q);
    for (int k = static_cast<int>(std::floor(kf)) - 1; k <= static_cast<int>(std::floor(kf)) + 1; ++k) {
      if (k < k_min || k > k_max) continue;
      const bool in = outward ? (std::pow(q, k) <= d && d < std::pow(q, k + 1))
                              : (std::pow(q, k + 1) < d && d <= std::pow(q, k));
      if (in) {
        members[static_cast<std::size_t>(k - k_min)].push_back(i);
        break;
      }
    }
  }
  std::vector<PointCloud> shells;
  shells.reserve(members.size());
  for (std::size_t s = 0; s < members.size(); ++s) {
    if (members[s].empty()) {
      PointCloud empty;
      empty.points.resize(0, cloud.dim());
      empty.spacing.resize(0);
      empty.label = cloud.label + "@k" + std::to_string(k_min + static_cast<int>(s));
      shells.push_back(std::move(empty));
    } else {
      shells.push_back(subset_cloud(cloud, members[s],
                                    cloud.label + "@k" + std::to_string(k_min + static_cast<int>(s))));
    }
  }
  return shells;
}

// ---------------------------------------------------------------------------
// Refinement ladders
// ---------------------------------------------------------------------------

/// Nested sequence of clouds for the same continuum set with strictly
/// shrinking max spacing (factor >= 1.5 per level).
struct RefinementLadder {
  std::vector<PointCloud> levels;
};

inline void validate_ladder(const RefinementLadder& ladder) {
  if (ladder.levels.size() < 2) throw std::invalid_argument("ladder: needs at least 2 levels");
  for (const auto& level : ladder.levels) validate_cloud(level);
  for (std::size_t l = 0; l + 1 < ladder.levels.size(); ++l) {
    const double a = ladder.levels[l].spacing.maxCoeff();
    const double b = ladder.levels[l + 1].spacing.maxCoeff();
    if (!(a >= 1.5 * b * (1.0 - 1e-12)))
      throw std::invalid_argument("ladder: max spacing must shrink by >= 1.5x per level");
  }
}

inline RefinementLadder sphere_ladder(const Vec& center, double radius, int first_level, int n_levels) {
  RefinementLadder ladder;
  for (int l = 0; l < n_levels; ++l) ladder.levels.push_back(sample_sphere(center, radius, first_level + l));
  validate_ladder(ladder);
  return ladder;
}

inline Vec vec3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

}  // namespace rieszlab
