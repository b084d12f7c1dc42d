#include "rieszlab/geometry.hpp"

#include <cmath>
#include <set>

#include "doctest.h"

using namespace rieszlab;

TEST_CASE("sphere sampler: membership, determinism, scaling") {
  const Vec c0 = Vec::Zero(3);
  const PointCloud s0 = sample_sphere(c0, 1.0, 0);
  validate_cloud(s0);
  CHECK(s0.size() >= 100);
  for (Eigen::Index i = 0; i < s0.size(); ++i)
    CHECK(std::abs(s0.node(i).norm() - 1.0) <= 1e-12);

  // r = 2 is the pointwise x2 scaling of r = 1 at the same level
  const PointCloud s2 = sample_sphere(c0, 2.0, 0);
  CHECK((s2.points - 2.0 * s0.points).cwiseAbs().maxCoeff() <= 1e-14);

  // deterministic
  const PointCloud again = sample_sphere(c0, 1.0, 0);
  CHECK((again.points - s0.points).cwiseAbs().maxCoeff() == 0.0);

  // level growth fixture: ratio within [3, 5]
  const PointCloud s1 = sample_sphere(c0, 1.0, 1);
  const double ratio = static_cast<double>(s1.size()) / static_cast<double>(s0.size());
  CHECK(ratio >= 3.0);
  CHECK(ratio <= 5.0);

  CHECK_THROWS_AS(sample_sphere(c0, -1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample_sphere(Vec::Zero(4), 1.0, 0), std::invalid_argument);
  const PointCloud g4 = sample_sphere(Vec::Zero(4), 1.0, 0, true);
  for (Eigen::Index i = 0; i < g4.size(); ++i)
    CHECK(std::abs(g4.node(i).norm() - 1.0) <= 1e-12);
}

TEST_CASE("ball sampler: membership, tags, boundary equals sphere") {
  const Vec c0 = Vec::Zero(3);
  const PointCloud ball = sample_ball(c0, 1.0, 0);
  validate_cloud(ball);
  REQUIRE(ball.has_tags());
  for (Eigen::Index i = 0; i < ball.size(); ++i)
    CHECK(ball.node(i).norm() <= 1.0 + 1e-12);

  const PointCloud sphere = sample_sphere(c0, 1.0, 0);
  std::vector<Eigen::Index> boundary;
  for (Eigen::Index i = 0; i < ball.size(); ++i)
    if (ball.tags[static_cast<std::size_t>(i)] == kTagBoundary) boundary.push_back(i);
  REQUIRE(static_cast<Eigen::Index>(boundary.size()) == sphere.size());
  for (std::size_t r = 0; r < boundary.size(); ++r)
    CHECK((ball.points.row(boundary[r]) - sphere.points.row(static_cast<Eigen::Index>(r)))
              .cwiseAbs()
              .maxCoeff() == 0.0);

  // interior census fixture (level 2): recorded from the sampler itself
  const PointCloud ball2 = sample_ball(c0, 1.0, 2);
  Eigen::Index ni = 0;
  for (const auto& t : ball2.tags) ni += (t == kTagInterior);
  const double frac = static_cast<double>(ni) / static_cast<double>(ball2.size());
  CHECK(frac > 0.15);
  CHECK(frac < 0.75);

  CHECK_THROWS_AS(sample_ball(c0, 0.0, 0), std::invalid_argument);
}

TEST_CASE("rotation body: cylinder, thin profiles, census") {
  RotationBodySpec cyl{Profile::power, 0.0, 8.0, 0.4};
  const PointCloud c = sample_rotation_body(cyl, 0);
  validate_cloud(c);
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const Vec p = c.node(i);
    CHECK(p[1] * p[1] + p[2] * p[2] <= 1.0 + 1e-12);
    CHECK(p[0] >= -1e-12);
    CHECK(p[0] <= 8.0 + 1e-9);
  }

  // profile value pinned by the paper's figure: rho(8) = exp(-8) for (5.6), s=1
  RotationBodySpec thin{Profile::stretched_exp, 1.0, 8.0, 0.4};
  CHECK(thin.rho(8.0) == doctest::Approx(std::exp(-8.0)).epsilon(1e-15));
  const PointCloud t = sample_rotation_body(thin, 0);
  validate_cloud(t);
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const Vec p = t.node(i);
    CHECK(p[1] * p[1] + p[2] * p[2] <= thin.rho(p[0]) * thin.rho(p[0]) + 1e-12);
  }

  // cylinder node count grows ~linearly with x1_max (sampler self-census)
  RotationBodySpec cyl16 = cyl;
  cyl16.x1_max = 16.0;
  const auto n8 = sample_rotation_body(cyl, 0).size();
  const auto n16 = sample_rotation_body(cyl16, 0).size();
  const double growth = static_cast<double>(n16) / static_cast<double>(n8);
  CHECK(growth >= 1.6);
  CHECK(growth <= 2.4);

  RotationBodySpec bad{Profile::stretched_exp, 2.0, 8.0, 0.4};
  CHECK_THROWS_AS(validate_spec(bad), std::invalid_argument);
  RotationBodySpec bad2{Profile::power, 1.0, 0.5, 0.4};
  CHECK_THROWS_AS(validate_spec(bad2), std::invalid_argument);
}

TEST_CASE("inversion: ray images, involution, distance identity") {
  const Vec y = vec3(0.0, 0.0, 0.0);
  Mat pts(1, 3);
  pts.row(0) = vec3(2.0, 0.0, 0.0).transpose();
  PointCloud one;
  one.points = pts;
  one.spacing = Vec::Constant(1, 1.0);
  one.label = "one";
  const PointCloud img = invert_cloud(one, y);
  CHECK((img.node(0) - vec3(0.5, 0.0, 0.0)).norm() <= 1e-15);

  const PointCloud sphere = sample_sphere(vec3(3.0, 0.0, 0.0), 1.0, 0);
  const PointCloud inv = invert_cloud(sphere, y);
  const PointCloud back = invert_cloud(inv, y);
  CHECK((back.points - sphere.points).cwiseAbs().maxCoeff() <= 1e-12);

  // |x*-z*| = |x-z| / (|x-y| |z-y|) for all node pairs (Eq. 6.2 analogue)
  for (Eigen::Index i = 0; i < sphere.size(); i += 7)
    for (Eigen::Index j = i + 1; j < sphere.size(); j += 7) {
      const double lhs = (inv.node(i) - inv.node(j)).norm();
      const double rhs = (sphere.node(i) - sphere.node(j)).norm() /
                         (sphere.node(i).norm() * sphere.node(j).norm());
      CHECK(std::abs(lhs - rhs) <= 1e-12 * rhs);
    }

  PointCloud at_center;
  at_center.points = Mat::Zero(1, 3);
  at_center.spacing = Vec::Constant(1, 1.0);
  CHECK_THROWS_AS(invert_cloud(at_center, y), std::invalid_argument);
}

TEST_CASE("shells: partition, emptiness, growth census") {
  const Vec c0 = Vec::Zero(3);
  RotationBodySpec cyl{Profile::power, 0.0, 16.0, 0.4};
  const PointCloud body = sample_rotation_body(cyl, 0);
  const auto shells = shell_clouds(body, c0, 2.0, 0, 5);
  REQUIRE(shells.size() == 6);

  // partition: each node lands in exactly one shell (within the radial range)
  Eigen::Index covered = 0;
  for (const auto& s : shells) covered += s.size();
  Eigen::Index in_range = 0;
  for (Eigen::Index i = 0; i < body.size(); ++i) {
    const double d = body.node(i).norm();
    if (d >= 1.0 && d < 64.0) ++in_range;
  }
  CHECK(covered == in_range);

  // cylinder shell populations roughly double with k (the [16,32) shell only
  // catches the rim at the truncation plane, so stop at k = 3)
  for (int k = 0; k <= 2; ++k) {
    const double g = static_cast<double>(shells[static_cast<std::size_t>(k + 1)].size()) /
                     static_cast<double>(shells[static_cast<std::size_t>(k)].size());
    CHECK(g >= 1.4);
    CHECK(g <= 2.8);
  }

  // cloud strictly inside |x| < q^k_min: all shells empty
  const PointCloud tiny = sample_sphere(c0, 0.5, 0);
  for (const auto& s : shell_clouds(tiny, c0, 2.0, 0, 3)) CHECK(s.size() == 0);

  CHECK_THROWS_AS(shell_clouds(body, c0, 1.0, 0, 3), std::invalid_argument);
  CHECK_THROWS_AS(shell_clouds(body, c0, 2.0, 3, 1), std::invalid_argument);
}

TEST_CASE("refinement ladder: spacing decay and validation") {
  const RefinementLadder ladder = sphere_ladder(Vec::Zero(3), 1.0, 0, 3);
  CHECK(ladder.levels.size() == 3);
  for (std::size_t l = 0; l + 1 < ladder.levels.size(); ++l)
    CHECK(ladder.levels[l].spacing.maxCoeff() >=
          1.5 * ladder.levels[l + 1].spacing.maxCoeff() * (1 - 1e-12));

  RefinementLadder flat;
  flat.levels.push_back(ladder.levels[0]);
  flat.levels.push_back(ladder.levels[0]);
  CHECK_THROWS_AS(validate_ladder(flat), std::invalid_argument);
}
