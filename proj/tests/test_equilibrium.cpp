#include "rieszlab/equilibrium.hpp"

#include <cmath>

#include "doctest.h"
#include "test_util.hpp"

using namespace rieszlab;

namespace {
PointCloud one_node(double h = 1.0) {
  PointCloud c;
  c.points = Mat::Zero(1, 3);
  c.spacing = Vec::Constant(1, h);
  c.label = "one";
  return c;
}
}  // namespace

TEST_CASE("equilibrium: single node closed form") {
  const KernelModel model = newtonian_model();
  const auto eq = equilibrium(model, one_node());
  REQUIRE(eq.converged);
  // K11 = (0.5 * 1)^-1 = 2, so w = 1/2 and capacity = mass = energy = 1/2
  CHECK(eq.capacity == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(eq.energy == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(eq.gamma.total_mass() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(eq.potential_stats.support_min == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("equilibrium: mass = energy = capacity, potential band, uniqueness") {
  const KernelModel model = newtonian_model();
  const PointCloud sphere = sample_sphere(Vec::Zero(3), 1.0, 1);
  const SolverOptions opts{1e-10, 20000};
  const auto eq = equilibrium(model, sphere, Mat(), opts);
  REQUIRE(eq.converged);
  CHECK(std::abs(eq.capacity - eq.energy) <= 1e-8 * eq.capacity);
  CHECK(std::abs(eq.capacity - eq.gamma.total_mass()) <= 1e-8 * eq.capacity);
  CHECK(eq.potential_stats.support_min >= 1.0 - 10 * opts.tol);
  CHECK(eq.potential_stats.node_min >= 1.0 - 10 * opts.tol);

  // uniqueness across warm starts
  const auto warm = equilibrium(model, sphere, Mat(), opts, Vec::Constant(sphere.size(), 1.0));
  REQUIRE(warm.converged);
  CHECK((warm.gamma.weights - eq.gamma.weights).cwiseAbs().maxCoeff() <= 10 * opts.tol);

  // probe potentials stay near/below 1 outside (Frostman diagnostic)
  Mat probes(2, 3);
  probes.row(0) = vec3(2.0, 0.0, 0.0).transpose();
  probes.row(1) = vec3(0.0, 3.0, 0.0).transpose();
  const auto eq2 = equilibrium(model, sphere, probes, opts);
  CHECK(eq2.potential_stats.probe_max <= 1.0 + 0.05);
}

TEST_CASE("capacity: scaling law and subset monotonicity") {
  const KernelModel model = newtonian_model();
  const PointCloud sphere = sample_sphere(Vec::Zero(3), 1.0, 0);
  const double c1 = capacity(model, sphere);

  PointCloud scaled = sphere;
  scaled.points *= 2.0;
  scaled.spacing *= 2.0;
  const double c2 = capacity(model, scaled);
  // capacity scales like r^(n - alpha) = r
  CHECK(std::abs(c2 - 2.0 * c1) <= 1e-9 * c2);

  // hemisphere subset has smaller capacity
  std::vector<Eigen::Index> upper;
  for (Eigen::Index i = 0; i < sphere.size(); ++i)
    if (sphere.points(i, 2) >= 0.0) upper.push_back(i);
  const PointCloud hemi = subset_cloud(sphere, upper, "hemi");
  CHECK(capacity(model, hemi) <= c1 + 1e-9);

  PointCloud empty;
  empty.points.resize(0, 3);
  empty.spacing.resize(0);
  CHECK_THROWS_AS(capacity(model, empty), std::invalid_argument);
}

TEST_CASE("equilibrium equals balayage fixed point on its own cloud") {
  // deferred to test_balayage.cpp (needs sweep); here we check the potential
  // band on a rotation-body cloud as a non-spherical fixture
  const KernelModel model = newtonian_model();
  RotationBodySpec spec{Profile::power, 0.0, 4.0, 0.5};
  const PointCloud body = sample_rotation_body(spec, 0);
  const SolverOptions opts{1e-10, 20000};
  const auto eq = equilibrium(model, body, Mat(), opts);
  REQUIRE(eq.converged);
  CHECK(eq.potential_stats.node_min >= 1.0 - 10 * opts.tol);
  CHECK(eq.potential_stats.support_min <= 1.0 + 10 * opts.tol);
  CHECK(std::abs(eq.capacity - eq.energy) <= 1e-8 * eq.capacity);
}

TEST_CASE("support_profile: tags required, sphere-only fraction is zero") {
  const KernelModel model = newtonian_model();
  const PointCloud ball = sample_ball(Vec::Zero(3), 1.0, 0);
  const auto prof = support_profile(model, ball);
  CHECK(prof.interior_mass_fraction >= 0.0);
  CHECK(prof.interior_mass_fraction <= 1.0);

  PointCloud untagged = sample_sphere(Vec::Zero(3), 1.0, 0);
  CHECK_THROWS_AS(support_profile(model, untagged), std::invalid_argument);

  // a tagged cloud with no interior nodes has fraction 0 by construction
  PointCloud sphere_tagged = untagged;
  sphere_tagged.tags.assign(static_cast<std::size_t>(sphere_tagged.size()), kTagBoundary);
  CHECK(support_profile(model, sphere_tagged).interior_mass_fraction == 0.0);
}

TEST_CASE("reduced_kernel: strays dropped, clusters kept, spheres unchanged") {
  const KernelModel model = newtonian_model();
  const PointCloud sphere = sample_sphere(Vec::Zero(3), 1.0, 0);
  CHECK(reduced_kernel(model, sphere).size() == sphere.size());

  // sphere plus one far stray carrying the sphere's median spacing
  PointCloud stray = sphere;
  stray.points.conservativeResize(sphere.size() + 1, 3);
  stray.points.row(sphere.size()) = vec3(100.0, 0.0, 0.0).transpose();
  stray.spacing.conservativeResize(sphere.size() + 1);
  stray.spacing[sphere.size()] = sphere.spacing.mean();
  CHECK(reduced_kernel(model, stray).size() == sphere.size());

  // cluster of 3 mutual neighbors far from the main body is retained
  PointCloud cluster = sphere;
  cluster.points.conservativeResize(sphere.size() + 3, 3);
  cluster.spacing.conservativeResize(sphere.size() + 3);
  for (int t = 0; t < 3; ++t) {
    cluster.points.row(sphere.size() + t) = vec3(50.0 + 0.1 * t, 0.0, 0.0).transpose();
    cluster.spacing[sphere.size() + t] = 0.1;
  }
  CHECK(reduced_kernel(model, cluster).size() == sphere.size() + 3);
}
