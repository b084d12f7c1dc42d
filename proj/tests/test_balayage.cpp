#include "rieszlab/balayage.hpp"

#include <cmath>

#include "doctest.h"
#include "test_util.hpp"

using namespace rieszlab;

namespace {
const KernelModel kModel = newtonian_model();
const SolverOptions kOpts{1e-10, 20000};

std::vector<Eigen::Index> cap_indices(const PointCloud& cloud, double zmin) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < cloud.size(); ++i)
    if (cloud.points(i, 2) >= zmin) idx.push_back(i);
  return idx;
}
}  // namespace

TEST_CASE("sweep: measure already on the target is a fixed point") {
  const PointCloud sphere = sample_sphere(Vec::Zero(3), 1.0, 0);
  testutil::Rng rng(23);
  Vec w(sphere.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = 0.2 + rng.uniform();
  const DiscreteMeasure mu = make_measure(sphere, w);
  const BalayageResult r = sweep(kModel, mu, sphere, Mat(), kOpts);
  REQUIRE(r.converged);
  CHECK((r.swept.weights - w).cwiseAbs().maxCoeff() <= 1e-7);
  CHECK(std::abs(r.swept_mass - r.source_mass) <= 1e-8 * r.source_mass);
}

TEST_CASE("sweep: zero measure sweeps to zero") {
  const PointCloud sphere = sample_sphere(Vec::Zero(3), 1.0, 0);
  const DiscreteMeasure zero = dirac(vec3(3.0, 0.0, 0.0), 0.0);
  const BalayageResult r = sweep(kModel, zero, sphere, Mat(), kOpts);
  CHECK(r.swept_mass == 0.0);
  CHECK(r.swept.weights.maxCoeff() == 0.0);
}

TEST_CASE("sweep: mass inequality and node-potential contract") {
  const PointCloud sphere = sample_sphere(Vec::Zero(3), 1.0, 1);
  const DiscreteMeasure mu = dirac(vec3(2.0, 0.0, 0.0));
  const BalayageResult r = sweep(kModel, mu, sphere, Mat(), kOpts);
  REQUIRE(r.converged);
  CHECK(r.swept_mass <= r.source_mass * (1.0 + 1e-10));
  CHECK(r.potential_match <= kOpts.tol * std::max(1.0, r.b_inf));
  CHECK(r.kkt.complementarity <= kOpts.tol);
  // harmonic-measure mass r/d = 1/2 (approached under refinement)
  CHECK(r.swept_mass == doctest::Approx(0.5).epsilon(0.05));
  CHECK_THROWS_AS(sweep(kModel, mu, PointCloud{Mat(0, 3), Vec(), {}, ""}, Mat(), kOpts),
                  std::invalid_argument);
}

TEST_CASE("sweep_increasing: contraction and monotone probe potentials") {
  const PointCloud sphere = sample_sphere(Vec::Zero(3), 1.0, 1);
  const DiscreteMeasure mu = dirac(vec3(3.0, 0.0, 0.0));
  const std::vector<PointCloud> nested = {
      subset_cloud(sphere, cap_indices(sphere, 0.3), "cap_small"),
      subset_cloud(sphere, cap_indices(sphere, -0.3), "cap_big"),
      sphere,
  };
  Mat probes(2, 3);
  probes.row(0) = vec3(0.0, 0.0, 4.0).transpose();
  probes.row(1) = vec3(-2.0, 0.0, 0.0).transpose();

  const SweepSequence seq = sweep_increasing(kModel, mu, nested, probes, kOpts);
  REQUIRE(seq.levels.size() == 3);
  for (std::size_t l = 0; l + 1 < seq.levels.size(); ++l) {
    CHECK(seq.energy_distance[l + 1] <= seq.energy_distance[l] + 1e-9);
    for (Eigen::Index p = 0; p < probes.rows(); ++p)
      CHECK(seq.probe_potentials(static_cast<Eigen::Index>(l + 1), p) >=
            seq.probe_potentials(static_cast<Eigen::Index>(l), p) - 1e-9);
  }
  // final level within 1% of a direct full-sphere sweep (it is the same solve)
  const BalayageResult direct = sweep(kModel, mu, sphere, probes, kOpts);
  CHECK(std::abs(seq.levels.back().swept_mass - direct.swept_mass) <=
        0.01 * direct.swept_mass);

  // single-level ladder degenerates to sweep
  const SweepSequence single = sweep_increasing(kModel, mu, {sphere}, probes, kOpts);
  CHECK(single.levels[0].swept_mass == doctest::Approx(direct.swept_mass).epsilon(1e-12));

  // non-nested input rejected
  const std::vector<PointCloud> bad = {sphere, nested[0]};
  CHECK_THROWS_AS(sweep_increasing(kModel, mu, bad, probes, kOpts), std::invalid_argument);
}

TEST_CASE("sweep_decreasing: stabilizes at the intersection") {
  const PointCloud sphere = sample_sphere(Vec::Zero(3), 1.0, 1);
  const DiscreteMeasure mu = dirac(vec3(0.0, 0.0, 3.0));
  const PointCloud small = subset_cloud(sphere, cap_indices(sphere, 0.5), "cap");
  const std::vector<PointCloud> family = {sphere, small};
  Mat probes(1, 3);
  probes.row(0) = vec3(0.0, 0.0, -2.0).transpose();

  const SweepSequence seq = sweep_decreasing(kModel, mu, family, probes, kOpts);
  const BalayageResult direct = sweep(kModel, mu, small, probes, kOpts);
  const Mat k = kernel_matrix(kModel, small);
  const Vec dw = seq.levels.back().swept.weights - direct.swept.weights;
  CHECK(std::sqrt(dw.dot(k * dw)) <= 10 * kOpts.tol);

  // constant family: identical levels
  const SweepSequence flat = sweep_decreasing(kModel, mu, {small, small}, probes, kOpts);
  CHECK((flat.levels[0].swept.weights - flat.levels[1].swept.weights).cwiseAbs().maxCoeff() <=
        10 * kOpts.tol);

  CHECK_THROWS_AS(sweep_decreasing(kModel, mu, {small, sphere}, probes, kOpts),
                  std::invalid_argument);
}

TEST_CASE("check_restriction: idempotence and subset guards") {
  const PointCloud sphere = sample_sphere(Vec::Zero(3), 1.0, 1);
  const PointCloud hemi = subset_cloud(sphere, cap_indices(sphere, 0.0), "hemi");
  const DiscreteMeasure mu = dirac(vec3(2.0, 0.0, 0.0));
  const Mat probes = default_probes(sphere, &mu);

  // Q = A: projection idempotence
  const RestrictionReport same = check_restriction(kModel, mu, sphere, sphere, probes, kOpts);
  CHECK(same.energy_distance <= 10 * kOpts.tol);

  // mu supported on Q: both routes return mu
  testutil::Rng rng(31);
  Vec wq(hemi.size());
  for (Eigen::Index i = 0; i < wq.size(); ++i) wq[i] = 0.1 + rng.uniform();
  const DiscreteMeasure on_q = make_measure(hemi, wq);
  const RestrictionReport fixed = check_restriction(kModel, on_q, sphere, hemi, probes, kOpts);
  CHECK(fixed.energy_distance <= 1e-6);

  CHECK_THROWS_AS(check_restriction(kModel, mu, hemi, sphere, probes, kOpts),
                  std::invalid_argument);
}

TEST_CASE("check_symmetry: trivial identities") {
  const PointCloud sphere = sample_sphere(Vec::Zero(3), 1.0, 0);
  const DiscreteMeasure mu = dirac(vec3(2.0, 0.0, 0.0));

  // lambda already on the target: gap collapses to complementarity size
  testutil::Rng rng(37);
  Vec w(sphere.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = 0.1 + rng.uniform();
  const DiscreteMeasure lambda_on = make_measure(sphere, w);
  CHECK(check_symmetry(kModel, mu, lambda_on, sphere, kOpts).gap <= 1e-7);

  // mu = lambda: both sides equal E(mu^A, mu)
  CHECK(check_symmetry(kModel, mu, mu, sphere, kOpts).gap <= 10 * kOpts.tol);
}

TEST_CASE("check_extremal: swept measure is minimal, supermeasures feasible") {
  const PointCloud sphere = sample_sphere(Vec::Zero(3), 1.0, 0);
  const DiscreteMeasure mu = dirac(vec3(2.0, 0.0, 0.0));
  const Mat probes = default_probes(sphere, &mu);
  const BalayageResult mu_a = sweep(kModel, mu, sphere, probes, kOpts);

  // xi = mu^A itself
  const ExtremalReport self = check_extremal(kModel, mu, sphere, mu_a.swept, probes, kOpts);
  CHECK(self.max_violation <= 10 * kOpts.tol * std::max(1.0, mu_a.b_inf));

  // xi = mu^A + extra positive mass stays feasible with no violation
  Vec bigger = mu_a.swept.weights;
  bigger.array() += 0.05;
  const DiscreteMeasure xi = make_measure(*mu_a.swept.cloud, bigger);
  const ExtremalReport sup = check_extremal(kModel, mu, sphere, xi, probes, kOpts);
  CHECK(sup.max_violation <= 10 * kOpts.tol * std::max(1.0, mu_a.b_inf));

  // clearly infeasible candidate is rejected
  const DiscreteMeasure tiny = dirac(vec3(0.0, 0.0, 10.0), 1e-6);
  CHECK_THROWS_AS(check_extremal(kModel, mu, sphere, tiny, probes, kOpts), std::invalid_argument);
}

TEST_CASE("superpose_diracs: degenerate and split-weight cases") {
  const PointCloud sphere = sample_sphere(Vec::Zero(3), 1.0, 0);
  Mat one(1, 3);
  one.row(0) = vec3(2.0, 0.0, 0.0).transpose();
  const Mat probes = default_probes(sphere, nullptr);

  const SuperpositionReport single =
      superpose_diracs(kModel, one, Vec::Constant(1, 1.0), sphere, probes, kOpts);
  CHECK(single.energy_gap <= 10 * kOpts.tol);
  CHECK_FALSE(single.source_inside_hull);

  // two equal atoms at the same point with half weights = one unit atom
  Mat twice(2, 3);
  twice.row(0) = one.row(0);
  twice.row(1) = one.row(0);
  const SuperpositionReport split =
      superpose_diracs(kModel, twice, Vec::Constant(2, 0.5), sphere, probes, kOpts);
  CHECK(split.energy_gap <= 1e-7);

  // a source inside the bounding sphere gets flagged but still computes
  Mat inside(1, 3);
  inside.row(0) = vec3(0.1, 0.0, 0.0).transpose();
  const SuperpositionReport flagged =
      superpose_diracs(kModel, inside, Vec::Constant(1, 1.0), sphere, probes, kOpts);
  CHECK(flagged.source_inside_hull);
}

TEST_CASE("mass_deficit: on-target measures keep their mass") {
  const PointCloud sphere = sample_sphere(Vec::Zero(3), 1.0, 0);
  testutil::Rng rng(41);
  Vec w(sphere.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = 0.1 + rng.uniform();
  const DiscreteMeasure on_target = make_measure(sphere, w);
  const MassDeficit d = mass_deficit(kModel, on_target, sphere, kOpts);
  CHECK(std::abs(d.deficit_ratio) <= 1e-8);

  const DiscreteMeasure outside = dirac(vec3(2.0, 0.0, 0.0));
  const MassDeficit d2 = mass_deficit(kModel, outside, sphere, kOpts);
  CHECK(d2.deficit_ratio == doctest::Approx(0.5).epsilon(0.1));

  const DiscreteMeasure zero = dirac(vec3(2.0, 0.0, 0.0), 0.0);
  CHECK_THROWS_AS(mass_deficit(kModel, zero, sphere, kOpts), std::invalid_argument);
}

TEST_CASE("equilibrium is the balayage fixed point of its own cloud") {
  const PointCloud sphere = sample_sphere(Vec::Zero(3), 1.0, 0);
  const auto eq = equilibrium(kModel, sphere, Mat(), kOpts);
  REQUIRE(eq.converged);
  const BalayageResult r = sweep(kModel, eq.gamma, sphere, Mat(), kOpts);
  CHECK((r.swept.weights - eq.gamma.weights).cwiseAbs().maxCoeff() <= 1e-7);
}
