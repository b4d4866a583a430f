#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stein/errors.hpp"
#include "stein/rng.hpp"
#include "stein/svgd.hpp"

using namespace stein;

namespace {

Ensemble random_ensemble(std::mt19937_64& rng, Index n, Index d) {
  return Ensemble{oracles::random_matrix(rng, n, d, -2.0, 2.0), 0};
}

}  // namespace

TEST_CASE("single-particle velocity is the score") {
  std::mt19937_64 rng(1);
  const TargetModel target = make_standard_gaussian(3);
  const Ensemble ens = random_ensemble(rng, 1, 3);
  const KernelSpec spec = make_kernel_spec(3, MetricMode::fixed);
  const GramBundle bundle = gram(spec, ens);
  FieldNd scores(1, 3);
  scores.row(0) = target.grad_log_density(ens.positions.row(0).transpose()).transpose();
  CHECK((svgd_velocity(bundle, scores) - scores).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single particle at the mode does not move") {
  const TargetModel target = make_standard_gaussian(2);
  const Ensemble ens{Matrix::Zero(1, 2), 0};
  const KernelSpec spec = make_kernel_spec(2, MetricMode::fixed);
  const GramBundle bundle = gram(spec, ens);
  FieldNd scores = Matrix::Zero(1, 2);
  CHECK(svgd_velocity(bundle, scores).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("velocity equals the direct double loop and the dense recipe form") {
  std::mt19937_64 rng(42);
  const TargetModel target = make_hybrid_rosenbrock({2, 1, 0.5, 0.5, 1.0});
  const Ensemble ens = random_ensemble(rng, 3, 2);
  const KernelSpec spec = make_kernel_spec(2, MetricMode::fixed);
  const GramBundle bundle = gram(spec, ens);

  FieldNd scores(3, 2);
  for (Index m = 0; m < 3; ++m)
    scores.row(m) = target.grad_log_density(ens.positions.row(m).transpose()).transpose();
  const FieldNd velocity = svgd_velocity(bundle, scores);

  // Direct summation with fresh kernel evaluations.
  FieldNd direct = Matrix::Zero(3, 2);
  for (Index m = 0; m < 3; ++m) {
    const Vector zm = ens.positions.row(m).transpose();
    for (Index n = 0; n < 3; ++n) {
      const Vector zn = ens.positions.row(n).transpose();
      direct.row(m) += kernel_eval(spec, zm, zn) * scores.row(n);
      direct.row(m) += kernel_grad1(spec, zn, zm).transpose();  // grad_2 k(z_m, z_n)
    }
  }
  direct /= 3.0;
  CHECK((velocity - direct).cwiseAbs().maxCoeff() < 1e-12);

  // Dense configuration-space form K grad + div K, divergence blockwise.
  const Matrix dense = oracles::dense_K(bundle.kbar, 2);
  Vector recipe = dense * flatten_particle_major(scores);
  for (Index m = 0; m < 3; ++m) {
    const Vector zm = ens.positions.row(m).transpose();
    Vector div = kernel_grad1(spec, zm, zm);  // flat top: identically zero
    for (Index n = 0; n < 3; ++n)
      div += kernel_grad1(spec, ens.positions.row(n).transpose(), zm);
    recipe.segment(m * 2, 2) += div / 3.0;
  }
  CHECK((flatten_particle_major(velocity) - recipe).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("velocity is antisymmetric under reflection of a symmetric target") {
  std::mt19937_64 rng(4242);
  const TargetModel target = make_standard_gaussian(2);
  const KernelSpec spec = make_kernel_spec(2, MetricMode::fixed);
  const Ensemble ens = random_ensemble(rng, 6, 2);
  const Ensemble reflected{Matrix(-ens.positions), 0};

  auto velocity_of = [&](const Ensemble& e) {
    const GramBundle bundle = gram(spec, e);
    FieldNd scores(e.num_particles(), 2);
    for (Index m = 0; m < e.num_particles(); ++m)
      scores.row(m) = target.grad_log_density(e.positions.row(m).transpose()).transpose();
    return svgd_velocity(bundle, scores);
  };
  CHECK((velocity_of(ens) + velocity_of(reflected)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("deterministic single-particle step is plain gradient ascent") {
  const TargetModel target = make_standard_gaussian(1);
  Ensemble ens{Matrix::Constant(1, 1, 2.0), 0};
  const KernelSpec spec = make_kernel_spec(1, MetricMode::fixed);
  const Ensemble next = svgd_step(ens, target, spec, 0.1);
  CHECK(next.positions(0, 0) == doctest::Approx(1.8).epsilon(1e-15));
  CHECK(next.iteration == 1);
}

TEST_CASE("stochastic step with injected zero noise equals the deterministic step") {
  std::mt19937_64 rng(31);
  const TargetModel target = make_hybrid_rosenbrock({2, 1, 0.5, 0.5, 1.0});
  const Ensemble ens = random_ensemble(rng, 5, 2);
  const KernelSpec spec = make_kernel_spec(2);
  const Ensemble det = svgd_step(ens, target, spec, 0.05);
  const Ensemble stoch = svgd_step(ens, target, spec, 0.05, Matrix::Zero(5, 2));
  CHECK((det.positions - stoch.positions).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("deterministic flow on a gaussian stays finite for 1000 iterations") {
  std::mt19937_64 rng(67);
  const TargetModel target = make_standard_gaussian(2);
  const KernelSpec spec = make_kernel_spec(2);
  Ensemble ens = random_ensemble(rng, 10, 2);
  for (int t = 0; t < 1000; ++t) ens = svgd_step(ens, target, spec, 0.1);
  CHECK(ens.positions.allFinite());
  CHECK(ens.iteration == 1000);
}

TEST_CASE("overflow on a narrow ridge raises a located error") {
  const TargetModel target = make_hybrid_rosenbrock({2, 1, 0.5, 5e4, 1.0});
  std::mt19937_64 rng(3);
  Ensemble ens{oracles::random_matrix(rng, 8, 2, -6.0, 6.0), 0};
  const KernelSpec spec = make_kernel_spec(2, MetricMode::identity);
  bool raised = false;
  try {
    for (int t = 0; t < 50 && !raised; ++t) ens = svgd_step(ens, target, spec, 1e6);
  } catch (const NonFiniteUpdate& e) {
    raised = true;
    CHECK(e.iteration >= 1);
    CHECK(e.particle >= 0);
  }
  CHECK(raised);
}

TEST_CASE("stochastic chain reproduces a 1d gaussian over a long run") {
  const TargetModel target = make_standard_gaussian(1);
  const KernelSpec spec = make_kernel_spec(1, MetricMode::averaged_gauss_newton);
  const double tau = 0.005;
  const Index n = 20;

  std::mt19937_64 rng(9001);
  Ensemble ens{oracles::random_matrix(rng, n, 1, -2.0, 2.0), 0};
  for (int t = 0; t < 20000; ++t) ens = svgd_step(ens, target, spec, tau, true, rng);

  // The chain decorrelates over ~1e3 iterations at this step size, so pool
  // a thinned run: every 20th ensemble, 1e4 records = 2e5 pooled samples.
  const long records = 10000, thin = 20;
  double sum = 0.0, sum_sq = 0.0;
  for (long r = 0; r < records; ++r) {
    for (long t = 0; t < thin; ++t) ens = svgd_step(ens, target, spec, tau, true, rng);
    sum += ens.positions.col(0).sum();
    sum_sq += ens.positions.col(0).squaredNorm();
  }
  const double count = double(records) * double(n);
  const double mean = sum / count;
  const double variance = sum_sq / count - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(variance - 1.0) < 0.05);
}
