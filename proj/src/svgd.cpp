#include "stein/svgd.hpp"

#include <cassert>
#include <cmath>
#include <string>

#include "stein/errors.hpp"
#include "stein/rng.hpp"

namespace stein {

FieldNd svgd_velocity(const GramBundle& gram, const FieldNd& scores) {
  const Index n = gram.num_particles(), d = gram.dim();
  if (scores.rows() != n || scores.cols() != d)
    throw DimensionMismatch("scores shape does not match gram bundle");
  FieldNd v = gram.kbar * scores;
  // grad_2 k(z_m, z_n) = -grad_1 k(z_m, z_n) for the squared-exponential
  // kernel; dropping the n = m term of the divergence requires the flat top.
  for (Index m = 0; m < n; ++m) {
    assert(gram.grad1[m].row(m).isZero(0.0));
    v.row(m) -= gram.grad1[m].colwise().sum();
  }
  return v / static_cast<double>(n);
}

namespace {

Ensemble svgd_step_impl(const Ensemble& ensemble, const TargetModel& target,
                        const KernelSpec& spec, double tau, const Matrix* xi) {
  if (!(tau > 0.0)) throw InvalidParameter("step size tau must be > 0");
  IterationData data = prepare_iteration(ensemble, target, spec, /*need_curvature=*/false);
  const FieldNd v = svgd_velocity(data.gram, data.scores);

  Ensemble next;
  next.positions = ensemble.positions + tau * v;
  if (xi) next.positions += std::sqrt(tau) * ssvgd_noise(data.gram, *xi);
  next.iteration = ensemble.iteration + 1;
  check_finite_update(next.positions, next.iteration);
  return next;
}

}  // namespace

Ensemble svgd_step(const Ensemble& ensemble, const TargetModel& target, const KernelSpec& spec,
                   double tau) {
  return svgd_step_impl(ensemble, target, spec, tau, nullptr);
}

Ensemble svgd_step(const Ensemble& ensemble, const TargetModel& target, const KernelSpec& spec,
                   double tau, const Matrix& xi) {
  return svgd_step_impl(ensemble, target, spec, tau, &xi);
}

Ensemble svgd_step(const Ensemble& ensemble, const TargetModel& target, const KernelSpec& spec,
                   double tau, bool stochastic, std::mt19937_64& rng) {
  if (!stochastic) return svgd_step_impl(ensemble, target, spec, tau, nullptr);
  const Matrix xi = normal_matrix_colmajor(rng, ensemble.num_particles(), ensemble.dim());
  return svgd_step_impl(ensemble, target, spec, tau, &xi);
}

}  // namespace stein
