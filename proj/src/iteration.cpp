#include "stein/iteration.hpp"

#include <string>

#include "stein/errors.hpp"

namespace stein {

IterationData prepare_iteration(const Ensemble& ensemble, const TargetModel& target,
                                const KernelSpec& spec, bool need_curvature) {
  const Index n = ensemble.num_particles();
  const Index d = ensemble.dim();
  if (d != target.dim) throw DimensionMismatch("ensemble dimension does not match target");

  IterationData data;
  data.scores.resize(n, d);
  for (Index m = 0; m < n; ++m)
    data.scores.row(m) =
        target.grad_log_density(ensemble.positions.row(m).transpose()).transpose();

  const bool metric_needs_curvature = spec.metric_mode == MetricMode::averaged_gauss_newton;
  if (need_curvature || metric_needs_curvature) {
    data.curvature.reserve(n);
    for (Index m = 0; m < n; ++m)
      data.curvature.push_back(
          target.gauss_newton_hessian(ensemble.positions.row(m).transpose()));
  }

  data.spec = spec;
  switch (spec.metric_mode) {
    case MetricMode::identity:
      data.spec.metric = Matrix::Identity(d, d);
      break;
    case MetricMode::averaged_gauss_newton:
      data.spec.metric = averaged_metric(data.curvature);
      break;
    case MetricMode::fixed:
      break;
  }
  data.gram = gram(data.spec, ensemble);
  return data;
}

void check_finite_update(const Matrix& positions, long iteration) {
  if (positions.allFinite()) return;
  for (Index m = 0; m < positions.rows(); ++m) {
    if (!positions.row(m).allFinite())
      throw NonFiniteUpdate("non-finite position at iteration " + std::to_string(iteration) +
                                ", particle " + std::to_string(m),
                            iteration, m);
  }
}

}  // namespace stein
