#pragma once

#include <vector>

#include "stein/config_space.hpp"
#include "stein/kernels.hpp"
#include "stein/targets.hpp"
#include "stein/types.hpp"

namespace stein {

// Shared per-iteration preparation: scores, optional curvature blocks, the
// metric-resolved kernel spec, and the gram bundle. Curvature blocks are
// evaluated at most once per iteration and reused by both the metric and
// the Newton systems.
struct IterationData {
  FieldNd scores;                 // row n = grad log pi(z_n)
  std::vector<Matrix> curvature;  // Gauss-Newton blocks; empty unless requested
  KernelSpec spec;                // metric resolved for this ensemble
  GramBundle gram;
};

IterationData prepare_iteration(const Ensemble& ensemble, const TargetModel& target,
                                const KernelSpec& spec, bool need_curvature);

// Throws NonFiniteUpdate naming the first offending particle.
void check_finite_update(const Matrix& positions, long iteration);

}  // namespace stein
