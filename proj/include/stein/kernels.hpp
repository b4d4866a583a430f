#pragma once

#include <vector>

#include "stein/targets.hpp"
#include "stein/types.hpp"

namespace stein {

enum class MetricMode { identity, averaged_gauss_newton, fixed };

// Anisotropic squared-exponential kernel
//   k(x, y) = exp(-(x - y)^T M (x - y) / (2 h))
// with bandwidth h > 0 and SPD metric M. Note k(x, x) = 1 and
// grad_1 k(x, x) = 0 (flat top).
struct KernelSpec {
  double bandwidth = 1.0;
  Matrix metric;
  MetricMode metric_mode = MetricMode::averaged_gauss_newton;
};

// Default spec: bandwidth h = d, identity metric until updated.
KernelSpec make_kernel_spec(Index dim, MetricMode mode = MetricMode::averaged_gauss_newton);

double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& y);

// grad_x k(x, y) = -(1/h) M (x - y) k(x, y). The gradient in the second
// argument is grad_2 k(x, y) = kernel_grad1(spec, y, x).
Vector kernel_grad1(const KernelSpec& spec, const Vector& x, const Vector& y);

// Lower Cholesky factor of A, escalating an added ridge from base_jitter by
// factors of 10 up to max_jitter before raising CholeskyFailure. jitter_used
// (optional) reports the ridge that succeeded, 0 if none was needed.
Matrix cholesky_with_jitter(const Matrix& a, double base_jitter, double max_jitter,
                            double* jitter_used = nullptr);

// Per-iteration kernel data over an ensemble.
struct GramBundle {
  Matrix kbar;                // N x N gram matrix; exactly symmetric, unit diagonal
  std::vector<Matrix> grad1;  // grad1[m] is N x d; row n = grad_1 k(z_m, z_n)

  Index num_particles() const { return kbar.rows(); }
  Index dim() const { return grad1.empty() ? 0 : grad1.front().cols(); }

  // Lower Cholesky factor of kbar, computed on first use (jitter ladder
  // 1e-12 .. 1e-6; failure past the ladder signals duplicated particles).
  const Matrix& chol_lower() const;
  double chol_jitter() const { return jitter_ < 0.0 ? 0.0 : jitter_; }

 private:
  mutable Matrix chol_;
  mutable double jitter_ = -1.0;
};

GramBundle gram(const KernelSpec& spec, const Ensemble& ensemble);

// New kernel metric for an ensemble: identity -> I_d; averaged_gauss_newton
// -> mean of the per-particle Gauss-Newton Hessians (symmetrized, checked
// SPD); fixed -> spec.metric unchanged.
Matrix metric_update(MetricMode mode, const KernelSpec& spec, const Ensemble& ensemble,
                     const TargetModel& target);

// Same, reusing curvature blocks already evaluated this iteration.
Matrix averaged_metric(const std::vector<Matrix>& curvature_blocks);

}  // namespace stein
