#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "stein/errors.hpp"
#include "stein/iteration.hpp"
#include "stein/svgd.hpp"

namespace stein {

// Matrix-free Newton system exploiting H = N K C K + H2 with C the
// block-diagonal curvature and H2 the block-diagonal kernel-gradient outer
// products; the damping lambda N K is folded into the operator so that the
// matrix-free and dense paths target the same system. The gram bundle must
// outlive the operator.
struct HessianOperator {
  const GramBundle* gram = nullptr;
  std::vector<Matrix> curvature;  // negated log-density Hessians (Gauss-Newton blocks)
  std::vector<Matrix> h2_blocks;  // (1/N) sum_n grad1 grad1^T per particle
  double lambda = 0.0;

  Index num_particles() const { return gram ? gram->num_particles() : 0; }
  Index dim() const { return gram ? gram->dim() : 0; }
};

HessianOperator make_hessian_operator(const GramBundle& gram, std::vector<Matrix> curvature,
                                      double lambda);

// (N K C K + H2 + lambda N K) v through two gram multiplies and blockwise
// d x d products; H is never formed.
FieldNd hvp(const HessianOperator& op, const FieldNd& v);

// Draw ~ N(0, H) for the undamped H as sqrt(N) K eta + zeta:
// eta_m ~ N(0, C_m) through N separate d x d Cholesky factors (fed by
// xi, N x d row-major) and zeta_m = (1/sqrt(N)) sum_n grad1[m](n) g_{mn}
// with g an N x N matrix of standard normals.
FieldNd sample_noise_H(const HessianOperator& op, const Matrix& xi, const Matrix& g);
FieldNd sample_noise_H(const HessianOperator& op, std::mt19937_64& rng);

struct CgResult {
  FieldNd x;
  long iterations = 0;
  double residual = 0.0;  // |A x - rhs| / |rhs| at exit
};

// Plain conjugate gradients on a symmetric positive definite operator;
// stops when the relative residual reaches rel_tol or after max_iter
// iterations (reported, not fatal). Non-positive curvature raises
// CgBreakdown.
template <class ApplyFn>
CgResult cg_solve(ApplyFn&& apply, const FieldNd& rhs, double rel_tol, long max_iter);

CgResult cg_solve(const HessianOperator& op, const FieldNd& rhs, double rel_tol,
                  long max_iter);

// Matrix-free stochastic step: perturbs the SVGD direction with
// sqrt(2/(N tau)) N(0, H_lambda), CG-solves H_lambda x = rhs, and steps
// z <- z + tau N K x. The N(0, H_lambda) draw is sample_noise_H plus an
// independent sqrt(lambda N) N(0, K) gram draw (fed by xi_lambda).
Ensemble ssvn_step_cg(const Ensemble& ensemble, const TargetModel& target,
                      const KernelSpec& spec, double tau, double lambda, double rel_tol,
                      long max_iter);
Ensemble ssvn_step_cg(const Ensemble& ensemble, const TargetModel& target,
                      const KernelSpec& spec, double tau, double lambda, double rel_tol,
                      long max_iter, const Matrix& xi, const Matrix& g,
                      const Matrix& xi_lambda);
Ensemble ssvn_step_cg(const Ensemble& ensemble, const TargetModel& target,
                      const KernelSpec& spec, double tau, double lambda, double rel_tol,
                      long max_iter, bool stochastic, std::mt19937_64& rng);

// --- implementation ---

template <class ApplyFn>
CgResult cg_solve(ApplyFn&& apply, const FieldNd& rhs, double rel_tol, long max_iter) {
  CgResult result;
  result.x = FieldNd::Zero(rhs.rows(), rhs.cols());
  const double rhs_norm = norm_field(rhs);
  if (rhs_norm == 0.0) return result;

  FieldNd r = rhs;
  FieldNd p = r;
  double rs = dot_field(r, r);
  for (long it = 0; it < max_iter; ++it) {
    const FieldNd hp = apply(p);
    const double php = dot_field(p, hp);
    if (php <= 0.0)
      throw CgBreakdown("non-positive curvature in CG (p'Hp = " + std::to_string(php) + ")");
    const double step = rs / php;
    result.x += step * p;
    r -= step * hp;
    const double rs_next = dot_field(r, r);
    result.iterations = it + 1;
    if (std::sqrt(rs_next) <= rel_tol * rhs_norm) break;
    p = r + (rs_next / rs) * p;
    rs = rs_next;
  }
  result.residual = norm_field(apply(result.x) - rhs) / rhs_norm;
  return result;
}

}  // namespace stein
