#include "stein/svn_cg.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "stein/config_space.hpp"
#include "stein/errors.hpp"
#include "stein/rng.hpp"

namespace stein {

HessianOperator make_hessian_operator(const GramBundle& gram, std::vector<Matrix> curvature,
                                      double lambda) {
  const Index n = gram.num_particles();
  if (static_cast<Index>(curvature.size()) != n)
    throw DimensionMismatch("one curvature block per particle required");
  if (lambda < 0.0) throw InvalidParameter("damping lambda must be >= 0");

  HessianOperator op;
  op.gram = &gram;
  op.curvature = std::move(curvature);
  op.lambda = lambda;
  op.h2_blocks.reserve(n);
  for (Index m = 0; m < n; ++m)
    op.h2_blocks.push_back((gram.grad1[m].transpose() * gram.grad1[m]) /
                           static_cast<double>(n));
  return op;
}

FieldNd hvp(const HessianOperator& op, const FieldNd& v) {
  const Index n = op.num_particles(), d = op.dim();
  if (v.rows() != n || v.cols() != d)
    throw DimensionMismatch("hvp input shape does not match the operator");

  const FieldNd kv = apply_K(*op.gram, v);
  FieldNd ckv(n, d);
  for (Index m = 0; m < n; ++m) ckv.row(m) = kv.row(m) * op.curvature[m].transpose();
  FieldNd out = op.gram->kbar * ckv;  // = N K (C (K v))
  for (Index m = 0; m < n; ++m) out.row(m) += v.row(m) * op.h2_blocks[m].transpose();
  if (op.lambda > 0.0) out += op.lambda * (op.gram->kbar * v);
  return out;
}

FieldNd sample_noise_H(const HessianOperator& op, const Matrix& xi, const Matrix& g) {
  const Index n = op.num_particles(), d = op.dim();
  if (xi.rows() != n || xi.cols() != d)
    throw DimensionMismatch("xi must be N x d standard normals");
  if (g.rows() != n || g.cols() != n)
    throw DimensionMismatch("g must be N x N standard normals");

  FieldNd eta(n, d);
  for (Index m = 0; m < n; ++m) {
    Eigen::LLT<Matrix> llt(op.curvature[m]);
    if (llt.info() != Eigen::Success)
      throw CholeskyFailure("curvature block " + std::to_string(m) +
                            " is not positive definite");
    eta.row(m) = (Matrix(llt.matrixL()) * xi.row(m).transpose()).transpose();
  }
  // sqrt(N) K eta + zeta, zeta_m = (1/sqrt(N)) sum_n grad1[m](n) g_{mn}.
  FieldNd out = (op.gram->kbar * eta) / std::sqrt(static_cast<double>(n));
  for (Index m = 0; m < n; ++m)
    out.row(m) += (op.gram->grad1[m].transpose() * g.row(m).transpose()).transpose() /
                  std::sqrt(static_cast<double>(n));
  return out;
}

FieldNd sample_noise_H(const HessianOperator& op, std::mt19937_64& rng) {
  const Index n = op.num_particles(), d = op.dim();
  const Matrix xi = normal_matrix_rowmajor(rng, n, d);
  const Matrix g = normal_matrix_rowmajor(rng, n, n);
  return sample_noise_H(op, xi, g);
}

CgResult cg_solve(const HessianOperator& op, const FieldNd& rhs, double rel_tol,
                  long max_iter) {
  return cg_solve([&op](const FieldNd& v) { return hvp(op, v); }, rhs, rel_tol, max_iter);
}

namespace {

Ensemble ssvn_step_cg_impl(const Ensemble& ensemble, const TargetModel& target,
                           const KernelSpec& spec, double tau, double lambda, double rel_tol,
                           long max_iter, const Matrix* xi, const Matrix* g,
                           const Matrix* xi_lambda) {
  if (!(tau > 0.0)) throw InvalidParameter("step size tau must be > 0");
  if (!(rel_tol > 0.0)) throw InvalidParameter("rel_tol must be > 0");
  const Index n = ensemble.num_particles(), d = ensemble.dim();
  if (max_iter <= 0) max_iter = n * d;

  IterationData data = prepare_iteration(ensemble, target, spec, /*need_curvature=*/true);
  const HessianOperator op = make_hessian_operator(data.gram, data.curvature, lambda);

  FieldNd rhs = svgd_velocity(data.gram, data.scores);
  if (xi) {
    FieldNd noise = sample_noise_H(op, *xi, *g);  // ~ N(0, H)
    if (lambda > 0.0)
      noise += std::sqrt(lambda * static_cast<double>(n)) * gram_noise(data.gram, *xi_lambda);
    rhs += std::sqrt(2.0 / (static_cast<double>(n) * tau)) * noise;
  }

  const CgResult solve = cg_solve(op, rhs, rel_tol, max_iter);

  Ensemble next;
  next.positions = ensemble.positions + tau * (data.gram.kbar * solve.x);
  next.iteration = ensemble.iteration + 1;
  check_finite_update(next.positions, next.iteration);
  return next;
}

}  // namespace

Ensemble ssvn_step_cg(const Ensemble& ensemble, const TargetModel& target,
                      const KernelSpec& spec, double tau, double lambda, double rel_tol,
                      long max_iter) {
  return ssvn_step_cg_impl(ensemble, target, spec, tau, lambda, rel_tol, max_iter, nullptr,
                           nullptr, nullptr);
}

Ensemble ssvn_step_cg(const Ensemble& ensemble, const TargetModel& target,
                      const KernelSpec& spec, double tau, double lambda, double rel_tol,
                      long max_iter, const Matrix& xi, const Matrix& g,
                      const Matrix& xi_lambda) {
  return ssvn_step_cg_impl(ensemble, target, spec, tau, lambda, rel_tol, max_iter, &xi, &g,
                           &xi_lambda);
}

Ensemble ssvn_step_cg(const Ensemble& ensemble, const TargetModel& target,
                      const KernelSpec& spec, double tau, double lambda, double rel_tol,
                      long max_iter, bool stochastic, std::mt19937_64& rng) {
  if (!stochastic)
    return ssvn_step_cg_impl(ensemble, target, spec, tau, lambda, rel_tol, max_iter, nullptr,
                             nullptr, nullptr);
  const Index n = ensemble.num_particles(), d = ensemble.dim();
  const Matrix xi = normal_matrix_rowmajor(rng, n, d);
  const Matrix g = normal_matrix_rowmajor(rng, n, n);
  const Matrix xi_lambda = normal_matrix_colmajor(rng, n, d);
  return ssvn_step_cg_impl(ensemble, target, spec, tau, lambda, rel_tol, max_iter, &xi, &g,
                           &xi_lambda);
}

}  // namespace stein
