#include "stein/svn.hpp"

#include <cmath>
#include <string>

#include "stein/config_space.hpp"
#include "stein/errors.hpp"
#include "stein/rng.hpp"

namespace stein {

namespace {

using Eigen::seqN;

Matrix dense_diffusion(const Matrix& kbar, Index d) {
  const Index n = kbar.rows();
  Matrix k = Matrix::Zero(n * d, n * d);
  for (Index i = 0; i < d; ++i)
    k(seqN(i, n, d), seqN(i, n, d)) = kbar / static_cast<double>(n);
  return k;
}

}  // namespace

SvnSystem assemble_svn_hessian(const GramBundle& gram, const std::vector<Matrix>& curvature,
                               SvnFlags flags) {
  const Index n = gram.num_particles(), d = gram.dim();
  if (static_cast<Index>(curvature.size()) != n)
    throw DimensionMismatch("one curvature block per particle required");
  for (const Matrix& c : curvature)
    if (c.rows() != d || c.cols() != d)
      throw DimensionMismatch("curvature blocks must be d x d");

  SvnSystem system;
  system.flags = flags;
  system.num_particles = n;
  system.dim = d;
  system.hessian = Matrix::Zero(n * d, n * d);

  // First term, one N x N slice per coordinate pair:
  // H[(m,i),(n,j)] += (1/N) (kbar' diag_p(C_p(i,j)) kbar)(m,n).
  Vector diag_weights(n);
  for (Index i = 0; i < d; ++i) {
    for (Index j = i; j < d; ++j) {
      for (Index p = 0; p < n; ++p) diag_weights(p) = curvature[p](i, j);
      const Matrix slice =
          (gram.kbar.transpose() * diag_weights.asDiagonal() * gram.kbar) /
          static_cast<double>(n);
      system.hessian(seqN(i, n, d), seqN(j, n, d)) = slice;
      if (j != i) system.hessian(seqN(j, n, d), seqN(i, n, d)) = slice.transpose();
    }
  }

  if (flags.h2_block_diagonal) {
    for (Index m = 0; m < n; ++m)
      system.hessian.block(m * d, m * d, d, d) +=
          (gram.grad1[m].transpose() * gram.grad1[m]) / static_cast<double>(n);
  } else {
    // H2[(m,i),(n,j)] = (1/N) sum_p grad1[p](n,i) grad1[p](m,j).
    std::vector<Matrix> a(d, Matrix(n, n));  // a[i](p, n) = grad1[p](n, i)
    for (Index i = 0; i < d; ++i)
      for (Index p = 0; p < n; ++p) a[i].row(p) = gram.grad1[p].col(i).transpose();
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j)
        system.hessian(seqN(i, n, d), seqN(j, n, d)) +=
            (a[j].transpose() * a[i]) / static_cast<double>(n);
  }
  return system;
}

SvnSystem damp_hessian(SvnSystem system, const GramBundle& gram, double lambda) {
  const Index n = system.num_particles, d = system.dim;
  if (gram.num_particles() != n || gram.dim() != d)
    throw DimensionMismatch("gram bundle does not match the assembled system");
  if (lambda < 0.0) throw InvalidParameter("damping lambda must be >= 0");

  system.lambda = lambda;
  if (lambda > 0.0) {
    for (Index i = 0; i < d; ++i)
      system.hessian(seqN(i, n, d), seqN(i, n, d)) += lambda * gram.kbar;
  }
  const double scale = system.hessian.diagonal().cwiseAbs().maxCoeff();
  system.chol_lower = cholesky_with_jitter(system.hessian, 1e-10 * scale, 1e-6 * scale,
                                           &system.chol_jitter);
  return system;
}

namespace {

Ensemble ssvn_step_cholesky_impl(const Ensemble& ensemble, const TargetModel& target,
                                 const KernelSpec& spec, double tau, double lambda,
                                 const Vector* xi) {
  if (!(tau > 0.0)) throw InvalidParameter("step size tau must be > 0");
  const Index n = ensemble.num_particles(), d = ensemble.dim();

  IterationData data = prepare_iteration(ensemble, target, spec, /*need_curvature=*/true);
  SvnSystem system = damp_hessian(
      assemble_svn_hessian(data.gram, data.curvature), data.gram, lambda);

  const FieldNd v_svgd = svgd_velocity(data.gram, data.scores);
  const Vector b = flatten_particle_major(v_svgd);
  const auto lower = system.chol_lower.triangularView<Eigen::Lower>();
  const auto upper = system.chol_lower.transpose().triangularView<Eigen::Upper>();
  const Vector alpha = upper.solve(lower.solve(b));
  const FieldNd v_svn = data.gram.kbar * unflatten_particle_major(alpha, n, d);

  Ensemble next;
  next.positions = ensemble.positions + tau * v_svn;
  if (xi) {
    if (xi->size() != n * d)
      throw DimensionMismatch("noise vector must have length N*d");
    const Vector w = upper.solve(*xi);
    const FieldNd v_stc = std::sqrt(2.0 / static_cast<double>(n)) *
                          (data.gram.kbar * unflatten_particle_major(w, n, d));
    next.positions += std::sqrt(tau) * v_stc;
  }
  next.iteration = ensemble.iteration + 1;
  check_finite_update(next.positions, next.iteration);
  return next;
}

}  // namespace

Ensemble ssvn_step_cholesky(const Ensemble& ensemble, const TargetModel& target,
                            const KernelSpec& spec, double tau, double lambda) {
  return ssvn_step_cholesky_impl(ensemble, target, spec, tau, lambda, nullptr);
}

Ensemble ssvn_step_cholesky(const Ensemble& ensemble, const TargetModel& target,
                            const KernelSpec& spec, double tau, double lambda,
                            const Vector& xi) {
  return ssvn_step_cholesky_impl(ensemble, target, spec, tau, lambda, &xi);
}

Ensemble ssvn_step_cholesky(const Ensemble& ensemble, const TargetModel& target,
                            const KernelSpec& spec, double tau, double lambda, bool stochastic,
                            std::mt19937_64& rng) {
  if (!stochastic) return ssvn_step_cholesky_impl(ensemble, target, spec, tau, lambda, nullptr);
  const Vector xi = normal_vector(rng, ensemble.num_particles() * ensemble.dim());
  return ssvn_step_cholesky_impl(ensemble, target, spec, tau, lambda, &xi);
}

FieldNd v_det_finite_difference(const Ensemble& ensemble, const TargetModel& target,
                                const KernelSpec& spec, double lambda, double fd_step) {
  const Index n = ensemble.num_particles(), d = ensemble.dim();
  const Index nd = n * d;
  if (nd > 64)
    throw SizeExceeded("v_det oracle is restricted to N*d <= 64, got " + std::to_string(nd));
  if (!(fd_step > 0.0)) throw InvalidParameter("fd_step must be > 0");

  // Metric frozen at the base ensemble; only particle positions move.
  KernelSpec frozen = spec;
  frozen.metric = metric_update(spec.metric_mode, spec, ensemble, target);
  frozen.metric_mode = MetricMode::fixed;

  auto dense_k_hinv = [&](const Matrix& positions) {
    Ensemble e{positions, 0};
    const GramBundle g = gram(frozen, e);
    std::vector<Matrix> curvature;
    curvature.reserve(n);
    for (Index m = 0; m < n; ++m)
      curvature.push_back(target.gauss_newton_hessian(positions.row(m).transpose()));
    const SvnSystem system = damp_hessian(assemble_svn_hessian(g, curvature), g, lambda);
    const Matrix k = dense_diffusion(g.kbar, d);
    const auto lower = system.chol_lower.triangularView<Eigen::Lower>();
    const auto upper = system.chol_lower.transpose().triangularView<Eigen::Upper>();
    // K H^{-1} = (H^{-1} K)^T since both are symmetric.
    return Matrix(upper.solve(lower.solve(k)).transpose());
  };

  const GramBundle base_gram = gram(frozen, ensemble);
  const Matrix k0 = dense_diffusion(base_gram.kbar, d);

  Vector v = Vector::Zero(nd);
  for (Index c = 0; c < nd; ++c) {
    Matrix plus = ensemble.positions;
    Matrix minus = ensemble.positions;
    plus(c / d, c % d) += fd_step;
    minus(c / d, c % d) -= fd_step;
    const Matrix dg = (dense_k_hinv(plus) - dense_k_hinv(minus)) / (2.0 * fd_step);
    v += static_cast<double>(n) * (dg * k0.col(c));
  }
  return unflatten_particle_major(v, n, d);
}

Ensemble svn_block_diagonal_step(const Ensemble& ensemble, const TargetModel& target,
                                 const KernelSpec& spec, double tau) {
  if (!(tau > 0.0)) throw InvalidParameter("step size tau must be > 0");
  const Index n = ensemble.num_particles(), d = ensemble.dim();

  IterationData data = prepare_iteration(ensemble, target, spec, /*need_curvature=*/true);
  const FieldNd v_svgd = svgd_velocity(data.gram, data.scores);

  Ensemble next;
  next.positions = ensemble.positions;
  for (Index m = 0; m < n; ++m) {
    Matrix block = Matrix::Zero(d, d);
    for (Index p = 0; p < n; ++p)
      block += (data.gram.kbar(p, m) * data.gram.kbar(p, m)) * data.curvature[p];
    block += data.gram.grad1[m].transpose() * data.gram.grad1[m];
    block /= static_cast<double>(n);
    Eigen::LLT<Matrix> llt(block);
    if (llt.info() != Eigen::Success)
      throw CholeskyFailure("diagonal block " + std::to_string(m) +
                            " is not positive definite");
    const Vector alpha = llt.solve(v_svgd.row(m).transpose());
    next.positions.row(m) += tau * alpha.transpose();
  }
  next.iteration = ensemble.iteration + 1;
  check_finite_update(next.positions, next.iteration);
  return next;
}

}  // namespace stein
