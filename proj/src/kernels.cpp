#include "stein/kernels.hpp"

#include <cmath>
#include <string>

#include "stein/errors.hpp"

namespace stein {

namespace {

void check_pair(const KernelSpec& spec, const Vector& x, const Vector& y) {
  const Index d = spec.metric.rows();
  if (x.size() != d || y.size() != d)
    throw DimensionMismatch("kernel arguments do not match the metric dimension " +
                            std::to_string(d));
}

void check_spec(const KernelSpec& spec) {
  if (!(spec.bandwidth > 0.0)) throw InvalidParameter("kernel bandwidth must be > 0");
  if (spec.metric.rows() != spec.metric.cols())
    throw DimensionMismatch("kernel metric must be square");
  if (!spec.metric.isApprox(spec.metric.transpose(), 1e-12))
    throw InvalidParameter("kernel metric must be symmetric");
}

}  // namespace

KernelSpec make_kernel_spec(Index dim, MetricMode mode) {
  KernelSpec spec;
  spec.bandwidth = static_cast<double>(dim);
  spec.metric = Matrix::Identity(dim, dim);
  spec.metric_mode = mode;
  return spec;
}

double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& y) {
  check_pair(spec, x, y);
  const Vector diff = x - y;
  return std::exp(-diff.dot(spec.metric * diff) / (2.0 * spec.bandwidth));
}

Vector kernel_grad1(const KernelSpec& spec, const Vector& x, const Vector& y) {
  check_pair(spec, x, y);
  const Vector diff = x - y;
  const double k = std::exp(-diff.dot(spec.metric * diff) / (2.0 * spec.bandwidth));
  return Vector(-(k / spec.bandwidth) * (spec.metric * diff));
}

Matrix cholesky_with_jitter(const Matrix& a, double base_jitter, double max_jitter,
                            double* jitter_used) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() == Eigen::Success) {
    if (jitter_used) *jitter_used = 0.0;
    return llt.matrixL();
  }
  for (double jitter = base_jitter; jitter <= max_jitter * (1.0 + 1e-9); jitter *= 10.0) {
    Matrix jittered = a;
    jittered.diagonal().array() += jitter;
    llt.compute(jittered);
    if (llt.info() == Eigen::Success) {
      if (jitter_used) *jitter_used = jitter;
      return llt.matrixL();
    }
  }
  throw CholeskyFailure("cholesky failed after jitter ladder up to " +
                        std::to_string(max_jitter));
}

const Matrix& GramBundle::chol_lower() const {
  if (jitter_ < 0.0) {
    double used = 0.0;
    chol_ = cholesky_with_jitter(kbar, 1e-12, 1e-6, &used);
    jitter_ = used;
  }
  return chol_;
}

GramBundle gram(const KernelSpec& spec, const Ensemble& ensemble) {
  check_spec(spec);
  const Index n = ensemble.num_particles();
  const Index d = ensemble.dim();
  if (n < 1) throw InvalidParameter("gram requires at least one particle");
  if (spec.metric.rows() != d)
    throw DimensionMismatch("kernel metric dimension does not match ensemble");
  if (!ensemble.positions.allFinite())
    throw NonFiniteInput("ensemble has non-finite positions");

  GramBundle bundle;
  bundle.kbar = Matrix::Ones(n, n);
  bundle.grad1.assign(n, Matrix::Zero(n, d));
  for (Index m = 0; m < n; ++m) {
    for (Index p = m + 1; p < n; ++p) {
      const Vector diff = (ensemble.positions.row(m) - ensemble.positions.row(p)).transpose();
      const Vector md = spec.metric * diff;
      const double k = std::exp(-diff.dot(md) / (2.0 * spec.bandwidth));
      bundle.kbar(m, p) = k;
      bundle.kbar(p, m) = k;
      const Vector g = -(k / spec.bandwidth) * md;  // grad_1 k(z_m, z_p)
      bundle.grad1[m].row(p) = g.transpose();
      bundle.grad1[p].row(m) = -g.transpose();
    }
  }
  return bundle;
}

Matrix averaged_metric(const std::vector<Matrix>& curvature_blocks) {
  if (curvature_blocks.empty()) throw InvalidParameter("metric average over empty ensemble");
  Matrix m = Matrix::Zero(curvature_blocks.front().rows(), curvature_blocks.front().cols());
  for (const Matrix& h : curvature_blocks) m += h;
  m /= static_cast<double>(curvature_blocks.size());
  m = ((m + m.transpose()) / 2.0).eval();
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw CholeskyFailure("averaged kernel metric is not positive definite");
  return m;
}

Matrix metric_update(MetricMode mode, const KernelSpec& spec, const Ensemble& ensemble,
                     const TargetModel& target) {
  const Index n = ensemble.num_particles();
  if (n < 1) throw InvalidParameter("metric_update requires at least one particle");
  switch (mode) {
    case MetricMode::identity:
      return Matrix::Identity(ensemble.dim(), ensemble.dim());
    case MetricMode::fixed:
      return spec.metric;
    case MetricMode::averaged_gauss_newton: {
      std::vector<Matrix> blocks;
      blocks.reserve(n);
      for (Index m = 0; m < n; ++m)
        blocks.push_back(target.gauss_newton_hessian(ensemble.positions.row(m).transpose()));
      return averaged_metric(blocks);
    }
  }
  throw InvalidParameter("unknown metric mode");
}

}  // namespace stein
