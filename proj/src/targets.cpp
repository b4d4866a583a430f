#include "stein/targets.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <utility>

#include "stein/errors.hpp"

namespace stein {

namespace {

void check_point(const Vector& x, Index dim) {
  if (x.size() != dim)
    throw DimensionMismatch("point has dimension " + std::to_string(x.size()) +
                            ", target expects " + std::to_string(dim));
  if (!x.allFinite()) throw NonFiniteInput("point has non-finite entries");
}

// log pi(x) = -|r(x)|^2 with analytic Jacobian J = dr/dx.
struct ResidualForm {
  Index dim = 0;
  std::function<Vector(const Vector&)> residual;
  std::function<Matrix(const Vector&)> jacobian;
};

TargetModel target_from_residuals(ResidualForm form,
                                  std::function<Matrix(Index, std::mt19937_64&)> sampler = {}) {
  auto shared = std::make_shared<ResidualForm>(std::move(form));
  TargetModel model;
  model.dim = shared->dim;
  model.log_density = [shared](const Vector& x) {
    check_point(x, shared->dim);
    return -shared->residual(x).squaredNorm();
  };
  model.grad_log_density = [shared](const Vector& x) {
    check_point(x, shared->dim);
    return Vector(-2.0 * shared->jacobian(x).transpose() * shared->residual(x));
  };
  model.gauss_newton_hessian = [shared](const Vector& x) {
    check_point(x, shared->dim);
    const Matrix j = shared->jacobian(x);
    return Matrix(2.0 * j.transpose() * j);
  };
  model.ground_truth_sampler = std::move(sampler);
  return model;
}

void check_hybrid_params(const HybridRosenbrockParams& p) {
  if (p.n1 < 2) throw InvalidParameter("hybrid rosenbrock requires n1 >= 2");
  if (p.n2 < 1) throw InvalidParameter("hybrid rosenbrock requires n2 >= 1");
  if (!(p.a > 0.0) || !(p.b > 0.0))
    throw InvalidParameter("hybrid rosenbrock requires a > 0 and b > 0");
}

// Flat index of x_{j,i} for block j (0-based) and i in [2, n1]; x_{j,1} is
// the shared coordinate 0.
inline Index hr_index(int n1, int block, int i) { return 1 + block * (n1 - 1) + (i - 2); }

}  // namespace

int hybrid_rosenbrock_dim(int n1, int n2) {
  if (n1 < 2) throw InvalidParameter("hybrid_rosenbrock_dim requires n1 >= 2");
  if (n2 < 1) throw InvalidParameter("hybrid_rosenbrock_dim requires n2 >= 1");
  return (n1 - 1) * n2 + 1;
}

TargetModel make_hybrid_rosenbrock(const HybridRosenbrockParams& params) {
  check_hybrid_params(params);
  const Index d = hybrid_rosenbrock_dim(params.n1, params.n2);
  const Index num_res = 1 + (params.n1 - 1) * static_cast<Index>(params.n2);
  const double sqrt_a = std::sqrt(params.a);
  const double sqrt_b = std::sqrt(params.b);

  ResidualForm form;
  form.dim = d;
  form.residual = [params, d, num_res, sqrt_a, sqrt_b](const Vector& x) {
    Vector r(num_res);
    r(0) = sqrt_a * (x(0) - params.mu);
    Index k = 1;
    for (int j = 0; j < params.n2; ++j) {
      for (int i = 2; i <= params.n1; ++i) {
        const Index cur = hr_index(params.n1, j, i);
        const Index prev = (i == 2) ? 0 : cur - 1;
        r(k++) = sqrt_b * (x(cur) - x(prev) * x(prev));
      }
    }
    return r;
  };
  form.jacobian = [params, d, num_res, sqrt_a, sqrt_b](const Vector& x) {
    Matrix j = Matrix::Zero(num_res, d);
    j(0, 0) = sqrt_a;
    Index k = 1;
    for (int blk = 0; blk < params.n2; ++blk) {
      for (int i = 2; i <= params.n1; ++i) {
        const Index cur = hr_index(params.n1, blk, i);
        const Index prev = (i == 2) ? 0 : cur - 1;
        j(k, cur) = sqrt_b;
        j(k, prev) = -2.0 * sqrt_b * x(prev);
        ++k;
      }
    }
    return j;
  };

  auto sampler = [params](Index count, std::mt19937_64& rng) {
    return sample_hybrid_rosenbrock(params, count, rng);
  };
  return target_from_residuals(std::move(form), sampler);
}

Matrix sample_hybrid_rosenbrock(const HybridRosenbrockParams& params, Index count,
                                std::mt19937_64& rng) {
  check_hybrid_params(params);
  if (count < 1) throw InvalidParameter("sample count must be >= 1");
  const Index d = hybrid_rosenbrock_dim(params.n1, params.n2);
  const double sd_first = 1.0 / std::sqrt(2.0 * params.a);
  const double sd_rest = 1.0 / std::sqrt(2.0 * params.b);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix samples(count, d);
  for (Index s = 0; s < count; ++s) {
    samples(s, 0) = params.mu + sd_first * normal(rng);
    for (int j = 0; j < params.n2; ++j) {
      for (int i = 2; i <= params.n1; ++i) {
        const Index cur = hr_index(params.n1, j, i);
        const Index prev = (i == 2) ? 0 : cur - 1;
        const double prior = samples(s, prev) * samples(s, prev);
        samples(s, cur) = prior + sd_rest * normal(rng);
      }
    }
  }
  return samples;
}

TargetModel make_gaussian(const Vector& mean, const Matrix& covariance) {
  const Index d = mean.size();
  if (covariance.rows() != d || covariance.cols() != d)
    throw DimensionMismatch("covariance shape does not match mean");
  Eigen::LLT<Matrix> llt(covariance);
  if (llt.info() != Eigen::Success)
    throw InvalidParameter("gaussian covariance is not positive definite");
  // r(x) = L^{-1}(x - mean)/sqrt(2) gives |r|^2 = (x-mean)' Sigma^{-1} (x-mean)/2
  // and 2 J'J = Sigma^{-1}, the exact Hessian.
  const Matrix l_inv = llt.matrixL().solve(Matrix::Identity(d, d));
  const Matrix j_const = l_inv / std::sqrt(2.0);
  const Matrix chol_lower = llt.matrixL();

  ResidualForm form;
  form.dim = d;
  form.residual = [mean, j_const](const Vector& x) { return Vector(j_const * (x - mean)); };
  form.jacobian = [j_const](const Vector&) { return j_const; };

  auto sampler = [mean, chol_lower, d](Index count, std::mt19937_64& rng) {
    if (count < 1) throw InvalidParameter("sample count must be >= 1");
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix out(count, d);
    Vector xi(d);
    for (Index s = 0; s < count; ++s) {
      for (Index i = 0; i < d; ++i) xi(i) = normal(rng);
      out.row(s) = (mean + chol_lower * xi).transpose();
    }
    return out;
  };
  return target_from_residuals(std::move(form), sampler);
}

TargetModel make_standard_gaussian(Index dim) {
  return make_gaussian(Vector::Zero(dim), Matrix::Identity(dim, dim));
}

TargetModel make_double_banana(double y, double sigma1, double sigma2) {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
    throw InvalidParameter("double banana requires sigma1 > 0 and sigma2 > 0");
  const double c1 = 1.0 / (std::sqrt(2.0) * sigma1);
  const double c2 = 1.0 / (std::sqrt(2.0) * sigma2);

  ResidualForm form;
  form.dim = 2;
  form.residual = [y, c1, c2](const Vector& x) {
    const double g = (1.0 - x(0)) * (1.0 - x(0)) +
                     100.0 * (x(1) - x(0) * x(0)) * (x(1) - x(0) * x(0));
    Vector r(3);
    r(0) = c1 * x(0);
    r(1) = c1 * x(1);
    r(2) = c2 * (y - std::log(g));
    return r;
  };
  form.jacobian = [y, c1, c2](const Vector& x) {
    const double u = 1.0 - x(0);
    const double v = x(1) - x(0) * x(0);
    const double g = u * u + 100.0 * v * v;
    Matrix j = Matrix::Zero(3, 2);
    j(0, 0) = c1;
    j(1, 1) = c1;
    // dF/dx = grad(g)/g with F = log g.
    j(2, 0) = -c2 * (-2.0 * u - 400.0 * x(0) * v) / g;
    j(2, 1) = -c2 * (200.0 * v) / g;
    return j;
  };
  return target_from_residuals(std::move(form));
}

TargetModel make_double_banana() { return make_double_banana(std::log(30.0)); }

}  // namespace stein
