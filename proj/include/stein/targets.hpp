#pragma once

#include <functional>
#include <random>

#include "stein/types.hpp"

namespace stein {

// A differentiable unnormalized log-density in residual form,
//   log pi(x) = -|r(x)|^2  (up to an additive constant),
// so the Gauss-Newton curvature surrogate 2 J^T J (J = dr/dx) is available
// everywhere and is symmetric positive semidefinite by construction.
struct TargetModel {
  Index dim = 0;
  std::function<double(const Vector&)> log_density;
  std::function<Vector(const Vector&)> grad_log_density;
  std::function<Matrix(const Vector&)> gauss_newton_hessian;
  // Exact i.i.d. sampler (count x dim rows) where the target admits one;
  // empty otherwise and downstream diagnostics degrade gracefully.
  std::function<Matrix(Index, std::mt19937_64&)> ground_truth_sampler;

  bool has_ground_truth() const { return static_cast<bool>(ground_truth_sampler); }
};

// Hybrid Rosenbrock density,
//   log pi(x) = -a (x_1 - mu)^2 - sum_{j=1}^{n2} sum_{i=2}^{n1} b (x_{j,i} - x_{j,i-1}^2)^2,
// with x_{j,1} = x_1 shared across blocks and dimension (n1-1)*n2 + 1.
struct HybridRosenbrockParams {
  int n1 = 2;      // block length, >= 2
  int n2 = 1;      // block count, >= 1
  double a = 1.0;  // precision of the first coordinate, > 0
  double b = 1.0;  // precision of the recursive terms, > 0
  double mu = 1.0; // location of the first coordinate
};

int hybrid_rosenbrock_dim(int n1, int n2);

TargetModel make_hybrid_rosenbrock(const HybridRosenbrockParams& params);

// i.i.d. draws from the normalized Hybrid Rosenbrock density:
// x_1 ~ N(mu, 1/(2a)); within each block, x_{j,i} ~ N(x_{j,i-1}^2, 1/(2b)).
Matrix sample_hybrid_rosenbrock(const HybridRosenbrockParams& params, Index count,
                                std::mt19937_64& rng);

TargetModel make_gaussian(const Vector& mean, const Matrix& covariance);
TargetModel make_standard_gaussian(Index dim);

// Two-dimensional double-banana posterior: standard Gaussian prior of scale
// sigma1 and a scalar log-Rosenbrock observation
//   F(x) = log((1 - x1)^2 + 100 (x2 - x1^2)^2)
// observed as y with noise scale sigma2. No closed-form sampler.
TargetModel make_double_banana(double y, double sigma1 = 1.0, double sigma2 = 0.3);
TargetModel make_double_banana();  // y = log(30)

}  // namespace stein
