// Test-side oracles, independent of the library's computational paths:
// dense configuration-space matrices, finite differences, brute-force
// summations, and sampling statistics.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "stein/kernels.hpp"
#include "stein/types.hpp"

namespace oracles {

using stein::Index;
using stein::Matrix;
using stein::Vector;

// Central finite differences with per-coordinate step h_i = step*(1+|x_i|).
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                          double step = 1e-5) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double h = step * (1.0 + std::abs(x(i)));
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline double rel_error(const Vector& approx, const Vector& exact) {
  const double scale = std::max(1.0, exact.norm());
  return (approx - exact).norm() / scale;
}

// Dense diffusion matrix of the ensemble kernel: Nd x Nd particle-major,
// K[(m,i),(n,j)] = kbar(m,n) delta_ij / N.
inline Matrix dense_K(const Matrix& kbar, Index d) {
  const Index n = kbar.rows();
  Matrix k = Matrix::Zero(n * d, n * d);
  for (Index m = 0; m < n; ++m)
    for (Index p = 0; p < n; ++p)
      for (Index i = 0; i < d; ++i) k(m * d + i, p * d + i) = kbar(m, p) / double(n);
  return k;
}

// Permutation matrix P taking particle-major vectors to dimension-major:
// (Pv)[i*N + m] = v[m*d + i].
inline Matrix dense_P(Index n, Index d) {
  Matrix p = Matrix::Zero(n * d, n * d);
  for (Index m = 0; m < n; ++m)
    for (Index i = 0; i < d; ++i) p(i * n + m, m * d + i) = 1.0;
  return p;
}

// Block-diagonal D_K: d copies of kbar/N.
inline Matrix dense_DK(const Matrix& kbar, Index d) {
  const Index n = kbar.rows();
  Matrix dk = Matrix::Zero(n * d, n * d);
  for (Index i = 0; i < d; ++i) dk.block(i * n, i * n, n, n) = kbar / double(n);
  return dk;
}

// Brute-force dense Newton system from fresh kernel evaluations; block (m,n)
// is (1/N) sum_p [ k(z_p,z_m) k(z_p,z_n) C_p + grad1k(z_p,z_n) grad1k(z_p,z_m)^T ],
// with the second term restricted to m == n when h2_block_diagonal.
inline Matrix brute_force_svn_hessian(const stein::KernelSpec& spec, const Matrix& positions,
                                      const std::vector<Matrix>& curvature,
                                      bool h2_block_diagonal) {
  const Index n = positions.rows(), d = positions.cols();
  Matrix h = Matrix::Zero(n * d, n * d);
  for (Index m = 0; m < n; ++m) {
    for (Index q = 0; q < n; ++q) {
      Matrix block = Matrix::Zero(d, d);
      for (Index p = 0; p < n; ++p) {
        const Vector zp = positions.row(p).transpose();
        const Vector zm = positions.row(m).transpose();
        const Vector zq = positions.row(q).transpose();
        block += stein::kernel_eval(spec, zp, zm) * stein::kernel_eval(spec, zp, zq) *
                 curvature[p];
        if (!h2_block_diagonal || m == q)
          block += stein::kernel_grad1(spec, zp, zq) *
                   stein::kernel_grad1(spec, zp, zm).transpose();
      }
      h.block(m * d, q * d, d, d) = block / double(n);
    }
  }
  return h;
}

// Empirical covariance (zero-mean convention not assumed).
inline Matrix covariance(const Matrix& draws) {
  const Vector mean = draws.colwise().mean();
  const Matrix centered = draws.rowwise() - mean.transpose();
  return (centered.transpose() * centered) / double(draws.rows());
}

// Standard error of the (a,b) sample-covariance entry for Gaussian draws.
inline Matrix covariance_se(const Matrix& truth, Index num_draws) {
  Matrix se(truth.rows(), truth.cols());
  for (Index a = 0; a < truth.rows(); ++a)
    for (Index b = 0; b < truth.cols(); ++b)
      se(a, b) = std::sqrt((truth(a, a) * truth(b, b) + truth(a, b) * truth(a, b)) /
                           double(num_draws));
  return se;
}

inline bool within_se(const Matrix& estimate, const Matrix& truth, Index num_draws,
                      double num_se, double* worst = nullptr) {
  const Matrix se = covariance_se(truth, num_draws);
  double w = 0.0;
  for (Index a = 0; a < truth.rows(); ++a)
    for (Index b = 0; b < truth.cols(); ++b)
      w = std::max(w, std::abs(estimate(a, b) - truth(a, b)) / se(a, b));
  if (worst) *worst = w;
  return w <= num_se;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Asymptotic Kolmogorov distribution complement Q(t) = P(sup > t).
inline double kolmogorov_q(double t) {
  if (t <= 0.0) return 1.0;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k)
    q += 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * t * t);
  return std::clamp(q, 0.0, 1.0);
}

// One-sample KS p-value against a continuous CDF (Stephens' small-sample
// correction).
inline double ks_test_pvalue(std::vector<double> values,
                             const std::function<double(double)>& cdf) {
  std::sort(values.begin(), values.end());
  const double n = double(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    d = std::max(d, std::abs(f - double(i) / n));
    d = std::max(d, std::abs(double(i + 1) / n - f));
  }
  return kolmogorov_q((std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d);
}

// Integrated autocorrelation time by Geyer's initial positive sequence;
// series shorter than a few correlation times will report a noisy value.
inline double integrated_autocorr_time(const Vector& series) {
  const Index n = series.size();
  const double mean = series.mean();
  const Vector centered = series.array() - mean;
  const double var = centered.squaredNorm() / double(n);
  if (var <= 0.0) return 1.0;
  auto autocov = [&](Index lag) {
    return centered.head(n - lag).dot(centered.tail(n - lag)) / double(n);
  };
  double tau = 1.0;
  for (Index lag = 1; lag + 1 < n; lag += 2) {
    const double pair = (autocov(lag) + autocov(lag + 1)) / var;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return std::max(1.0, tau);
}

// Monte Carlo standard error of the series mean, accounting for
// autocorrelation.
inline double mcse_mean(const Vector& series) {
  const double mean = series.mean();
  const double sd = std::sqrt((series.array() - mean).square().mean());
  return sd * std::sqrt(integrated_autocorr_time(series) / double(series.size()));
}

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double low,
                            double high) {
  std::uniform_real_distribution<double> uniform(low, high);
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = uniform(rng);
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, Index n, double low, double high) {
  return random_matrix(rng, n, 1, low, high).col(0);
}

}  // namespace oracles
