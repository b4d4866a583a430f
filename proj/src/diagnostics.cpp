#include "stein/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stein/errors.hpp"

namespace stein {

namespace {

void check_common_dim(const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols())
    throw DimensionMismatch("sample sets have dimensions " + std::to_string(x.cols()) +
                            " and " + std::to_string(y.cols()));
  if (x.rows() < 1 || y.rows() < 1)
    throw InsufficientSamples("both sample sets must be non-empty");
}

double kernel_sum(const Matrix& a, const Matrix& b, double inv_two_bw) {
  double total = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.rows(); ++j)
      total += std::exp(-(a.row(i) - b.row(j)).squaredNorm() * inv_two_bw);
  return total;
}

// Type-7 quantile (linear interpolation between order statistics).
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

double ecdf_sorted(const std::vector<double>& sorted, double value) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), value);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

}  // namespace

namespace {

// Lexicographic order on (rows, cols, entries); used to canonicalize the
// argument order so mmd(x, y) and mmd(y, x) run the identical summation.
bool canonical_less(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) return a.rows() < b.rows();
  if (a.cols() != b.cols()) return a.cols() < b.cols();
  for (Index r = 0; r < a.rows(); ++r)
    for (Index c = 0; c < a.cols(); ++c)
      if (a(r, c) != b(r, c)) return a(r, c) < b(r, c);
  return false;
}

}  // namespace

double mmd(const Matrix& x, const Matrix& y, double bandwidth) {
  check_common_dim(x, y);
  if (!(bandwidth > 0.0)) throw InvalidParameter("mmd bandwidth must be > 0");
  if (canonical_less(y, x)) return mmd(y, x, bandwidth);
  const double inv_two_bw = 1.0 / (2.0 * bandwidth);
  const double n = static_cast<double>(x.rows());
  const double m = static_cast<double>(y.rows());
  const double xx = kernel_sum(x, x, inv_two_bw) / (n * n);
  const double yy = kernel_sum(y, y, inv_two_bw) / (m * m);
  const double xy = kernel_sum(x, y, inv_two_bw) / (n * m);
  return std::max(0.0, xx + yy - 2.0 * xy);
}

double median_squared_distance(const Matrix& x, const Matrix& y) {
  check_common_dim(x, y);
  Matrix pooled(x.rows() + y.rows(), x.cols());
  pooled << x, y;
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(pooled.rows()) * (pooled.rows() - 1) / 2);
  for (Index i = 0; i < pooled.rows(); ++i)
    for (Index j = i + 1; j < pooled.rows(); ++j)
      dists.push_back((pooled.row(i) - pooled.row(j)).squaredNorm());
  if (dists.empty()) return 0.0;
  const auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  return *mid;
}

double mmd(const Matrix& x, const Matrix& y) {
  double bw = median_squared_distance(x, y);
  if (!(bw > 0.0)) bw = 1.0;
  return mmd(x, y, bw);
}

Moments ensemble_moments(const Matrix& samples) {
  if (samples.rows() < 2)
    throw InsufficientSamples("moments require at least two samples");
  Moments out;
  out.mean = samples.colwise().mean();
  out.variance =
      (samples.rowwise() - out.mean.transpose()).array().square().colwise().mean();
  return out;
}

PpCurve pp_curve(const Matrix& samples, const Matrix& truth, int num_levels) {
  check_common_dim(samples, truth);
  if (samples.rows() < 10 || truth.rows() < 10)
    throw InsufficientSamples("pp_curve requires at least 10 rows per set");
  if (num_levels < 1) throw InvalidParameter("num_levels must be >= 1");

  const Index d = samples.cols();
  PpCurve curve;
  curve.levels.resize(num_levels);
  for (int k = 0; k < num_levels; ++k)
    curve.levels(k) = (static_cast<double>(k) + 0.5) / static_cast<double>(num_levels);
  curve.q.resize(num_levels, d);

  std::vector<double> sorted_truth(static_cast<std::size_t>(truth.rows()));
  std::vector<double> sorted_samples(static_cast<std::size_t>(samples.rows()));
  for (Index i = 0; i < d; ++i) {
    for (Index r = 0; r < truth.rows(); ++r) sorted_truth[r] = truth(r, i);
    for (Index r = 0; r < samples.rows(); ++r) sorted_samples[r] = samples(r, i);
    std::sort(sorted_truth.begin(), sorted_truth.end());
    std::sort(sorted_samples.begin(), sorted_samples.end());
    for (int k = 0; k < num_levels; ++k)
      curve.q(k, i) = ecdf_sorted(sorted_samples, quantile_sorted(sorted_truth, curve.levels(k)));
  }
  return curve;
}

Matrix pool_samples(const std::vector<Ensemble>& trace, long last) {
  if (last < 1 || last > static_cast<long>(trace.size()))
    throw std::out_of_range("pool_samples: last = " + std::to_string(last) + " with " +
                            std::to_string(trace.size()) + " recorded ensembles");
  const Index n = trace.back().num_particles();
  const Index d = trace.back().dim();
  Matrix pooled(last * n, d);
  const std::size_t start = trace.size() - static_cast<std::size_t>(last);
  for (long s = 0; s < last; ++s)
    pooled.middleRows(s * n, n) = trace[start + static_cast<std::size_t>(s)].positions;
  return pooled;
}

}  // namespace stein
