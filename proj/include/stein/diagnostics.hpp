#pragma once

#include <vector>

#include "stein/types.hpp"

namespace stein {

// Biased (V-statistic) squared maximum mean discrepancy with the isotropic
// squared-exponential kernel k(x, y) = exp(-|x - y|^2 / (2 bandwidth)).
double mmd(const Matrix& x, const Matrix& y, double bandwidth);

// Median-heuristic variant: bandwidth = median pairwise squared distance of
// the pooled set (falls back to 1 when the pooled points coincide).
double mmd(const Matrix& x, const Matrix& y);

double median_squared_distance(const Matrix& x, const Matrix& y);

struct Moments {
  Vector mean;
  Vector variance;  // population (1/n) convention
};

Moments ensemble_moments(const Matrix& samples);

// Probability-probability data per dimension: q(row k, dim i) is the
// empirical CDF of the samples' dimension i at the truth's levels(k)
// quantile. Perfect agreement gives q = p.
struct PpCurve {
  Vector levels;  // evenly spaced in (0,1)
  Matrix q;       // levels.size() x d
};

PpCurve pp_curve(const Matrix& samples, const Matrix& truth, int num_levels = 100);

// Per-iteration first and second moment records of a run.
struct MomentTrace {
  std::vector<long> iterations;
  std::vector<Vector> means;
  std::vector<Vector> variances;
};

// Row-wise concatenation of the last `last` recorded ensembles; no
// decorrelation is applied.
Matrix pool_samples(const std::vector<Ensemble>& trace, long last);

}  // namespace stein
