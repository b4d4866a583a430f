#pragma once

#include <random>

#include "stein/kernels.hpp"
#include "stein/types.hpp"

namespace stein {

// Configuration-space algebra over X = R^{Nd}. The diffusion matrix
// K = (1/N) [kbar_{mn} I_d] is never materialized: its action, its
// block-diagonal conjugation P K P^T = D_K, and the N(0, 2K) draw all work
// through the N x N gram matrix.

// (K v)_{m,i} = (1/N) sum_n kbar_{mn} v_{n,i}
FieldNd apply_K(const GramBundle& gram, const FieldNd& field);

enum class BasisDirection { particle_to_dimension, dimension_to_particle };

// Applies the basis permutation P (particle-major -> dimension-major) or its
// transpose to the field read as a particle-major vector. Pure index
// reshuffle; round-tripping the output through the other direction restores
// the original layout.
Vector permute_basis(const FieldNd& field, BasisDirection direction);

// Draw ~ N(0, K) as P^T L_{D_K} xi: column i of xi is the i-th dimension
// block of xi in the permuted basis, so the draw costs one N x N Cholesky
// plus O(N^2 d).
FieldNd gram_noise(const GramBundle& gram, const Matrix& xi);
FieldNd gram_noise(const GramBundle& gram, std::mt19937_64& rng);

// v_stc ~ N(0, 2K) = sqrt(2) P^T L_{D_K} xi; the sqrt(tau) step scaling is
// applied by the steppers.
FieldNd ssvgd_noise(const GramBundle& gram, const Matrix& xi);
FieldNd ssvgd_noise(const GramBundle& gram, std::mt19937_64& rng);

}  // namespace stein
