#include "stein/config_space.hpp"

#include <cmath>
#include <string>

#include "stein/errors.hpp"
#include "stein/rng.hpp"

namespace stein {

FieldNd apply_K(const GramBundle& gram, const FieldNd& field) {
  const Index n = gram.num_particles();
  if (field.rows() != n)
    throw DimensionMismatch("field has " + std::to_string(field.rows()) +
                            " rows, gram expects " + std::to_string(n));
  return (gram.kbar * field) / static_cast<double>(n);
}

Vector permute_basis(const FieldNd& field, BasisDirection direction) {
  const Index n = field.rows(), d = field.cols();
  Vector out(n * d);
  if (direction == BasisDirection::particle_to_dimension) {
    // out[i*N + m] = field(m, i): apply P to the particle-major vector.
    for (Index i = 0; i < d; ++i)
      for (Index m = 0; m < n; ++m) out(i * n + m) = field(m, i);
  } else {
    // out[m*d + i] = v[i*N + m] with v the particle-major read of field:
    // apply P^T.
    for (Index m = 0; m < n; ++m)
      for (Index i = 0; i < d; ++i) {
        const Index flat = i * n + m;
        out(m * d + i) = field(flat / d, flat % d);
      }
  }
  return out;
}

FieldNd gram_noise(const GramBundle& gram, const Matrix& xi) {
  const Index n = gram.num_particles(), d = gram.dim();
  if (xi.rows() != n || xi.cols() != d)
    throw DimensionMismatch("noise input must be N x d standard normals");
  // L_{D_K} is d copies of L_kbar / sqrt(N) on the diagonal of the permuted
  // basis; applying P^T afterwards is the row-per-particle layout itself.
  return (gram.chol_lower() * xi) / std::sqrt(static_cast<double>(n));
}

FieldNd gram_noise(const GramBundle& gram, std::mt19937_64& rng) {
  return gram_noise(gram, normal_matrix_colmajor(rng, gram.num_particles(), gram.dim()));
}

FieldNd ssvgd_noise(const GramBundle& gram, const Matrix& xi) {
  return std::sqrt(2.0) * gram_noise(gram, xi);
}

FieldNd ssvgd_noise(const GramBundle& gram, std::mt19937_64& rng) {
  return std::sqrt(2.0) * gram_noise(gram, rng);
}

}  // namespace stein
