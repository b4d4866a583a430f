#pragma once

#include <Eigen/Dense>

namespace stein {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// N particle positions in d dimensions; row m is particle z_m.
struct Ensemble {
  Matrix positions;
  long iteration = 0;

  Index num_particles() const { return positions.rows(); }
  Index dim() const { return positions.cols(); }
};

// Fields over the ensemble (scores, velocities, noise) are N x d arrays
// read as vectors in R^{Nd} in particle-major order: coordinate i of
// particle m sits at flat index m*d + i.
using FieldNd = Matrix;

inline Vector flatten_particle_major(const Matrix& field) {
  const Index n = field.rows(), d = field.cols();
  Vector flat(n * d);
  for (Index m = 0; m < n; ++m) flat.segment(m * d, d) = field.row(m).transpose();
  return flat;
}

inline Matrix unflatten_particle_major(const Vector& flat, Index n, Index d) {
  Matrix field(n, d);
  for (Index m = 0; m < n; ++m) field.row(m) = flat.segment(m * d, d).transpose();
  return field;
}

inline double dot_field(const FieldNd& a, const FieldNd& b) {
  return (a.array() * b.array()).sum();
}

inline double norm_field(const FieldNd& a) { return a.norm(); }

}  // namespace stein
