#pragma once

#include <cstdint>
#include <random>

#include "stein/types.hpp"

namespace stein {

// SplitMix64 finalizer. Used to derive decorrelated substream seeds from a
// single root seed so that draws depend only on (root, purpose, counter),
// never on how many draws earlier iterations consumed.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

enum class Purpose : std::uint64_t {
  init = 1,
  svgd_noise = 2,
  svn_noise = 3,
  ground_truth = 4,
};

inline std::uint64_t substream_seed(std::uint64_t root, Purpose purpose, std::uint64_t counter) {
  return mix64(mix64(mix64(root) ^ static_cast<std::uint64_t>(purpose)) ^ counter);
}

inline std::mt19937_64 make_substream(std::uint64_t root, Purpose purpose, std::uint64_t counter) {
  return std::mt19937_64(substream_seed(root, purpose, counter));
}

// Standard normals filled row by row (particle-major order).
inline Matrix normal_matrix_rowmajor(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) out(r, c) = normal(rng);
  return out;
}

// Standard normals filled column by column (dimension-major order); this is
// the draw order consumed by the gram-factor noise.
inline Matrix normal_matrix_colmajor(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) out(r, c) = normal(rng);
  return out;
}

inline Vector normal_vector(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector out(n);
  for (Index i = 0; i < n; ++i) out(i) = normal(rng);
  return out;
}

}  // namespace stein
