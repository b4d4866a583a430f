#pragma once

#include <random>

#include "stein/iteration.hpp"

namespace stein {

// v(z_m) = (1/N) sum_n [ kbar_{mn} scores_n + grad_2 k(z_m, z_n) ]
FieldNd svgd_velocity(const GramBundle& gram, const FieldNd& scores);

// Deterministic step z <- z + tau v.
Ensemble svgd_step(const Ensemble& ensemble, const TargetModel& target, const KernelSpec& spec,
                   double tau);

// Stochastic step z <- z + tau v + sqrt(tau) v_stc with v_stc ~ N(0, 2K)
// built from the injected standard normals xi (N x d, dimension-major).
Ensemble svgd_step(const Ensemble& ensemble, const TargetModel& target, const KernelSpec& spec,
                   double tau, const Matrix& xi);

Ensemble svgd_step(const Ensemble& ensemble, const TargetModel& target, const KernelSpec& spec,
                   double tau, bool stochastic, std::mt19937_64& rng);

}  // namespace stein
