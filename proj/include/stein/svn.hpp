#pragma once

#include <random>
#include <vector>

#include "stein/iteration.hpp"
#include "stein/svgd.hpp"

namespace stein {

// Dense Newton system over configuration space, blocks in particle-major
// layout: block (m, n) of H is
//   h^{mn} = (1/N) sum_p [ kbar_{pm} kbar_{pn} C_p
//                          + grad_1 k(z_p, z_n) grad_1 k(z_p, z_m)^T ],
// where C_p is the negated log-density Hessian of particle p (the
// Gauss-Newton surrogate 2 J^T J in use_gauss_newton mode — callers pass the
// already-negated curvature, never the raw Hessian). With h2_block_diagonal
// the second term is kept only on the diagonal blocks, which makes it
// positive semidefinite.
struct SvnFlags {
  bool use_gauss_newton = true;
  bool h2_block_diagonal = true;
};

struct SvnSystem {
  Matrix hessian;  // Nd x Nd, possibly damped (see damp_hessian)
  double lambda = 0.0;
  SvnFlags flags;
  Index num_particles = 0;
  Index dim = 0;
  Matrix chol_lower;  // lower factor of the damped Hessian; empty until damped
  double chol_jitter = 0.0;

  bool factored() const { return chol_lower.size() > 0; }
};

SvnSystem assemble_svn_hessian(const GramBundle& gram, const std::vector<Matrix>& curvature,
                               SvnFlags flags = {});

// H_lambda = H + lambda N K, added blockwise as lambda kbar_{mn} I_d, then
// factored (jitter ladder scaled by the largest diagonal entry).
SvnSystem damp_hessian(SvnSystem system, const GramBundle& gram, double lambda);

// Solves H_lambda alpha = v_svgd through the cached factor and steps
//   z <- z + tau N K alpha [+ sqrt(tau) v_stc],
// v_stc = sqrt(2N) K L_{H_lambda}^{-T} xi ~ N(0, 2N K H_lambda^{-1} K).
Ensemble ssvn_step_cholesky(const Ensemble& ensemble, const TargetModel& target,
                            const KernelSpec& spec, double tau, double lambda);
Ensemble ssvn_step_cholesky(const Ensemble& ensemble, const TargetModel& target,
                            const KernelSpec& spec, double tau, double lambda,
                            const Vector& xi);
Ensemble ssvn_step_cholesky(const Ensemble& ensemble, const TargetModel& target,
                            const KernelSpec& spec, double tau, double lambda, bool stochastic,
                            std::mt19937_64& rng);

// Test-time oracle for the deterministic correction
//   v_det_a = N K_{bc} grad_c (K H_lambda^{-1})_{ab},
// with the configuration-space derivative taken by central differences of
// the dense matrix product. Metric and damping are frozen at the base
// ensemble. Dense assembly only; requires N d <= 64.
FieldNd v_det_finite_difference(const Ensemble& ensemble, const TargetModel& target,
                                const KernelSpec& spec, double lambda, double fd_step);

// Deterministic block-diagonal mode: solves the N independent d x d systems
// h^{mm} alpha_m = v_m and steps z_m <- z_m + tau alpha_m (alpha is the
// direction itself here, not N K alpha).
Ensemble svn_block_diagonal_step(const Ensemble& ensemble, const TargetModel& target,
                                 const KernelSpec& spec, double tau);

}  // namespace stein
