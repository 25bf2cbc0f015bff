#pragma once

#include "ncskit/densela.hpp"

#include <optional>
#include <string>
#include <vector>

// Small-scale semidefinite programming: minimize a linear objective subject
// to block-affine PSD constraints
//
//   min  c^T z   s.t.   f0_j + sum_i z_i * coeff_{j,i}  >= 0   for each block j
//
// solved by a log-det barrier interior-point method with an infeasible-start
// phase 1 (uniform-margin maximization). Sized for d up to ~100 decision
// variables and blocks up to ~40, which covers every LMI this toolkit builds.

namespace ncskit::sdp {

using densela::Matrix;
using densela::Vector;

struct AffineBlock {
  Matrix f0;                  // s x s symmetric constant term
  std::vector<Matrix> coeffs; // one s x s symmetric matrix per decision variable

  Eigen::Index size() const { return f0.rows(); }
  // f0 + sum_i z_i coeffs_i
  Matrix evaluate(const Vector& z) const;
  void validate(Eigen::Index dimension) const;
};

struct SdpProblem {
  Eigen::Index dimension = 0;
  Vector objective;
  std::vector<AffineBlock> blocks;

  void validate() const;
};

enum class SdpStatus { Optimal, Feasible, Infeasible, IterationLimit, NumericalFailure };

std::string to_string(SdpStatus s);

struct SdpSolution {
  SdpStatus status = SdpStatus::NumericalFailure;
  Vector z;
  double objective_value = 0.0;
  double min_block_margin = 0.0; // smallest eigenvalue over all blocks at z
  int iterations = 0;            // total Newton iterations
  std::vector<double> objective_history; // objective after each centering round
};

struct SdpSettings {
  double feas_tol = 1e-8;
  double gap_tol = 1e-7;
  int max_iterations = 200;
  double initial_margin = 1.0; // phase-1 margin cap
  // Internal box |z_i| <= variable_bound keeps barrier subproblems bounded on
  // problems with unbounded feasible sets (common for Lyapunov LMIs, which are
  // scale invariant). Large enough to never bind at desk scale.
  double variable_bound = 1e6;
};

// Smallest eigenvalue over all blocks evaluated at z.
double min_margin(const std::vector<AffineBlock>& blocks, const Vector& z);

// Phase 1: maximize t subject to f_j(z) >= t*I on every block, t capped at
// settings.initial_margin. Margin > 0 certifies strict feasibility.
struct Phase1Result {
  Vector z;
  double margin = 0.0;
  SdpStatus status = SdpStatus::NumericalFailure;
  int iterations = 0;
};

Phase1Result sdp_phase1(const std::vector<AffineBlock>& blocks, Eigen::Index dimension,
                        const SdpSettings& settings = {});

// Full solve. Runs phase 1 internally when no strictly feasible start is
// supplied; `start` (when given) must make every block PD.
SdpSolution sdp_solve(const SdpProblem& problem, const SdpSettings& settings = {},
                      const std::optional<Vector>& start = std::nullopt);

}  // namespace ncskit::sdp
