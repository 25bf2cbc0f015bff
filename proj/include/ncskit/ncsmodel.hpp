#pragma once

#include "ncskit/densela.hpp"
#include "ncskit/sdp.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

// The switched-plant NCS model: discretization, the augmented closed-loop
// matrices that turn bounded packet drops into a switched linear map, and the
// LMI assemblies for common-Lyapunov verification and gain synthesis.

namespace ncskit::ncsmodel {

using densela::Matrix;
using densela::Vector;

struct PlantMode {
  Matrix f;  // n x n discrete state matrix
  Matrix g;  // n x m discrete input matrix
  std::string label;
};

struct ContinuousMode {
  Matrix a;  // n x n, 1/s
  Matrix b;  // n x m
  std::string label;
};

struct SwitchedPlant {
  std::vector<PlantMode> modes;  // r >= 1, shared (n, m)
  double sample_period = 0.0;    // h, seconds
  int n_drop = 1;                // maximum consecutive-ineffective bound

  Eigen::Index state_dim() const { return modes.front().f.rows(); }
  Eigen::Index input_dim() const { return modes.front().g.cols(); }
  Eigen::Index mode_count() const { return static_cast<Eigen::Index>(modes.size()); }
  void validate() const;
};

struct GainSchedule {
  std::vector<Matrix> gains;  // K_1..K_{n_drop}, each m x n

  void validate(const SwitchedPlant& plant) const;
};

// Phi matrices indexed by (mode l, drop count eta), each n*n_drop square.
struct AugmentedClosedLoop {
  std::map<std::pair<int, int>, Matrix> phi;  // key: (l, eta), both 1-based
};

struct StabilityCertificate {
  Matrix p;             // common Lyapunov matrix, n*n_drop square, PD
  double worst_margin;  // max eigenvalue of Phi^T P Phi - P over all pairs
  std::map<std::pair<int, int>, bool> per_pair_schur;
};

// Zero-order-hold discretization through one exponential of the augmented
// block matrix [[A, B], [0, 0]] * h.
PlantMode discretize(const ContinuousMode& mode, double h);

// F^eta + sum_{t=0}^{eta-1} F^t G K_{eta-t}
Matrix closed_loop_top_block(const PlantMode& mode, const GainSchedule& gains, int eta);

AugmentedClosedLoop build_phi(const SwitchedPlant& plant, const GainSchedule& gains);

struct VerifyFailure {
  double phase1_margin = 0.0;
};

// Common-P feasibility for fixed gains: Phi^T P Phi - P <= -eps*I for every
// (mode, drop count), P >= eps*I, solved as a phase-1 SDP in P alone.
// worst_margin is recomputed independently from the returned P.
std::optional<StabilityCertificate> verify_theorem1(const SwitchedPlant& plant,
                                                    const GainSchedule& gains,
                                                    double epsilon = 1e-6,
                                                    const sdp::SdpSettings& sdp_settings = {},
                                                    VerifyFailure* failure = nullptr);

// Decision-vector bookkeeping for the synthesis LMIs: z packs the upper
// triangles of P and Q followed by every gain entry.
struct SynthesisVariableMap {
  Eigen::Index aug_dim = 0;   // s = n * n_drop
  Eigen::Index state_dim = 0; // n
  Eigen::Index input_dim = 0; // m
  int n_drop = 1;
  Eigen::Index p_offset = 0;
  Eigen::Index q_offset = 0;
  Eigen::Index k_offset = 0;
  Eigen::Index dimension = 0;

  Matrix extract_p(const Vector& z) const;
  Matrix extract_q(const Vector& z) const;
  GainSchedule extract_gains(const Vector& z) const;
  Vector pack(const Matrix& p, const Matrix& q, const GainSchedule& gains) const;
};

struct SynthesisBlocks {
  std::vector<sdp::AffineBlock> blocks;
  SynthesisVariableMap vars;
};

// Per (l, eta): [[P, -Phi^T], [-Phi, Q]] - eps*I >= 0 (the negated strict
// inequality with margin), one [[P, I], [I, Q]] >= 0 block, and P - eps*I,
// Q - eps*I >= 0. All affine in z since Phi is affine in the gains.
SynthesisBlocks assemble_synthesis_blocks(const SwitchedPlant& plant, double epsilon = 1e-6);

double lyapunov_value(const Matrix& p, const Vector& gamma);

}  // namespace ncskit::ncsmodel
