#pragma once

#include "ncskit/ncsmodel.hpp"
#include "ncskit/sdp.hpp"

#include <optional>
#include <string>
#include <vector>

// Cone-complementarity linearization: the non-strict problem (coupled LMIs
// plus PQ = I) becomes a sequence of SDPs minimizing the linearized trace
// surrogate trace(P*Q_k + P_k*Q). Each iterate's gains are checked against
// the common-Lyapunov condition; the first certified iterate wins.

namespace ncskit::cclsynth {

using densela::Matrix;
using densela::Vector;
using ncsmodel::GainSchedule;
using ncsmodel::StabilityCertificate;
using ncsmodel::SwitchedPlant;

struct CclSettings {
  int max_iterations = 30;    // N
  double trace_tol = 1e-4;    // stopping tolerance on |trace - 2*n*n_drop|
  double epsilon = 1e-6;      // LMI strictness margin
  sdp::SdpSettings sdp;

  CclSettings() { sdp.max_iterations = 400; }
};

enum class CclStatus { Stabilized, TraceConvergedUnverified, IterationLimit, InitializationFailed };

std::string to_string(CclStatus s);

struct CclIterationRecord {
  int iteration = 0;
  double objective = 0.0;    // trace(P*Q_k + P_k*Q)
  double inverse_gap = 0.0;  // ||P*Q - I||_F
  bool verified = false;
};

struct CclResult {
  CclStatus status = CclStatus::InitializationFailed;
  GainSchedule gains;
  Matrix p;
  Matrix q;
  std::optional<StabilityCertificate> certificate;  // present iff Stabilized
  std::vector<CclIterationRecord> history;
  double phase1_margin = 0.0;  // filled on InitializationFailed
};

struct CclInit {
  Matrix p;
  Matrix q;
  GainSchedule gains;
  Vector z;
};

// Phase-1 feasibility over the assembled synthesis blocks; succeeds iff the
// achieved uniform margin is strictly positive.
std::optional<CclInit> ccl_initialize(const SwitchedPlant& plant, const CclSettings& settings,
                                      double* achieved_margin = nullptr);

CclResult ccl_synthesize(const SwitchedPlant& plant, const CclSettings& settings = {});

}  // namespace ncskit::cclsynth
