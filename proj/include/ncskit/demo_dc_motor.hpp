#pragma once

#include "ncskit/model_io.hpp"
#include "ncskit/ncsmodel.hpp"

// Built-in demo: a DC motor whose moment of inertia jumps among three values,
// controlled over a lossy network with up to two consecutive drops (n_drop=3).
// Reference discretizations, eigenvalues and gain schedules are kept as
// fixtures for the verification tests and the demo report; synthesized gains
// are not expected to match the fixtures (the feasible set is a continuum).
//
// Physical-parameter note: the headline parameter table for this plant
// (J in {0.03, 0.02, 0.01} kg m^2, L = 0.5 H, R = 2 ohm, Km = Kb = 0.15,
// damping 0.2) does not reproduce the continuous-time matrices below (e.g.
// Kb/L = 0.3, not 0.03; Km/J = 5, not 0.5), and a "nominal inertia 0.2" is
// quoted elsewhere. The matrices are taken as authoritative: they do
// reproduce the reference discretization and eigenvalues under zero-order
// hold, so the demo is built on them rather than on guessed parameters.

namespace ncskit::demo {

using densela::Matrix;

// State: [armature current, rotor speed]; input: armature voltage.
model_io::ModelFile dc_motor_model();

inline constexpr int kNDrop = 3;
inline constexpr double kSamplePeriods[] = {0.1, 0.2};

Eigen::Vector2d initial_state();  // [-3, 2]

// Reference (F_l, G_l) at h = 0.1 and the matching F_l eigenvalues.
struct ReferenceDiscretization {
  Matrix f;
  Matrix g;
  double eig1;
  double eig2;
};
std::vector<ReferenceDiscretization> reference_discretization_h01();

// Reference stabilizing gain schedules for h = 0.1 and h = 0.2.
ncsmodel::GainSchedule reference_gains_h01();
ncsmodel::GainSchedule reference_gains_h02();

}  // namespace ncskit::demo
