#include <doctest.h>

#include "ncskit/cclsynth.hpp"
#include "ncskit/demo_dc_motor.hpp"

#include <cmath>

using namespace ncskit;
using cclsynth::CclResult;
using cclsynth::CclSettings;
using cclsynth::CclStatus;
using densela::Matrix;
using ncsmodel::GainSchedule;
using ncsmodel::SwitchedPlant;

namespace {

SwitchedPlant scalar_plant(double f, double g, int n_drop) {
  SwitchedPlant p;
  p.modes = {{densela::make_matrix({{f}}), densela::make_matrix({{g}}), "scalar"}};
  p.sample_period = 1.0;
  p.n_drop = n_drop;
  return p;
}

SwitchedPlant demo_plant(double h) {
  auto model = demo::dc_motor_model();
  model.sample_period = h;
  return model.to_plant();
}

void check_stabilized(const SwitchedPlant& plant, const CclResult& result,
                      const CclSettings& settings) {
  REQUIRE(result.status == CclStatus::Stabilized);
  REQUIRE(result.certificate.has_value());
  CHECK(result.certificate->worst_margin < 0.0);
  CHECK(static_cast<int>(result.history.size()) <= settings.max_iterations + 1);

  // idempotent certification: re-verify the gains from scratch
  auto cert = ncsmodel::verify_theorem1(plant, result.gains, settings.epsilon, settings.sdp);
  CHECK(cert.has_value());

  // every closed-loop matrix is Schur stable, decided independently
  auto aug = ncsmodel::build_phi(plant, result.gains);
  for (const auto& [key, phi] : aug.phi) CHECK(densela::is_schur_stable(phi));

  // objective lower bound at PSD-feasible iterates
  const double bound = 2.0 * static_cast<double>(plant.state_dim()) * plant.n_drop -
                       10.0 * settings.trace_tol;
  for (const auto& rec : result.history) CHECK(rec.objective >= bound);

  // weak trend: final inverse gap no worse than the initial one
  CHECK(result.history.back().inverse_gap <= result.history.front().inverse_gap + 1e-9);
}

}  // namespace

TEST_CASE("ccl_initialize succeeds on a trivially stabilizable plant") {
  auto plant = scalar_plant(0.5, 1.0, 1);
  CclSettings settings;
  double margin = 0.0;
  auto init = cclsynth::ccl_initialize(plant, settings, &margin);
  REQUIRE(init.has_value());
  CHECK(margin > 0.0);
  CHECK(init->p(0, 0) > 0.0);
  CHECK(init->q(0, 0) > 0.0);
}

TEST_CASE("ccl_initialize fails for the uncontrollable unstable scalar") {
  auto plant = scalar_plant(2.0, 0.0, 1);
  double margin = 0.0;
  auto init = cclsynth::ccl_initialize(plant, CclSettings{}, &margin);
  CHECK_FALSE(init.has_value());
  CHECK(margin <= 0.0);
}

TEST_CASE("ccl_synthesize: already-stable scalar plant certifies immediately") {
  auto plant = scalar_plant(0.5, 1.0, 1);
  CclSettings settings;
  auto result = cclsynth::ccl_synthesize(plant, settings);
  REQUIRE(result.status == CclStatus::Stabilized);
  CHECK(result.history.size() <= 2);  // iteration 0 or 1
  check_stabilized(plant, result, settings);
}

TEST_CASE("ccl_synthesize: unstabilizable plant reports InitializationFailed") {
  auto plant = scalar_plant(2.0, 0.0, 1);
  auto result = cclsynth::ccl_synthesize(plant, CclSettings{});
  CHECK(result.status == CclStatus::InitializationFailed);
  CHECK(result.phase1_margin <= 0.0);
}

TEST_CASE("ccl_synthesize stabilizes the demo at h = 0.1") {
  auto plant = demo_plant(0.1);
  CclSettings settings;
  auto result = cclsynth::ccl_synthesize(plant, settings);
  check_stabilized(plant, result, settings);
}

TEST_CASE("ccl_synthesize stabilizes the demo at h = 0.2 with distinct gains") {
  CclSettings settings;
  auto r1 = cclsynth::ccl_synthesize(demo_plant(0.1), settings);
  auto r2 = cclsynth::ccl_synthesize(demo_plant(0.2), settings);
  check_stabilized(demo_plant(0.2), r2, settings);
  REQUIRE(r1.status == CclStatus::Stabilized);
  REQUIRE(r2.status == CclStatus::Stabilized);
  CHECK((r1.gains.gains[0] - r2.gains.gains[0]).cwiseAbs().maxCoeff() > 1e-6);
}
