#pragma once

#include "ncskit/ncsmodel.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Time-driven closed-loop simulation: time-stamped sensor packets over a
// lossy link, predictive controller emitting n_drop stamped controls per
// effective packet, an age-indexed actuator buffer, and a randomly switching
// plant. Fully deterministic given the seeds; the sensor link, control link
// and switching signal draw from three independent mt19937_64 streams split
// off the configured seed.

namespace ncskit::sim {

using densela::Matrix;
using densela::Vector;
using ncsmodel::GainSchedule;
using ncsmodel::SwitchedPlant;

struct ModelViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DropKind { Schedule, BernoulliLinks, UniformEta };

struct DropModel {
  DropKind kind = DropKind::BernoulliLinks;
  std::vector<bool> sensor_schedule;   // per-step link-ok flags (Schedule kind)
  std::vector<bool> control_schedule;
  double p_sensor_loss = 0.0;
  double p_control_loss = 0.0;
  bool enforce_bound = true;  // force an effective step before eta exceeds n_drop
  uint64_t seed = 0;
};

struct LinkOutcome {
  bool s1_ok = false;
  bool s2_ok = false;
  bool effective() const { return s1_ok && s2_ok; }
};

enum class SwitchKind { Fixed, Schedule, RandomAtEffective, RandomEveryStep };

struct SwitchSignal {
  SwitchKind kind = SwitchKind::RandomAtEffective;
  int mode_index = 1;              // Fixed kind, 1-based
  std::vector<int> schedule;       // per-step mode indices, 1-based
  int dwell_min = 1;               // minimum effective intervals between switches
  uint64_t seed = 0;
};

struct SimStep {
  int step = 0;
  double time = 0.0;
  Vector x;
  Vector u;
  int mode = 1;  // active mode this step, 1-based
  bool s1_ok = false;
  bool s2_ok = false;
  bool effective = false;
  int buffer_age = -1;  // -1 until the buffer is first filled
};

struct SimSummary {
  double settle_threshold = 0.0;
  int settled_at = -1;        // first step from which ||x|| stays below threshold
  double max_post_settle = 0.0;
};

struct SimTrace {
  std::vector<SimStep> steps;
  SimSummary summary;
};

struct SimConfig {
  SwitchedPlant plant;
  GainSchedule gains;
  Vector x0;
  int horizon = 1;
  DropModel drop;
  SwitchSignal switching;
  // defaults to 1e-3 * ||x0|| when <= 0
  double settle_threshold = 0.0;
  // Note: the model assumes the sensor-to-controller and controller-to-
  // actuator latencies fit inside one sampling period; delays are zero here.
};

// Link outcomes for the whole horizon; reproducible from the model's seed.
std::vector<LinkOutcome> generate_drop_sequence(const DropModel& model, int horizon, int n_drop);

SimTrace simulate(const SimConfig& config);

// Effective-instant subsequence and the gaps between consecutive members.
std::vector<std::pair<int, int>> effective_instants(const SimTrace& trace);

// V = Gamma^T P Gamma at each effective instant, stacking the last n_drop
// effective states (padded with x(0) before history exists).
std::vector<double> lyapunov_along_trace(const SimTrace& trace, const Matrix& p, int n_drop);

}  // namespace ncskit::sim
