#include "ncskit/sim.hpp"

#include <cmath>
#include <random>

namespace ncskit::sim {

namespace {

// splitmix64 step, used only to decorrelate the per-stream seeds
uint64_t mix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seedable, portable stream: mt19937_64 output is pinned by the standard, and
// the mappings below avoid std::uniform_* distributions, whose sequences are
// implementation defined.
class Stream {
 public:
  Stream(uint64_t seed, uint64_t stream_id) : engine_(mix(seed ^ mix(stream_id))) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform01() < p; }
  // uniform over {0, ..., k-1}; modulo bias is irrelevant at these tiny k
  int uniform_int(int k) { return static_cast<int>(engine_() % static_cast<uint64_t>(k)); }

 private:
  std::mt19937_64 engine_;
};

constexpr uint64_t kSensorStream = 1;
constexpr uint64_t kControlStream = 2;
constexpr uint64_t kSwitchStream = 3;

}  // namespace

std::vector<LinkOutcome> generate_drop_sequence(const DropModel& model, int horizon, int n_drop) {
  if (horizon < 1) throw densela::DimensionMismatch("generate_drop_sequence: horizon < 1");
  if (n_drop < 1) throw densela::DimensionMismatch("generate_drop_sequence: n_drop < 1");
  if (model.p_sensor_loss < 0.0 || model.p_sensor_loss > 1.0 || model.p_control_loss < 0.0 ||
      model.p_control_loss > 1.0)
    throw densela::DimensionMismatch("DropModel: loss probability outside [0,1]");

  std::vector<LinkOutcome> out(static_cast<size_t>(horizon));
  switch (model.kind) {
    case DropKind::Schedule: {
      if (static_cast<int>(model.sensor_schedule.size()) < horizon ||
          static_cast<int>(model.control_schedule.size()) < horizon)
        throw densela::DimensionMismatch("DropModel: schedule shorter than horizon");
      for (int k = 0; k < horizon; ++k) {
        out[static_cast<size_t>(k)].s1_ok = model.sensor_schedule[static_cast<size_t>(k)];
        out[static_cast<size_t>(k)].s2_ok = model.control_schedule[static_cast<size_t>(k)];
      }
      break;
    }
    case DropKind::BernoulliLinks: {
      Stream s1(model.seed, kSensorStream);
      Stream s2(model.seed, kControlStream);
      int consecutive_ineffective = 0;
      for (int k = 0; k < horizon; ++k) {
        bool ok1 = !s1.bernoulli(model.p_sensor_loss);
        bool ok2 = !s2.bernoulli(model.p_control_loss);
        if (model.enforce_bound && consecutive_ineffective >= n_drop - 1) {
          ok1 = true;
          ok2 = true;
        }
        out[static_cast<size_t>(k)] = {ok1, ok2};
        consecutive_ineffective = (ok1 && ok2) ? 0 : consecutive_ineffective + 1;
      }
      break;
    }
    case DropKind::UniformEta: {
      // effective instants at cumulative eta sums, eta ~ uniform{1..n_drop}
      Stream s1(model.seed, kSensorStream);
      int next_effective = 0;
      for (int k = 0; k < horizon; ++k) {
        const bool eff = (k == next_effective);
        if (eff) next_effective = k + 1 + s1.uniform_int(n_drop);
        out[static_cast<size_t>(k)] = {eff, eff};
      }
      break;
    }
  }
  return out;
}

SimTrace simulate(const SimConfig& config) {
  config.plant.validate();
  config.gains.validate(config.plant);
  const Eigen::Index n = config.plant.state_dim();
  const Eigen::Index m = config.plant.input_dim();
  const int r = static_cast<int>(config.plant.mode_count());
  if (config.x0.size() != n) throw densela::DimensionMismatch("SimConfig: x0 length differs from n");
  if (config.horizon < 1) throw densela::DimensionMismatch("SimConfig: horizon < 1");
  if (config.switching.kind == SwitchKind::Fixed &&
      (config.switching.mode_index < 1 || config.switching.mode_index > r))
    throw densela::DimensionMismatch("SwitchSignal: mode index out of range");
  if (config.switching.kind == SwitchKind::Schedule) {
    if (static_cast<int>(config.switching.schedule.size()) < config.horizon)
      throw densela::DimensionMismatch("SwitchSignal: schedule shorter than horizon");
    for (int v : config.switching.schedule)
      if (v < 1 || v > r) throw densela::DimensionMismatch("SwitchSignal: mode index out of range");
  }

  const auto outcomes = generate_drop_sequence(config.drop, config.horizon, config.plant.n_drop);
  Stream switch_rng(config.switching.seed, kSwitchStream);

  double threshold = config.settle_threshold;
  if (threshold <= 0.0) threshold = 1e-3 * config.x0.norm();

  int mode = 1;
  switch (config.switching.kind) {
    case SwitchKind::Fixed: mode = config.switching.mode_index; break;
    case SwitchKind::Schedule: mode = config.switching.schedule[0]; break;
    case SwitchKind::RandomAtEffective:
    case SwitchKind::RandomEveryStep: mode = 1 + switch_rng.uniform_int(r); break;
  }
  int intervals_since_switch = 0;

  Vector x = config.x0;
  Vector stamp_state = Vector::Zero(n);
  int buffer_age = -1;  // -1: never filled

  SimTrace trace;
  trace.steps.reserve(static_cast<size_t>(config.horizon));

  for (int k = 0; k < config.horizon; ++k) {
    const LinkOutcome lk = outcomes[static_cast<size_t>(k)];
    const bool effective = lk.effective();

    switch (config.switching.kind) {
      case SwitchKind::Fixed: break;
      case SwitchKind::Schedule: mode = config.switching.schedule[static_cast<size_t>(k)]; break;
      case SwitchKind::RandomAtEffective:
        // mode is constant over each inter-effective interval; redraw at the
        // effective instant once the dwell requirement is met
        if (effective && k > 0) {
          ++intervals_since_switch;
          if (intervals_since_switch >= config.switching.dwell_min) {
            mode = 1 + switch_rng.uniform_int(r);
            intervals_since_switch = 0;
          }
        }
        break;
      case SwitchKind::RandomEveryStep:
        if (k > 0) mode = 1 + switch_rng.uniform_int(r);
        break;
    }

    if (effective) {
      stamp_state = x;
      buffer_age = 0;
    } else if (buffer_age >= 0) {
      ++buffer_age;
    }

    Vector u = Vector::Zero(m);
    if (buffer_age >= 0) {
      if (buffer_age >= config.plant.n_drop)
        throw ModelViolation("buffer age reached n_drop: consecutive-drop bound violated");
      u = config.gains.gains[static_cast<size_t>(buffer_age)] * stamp_state;
    }

    SimStep step;
    step.step = k;
    step.time = k * config.plant.sample_period;
    step.x = x;
    step.u = u;
    step.mode = mode;
    step.s1_ok = lk.s1_ok;
    step.s2_ok = lk.s2_ok;
    step.effective = effective;
    step.buffer_age = buffer_age;
    trace.steps.push_back(std::move(step));

    const auto& pm = config.plant.modes[static_cast<size_t>(mode - 1)];
    x = pm.f * x + pm.g * u;
  }

  trace.summary.settle_threshold = threshold;
  trace.summary.settled_at = -1;
  trace.summary.max_post_settle = 0.0;
  int settled = -1;
  for (int k = config.horizon - 1; k >= 0; --k) {
    if (trace.steps[static_cast<size_t>(k)].x.norm() < threshold)
      settled = k;
    else
      break;
  }
  trace.summary.settled_at = settled;
  if (settled >= 0) {
    double mx = 0.0;
    for (int k = settled; k < config.horizon; ++k)
      mx = std::max(mx, trace.steps[static_cast<size_t>(k)].x.norm());
    trace.summary.max_post_settle = mx;
  }
  return trace;
}

std::vector<std::pair<int, int>> effective_instants(const SimTrace& trace) {
  std::vector<int> eff;
  for (const auto& s : trace.steps)
    if (s.effective) eff.push_back(s.step);
  std::vector<std::pair<int, int>> out;
  for (size_t i = 0; i + 1 < eff.size(); ++i) out.emplace_back(eff[i], eff[i + 1] - eff[i]);
  return out;
}

std::vector<double> lyapunov_along_trace(const SimTrace& trace, const Matrix& p, int n_drop) {
  if (trace.steps.empty()) return {};
  const Eigen::Index n = trace.steps.front().x.size();
  if (p.rows() != n * n_drop || p.cols() != n * n_drop)
    throw densela::DimensionMismatch("lyapunov_along_trace: P size differs from n*n_drop");
  std::vector<int> eff;
  for (const auto& s : trace.steps)
    if (s.effective) eff.push_back(s.step);

  std::vector<double> values;
  values.reserve(eff.size());
  for (size_t mi = 0; mi < eff.size(); ++mi) {
    Vector gamma(n * n_drop);
    for (int j = 0; j < n_drop; ++j) {
      const int idx = static_cast<int>(mi) - j;
      // pad with the initial state before history exists
      const int step = (idx >= 0) ? eff[static_cast<size_t>(idx)] : 0;
      gamma.segment(j * n, n) = trace.steps[static_cast<size_t>(step)].x;
    }
    values.push_back(ncsmodel::lyapunov_value(p, gamma));
  }
  return values;
}

}  // namespace ncskit::sim
