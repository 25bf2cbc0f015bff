#include <CLI11.hpp>

#include "ncskit/cclsynth.hpp"
#include "ncskit/demo_dc_motor.hpp"
#include "ncskit/model_io.hpp"
#include "ncskit/ncsmodel.hpp"
#include "ncskit/plot.hpp"
#include "ncskit/sim.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

// ncsctl: gain synthesis and closed-loop simulation for switched plants
// controlled over a lossy network.
//
// Exit codes: 0 success; 2 malformed input; 3 numerical failure;
// 4 synthesis initialization failed; 5 synthesis/verification inconclusive
// (iteration limit, unverified convergence, or no common Lyapunov matrix);
// 6 simulation model violation (drop bound broke in a stress mode).

namespace {

using namespace ncskit;
using densela::Matrix;
using densela::Vector;

constexpr int kExitOk = 0;
constexpr int kExitMalformed = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitInitFailed = 4;
constexpr int kExitInconclusive = 5;
constexpr int kExitModelViolation = 6;

std::string fmt(double v, int digits = 6) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void print_matrix(std::ostream& out, const Matrix& m, const std::string& indent = "  ") {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << indent << "[";
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? ", " : " ") << fmt(m(i, j));
    out << " ]\n";
  }
}

Vector parse_x0(const std::string& text) {
  std::vector<std::vector<double>> row;
  std::istringstream in(text);
  std::string cell;
  std::vector<double> vals;
  while (std::getline(in, cell, ',')) {
    try {
      vals.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw model_io::ParseError("--x0: non-numeric entry '" + cell + "'");
    }
  }
  if (vals.empty()) throw model_io::ParseError("--x0: empty vector");
  Vector x(static_cast<Eigen::Index>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) x[static_cast<Eigen::Index>(i)] = vals[i];
  return x;
}

std::string discretize_report(const ncsmodel::SwitchedPlant& plant) {
  std::ostringstream out;
  for (size_t l = 0; l < plant.modes.size(); ++l) {
    const auto& m = plant.modes[l];
    out << "mode " << (l + 1);
    if (!m.label.empty()) out << " (" << m.label << ")";
    out << ":\n";
    out << "  F =\n";
    print_matrix(out, m.f, "    ");
    out << "  G =\n";
    print_matrix(out, m.g, "    ");
    if (m.f.rows() == 2) {
      const auto [e1, e2] = densela::eig_2x2(m.f);
      out << "  eig(F): " << fmt(e1.real(), 8);
      if (std::abs(e1.imag()) > 1e-12) out << (e1.imag() >= 0 ? "+" : "") << fmt(e1.imag(), 8) << "i";
      out << ", " << fmt(e2.real(), 8);
      if (std::abs(e2.imag()) > 1e-12) out << (e2.imag() >= 0 ? "+" : "") << fmt(e2.imag(), 8) << "i";
      out << "\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------- discretize

struct DiscretizeArgs {
  std::string model_path;
  double h_override = 0.0;
  std::string out_path;
};

int cmd_discretize(const DiscretizeArgs& args) {
  auto model = model_io::load_model(args.model_path);
  if (!model.is_continuous()) {
    std::cerr << "discretize: model '" << args.model_path
              << "' carries discrete modes already; field 'continuous_modes' required\n";
    return kExitMalformed;
  }
  if (args.h_override > 0.0) model.sample_period = args.h_override;
  auto plant = model.to_plant();
  std::cout << "sample period h = " << fmt(plant.sample_period) << " s, n_drop = " << plant.n_drop
            << "\n";
  std::cout << discretize_report(plant);
  if (!args.out_path.empty()) {
    model_io::ModelFile out;
    out.sample_period = plant.sample_period;
    out.n_drop = plant.n_drop;
    out.discrete_modes = plant.modes;
    model_io::write_file(args.out_path, model_io::model_to_json(out));
    std::cout << "wrote " << args.out_path << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- synthesize

struct SynthesizeArgs {
  std::string model_path;
  int ndrop_override = 0;
  double eps = 1e-6;
  int max_iter = 30;
  double trace_tol = 1e-4;
  std::string out_path = "gains.json";
};

int cmd_synthesize(const SynthesizeArgs& args) {
  const std::string model_bytes = model_io::read_file(args.model_path);
  auto model = model_io::parse_model(model_bytes);
  if (args.ndrop_override > 0) model.n_drop = args.ndrop_override;
  auto plant = model.to_plant();

  cclsynth::CclSettings settings;
  settings.epsilon = args.eps;
  settings.max_iterations = args.max_iter;
  settings.trace_tol = args.trace_tol;
  auto result = cclsynth::ccl_synthesize(plant, settings);

  for (const auto& rec : result.history)
    std::cout << "iter " << rec.iteration << ": objective = " << fmt(rec.objective, 10)
              << ", ||PQ - I|| = " << fmt(rec.inverse_gap) << ", verified = "
              << (rec.verified ? "yes" : "no") << "\n";
  std::cout << "status: " << cclsynth::to_string(result.status) << "\n";
  if (result.certificate)
    std::cout << "worst_margin: " << fmt(result.certificate->worst_margin) << "\n";
  if (result.status == cclsynth::CclStatus::InitializationFailed)
    std::cout << "phase1_margin: " << fmt(result.phase1_margin) << "\n";

  model_io::GainFile gf;
  gf.gains = result.gains;
  gf.p = result.p;
  gf.q = result.q;
  gf.status = cclsynth::to_string(result.status);
  gf.history = result.history;
  gf.settings = settings;
  gf.plant_fingerprint = model_io::fingerprint(model_bytes);
  model_io::write_file(args.out_path, model_io::gains_to_json(gf));
  std::cout << "wrote " << args.out_path << "\n";

  switch (result.status) {
    case cclsynth::CclStatus::Stabilized: return kExitOk;
    case cclsynth::CclStatus::InitializationFailed: return kExitInitFailed;
    default: return kExitInconclusive;
  }
}

// -------------------------------------------------------------------- verify

int cmd_verify(const std::string& model_path, const std::string& gains_path) {
  const std::string model_bytes = model_io::read_file(model_path);
  auto plant = model_io::parse_model(model_bytes).to_plant();
  auto gf = model_io::load_gains(gains_path);
  gf.gains.validate(plant);
  if (!gf.plant_fingerprint.empty() &&
      gf.plant_fingerprint != model_io::fingerprint(model_bytes))
    std::cout << "note: gain file fingerprint differs from this model file\n";

  ncsmodel::VerifyFailure failure;
  auto cert = ncsmodel::verify_theorem1(plant, gf.gains, 1e-6, {}, &failure);

  auto aug = ncsmodel::build_phi(plant, gf.gains);
  for (const auto& [key, phi] : aug.phi)
    std::cout << "Phi(l=" << key.first << ", eta=" << key.second
              << "): schur_stable = " << (densela::is_schur_stable(phi) ? "yes" : "no") << "\n";
  if (cert) {
    std::cout << "common_P: found\n";
    std::cout << "worst_margin: " << fmt(cert->worst_margin) << "\n";
    std::cout << "verdict: certified\n";
    return kExitOk;
  }
  std::cout << "common_P: not found (phase-1 margin " << fmt(failure.phase1_margin) << ")\n";
  std::cout << "verdict: not certified\n";
  return kExitInconclusive;
}

// ------------------------------------------------------------------ simulate

struct SimulateArgs {
  std::string model_path;
  std::string gains_path;
  int steps = 200;
  uint64_t seed = 0;
  std::string drop_model = "bernoulli";
  double p_loss = 0.3;
  std::string switching = "random-effective";
  int mode_index = 1;
  std::string x0_text;
  double threshold = 0.0;
  bool no_enforce_bound = false;
  std::string out_path;
};

int cmd_simulate(const SimulateArgs& args) {
  sim::SimConfig cfg;
  cfg.plant = model_io::load_model(args.model_path).to_plant();
  cfg.gains = model_io::load_gains(args.gains_path).gains;
  cfg.horizon = args.steps;
  cfg.settle_threshold = args.threshold;
  cfg.x0 = args.x0_text.empty() ? Vector(Vector::Zero(cfg.plant.state_dim()))
                                : parse_x0(args.x0_text);

  if (args.drop_model == "bernoulli")
    cfg.drop.kind = sim::DropKind::BernoulliLinks;
  else if (args.drop_model == "uniform-eta")
    cfg.drop.kind = sim::DropKind::UniformEta;
  else
    throw model_io::ParseError("--drop-model: expected 'bernoulli' or 'uniform-eta'");
  cfg.drop.p_sensor_loss = args.p_loss;
  cfg.drop.p_control_loss = args.p_loss;
  cfg.drop.enforce_bound = !args.no_enforce_bound;
  cfg.drop.seed = args.seed;

  if (args.switching == "random-effective")
    cfg.switching.kind = sim::SwitchKind::RandomAtEffective;
  else if (args.switching == "random-step")
    cfg.switching.kind = sim::SwitchKind::RandomEveryStep;
  else if (args.switching == "fixed")
    cfg.switching.kind = sim::SwitchKind::Fixed;
  else
    throw model_io::ParseError("--switch: expected 'random-effective', 'random-step' or 'fixed'");
  cfg.switching.mode_index = args.mode_index;
  cfg.switching.seed = args.seed;

  auto trace = sim::simulate(cfg);
  const std::string csv = model_io::trace_to_csv(trace);
  if (args.out_path.empty()) {
    std::cout << csv;
  } else {
    model_io::write_file(args.out_path, csv);
    std::cout << "wrote " << args.out_path << "\n";
  }
  std::cout << "settled_at: " << trace.summary.settled_at << "\n";
  std::cout << "settle_threshold: " << fmt(trace.summary.settle_threshold) << "\n";
  std::cout << "max_post_settle: " << fmt(trace.summary.max_post_settle) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------- plot

int cmd_plot(const std::string& trace_path, const std::string& out_path,
             const std::string& columns_text) {
  auto trace = model_io::load_trace(trace_path);
  std::vector<int> columns;
  if (!columns_text.empty()) {
    std::istringstream in(columns_text);
    std::string cell;
    while (std::getline(in, cell, ',')) {
      try {
        columns.push_back(std::stoi(cell) - 1);  // user-facing columns are 1-based
      } catch (const std::exception&) {
        throw model_io::ParseError("--columns: non-integer entry '" + cell + "'");
      }
    }
  }
  if (trace.steps.empty()) {
    std::cerr << "plot: trace '" << trace_path << "' has no rows\n";
    return kExitMalformed;
  }
  std::string svg;
  try {
    svg = plot::trace_to_svg(trace, columns);
  } catch (const std::runtime_error& e) {
    std::cerr << "plot: " << e.what() << "\n";
    return kExitMalformed;
  }
  model_io::write_file(out_path, svg);
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------- demo

struct DemoArgs {
  double h = 0.1;
  std::string out_dir = "demo_out";
};

int cmd_demo(const DemoArgs& args) {
  namespace fs = std::filesystem;
  fs::create_directories(args.out_dir);
  auto path = [&](const std::string& name) { return (fs::path(args.out_dir) / name).string(); };

  // stage 1: model file
  auto model = demo::dc_motor_model();
  model.sample_period = args.h;
  const std::string model_json = model_io::model_to_json(model);
  model_io::write_file(path("model.json"), model_json);
  auto plant = model.to_plant();

  // stage 2: discretization report, checked against the reference fixtures
  // when they exist for this sampling period
  std::ostringstream report;
  report << discretize_report(plant);
  bool disc_ok = true;
  if (std::abs(args.h - 0.1) < 1e-12) {
    const auto refs = demo::reference_discretization_h01();
    for (size_t l = 0; l < refs.size(); ++l) {
      const auto& m = plant.modes[l];
      const double df = (m.f - refs[l].f).cwiseAbs().maxCoeff();
      const double dg = (m.g - refs[l].g).cwiseAbs().maxCoeff();
      const auto [e1, e2] = densela::eig_2x2(m.f);
      const double de = std::max(std::abs(e1.real() - refs[l].eig1),
                                 std::abs(e2.real() - refs[l].eig2));
      const bool ok = df < 5e-5 && dg < 5e-5 && de < 5e-4;
      disc_ok = disc_ok && ok;
      report << "mode " << (l + 1) << " reference check: |dF| = " << fmt(df)
             << ", |dG| = " << fmt(dg) << ", |deig| = " << fmt(de) << " -> "
             << (ok ? "pass" : "FAIL") << "\n";
    }
  } else {
    report << "no reference discretization fixture at h = " << fmt(args.h) << "\n";
  }
  model_io::write_file(path("discretize.txt"), report.str());
  std::cout << report.str();
  if (!disc_ok) {
    std::cerr << "demo: discretization reference check failed\n";
    return kExitNumerical;
  }

  // stage 3: synthesis
  cclsynth::CclSettings settings;
  auto result = cclsynth::ccl_synthesize(plant, settings);
  std::cout << "synthesis: " << cclsynth::to_string(result.status) << " after "
            << (result.history.empty() ? 0 : result.history.back().iteration) << " iterations\n";
  model_io::GainFile gf;
  gf.gains = result.gains;
  gf.p = result.p;
  gf.q = result.q;
  gf.status = cclsynth::to_string(result.status);
  gf.history = result.history;
  gf.settings = settings;
  gf.plant_fingerprint = model_io::fingerprint(model_json);
  model_io::write_file(path("gains.json"), model_io::gains_to_json(gf));
  if (result.status != cclsynth::CclStatus::Stabilized)
    return result.status == cclsynth::CclStatus::InitializationFailed ? kExitInitFailed
                                                                      : kExitInconclusive;

  // stage 4: verification report (from the written artifacts, as a user would)
  auto cert = ncsmodel::verify_theorem1(plant, model_io::load_gains(path("gains.json")).gains);
  std::ostringstream verify;
  auto aug = ncsmodel::build_phi(plant, gf.gains);
  for (const auto& [key, phi] : aug.phi)
    verify << "Phi(l=" << key.first << ", eta=" << key.second
           << "): schur_stable = " << (densela::is_schur_stable(phi) ? "yes" : "no") << "\n";
  verify << "common_P: " << (cert ? "found" : "not found") << "\n";
  if (cert) verify << "worst_margin: " << fmt(cert->worst_margin) << "\n";
  model_io::write_file(path("verify.txt"), verify.str());
  std::cout << verify.str();
  if (!cert) {
    std::cerr << "demo: verification of the synthesized gains failed\n";
    return kExitInconclusive;
  }

  // stage 5: one simulated trajectory with a fixed seed
  sim::SimConfig cfg;
  cfg.plant = plant;
  cfg.gains = gf.gains;
  cfg.x0 = demo::initial_state();
  cfg.horizon = 200;
  cfg.drop.p_sensor_loss = 0.3;
  cfg.drop.p_control_loss = 0.3;
  cfg.drop.seed = 42;
  cfg.switching.seed = 42;
  auto trace = sim::simulate(cfg);
  model_io::write_file(path("trace.csv"), model_io::trace_to_csv(trace));
  std::cout << "simulation: settled_at = " << trace.summary.settled_at
            << ", max_post_settle = " << fmt(trace.summary.max_post_settle) << "\n";
  if (trace.summary.settled_at < 0) {
    std::cerr << "demo: trajectory did not settle within the horizon\n";
    return kExitInconclusive;
  }

  // stage 6: plot
  model_io::write_file(path("trace.svg"), plot::trace_to_svg(trace));
  std::cout << "wrote " << args.out_dir << "/{model.json, discretize.txt, gains.json, "
            << "verify.txt, trace.csv, trace.svg}\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gain synthesis and lossy-network simulation for switched plants"};
  app.set_help_flag("--help", "print help");  // leave -h free: --h is a sampling-period flag
  app.require_subcommand(1);

  DiscretizeArgs dargs;
  auto* disc = app.add_subcommand("discretize", "zero-order-hold discretization of a model file");
  disc->add_option("model", dargs.model_path, "model JSON with continuous_modes")->required();
  disc->add_option("--h", dargs.h_override, "override the sampling period [s]");
  disc->add_option("--out", dargs.out_path, "write the discrete-mode model JSON here");

  SynthesizeArgs sargs;
  auto* synth = app.add_subcommand("synthesize", "CCL gain synthesis with Lyapunov certification");
  synth->add_option("model", sargs.model_path, "model JSON")->required();
  synth->add_option("--ndrop", sargs.ndrop_override, "override the consecutive-drop bound");
  synth->add_option("--eps", sargs.eps, "LMI strictness margin")->capture_default_str();
  synth->add_option("--max-iter", sargs.max_iter, "CCL iteration cap")->capture_default_str();
  synth->add_option("--trace-tol", sargs.trace_tol, "trace stopping tolerance")->capture_default_str();
  synth->add_option("--out", sargs.out_path, "gain JSON output path")->capture_default_str();

  std::string vmodel, vgains;
  auto* verify = app.add_subcommand("verify", "common-Lyapunov certification of a gain schedule");
  verify->add_option("model", vmodel, "model JSON")->required();
  verify->add_option("gains", vgains, "gain JSON")->required();

  SimulateArgs margs;
  auto* simc = app.add_subcommand("simulate", "closed-loop simulation over a lossy network");
  simc->add_option("model", margs.model_path, "model JSON")->required();
  simc->add_option("gains", margs.gains_path, "gain JSON")->required();
  simc->add_option("--steps", margs.steps, "horizon length")->capture_default_str();
  simc->add_option("--seed", margs.seed, "RNG seed")->capture_default_str();
  simc->add_option("--drop-model", margs.drop_model, "bernoulli | uniform-eta")->capture_default_str();
  simc->add_option("--p-loss", margs.p_loss, "per-link loss probability")->capture_default_str();
  simc->add_option("--switch", margs.switching, "random-effective | random-step | fixed")->capture_default_str();
  simc->add_option("--mode", margs.mode_index, "mode index for --switch fixed")->capture_default_str();
  simc->add_option("--x0", margs.x0_text, "initial state, comma separated (default zeros)");
  simc->add_option("--threshold", margs.threshold, "settle threshold (default 1e-3*||x0||)");
  simc->add_flag("--no-enforce-bound", margs.no_enforce_bound,
                 "stress mode: drop the consecutive-loss bound");
  simc->add_option("--out", margs.out_path, "trace CSV path (default: stdout)");

  std::string ptrace, pout = "trace.svg", pcols;
  auto* plotc = app.add_subcommand("plot", "render a trace CSV as a deterministic SVG");
  plotc->add_option("trace", ptrace, "trace CSV path")->required();
  plotc->add_option("--out", pout, "SVG output path")->capture_default_str();
  plotc->add_option("--columns", pcols, "1-based state columns, comma separated");

  DemoArgs demo_args;
  auto* democ = app.add_subcommand("demo", "end-to-end run on the built-in DC-motor plant");
  democ->add_option("--h", demo_args.h, "sampling period [s]")->capture_default_str()
      ->check(CLI::IsMember({0.1, 0.2}));
  democ->add_option("--out-dir", demo_args.out_dir, "artifact directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitMalformed;  // --help exits 0
  }

  try {
    if (*disc) return cmd_discretize(dargs);
    if (*synth) return cmd_synthesize(sargs);
    if (*verify) return cmd_verify(vmodel, vgains);
    if (*simc) return cmd_simulate(margs);
    if (*plotc) return cmd_plot(ptrace, pout, pcols);
    if (*democ) return cmd_demo(demo_args);
  } catch (const model_io::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMalformed;
  } catch (const densela::DimensionMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMalformed;
  } catch (const densela::NotSymmetric& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMalformed;
  } catch (const sim::ModelViolation& e) {
    std::cerr << "model violation: " << e.what() << "\n";
    return kExitModelViolation;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitMalformed;
}
