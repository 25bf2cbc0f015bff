#include "ncskit/cclsynth.hpp"

#include <cmath>
#include <limits>

namespace ncskit::cclsynth {

namespace {

// Coefficients of trace(P*Qk) + trace(Pk*Q) over the packed decision vector;
// gain entries carry zero weight.
Vector trace_objective(const ncsmodel::SynthesisVariableMap& vars, const Matrix& pk,
                       const Matrix& qk) {
  Vector c = Vector::Zero(vars.dimension);
  const Eigen::Index s = vars.aug_dim;
  Eigen::Index e = vars.p_offset;
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = i; j < s; ++j)
      c[e++] = (i == j) ? qk(i, i) : 2.0 * qk(i, j);
  e = vars.q_offset;
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = i; j < s; ++j)
      c[e++] = (i == j) ? pk(i, i) : 2.0 * pk(i, j);
  return c;
}

double inverse_gap(const Matrix& p, const Matrix& q) {
  return (p * q - Matrix::Identity(p.rows(), p.cols())).norm();
}

// Stabilizability screen for one (F, G) pair via the synthesis LMI
//   [[W, (F W + G Y)^T], [F W + G Y, W]] > 0,  W > 0
// (change of variables K = Y W^{-1}). A common certificate makes every
// F + G K_1 Schur stable, so infeasibility here means no gain schedule can
// ever satisfy the closed-loop condition; the full CCL LMIs alone cannot
// detect this because the inverse coupling between P and Q is not convex.
bool mode_stabilizable(const ncsmodel::PlantMode& mode, double epsilon,
                       const sdp::SdpSettings& settings, double* margin_out) {
  const Eigen::Index n = mode.f.rows();
  const Eigen::Index m = mode.g.cols();
  const Eigen::Index dw = n * (n + 1) / 2;
  const Eigen::Index d = dw + m * n;

  std::vector<sdp::AffineBlock> blocks(2);
  auto& big = blocks[0];
  big.f0 = -epsilon * Matrix::Identity(2 * n, 2 * n);
  big.coeffs.assign(static_cast<size_t>(d), Matrix::Zero(2 * n, 2 * n));
  auto& pd = blocks[1];
  pd.f0 = -epsilon * Matrix::Identity(n, n);
  pd.coeffs.assign(static_cast<size_t>(d), Matrix::Zero(n, n));

  Eigen::Index e = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j, ++e) {
      Matrix w = Matrix::Zero(n, n);
      w(i, j) = 1.0;
      w(j, i) = 1.0;
      big.coeffs[static_cast<size_t>(e)].topLeftCorner(n, n) = w;
      big.coeffs[static_cast<size_t>(e)].bottomRightCorner(n, n) = w;
      const Matrix fw = mode.f * w;
      big.coeffs[static_cast<size_t>(e)].bottomLeftCorner(n, n) += fw;
      big.coeffs[static_cast<size_t>(e)].topRightCorner(n, n) += fw.transpose();
      pd.coeffs[static_cast<size_t>(e)] = w;
    }
  for (Eigen::Index u = 0; u < m; ++u)
    for (Eigen::Index v = 0; v < n; ++v, ++e) {
      const Matrix gy = mode.g.col(u) * Matrix::Identity(n, n).row(v);
      big.coeffs[static_cast<size_t>(e)].bottomLeftCorner(n, n) = gy;
      big.coeffs[static_cast<size_t>(e)].topRightCorner(n, n) = gy.transpose();
    }

  const auto res = sdp::sdp_phase1(blocks, d, settings);
  if (margin_out) *margin_out = res.margin;
  return res.margin > 0.0;
}

}  // namespace

std::string to_string(CclStatus s) {
  switch (s) {
    case CclStatus::Stabilized: return "Stabilized";
    case CclStatus::TraceConvergedUnverified: return "TraceConvergedUnverified";
    case CclStatus::IterationLimit: return "IterationLimit";
    case CclStatus::InitializationFailed: return "InitializationFailed";
  }
  return "?";
}

std::optional<CclInit> ccl_initialize(const SwitchedPlant& plant, const CclSettings& settings,
                                      double* achieved_margin) {
  for (const auto& mode : plant.modes) {
    double screen_margin = 0.0;
    if (!mode_stabilizable(mode, settings.epsilon, settings.sdp, &screen_margin)) {
      if (achieved_margin) *achieved_margin = screen_margin;
      return std::nullopt;
    }
  }
  const auto synth = ncsmodel::assemble_synthesis_blocks(plant, settings.epsilon);
  const auto phase1 = sdp::sdp_phase1(synth.blocks, synth.vars.dimension, settings.sdp);
  if (achieved_margin) *achieved_margin = phase1.margin;
  if (phase1.margin <= 0.0) return std::nullopt;
  CclInit init;
  init.z = phase1.z;
  init.p = synth.vars.extract_p(phase1.z);
  init.q = synth.vars.extract_q(phase1.z);
  init.gains = synth.vars.extract_gains(phase1.z);
  return init;
}

CclResult ccl_synthesize(const SwitchedPlant& plant, const CclSettings& settings) {
  plant.validate();
  const auto synth = ncsmodel::assemble_synthesis_blocks(plant, settings.epsilon);
  const double trace_target =
      2.0 * static_cast<double>(plant.state_dim()) * static_cast<double>(plant.n_drop);

  CclResult result;
  double margin = 0.0;
  auto init = ccl_initialize(plant, settings, &margin);
  if (!init) {
    result.status = CclStatus::InitializationFailed;
    result.phase1_margin = margin;
    return result;
  }

  Matrix pk = init->p;
  Matrix qk = init->q;
  Vector zk = init->z;
  result.p = pk;
  result.q = qk;
  result.gains = init->gains;

  // Iteration 0 is the phase-1 point itself; gains there are often already
  // certifiable on easy problems.
  {
    CclIterationRecord rec;
    rec.iteration = 0;
    rec.objective = 2.0 * (pk * qk).trace();
    rec.inverse_gap = inverse_gap(pk, qk);
    auto cert = ncsmodel::verify_theorem1(plant, init->gains, settings.epsilon, settings.sdp);
    rec.verified = cert.has_value();
    result.history.push_back(rec);
    if (cert) {
      result.status = CclStatus::Stabilized;
      result.certificate = std::move(cert);
      return result;
    }
  }

  for (int k = 1; k <= settings.max_iterations; ++k) {
    sdp::SdpProblem problem;
    problem.dimension = synth.vars.dimension;
    problem.objective = trace_objective(synth.vars, pk, qk);
    problem.blocks = synth.blocks;

    auto sol = sdp::sdp_solve(problem, settings.sdp, zk);
    if (sol.status == sdp::SdpStatus::NumericalFailure) {
      // retry from a cold start before giving up on this iteration
      sol = sdp::sdp_solve(problem, settings.sdp);
    }
    if (sol.status != sdp::SdpStatus::Optimal && sol.status != sdp::SdpStatus::Feasible &&
        sol.status != sdp::SdpStatus::IterationLimit) {
      CclIterationRecord rec;
      rec.iteration = k;
      rec.objective = 2.0 * (pk * qk).trace();  // last good iterate
      rec.inverse_gap = inverse_gap(pk, qk);
      rec.verified = false;
      result.history.push_back(rec);
      result.status = CclStatus::IterationLimit;
      return result;
    }

    const Matrix p = synth.vars.extract_p(sol.z);
    const Matrix q = synth.vars.extract_q(sol.z);
    const GainSchedule gains = synth.vars.extract_gains(sol.z);

    CclIterationRecord rec;
    rec.iteration = k;
    rec.objective = (p * qk).trace() + (pk * q).trace();
    rec.inverse_gap = inverse_gap(p, q);

    auto cert = ncsmodel::verify_theorem1(plant, gains, settings.epsilon, settings.sdp);
    rec.verified = cert.has_value();
    result.history.push_back(rec);

    result.p = p;
    result.q = q;
    result.gains = gains;
    pk = p;
    qk = q;
    zk = sol.z;

    if (cert) {
      result.status = CclStatus::Stabilized;
      result.certificate = std::move(cert);
      return result;
    }
    if (std::abs(rec.objective - trace_target) < settings.trace_tol) {
      result.status = CclStatus::TraceConvergedUnverified;
      return result;
    }
  }

  result.status = CclStatus::IterationLimit;
  return result;
}

}  // namespace ncskit::cclsynth
