#include "ncskit/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ncskit::sdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BlockFactor {
  Eigen::LLT<Matrix> llt;
  bool ok = false;
};

// Factor every block at z; ok only if all are strictly PD.
bool factor_blocks(const std::vector<AffineBlock>& blocks, const Vector& z,
                   std::vector<BlockFactor>& out) {
  out.resize(blocks.size());
  for (size_t j = 0; j < blocks.size(); ++j) {
    Matrix s = blocks[j].evaluate(z);
    s = 0.5 * (s + s.transpose()).eval();
    out[j].llt.compute(s);
    out[j].ok = (out[j].llt.info() == Eigen::Success);
    if (out[j].ok) {
      // LLT can "succeed" on borderline matrices; insist on positive pivots
      if (out[j].llt.matrixLLT().diagonal().minCoeff() <= 0.0) out[j].ok = false;
    }
    if (!out[j].ok) return false;
  }
  return true;
}

// tau * c^T z  -  sum_j log det S_j(z)  -  sum_i [log(R - z_i) + log(R + z_i)]
double barrier_value(const Vector& c, double tau, const std::vector<AffineBlock>& blocks,
                     double bound, const Vector& z) {
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (std::abs(z[i]) >= bound) return kInf;
  std::vector<BlockFactor> fac;
  if (!factor_blocks(blocks, z, fac)) return kInf;
  double v = tau * c.dot(z);
  for (auto& f : fac) v -= 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
  for (Eigen::Index i = 0; i < z.size(); ++i)
    v -= std::log(bound - z[i]) + std::log(bound + z[i]);
  return v;
}

enum class CenterOutcome { Converged, Budget, Failure };

// Damped Newton on the barrier objective at fixed tau. z must enter strictly
// feasible and stays so.
CenterOutcome center(const Vector& c, double tau, const std::vector<AffineBlock>& blocks,
                     double bound, Vector& z, int& budget, int& used) {
  const Eigen::Index d = z.size();
  std::vector<BlockFactor> fac;
  while (budget > 0) {
    if (!factor_blocks(blocks, z, fac)) return CenterOutcome::Failure;
    Vector g = tau * c;
    Matrix h = Matrix::Zero(d, d);
    for (size_t j = 0; j < blocks.size(); ++j) {
      const auto& blk = blocks[j];
      std::vector<Matrix> w(static_cast<size_t>(d));
      for (Eigen::Index i = 0; i < d; ++i) {
        w[static_cast<size_t>(i)] = fac[j].llt.solve(blk.coeffs[static_cast<size_t>(i)]);
        g[i] -= w[static_cast<size_t>(i)].trace();
      }
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = i; k < d; ++k) {
          const double v =
              (w[static_cast<size_t>(i)].transpose().cwiseProduct(w[static_cast<size_t>(k)])).sum();
          h(i, k) += v;
          if (k != i) h(k, i) += v;
        }
    }
    for (Eigen::Index i = 0; i < d; ++i) {
      const double lo = bound + z[i], hi = bound - z[i];
      g[i] += 1.0 / hi - 1.0 / lo;
      h(i, i) += 1.0 / (hi * hi) + 1.0 / (lo * lo);
    }

    Vector step;
    double ridge = 0.0;
    for (int attempt = 0;; ++attempt) {
      Matrix hr = h;
      if (ridge > 0.0) hr.diagonal().array() += ridge;
      Eigen::LDLT<Matrix> ldlt(hr);
      step = -ldlt.solve(g);
      if (ldlt.info() == Eigen::Success && step.allFinite() &&
          g.dot(step) < 0.0)
        break;
      if (attempt >= 8) return CenterOutcome::Failure;
      ridge = (ridge == 0.0) ? 1e-12 * std::max(1.0, h.diagonal().maxCoeff()) : ridge * 100.0;
    }

    const double decrement2 = -g.dot(step);
    if (decrement2 * 0.5 < 1e-10) return CenterOutcome::Converged;

    const double f0 = barrier_value(c, tau, blocks, bound, z);
    double alpha = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      Vector trial = z + alpha * step;
      const double f1 = barrier_value(c, tau, blocks, bound, trial);
      if (f1 < f0 - 1e-4 * alpha * decrement2 || (f1 < f0 && alpha < 1e-8)) {
        z = trial;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    --budget;
    ++used;
    if (!moved) {
      // fully stalled line search: accept current point as centered enough
      return CenterOutcome::Converged;
    }
  }
  return CenterOutcome::Budget;
}

}  // namespace

Matrix AffineBlock::evaluate(const Vector& z) const {
  Matrix s = f0;
  for (size_t i = 0; i < coeffs.size(); ++i) s += z[static_cast<Eigen::Index>(i)] * coeffs[i];
  return s;
}

void AffineBlock::validate(Eigen::Index dimension) const {
  densela::require_symmetric(f0, "AffineBlock.f0");
  if (static_cast<Eigen::Index>(coeffs.size()) != dimension)
    throw densela::DimensionMismatch("AffineBlock: coeff count differs from dimension");
  for (const auto& m : coeffs) {
    densela::require_symmetric(m, "AffineBlock.coeff");
    if (m.rows() != f0.rows())
      throw densela::DimensionMismatch("AffineBlock: coeff size differs from f0");
  }
}

void SdpProblem::validate() const {
  if (blocks.empty()) throw densela::DimensionMismatch("SdpProblem: needs at least one block");
  if (objective.size() != dimension)
    throw densela::DimensionMismatch("SdpProblem: objective length differs from dimension");
  for (const auto& b : blocks) b.validate(dimension);
}

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::Feasible: return "Feasible";
    case SdpStatus::Infeasible: return "Infeasible";
    case SdpStatus::IterationLimit: return "IterationLimit";
    case SdpStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

double min_margin(const std::vector<AffineBlock>& blocks, const Vector& z) {
  double m = kInf;
  for (const auto& b : blocks) {
    Matrix s = b.evaluate(z);
    s = 0.5 * (s + s.transpose()).eval();
    m = std::min(m, densela::min_eigenvalue(s));
  }
  return m;
}

namespace {

struct BarrierRun {
  Vector z;
  SdpStatus status = SdpStatus::NumericalFailure;
  int iterations = 0;
  std::vector<double> objective_history;
};

// Path-following from a strictly feasible z0.
BarrierRun barrier_solve(const Vector& c, const std::vector<AffineBlock>& blocks,
                         const SdpSettings& settings, Vector z) {
  double total_size = 2.0 * static_cast<double>(z.size());
  for (const auto& b : blocks) total_size += static_cast<double>(b.size());

  BarrierRun run;
  run.z = z;
  int budget = settings.max_iterations;
  double tau = 1.0;
  const double mu = 20.0;
  while (true) {
    int used = 0;
    const CenterOutcome oc = center(c, tau, blocks, settings.variable_bound, z, budget, used);
    run.iterations += used;
    if (oc == CenterOutcome::Failure) {
      run.status = SdpStatus::NumericalFailure;
      return run;
    }
    run.z = z;
    run.objective_history.push_back(c.dot(z));
    if (oc == CenterOutcome::Budget) {
      run.status = SdpStatus::IterationLimit;
      return run;
    }
    const double gap = total_size / tau;
    if (gap <= settings.gap_tol * (1.0 + std::abs(c.dot(z)))) {
      run.status = SdpStatus::Optimal;
      return run;
    }
    tau *= mu;
  }
}

}  // namespace

Phase1Result sdp_phase1(const std::vector<AffineBlock>& blocks, Eigen::Index dimension,
                        const SdpSettings& settings) {
  for (const auto& b : blocks) b.validate(dimension);
  if (blocks.empty()) throw densela::DimensionMismatch("sdp_phase1: needs at least one block");

  const Eigen::Index d = dimension;
  // Extended problem over (z, t): maximize t with every block shifted by -t*I
  // and t capped at initial_margin.
  std::vector<AffineBlock> ext(blocks.size());
  for (size_t j = 0; j < blocks.size(); ++j) {
    ext[j].f0 = blocks[j].f0;
    ext[j].coeffs = blocks[j].coeffs;
    ext[j].coeffs.push_back(-Matrix::Identity(blocks[j].size(), blocks[j].size()));
  }
  AffineBlock cap;
  cap.f0 = Matrix::Constant(1, 1, settings.initial_margin);
  cap.coeffs.assign(static_cast<size_t>(d), Matrix::Zero(1, 1));
  cap.coeffs.push_back(Matrix::Constant(1, 1, -1.0));
  ext.push_back(cap);

  Vector c = Vector::Zero(d + 1);
  c[d] = -1.0;

  double t0 = settings.initial_margin - 1.0;
  for (const auto& b : blocks) {
    Matrix s = 0.5 * (b.f0 + b.f0.transpose());
    t0 = std::min(t0, densela::min_eigenvalue(s) - 1.0);
  }
  SdpSettings s2 = settings;
  s2.variable_bound = std::max(settings.variable_bound, 10.0 * std::abs(t0));
  Vector z0 = Vector::Zero(d + 1);
  z0[d] = t0;

  BarrierRun run = barrier_solve(c, ext, s2, z0);

  Phase1Result res;
  res.z = run.z.head(d);
  res.status = run.status;
  res.iterations = run.iterations;
  res.margin = std::min(min_margin(blocks, res.z), settings.initial_margin);
  return res;
}

SdpSolution sdp_solve(const SdpProblem& problem, const SdpSettings& settings,
                      const std::optional<Vector>& start) {
  problem.validate();
  SdpSolution sol;

  if (problem.dimension == 0) {
    sol.z = Vector();
    sol.objective_value = 0.0;
    sol.min_block_margin = min_margin(problem.blocks, sol.z);
    sol.status = (sol.min_block_margin >= -settings.feas_tol) ? SdpStatus::Optimal
                                                              : SdpStatus::Infeasible;
    return sol;
  }

  Vector z0;
  if (start) {
    z0 = *start;
  } else {
    Phase1Result p1 = sdp_phase1(problem.blocks, problem.dimension, settings);
    sol.iterations += p1.iterations;
    if (p1.margin < -settings.feas_tol) {
      sol.status = SdpStatus::Infeasible;
      sol.z = p1.z;
      sol.objective_value = problem.objective.dot(sol.z);
      sol.min_block_margin = min_margin(problem.blocks, sol.z);
      return sol;
    }
    if (p1.margin <= 0.0) {
      // feasible only up to tolerance; no strict interior to optimize over
      sol.status = SdpStatus::Feasible;
      sol.z = p1.z;
      sol.objective_value = problem.objective.dot(sol.z);
      sol.min_block_margin = min_margin(problem.blocks, sol.z);
      return sol;
    }
    z0 = p1.z;
  }

  BarrierRun run = barrier_solve(problem.objective, problem.blocks, settings, z0);
  sol.iterations += run.iterations;
  sol.objective_history = run.objective_history;
  sol.z = run.z;
  sol.objective_value = problem.objective.dot(sol.z);
  sol.min_block_margin = min_margin(problem.blocks, sol.z);
  sol.status = run.status;
  if (sol.status == SdpStatus::Optimal && sol.min_block_margin < -settings.feas_tol)
    sol.status = SdpStatus::NumericalFailure;
  return sol;
}

}  // namespace ncskit::sdp
