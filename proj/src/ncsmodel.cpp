#include "ncskit/ncsmodel.hpp"

#include <cmath>
#include <limits>

namespace ncskit::ncsmodel {

namespace {

// Symmetric unit basis for the upper-triangle parameterization: entry e maps
// (i, j), i <= j, row-major over the upper triangle.
Matrix sym_basis(Eigen::Index s, Eigen::Index i, Eigen::Index j) {
  Matrix e = Matrix::Zero(s, s);
  e(i, j) = 1.0;
  e(j, i) = 1.0;
  return e;
}

template <typename Fn>
void for_each_triu(Eigen::Index s, Fn&& fn) {
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = i; j < s; ++j) fn(i, j);
}

Eigen::Index triu_count(Eigen::Index s) { return s * (s + 1) / 2; }

std::vector<Matrix> matrix_powers(const Matrix& f, int up_to) {
  std::vector<Matrix> pw;
  pw.reserve(static_cast<size_t>(up_to) + 1);
  pw.push_back(Matrix::Identity(f.rows(), f.cols()));
  for (int t = 1; t <= up_to; ++t) pw.push_back(pw.back() * f);
  return pw;
}

}  // namespace

void SwitchedPlant::validate() const {
  if (modes.empty()) throw densela::DimensionMismatch("SwitchedPlant: needs at least one mode");
  if (sample_period <= 0.0) throw densela::DimensionMismatch("SwitchedPlant: sample_period <= 0");
  if (n_drop < 1) throw densela::DimensionMismatch("SwitchedPlant: n_drop < 1");
  const Eigen::Index n = modes.front().f.rows();
  const Eigen::Index m = modes.front().g.cols();
  for (const auto& mode : modes) {
    if (mode.f.rows() != mode.f.cols()) throw densela::DimensionMismatch("PlantMode: F not square");
    if (mode.f.rows() != n || mode.g.rows() != n || mode.g.cols() != m)
      throw densela::DimensionMismatch("SwitchedPlant: modes disagree on (n, m)");
    densela::require_finite(mode.f, "PlantMode.f");
    densela::require_finite(mode.g, "PlantMode.g");
  }
}

void GainSchedule::validate(const SwitchedPlant& plant) const {
  if (static_cast<int>(gains.size()) != plant.n_drop)
    throw densela::DimensionMismatch("GainSchedule: gain count differs from n_drop");
  for (const auto& k : gains) {
    if (k.rows() != plant.input_dim() || k.cols() != plant.state_dim())
      throw densela::DimensionMismatch("GainSchedule: gain is not m x n");
    densela::require_finite(k, "GainSchedule gain");
  }
}

PlantMode discretize(const ContinuousMode& mode, double h) {
  if (h <= 0.0) throw densela::DimensionMismatch("discretize: h <= 0");
  if (mode.a.rows() != mode.a.cols()) throw densela::DimensionMismatch("discretize: A not square");
  if (mode.b.rows() != mode.a.rows())
    throw densela::DimensionMismatch("discretize: B row count differs from A");
  const Eigen::Index n = mode.a.rows();
  const Eigen::Index m = mode.b.cols();
  Matrix block = Matrix::Zero(n + m, n + m);
  block.topLeftCorner(n, n) = mode.a * h;
  block.topRightCorner(n, m) = mode.b * h;
  const Matrix e = densela::matexp(block);
  PlantMode out;
  out.f = e.topLeftCorner(n, n);
  out.g = e.topRightCorner(n, m);
  out.label = mode.label;
  return out;
}

Matrix closed_loop_top_block(const PlantMode& mode, const GainSchedule& gains, int eta) {
  if (eta < 1 || eta > static_cast<int>(gains.gains.size()))
    throw densela::DimensionMismatch("closed_loop_top_block: eta out of range");
  const auto pw = matrix_powers(mode.f, eta);
  Matrix top = pw[static_cast<size_t>(eta)];
  for (int t = 0; t < eta; ++t)
    top += pw[static_cast<size_t>(t)] * mode.g * gains.gains[static_cast<size_t>(eta - t - 1)];
  return top;
}

AugmentedClosedLoop build_phi(const SwitchedPlant& plant, const GainSchedule& gains) {
  plant.validate();
  gains.validate(plant);
  const Eigen::Index n = plant.state_dim();
  const Eigen::Index s = n * plant.n_drop;
  AugmentedClosedLoop out;
  for (int l = 1; l <= plant.mode_count(); ++l) {
    const auto& mode = plant.modes[static_cast<size_t>(l - 1)];
    for (int eta = 1; eta <= plant.n_drop; ++eta) {
      Matrix phi = Matrix::Zero(s, s);
      phi.topLeftCorner(n, n) = closed_loop_top_block(mode, gains, eta);
      for (int j = 1; j < plant.n_drop; ++j)
        phi.block(j * n, (j - 1) * n, n, n) = Matrix::Identity(n, n);
      out.phi[{l, eta}] = std::move(phi);
    }
  }
  return out;
}

std::optional<StabilityCertificate> verify_theorem1(const SwitchedPlant& plant,
                                                    const GainSchedule& gains, double epsilon,
                                                    const sdp::SdpSettings& sdp_settings,
                                                    VerifyFailure* failure) {
  if (epsilon <= 0.0) throw densela::DimensionMismatch("verify_theorem1: epsilon <= 0");
  const auto aug = build_phi(plant, gains);
  const Eigen::Index s = plant.state_dim() * plant.n_drop;
  const Eigen::Index d = triu_count(s);

  // Feasibility SDP in P alone: P - eps*I >= 0 and -(Phi^T P Phi - P) - eps*I >= 0.
  std::vector<sdp::AffineBlock> blocks;
  for (const auto& [key, phi] : aug.phi) {
    sdp::AffineBlock blk;
    blk.f0 = -epsilon * Matrix::Identity(s, s);
    blk.coeffs.reserve(static_cast<size_t>(d));
    for_each_triu(s, [&](Eigen::Index i, Eigen::Index j) {
      const Matrix e = sym_basis(s, i, j);
      blk.coeffs.push_back(e - phi.transpose() * e * phi);
    });
    blocks.push_back(std::move(blk));
  }
  {
    sdp::AffineBlock pd;
    pd.f0 = -epsilon * Matrix::Identity(s, s);
    for_each_triu(s, [&](Eigen::Index i, Eigen::Index j) { pd.coeffs.push_back(sym_basis(s, i, j)); });
    blocks.push_back(std::move(pd));
  }

  const auto phase1 = sdp::sdp_phase1(blocks, d, sdp_settings);
  if (phase1.margin <= 0.0) {
    if (failure) failure->phase1_margin = phase1.margin;
    return std::nullopt;
  }

  Matrix p = Matrix::Zero(s, s);
  Eigen::Index e = 0;
  for_each_triu(s, [&](Eigen::Index i, Eigen::Index j) {
    p(i, j) = phase1.z[e];
    p(j, i) = phase1.z[e];
    ++e;
  });

  StabilityCertificate cert;
  cert.p = p;
  cert.worst_margin = -std::numeric_limits<double>::infinity();
  for (const auto& [key, phi] : aug.phi) {
    Matrix resid = phi.transpose() * p * phi - p;
    resid = 0.5 * (resid + resid.transpose()).eval();
    cert.worst_margin = std::max(cert.worst_margin, densela::max_eigenvalue(resid));
    cert.per_pair_schur[key] = densela::is_schur_stable(phi);
  }
  if (!densela::is_positive_definite(cert.p) || cert.worst_margin >= 0.0) {
    if (failure) failure->phase1_margin = phase1.margin;
    return std::nullopt;
  }
  return cert;
}

Matrix SynthesisVariableMap::extract_p(const Vector& z) const {
  Matrix p = Matrix::Zero(aug_dim, aug_dim);
  Eigen::Index e = p_offset;
  for_each_triu(aug_dim, [&](Eigen::Index i, Eigen::Index j) {
    p(i, j) = z[e];
    p(j, i) = z[e];
    ++e;
  });
  return p;
}

Matrix SynthesisVariableMap::extract_q(const Vector& z) const {
  Matrix q = Matrix::Zero(aug_dim, aug_dim);
  Eigen::Index e = q_offset;
  for_each_triu(aug_dim, [&](Eigen::Index i, Eigen::Index j) {
    q(i, j) = z[e];
    q(j, i) = z[e];
    ++e;
  });
  return q;
}

GainSchedule SynthesisVariableMap::extract_gains(const Vector& z) const {
  GainSchedule gs;
  Eigen::Index e = k_offset;
  for (int q = 0; q < n_drop; ++q) {
    Matrix k = Matrix::Zero(input_dim, state_dim);
    for (Eigen::Index u = 0; u < input_dim; ++u)
      for (Eigen::Index v = 0; v < state_dim; ++v) k(u, v) = z[e++];
    gs.gains.push_back(std::move(k));
  }
  return gs;
}

Vector SynthesisVariableMap::pack(const Matrix& p, const Matrix& q,
                                  const GainSchedule& gains) const {
  Vector z = Vector::Zero(dimension);
  Eigen::Index e = p_offset;
  for_each_triu(aug_dim, [&](Eigen::Index i, Eigen::Index j) { z[e++] = p(i, j); });
  e = q_offset;
  for_each_triu(aug_dim, [&](Eigen::Index i, Eigen::Index j) { z[e++] = q(i, j); });
  e = k_offset;
  for (int qi = 0; qi < n_drop; ++qi)
    for (Eigen::Index u = 0; u < input_dim; ++u)
      for (Eigen::Index v = 0; v < state_dim; ++v)
        z[e++] = gains.gains[static_cast<size_t>(qi)](u, v);
  return z;
}

SynthesisBlocks assemble_synthesis_blocks(const SwitchedPlant& plant, double epsilon) {
  plant.validate();
  if (epsilon <= 0.0) throw densela::DimensionMismatch("assemble_synthesis_blocks: epsilon <= 0");
  const Eigen::Index n = plant.state_dim();
  const Eigen::Index m = plant.input_dim();
  const Eigen::Index s = n * plant.n_drop;
  const Eigen::Index dp = triu_count(s);

  SynthesisBlocks out;
  auto& vars = out.vars;
  vars.aug_dim = s;
  vars.state_dim = n;
  vars.input_dim = m;
  vars.n_drop = plant.n_drop;
  vars.p_offset = 0;
  vars.q_offset = dp;
  vars.k_offset = 2 * dp;
  vars.dimension = 2 * dp + static_cast<Eigen::Index>(plant.n_drop) * m * n;
  const Eigen::Index d = vars.dimension;

  // Per (l, eta): [[P, -Phi^T], [-Phi, Q]] - eps*I >= 0, 2s x 2s.
  for (int l = 1; l <= plant.mode_count(); ++l) {
    const auto& mode = plant.modes[static_cast<size_t>(l - 1)];
    const auto pw = matrix_powers(mode.f, plant.n_drop);
    for (int eta = 1; eta <= plant.n_drop; ++eta) {
      // constant part of Phi (gains zeroed)
      Matrix phi0 = Matrix::Zero(s, s);
      phi0.topLeftCorner(n, n) = pw[static_cast<size_t>(eta)];
      for (int j = 1; j < plant.n_drop; ++j)
        phi0.block(j * n, (j - 1) * n, n, n) = Matrix::Identity(n, n);

      sdp::AffineBlock blk;
      blk.f0 = Matrix::Zero(2 * s, 2 * s);
      blk.f0.topRightCorner(s, s) = -phi0.transpose();
      blk.f0.bottomLeftCorner(s, s) = -phi0;
      blk.f0 -= epsilon * Matrix::Identity(2 * s, 2 * s);
      blk.coeffs.assign(static_cast<size_t>(d), Matrix::Zero(2 * s, 2 * s));

      Eigen::Index e = vars.p_offset;
      for_each_triu(s, [&](Eigen::Index i, Eigen::Index j) {
        blk.coeffs[static_cast<size_t>(e)].topLeftCorner(s, s) = sym_basis(s, i, j);
        ++e;
      });
      e = vars.q_offset;
      for_each_triu(s, [&](Eigen::Index i, Eigen::Index j) {
        blk.coeffs[static_cast<size_t>(e)].bottomRightCorner(s, s) = sym_basis(s, i, j);
        ++e;
      });
      // dPhi/dK_q(u,v) = F^{eta-q} G E_{uv} in the top-left n x n block, q <= eta
      e = vars.k_offset;
      for (int q = 1; q <= plant.n_drop; ++q) {
        for (Eigen::Index u = 0; u < m; ++u)
          for (Eigen::Index v = 0; v < n; ++v) {
            if (q <= eta) {
              Matrix dtop = pw[static_cast<size_t>(eta - q)] * mode.g.col(u) *
                            Matrix::Identity(n, n).row(v);
              Matrix dphi = Matrix::Zero(s, s);
              dphi.topLeftCorner(n, n) = dtop;
              blk.coeffs[static_cast<size_t>(e)].topRightCorner(s, s) = -dphi.transpose();
              blk.coeffs[static_cast<size_t>(e)].bottomLeftCorner(s, s) = -dphi;
            }
            ++e;
          }
      }
      out.blocks.push_back(std::move(blk));
    }
  }

  // [[P, I], [I, Q]] >= 0
  {
    sdp::AffineBlock cc;
    cc.f0 = Matrix::Zero(2 * s, 2 * s);
    cc.f0.topRightCorner(s, s) = Matrix::Identity(s, s);
    cc.f0.bottomLeftCorner(s, s) = Matrix::Identity(s, s);
    cc.coeffs.assign(static_cast<size_t>(d), Matrix::Zero(2 * s, 2 * s));
    Eigen::Index e = vars.p_offset;
    for_each_triu(s, [&](Eigen::Index i, Eigen::Index j) {
      cc.coeffs[static_cast<size_t>(e)].topLeftCorner(s, s) = sym_basis(s, i, j);
      ++e;
    });
    e = vars.q_offset;
    for_each_triu(s, [&](Eigen::Index i, Eigen::Index j) {
      cc.coeffs[static_cast<size_t>(e)].bottomRightCorner(s, s) = sym_basis(s, i, j);
      ++e;
    });
    out.blocks.push_back(std::move(cc));
  }

  // P - eps*I >= 0 and Q - eps*I >= 0
  for (int which = 0; which < 2; ++which) {
    sdp::AffineBlock pd;
    pd.f0 = -epsilon * Matrix::Identity(s, s);
    pd.coeffs.assign(static_cast<size_t>(d), Matrix::Zero(s, s));
    Eigen::Index e = (which == 0) ? vars.p_offset : vars.q_offset;
    for_each_triu(s, [&](Eigen::Index i, Eigen::Index j) {
      pd.coeffs[static_cast<size_t>(e)] = sym_basis(s, i, j);
      ++e;
    });
    out.blocks.push_back(std::move(pd));
  }

  return out;
}

double lyapunov_value(const Matrix& p, const Vector& gamma) {
  densela::require_symmetric(p, "lyapunov_value");
  if (p.rows() != gamma.size())
    throw densela::DimensionMismatch("lyapunov_value: dimension mismatch");
  return gamma.dot(p * gamma);
}

}  // namespace ncskit::ncsmodel
