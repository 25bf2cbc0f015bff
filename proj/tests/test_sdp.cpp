#include <doctest.h>

#include "ncskit/sdp.hpp"

#include <cmath>
#include <random>

using namespace ncskit;
using densela::Matrix;
using densela::Vector;
using sdp::AffineBlock;
using sdp::SdpProblem;
using sdp::SdpSettings;
using sdp::SdpStatus;

namespace {

std::mt19937_64 rng(77001);

double unif(double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

AffineBlock scalar_block(double f0, std::vector<double> coeffs) {
  AffineBlock b;
  b.f0 = Matrix::Constant(1, 1, f0);
  for (double c : coeffs) b.coeffs.push_back(Matrix::Constant(1, 1, c));
  return b;
}

Matrix random_sym2(double scale) {
  Matrix m(2, 2);
  m(0, 0) = unif(-scale, scale);
  m(1, 1) = unif(-scale, scale);
  m(0, 1) = m(1, 0) = unif(-scale, scale);
  return m;
}

double min_eig2(const Matrix& s) {
  const double tr = s(0, 0) + s(1, 1);
  const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  return 0.5 * tr - std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
}

}  // namespace

TEST_CASE("sdp_solve: PSD arrow block forces z >= 1") {
  // [[z, 1], [1, z]] >= 0 iff z >= 0 and z^2 >= 1
  SdpProblem p;
  p.dimension = 1;
  p.objective = Vector::Constant(1, 1.0);
  AffineBlock b;
  b.f0 = densela::make_matrix({{0, 1}, {1, 0}});
  b.coeffs = {Matrix::Identity(2, 2)};
  p.blocks = {b};
  auto sol = sdp::sdp_solve(p);
  REQUIRE(sol.status == SdpStatus::Optimal);
  CHECK(std::abs(sol.z[0] - 1.0) < 1e-6);
  CHECK(std::abs(sol.objective_value - 1.0) < 1e-6);
}

TEST_CASE("sdp_solve: maximize over the feasible interval [0, 1]") {
  SdpProblem p;
  p.dimension = 1;
  p.objective = Vector::Constant(1, -1.0);
  AffineBlock b;
  b.f0 = densela::make_matrix({{1, 0}, {0, 0}});
  b.coeffs = {densela::make_matrix({{-1, 0}, {0, 1}})};  // diag(1 - z, z)
  p.blocks = {b};
  auto sol = sdp::sdp_solve(p);
  REQUIRE(sol.status == SdpStatus::Optimal);
  CHECK(std::abs(sol.z[0] - 1.0) < 1e-6);
}

TEST_CASE("sdp_solve: contradictory scalar bounds are infeasible") {
  SdpProblem p;
  p.dimension = 1;
  p.objective = Vector::Constant(1, 1.0);
  p.blocks = {scalar_block(-1.0, {1.0}), scalar_block(0.0, {-1.0})};  // z >= 1 and z <= 0
  auto sol = sdp::sdp_solve(p);
  CHECK(sol.status == SdpStatus::Infeasible);
}

TEST_CASE("sdp_phase1: balanced margin for diag(z, 1-z)") {
  AffineBlock b;
  b.f0 = densela::make_matrix({{0, 0}, {0, 1}});
  b.coeffs = {densela::make_matrix({{1, 0}, {0, -1}})};
  auto res = sdp::sdp_phase1({b}, 1);
  CHECK(std::abs(res.margin - 0.5) < 1e-6);
  CHECK(std::abs(res.z[0] - 0.5) < 1e-6);
}

TEST_CASE("sdp_phase1: constant feasible block clamps at the margin cap") {
  AffineBlock b;
  b.f0 = Matrix::Identity(3, 3);
  auto res = sdp::sdp_phase1({b}, 0);
  CHECK(std::abs(res.margin - 1.0) < 1e-6);
}

TEST_CASE("sdp_phase1: symmetric infeasibility certificate") {
  auto res = sdp::sdp_phase1({scalar_block(-1.0, {1.0}), scalar_block(0.0, {-1.0})}, 1);
  CHECK(std::abs(res.margin - (-0.5)) < 1e-6);
  CHECK(std::abs(res.z[0] - 0.5) < 1e-6);
}

TEST_CASE("feasibility honesty: recomputed eigenvalues respect the tolerance") {
  SdpSettings settings;
  int solved = 0;
  for (int it = 0; it < 200 && solved < 100; ++it) {
    const int d = 1 + static_cast<int>(rng() % 3);
    SdpProblem p;
    p.dimension = d;
    p.objective = Vector::Zero(d);
    for (int i = 0; i < d; ++i) p.objective[i] = unif(-1, 1);
    AffineBlock b;
    b.f0 = random_sym2(1.0);
    b.f0 += (1.0 - min_eig2(b.f0)) * Matrix::Identity(2, 2);  // z = 0 strictly feasible
    for (int i = 0; i < d; ++i) b.coeffs.push_back(random_sym2(1.0));
    p.blocks = {b};
    // small explicit box keeps the optimum finite
    for (int i = 0; i < d; ++i) {
      std::vector<double> ci(static_cast<size_t>(d), 0.0);
      ci[static_cast<size_t>(i)] = 1.0;
      p.blocks.push_back(scalar_block(2.0, ci));
      ci[static_cast<size_t>(i)] = -1.0;
      p.blocks.push_back(scalar_block(2.0, ci));
    }
    auto sol = sdp::sdp_solve(p, settings);
    if (sol.status != SdpStatus::Optimal && sol.status != SdpStatus::Feasible) continue;
    ++solved;
    double recomputed = std::numeric_limits<double>::infinity();
    for (const auto& blk : p.blocks) {
      Matrix s = blk.evaluate(sol.z);
      recomputed = std::min(recomputed, densela::eig_sym(0.5 * (s + s.transpose())).eigenvalues.minCoeff());
    }
    CHECK(recomputed >= -settings.feas_tol);
  }
  CHECK(solved == 100);
}

TEST_CASE("objective history is non-increasing once feasible") {
  SdpSettings settings;
  for (int it = 0; it < 100; ++it) {
    const int d = 1 + static_cast<int>(rng() % 3);
    SdpProblem p;
    p.dimension = d;
    p.objective = Vector::Zero(d);
    for (int i = 0; i < d; ++i) p.objective[i] = unif(-1, 1);
    AffineBlock b;
    b.f0 = random_sym2(1.0);
    b.f0 += (1.0 - min_eig2(b.f0)) * Matrix::Identity(2, 2);
    for (int i = 0; i < d; ++i) b.coeffs.push_back(random_sym2(1.0));
    p.blocks = {b};
    for (int i = 0; i < d; ++i) {
      std::vector<double> ci(static_cast<size_t>(d), 0.0);
      ci[static_cast<size_t>(i)] = 1.0;
      p.blocks.push_back(scalar_block(2.0, ci));
      ci[static_cast<size_t>(i)] = -1.0;
      p.blocks.push_back(scalar_block(2.0, ci));
    }
    auto sol = sdp::sdp_solve(p, settings);
    if (sol.status != SdpStatus::Optimal) continue;
    for (size_t i = 1; i < sol.objective_history.size(); ++i)
      CHECK(sol.objective_history[i] <= sol.objective_history[i - 1] + 10.0 * settings.gap_tol);
  }
}

TEST_CASE("argmin is invariant to positive objective scaling") {
  SdpProblem p;
  p.dimension = 2;
  p.objective = Vector::Zero(2);
  p.objective << 1.0, 0.5;
  AffineBlock b;
  b.f0 = densela::make_matrix({{2, 0.3}, {0.3, 1.5}});
  b.coeffs = {densela::make_matrix({{1, 0}, {0, 0.5}}),
              densela::make_matrix({{0.2, 0.1}, {0.1, 1.0}})};
  p.blocks = {b, scalar_block(3.0, {1.0, 0.0}), scalar_block(3.0, {-1.0, 0.0}),
              scalar_block(3.0, {0.0, 1.0}), scalar_block(3.0, {0.0, -1.0})};
  auto sol1 = sdp::sdp_solve(p);
  REQUIRE(sol1.status == SdpStatus::Optimal);
  SdpProblem p2 = p;
  p2.objective *= 7.5;
  auto sol2 = sdp::sdp_solve(p2);
  REQUIRE(sol2.status == SdpStatus::Optimal);
  CHECK((sol1.z - sol2.z).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("random problems agree with hierarchical grid search") {
  int solved = 0;
  for (int it = 0; it < 250 && solved < 100; ++it) {
    const int d = 1 + static_cast<int>(rng() % 3);
    SdpProblem p;
    p.dimension = d;
    p.objective = Vector::Zero(d);
    for (int i = 0; i < d; ++i) p.objective[i] = unif(-1, 1);
    AffineBlock b;
    b.f0 = random_sym2(1.0);
    b.f0 += (0.5 - min_eig2(b.f0)) * Matrix::Identity(2, 2);
    for (int i = 0; i < d; ++i) b.coeffs.push_back(random_sym2(1.0));
    p.blocks = {b};
    for (int i = 0; i < d; ++i) {
      std::vector<double> ci(static_cast<size_t>(d), 0.0);
      ci[static_cast<size_t>(i)] = 1.0;
      p.blocks.push_back(scalar_block(2.0, ci));
      ci[static_cast<size_t>(i)] = -1.0;
      p.blocks.push_back(scalar_block(2.0, ci));
    }
    auto sol = sdp::sdp_solve(p);
    if (sol.status != SdpStatus::Optimal) continue;
    ++solved;

    // refine a grid around the incumbent; convexity makes this converge to
    // the global optimum of the boxed problem
    auto feasible = [&](const Vector& z, double slack) {
      for (int i = 0; i < d; ++i)
        if (std::abs(z[i]) > 2.0 + slack) return false;
      Matrix s = b.evaluate(z);
      return min_eig2(0.5 * (s + s.transpose())) >= -slack;
    };
    Vector center = Vector::Zero(d);
    double radius = 2.0;
    double best = std::numeric_limits<double>::infinity();
    Vector bestz = center;
    const int steps = 21;
    for (int pass = 0; pass < 24; ++pass) {
      const double step = 2.0 * radius / (steps - 1.0);
      std::vector<int> idx(static_cast<size_t>(d), 0);
      while (true) {
        Vector z(d);
        for (int i = 0; i < d; ++i)
          z[i] = center[i] + step * idx[static_cast<size_t>(i)] - radius;
        if (feasible(z, 1e-4)) {
          const double v = p.objective.dot(z);
          if (v < best) {
            best = v;
            bestz = z;
          }
        }
        int carry = 0;
        while (carry < d && ++idx[static_cast<size_t>(carry)] == steps) {
          idx[static_cast<size_t>(carry)] = 0;
          ++carry;
        }
        if (carry == d) break;
      }
      center = bestz;
      radius *= 0.7;
    }
    CHECK(std::abs(best - sol.objective_value) < 1e-3 * (1.0 + std::abs(best)));
  }
  CHECK(solved == 100);
}
