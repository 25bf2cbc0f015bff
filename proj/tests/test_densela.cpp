#include <doctest.h>

#include "ncskit/densela.hpp"
#include "ncskit/demo_dc_motor.hpp"

#include <cmath>
#include <random>

using namespace ncskit;
using densela::Matrix;

namespace {

std::mt19937_64 rng(20240811);

double unif(double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = unif(-scale, scale);
  return m;
}

Matrix random_symmetric(Eigen::Index n, double scale = 1.0) {
  Matrix m = random_matrix(n, n, scale);
  return 0.5 * (m + m.transpose());
}

// independent oracle: naive row-column dot products
Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c = Matrix::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      for (Eigen::Index k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
  return c;
}

}  // namespace

TEST_CASE("matmul basics") {
  Matrix m = random_matrix(3, 3);
  CHECK((densela::matmul(Matrix::Identity(3, 3), m) - m).cwiseAbs().maxCoeff() == 0.0);

  Matrix a = densela::make_matrix({{1, 2}, {3, 4}});
  Matrix perm = densela::make_matrix({{0, 1}, {1, 0}});
  Matrix expect = densela::make_matrix({{2, 1}, {4, 3}});
  CHECK((densela::matmul(a, perm) - expect).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(densela::matmul(random_matrix(2, 3), random_matrix(2, 3)),
                  densela::DimensionMismatch);
}

TEST_CASE("matmul agrees with the naive oracle on the demo F1") {
  const Matrix f1 = demo::reference_discretization_h01()[0].f;
  CHECK((densela::matmul(f1, f1) - naive_matmul(f1, f1)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("cholesky") {
  CHECK((densela::cholesky(Matrix::Identity(4, 4)) - Matrix::Identity(4, 4)).norm() == 0.0);

  // hand expansion of L L^T
  Matrix a = densela::make_matrix({{4, 2}, {2, 3}});
  Matrix l = densela::cholesky(a);
  CHECK(l(0, 0) == doctest::Approx(2.0));
  CHECK(l(0, 1) == 0.0);
  CHECK(l(1, 0) == doctest::Approx(1.0));
  CHECK(l(1, 1) == doctest::Approx(std::sqrt(2.0)));
  CHECK((l * l.transpose() - a).cwiseAbs().maxCoeff() < 1e-10 * a.cwiseAbs().maxCoeff());

  CHECK_THROWS_AS(densela::cholesky(densela::make_matrix({{0, 1}, {1, 0}})),
                  densela::NotPositiveDefinite);
  CHECK_THROWS_AS(densela::cholesky(densela::make_matrix({{1, 2}, {0, 1}})),
                  densela::NotSymmetric);
}

TEST_CASE("cholesky success tracks the eigenvalue sign, outside a margin band") {
  int checked = 0;
  for (int it = 0; it < 200 && checked < 100; ++it) {
    Matrix a = random_symmetric(4);
    const double scale = a.cwiseAbs().maxCoeff();
    const double lam = densela::min_eigenvalue(a);
    if (std::abs(lam) < 1e-10 * scale) continue;  // skip the borderline band
    ++checked;
    CHECK(densela::is_positive_definite(a) == (lam > 1e-11 * scale));
  }
  CHECK(checked == 100);
}

TEST_CASE("eig_sym") {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 3, 1, 2;
  auto r = densela::eig_sym(d);
  CHECK(r.eigenvalues[0] == doctest::Approx(1));
  CHECK(r.eigenvalues[1] == doctest::Approx(2));
  CHECK(r.eigenvalues[2] == doctest::Approx(3));

  auto r2 = densela::eig_sym(densela::make_matrix({{2, 1}, {1, 2}}));
  CHECK(r2.eigenvalues[0] == doctest::Approx(1));  // lambda^2 - 4 lambda + 3
  CHECK(r2.eigenvalues[1] == doctest::Approx(3));

  auto r6 = densela::eig_sym(Matrix::Identity(6, 6));
  for (int i = 0; i < 6; ++i) CHECK(r6.eigenvalues[i] == doctest::Approx(1));

  CHECK_THROWS_AS(densela::eig_sym(densela::make_matrix({{1, 2}, {0, 1}})),
                  densela::NotSymmetric);
}

TEST_CASE("eig_sym reconstruction and orthonormality") {
  for (int it = 0; it < 100; ++it) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 6);
    Matrix a = random_symmetric(n, 3.0);
    auto r = densela::eig_sym(a);
    const Matrix v = r.eigenvectors;
    CHECK((v.transpose() * v - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    Matrix recon = v * r.eigenvalues.asDiagonal() * v.transpose();
    CHECK((recon - a).cwiseAbs().maxCoeff() < 1e-9);
    for (Eigen::Index j = 0; j < n; ++j)
      CHECK((a * v.col(j) - r.eigenvalues[j] * v.col(j)).cwiseAbs().maxCoeff() <
            1e-8 * std::max(1.0, a.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("eig_2x2 reproduces the demo mode eigenvalues") {
  auto refs = demo::reference_discretization_h01();
  auto [a1, a2] = densela::eig_2x2(refs[0].f);
  CHECK(std::abs(a1.real() - 0.67) < 5e-4);
  CHECK(std::abs(a2.real() - 0.5137) < 5e-4);
  CHECK(a1.imag() == 0.0);

  auto [c1, c2] = densela::eig_2x2(refs[2].f);
  CHECK(std::abs(c1.real() - 0.6701) < 5e-4);
  CHECK(std::abs(c2.real() - 0.1354) < 5e-4);

  auto [r1, r2] = densela::eig_2x2(densela::make_matrix({{0, 1}, {-1, 0}}));
  CHECK(r1 == std::complex<double>(0, 1));
  CHECK(r2 == std::complex<double>(0, -1));

  CHECK_THROWS_AS(densela::eig_2x2(Matrix::Identity(3, 3)), densela::DimensionMismatch);
}

TEST_CASE("lin_solve") {
  Matrix b = random_matrix(5, 2);
  CHECK((densela::lin_solve(Matrix::Identity(5, 5), b) - b).cwiseAbs().maxCoeff() == 0.0);

  Matrix x = densela::lin_solve(densela::make_matrix({{2, 0}, {0, 4}}),
                                densela::make_matrix({{2}, {8}}));
  CHECK(x(0, 0) == doctest::Approx(1));
  CHECK(x(1, 0) == doctest::Approx(2));

  CHECK_THROWS_AS(densela::lin_solve(Matrix::Zero(3, 3), Matrix::Identity(3, 3)),
                  densela::Singular);

  for (int it = 0; it < 100; ++it) {
    Matrix a = random_matrix(8, 8) + 8.0 * Matrix::Identity(8, 8);  // well conditioned
    Matrix rhs = random_matrix(8, 3);
    Matrix sol = densela::lin_solve(a, rhs);
    CHECK((densela::matmul(a, sol) - rhs).cwiseAbs().maxCoeff() <
          1e-10 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("matexp basics") {
  CHECK((densela::matexp(Matrix::Zero(3, 3)) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <
        1e-15);

  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << -0.4, -0.6667;
  Matrix e = densela::matexp(d);
  CHECK(std::abs(e(0, 0) - 0.6703) < 1e-4);
  CHECK(std::abs(e(1, 1) - 0.5134) < 1e-4);

  const Matrix a1 = demo::dc_motor_model().continuous_modes[0].a;
  const Matrix f1 = demo::reference_discretization_h01()[0].f;
  CHECK((densela::matexp(a1 * 0.1) - f1).cwiseAbs().maxCoeff() < 5e-5);
}

TEST_CASE("matexp inverse identity") {
  for (int it = 0; it < 100; ++it) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 5);
    Matrix a = random_matrix(n, n, 1.5);
    if (a.cwiseAbs().colwise().sum().maxCoeff() > 10.0) a *= 10.0 / a.cwiseAbs().colwise().sum().maxCoeff();
    Matrix prod = densela::matexp(a) * densela::matexp(-a);
    CHECK((prod - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("discrete_lyapunov") {
  Matrix p = densela::discrete_lyapunov(densela::make_matrix({{0.5}}));
  CHECK(p(0, 0) == doctest::Approx(4.0 / 3.0));  // 0.25 p - p = -1

  CHECK((densela::discrete_lyapunov(Matrix::Zero(4, 4)) - Matrix::Identity(4, 4))
            .cwiseAbs()
            .maxCoeff() < 1e-12);

  CHECK_THROWS_AS(densela::discrete_lyapunov(Matrix::Identity(3, 3)), densela::Singular);
}

TEST_CASE("discrete_lyapunov residual stays small") {
  int checked = 0;
  for (int it = 0; it < 300 && checked < 100; ++it) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 5);
    Matrix phi = random_matrix(n, n, 0.6);
    try {
      Matrix p = densela::discrete_lyapunov(phi);
      ++checked;
      Matrix resid = phi.transpose() * p * phi - p + Matrix::Identity(n, n);
      CHECK(resid.cwiseAbs().maxCoeff() < 1e-8);
    } catch (const densela::Singular&) {
    }
  }
  CHECK(checked == 100);
}

TEST_CASE("is_schur_stable") {
  CHECK(densela::is_schur_stable(demo::reference_discretization_h01()[0].f));
  CHECK_FALSE(densela::is_schur_stable(Matrix::Identity(3, 3)));
  CHECK(densela::is_schur_stable(0.5 * Matrix::Identity(6, 6)));
}

TEST_CASE("is_schur_stable agrees with the 2x2 eigenvalue oracle") {
  int checked = 0;
  for (int it = 0; it < 400 && checked < 100; ++it) {
    Matrix phi = random_matrix(2, 2, 1.2);
    auto [e1, e2] = densela::eig_2x2(phi);
    const double radius = std::max(std::abs(e1), std::abs(e2));
    if (std::abs(radius - 1.0) < 1e-6) continue;  // margin band around the unit circle
    ++checked;
    CHECK(densela::is_schur_stable(phi) == (radius < 1.0));
  }
  CHECK(checked == 100);
}

TEST_CASE("make_matrix rejects bad input") {
  CHECK_THROWS_AS(densela::make_matrix({{1.0, 2.0}, {3.0}}), densela::DimensionMismatch);
  CHECK_THROWS_AS(densela::make_matrix({{1.0, std::nan("")}}), densela::NotFinite);
  CHECK_THROWS_AS(densela::make_matrix({}), densela::DimensionMismatch);
}
