#include "ncskit/densela.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace ncskit::densela {

Matrix make_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw DimensionMismatch("matrix needs at least one row");
  const auto cols = rows.front().size();
  if (cols == 0) throw DimensionMismatch("matrix needs at least one column");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw DimensionMismatch("ragged matrix rows");
    for (size_t j = 0; j < cols; ++j) {
      if (!std::isfinite(rows[i][j])) throw NotFinite("non-finite matrix entry");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void require_finite(const Matrix& a, const std::string& what) {
  if (!a.allFinite()) throw NotFinite(what + ": non-finite entry");
}

bool is_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

void require_symmetric(const Matrix& a, const std::string& what) {
  if (a.rows() != a.cols()) throw DimensionMismatch(what + ": not square");
  if (!is_symmetric(a)) throw NotSymmetric(what + ": matrix not symmetric");
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("matmul: inner dimensions differ");
  return a * b;
}

Matrix cholesky(const Matrix& a) {
  require_symmetric(a, "cholesky");
  const Eigen::Index n = a.rows();
  const double pivot_floor = kCholeskyPivotRelTol * a.cwiseAbs().maxCoeff();
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (d <= pivot_floor) throw NotPositiveDefinite("cholesky: pivot below tolerance");
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double s = a(i, j) - l.row(i).head(j).dot(l.row(j).head(j));
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

bool is_positive_definite(const Matrix& a) {
  try {
    cholesky(a);
    return true;
  } catch (const NotPositiveDefinite&) {
    return false;
  }
}

SymEigResult eig_sym(const Matrix& a) {
  require_symmetric(a, "eig_sym");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) throw Singular("eig_sym: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

double min_eigenvalue(const Matrix& a) {
  return eig_sym(a).eigenvalues.minCoeff();
}

double max_eigenvalue(const Matrix& a) {
  return eig_sym(a).eigenvalues.maxCoeff();
}

std::pair<std::complex<double>, std::complex<double>> eig_2x2(const Matrix& a) {
  if (a.rows() != 2 || a.cols() != 2) throw DimensionMismatch("eig_2x2: matrix must be 2x2");
  const double tr = a(0, 0) + a(1, 1);
  const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  const double disc = tr * tr - 4.0 * det;
  if (disc >= 0.0) {
    // larger-magnitude root first via the stable form, the other from det
    const double s = std::sqrt(disc);
    const double r1 = 0.5 * (tr + (tr >= 0.0 ? s : -s));
    const double r2 = (r1 != 0.0) ? det / r1 : 0.5 * (tr - (tr >= 0.0 ? s : -s));
    return {std::complex<double>(r1, 0.0), std::complex<double>(r2, 0.0)};
  }
  const double im = 0.5 * std::sqrt(-disc);
  return {std::complex<double>(0.5 * tr, im), std::complex<double>(0.5 * tr, -im)};
}

Matrix lin_solve(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols()) throw DimensionMismatch("lin_solve: a not square");
  if (b.rows() != a.rows()) throw DimensionMismatch("lin_solve: rhs row count differs");
  Eigen::PartialPivLU<Matrix> lu(a);
  const double pivot_floor = kPivotRelTol * a.cwiseAbs().maxCoeff();
  if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() <= pivot_floor)
    throw Singular("lin_solve: pivot below tolerance");
  return lu.solve(b);
}

Matrix matexp(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("matexp: matrix not square");
  return a.exp();
}

Matrix discrete_lyapunov(const Matrix& phi) {
  if (phi.rows() != phi.cols()) throw DimensionMismatch("discrete_lyapunov: not square");
  const Eigen::Index n = phi.rows();
  if (n * n > 400) throw DimensionMismatch("discrete_lyapunov: size beyond desk scale");
  const Matrix phit = phi.transpose();
  Matrix sys = Matrix::Identity(n * n, n * n) - Eigen::kroneckerProduct(phit, phit);
  Matrix rhs = Matrix::Identity(n, n).reshaped(n * n, 1);
  Matrix vec_p = lin_solve(sys, rhs);
  Matrix p = vec_p.reshaped(n, n);
  return 0.5 * (p + p.transpose());
}

bool is_schur_stable(const Matrix& phi) {
  try {
    return is_positive_definite(discrete_lyapunov(phi));
  } catch (const Singular&) {
    return false;
  }
}

}  // namespace ncskit::densela
