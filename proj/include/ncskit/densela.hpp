#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Dense real matrix kernel shared by the whole toolkit. Eigen carries the
// heavy lifting (LU, LLT, self-adjoint eigensolver, Pade matrix exponential);
// this layer fixes the tolerances and error contracts the rest of the code
// relies on.

namespace ncskit::densela {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NotSymmetric : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Singular : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotFinite : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kSymmetryRelTol = 1e-12;
inline constexpr double kPivotRelTol = 1e-14;
inline constexpr double kCholeskyPivotRelTol = 1e-12;

// Validating constructor for matrices arriving from files or user input:
// rejects NaN/Inf and ragged rows.
Matrix make_matrix(const std::vector<std::vector<double>>& rows);

void require_finite(const Matrix& a, const std::string& what);
bool is_symmetric(const Matrix& a, double rel_tol = kSymmetryRelTol);
void require_symmetric(const Matrix& a, const std::string& what);

Matrix matmul(const Matrix& a, const Matrix& b);

// Lower-triangular L with L*L^T = a. Throws NotPositiveDefinite when a pivot
// falls below kCholeskyPivotRelTol * max|a|.
Matrix cholesky(const Matrix& a);

bool is_positive_definite(const Matrix& a);

struct SymEigResult {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // orthonormal columns
};

SymEigResult eig_sym(const Matrix& a);

double min_eigenvalue(const Matrix& a);
double max_eigenvalue(const Matrix& a);

// Roots of lambda^2 - tr*lambda + det, cancellation-free.
std::pair<std::complex<double>, std::complex<double>> eig_2x2(const Matrix& a);

// Solves a*X = b by partial-pivot LU.
Matrix lin_solve(const Matrix& a, const Matrix& b);

// Scaling-and-squaring with diagonal Pade approximant.
Matrix matexp(const Matrix& a);

// Unique P with Phi^T P Phi - P = -I, via the Kronecker linear system
// (I - Phi^T (x) Phi^T) vec(P) = vec(I). Throws Singular when an eigenvalue
// product of Phi sits on the unit circle.
Matrix discrete_lyapunov(const Matrix& phi);

// Schur stability decided through the Lyapunov solve plus a PD test; no
// general nonsymmetric eigensolver needed.
bool is_schur_stable(const Matrix& phi);

}  // namespace ncskit::densela
