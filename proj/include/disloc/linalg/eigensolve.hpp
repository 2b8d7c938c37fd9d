#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstdint>
#include <vector>

namespace disloc::linalg {

struct EigOptions {
  int dense_limit = 1500;        // dense solve at or below this dimension
  int block_size = 4;
  int max_basis = 900;           // Krylov vectors before giving up
  double ritz_tol = 1e-10;       // relative residual of the shift-inverted operator
  double residual_tol = 1e-6;    // ||A x - lambda x|| / max(1, |lambda|) acceptance
  std::uint64_t seed = 0x5eedu;
};

template <class Scalar>
struct EigenPairs {
  std::vector<double> values;  // ascending
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;  // unit columns
  double max_residual = 0.0;
};

// The `count` eigenvalues of the Hermitian matrix A closest to sigma, with
// eigenvectors, by shift-invert block Lanczos (or a dense solve for small A).
template <class Scalar>
EigenPairs<Scalar> eigenpairs_near(const Eigen::SparseMatrix<Scalar>& A, double sigma, int count,
                                   const EigOptions& opt = {});

// All eigenvalues in [lo, hi]; `expected` is their number (from inertia).
template <class Scalar>
EigenPairs<Scalar> eigenpairs_in_window(const Eigen::SparseMatrix<Scalar>& A, double lo, double hi,
                                        int expected, const EigOptions& opt = {});

// Full dense spectrum, for cross-checks.
template <class Scalar>
std::vector<double> dense_eigenvalues(const Eigen::SparseMatrix<Scalar>& A);

}  // namespace disloc::linalg
