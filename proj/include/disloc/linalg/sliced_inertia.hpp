#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <vector>

namespace disloc::linalg {

// Inertia of a real symmetric sparse matrix whose unknowns are grouped into
// consecutive slices, with nonzeros only inside a slice or between adjacent
// slices. Block Gaussian elimination along the slices gives the Schur
// complements S_{k+1} = A_{k+1} - B_k^T S_k^{-1} B_k; each dense S_k is
// factored by Bunch-Kaufman and the negative eigenvalues of its block
// diagonal factor are summed.
class SlicedInertia {
 public:
  // slice_starts: ascending offsets, first 0, one past the last slice omitted.
  SlicedInertia(const Eigen::SparseMatrix<double>& A, std::vector<int> slice_starts);

  // Eigenvalues strictly below sigma, or -1 if a pivot vanished.
  int count_below_raw(double sigma) const;
  // Retries once at sigma + 1e-9 on a zero pivot, then throws NumericalError.
  int count_below(double sigma) const;
  // Eigenvalues in [lo, hi), counted with multiplicity.
  int count_in(double lo, double hi) const;

  int dimension() const { return n_; }

 private:
  struct Coupling {
    int row, col;  // local indices; for couplings, row in slice k and col in slice k+1
    double value;
  };
  Eigen::MatrixXd shifted_block(int s, double sigma) const;

  int n_ = 0;
  std::vector<int> starts_;
  std::vector<std::vector<Coupling>> diag_entries_;  // sparse, densified per count
  std::vector<std::vector<Coupling>> couplings_;  // between slice k and k+1
};

// Real symmetric doubling [[Re, -Im], [Im, Re]] of a Hermitian matrix; every
// eigenvalue appears twice. Slices are doubled in place so adjacency holds.
Eigen::SparseMatrix<double> doubled_hermitian(const Eigen::SparseMatrix<std::complex<double>>& A,
                                              const std::vector<int>& slice_starts,
                                              std::vector<int>& doubled_starts);

}  // namespace disloc::linalg
