#include "disloc/linalg/sliced_inertia.hpp"

#include <lapacke.h>

#include <algorithm>

#include "disloc/errors.hpp"

namespace disloc::linalg {

SlicedInertia::SlicedInertia(const Eigen::SparseMatrix<double>& A, std::vector<int> slice_starts)
    : n_(static_cast<int>(A.rows())), starts_(std::move(slice_starts)) {
  if (A.rows() != A.cols()) throw ValidationError("inertia needs a square matrix");
  if (starts_.empty() || starts_.front() != 0) throw ValidationError("slices must start at 0");
  starts_.push_back(n_);
  const int ns = static_cast<int>(starts_.size()) - 1;
  std::vector<int> slice_of(n_), local(n_);
  for (int s = 0; s < ns; ++s) {
    if (starts_[s + 1] <= starts_[s]) throw ValidationError("slices must be non-empty and ascending");
    for (int i = starts_[s]; i < starts_[s + 1]; ++i) {
      slice_of[i] = s;
      local[i] = i - starts_[s];
    }
  }
  diag_entries_.resize(ns);
  couplings_.resize(ns);
  for (int c = 0; c < A.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, c); it; ++it) {
      const int r = static_cast<int>(it.row()), col = static_cast<int>(it.col());
      const int sr = slice_of[r], sc = slice_of[col];
      if (sr == sc) {
        diag_entries_[sr].push_back({local[r], local[col], it.value()});
      } else if (sc == sr + 1) {
        couplings_[sr].push_back({local[r], local[col], it.value()});
      } else if (sr != sc + 1) {
        throw ValidationError("matrix couples non-adjacent slices");
      }
    }
}

Eigen::MatrixXd SlicedInertia::shifted_block(int s, double sigma) const {
  const int m = starts_[s + 1] - starts_[s];
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
  for (const auto& e : diag_entries_[s]) B(e.row, e.col) += e.value;
  B.diagonal().array() -= sigma;
  return B;
}

int SlicedInertia::count_below_raw(double sigma) const {
  const int ns = static_cast<int>(diag_entries_.size());
  int neg = 0;
  Eigen::MatrixXd S = shifted_block(0, sigma);
  std::vector<lapack_int> ipiv;
  for (int s = 0; s < ns; ++s) {
    const lapack_int m = static_cast<lapack_int>(S.rows());
    ipiv.assign(m, 0);
    lapack_int info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', m, S.data(), m, ipiv.data());
    if (info < 0) throw NumericalError("dsytrf rejected its arguments");
    if (info > 0) return -1;
    for (lapack_int k = 0; k < m; ++k) {
      if (ipiv[k] > 0) {
        const double d = S(k, k);
        if (d == 0.0) return -1;
        if (d < 0.0) ++neg;
      } else {
        // 2x2 pivot block occupying rows k, k+1.
        const double a = S(k, k), b = S(k + 1, k), c = S(k + 1, k + 1);
        const double det = a * c - b * b;
        if (det == 0.0) return -1;
        neg += det < 0.0 ? 1 : (a < 0.0 ? 2 : 0);
        ++k;
      }
    }
    if (s + 1 == ns) break;
    const auto& B = couplings_[s];
    Eigen::MatrixXd next = shifted_block(s + 1, sigma);
    if (!B.empty()) {
      info = LAPACKE_dsytri(LAPACK_COL_MAJOR, 'L', m, S.data(), m, ipiv.data());
      if (info != 0) return -1;
      auto inv = [&](int i, int j) { return i >= j ? S(i, j) : S(j, i); };
      for (const auto& p : B)
        for (const auto& q : B) next(p.col, q.col) -= p.value * q.value * inv(p.row, q.row);
    }
    S = std::move(next);
  }
  return neg;
}

int SlicedInertia::count_below(double sigma) const {
  int c = count_below_raw(sigma);
  if (c < 0) c = count_below_raw(sigma + 1e-9);
  if (c < 0) throw NumericalError("zero pivot in inertia count; choose a different interval endpoint");
  return c;
}

int SlicedInertia::count_in(double lo, double hi) const {
  if (!(hi > lo)) return 0;
  return count_below(hi) - count_below(lo);
}

Eigen::SparseMatrix<double> doubled_hermitian(const Eigen::SparseMatrix<std::complex<double>>& A,
                                              const std::vector<int>& slice_starts,
                                              std::vector<int>& doubled_starts) {
  const int n = static_cast<int>(A.rows());
  std::vector<int> starts = slice_starts;
  starts.push_back(n);
  // Within slice s: real parts first, then imaginary parts.
  std::vector<int> re(n), im(n);
  doubled_starts.clear();
  for (std::size_t s = 0; s + 1 < starts.size(); ++s) {
    const int m = starts[s + 1] - starts[s];
    doubled_starts.push_back(2 * starts[s]);
    for (int i = starts[s]; i < starts[s + 1]; ++i) {
      re[i] = 2 * starts[s] + (i - starts[s]);
      im[i] = re[i] + m;
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * A.nonZeros());
  for (int c = 0; c < A.outerSize(); ++c)
    for (Eigen::SparseMatrix<std::complex<double>>::InnerIterator it(A, c); it; ++it) {
      const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
      const double a = it.value().real(), b = it.value().imag();
      if (a != 0.0) {
        trip.emplace_back(re[i], re[j], a);
        trip.emplace_back(im[i], im[j], a);
      }
      if (b != 0.0) {
        trip.emplace_back(re[i], im[j], -b);
        trip.emplace_back(im[i], re[j], b);
      }
    }
  Eigen::SparseMatrix<double> D(2 * n, 2 * n);
  D.setFromTriplets(trip.begin(), trip.end());
  return D;
}

}  // namespace disloc::linalg
