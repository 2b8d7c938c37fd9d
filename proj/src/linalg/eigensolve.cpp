#include "disloc/linalg/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "disloc/errors.hpp"

namespace disloc::linalg {

namespace {

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct SplitMix {
  std::uint64_t state;
  double next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  }
};

template <class Scalar>
Scalar random_scalar(SplitMix& rng) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return rng.next();
  } else {
    const double re = rng.next();
    return Scalar(re, rng.next());
  }
}

template <class Scalar>
double residual_of(const Eigen::SparseMatrix<Scalar>& A, const Vec<Scalar>& x, double lambda) {
  Vec<Scalar> r = A * x - lambda * x;
  return r.norm() / std::max(1.0, std::abs(lambda));
}

template <class Scalar>
EigenPairs<Scalar> dense_near(const Eigen::SparseMatrix<Scalar>& A, double sigma, int count) {
  Mat<Scalar> D = Mat<Scalar>(A);
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(D);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
  const int n = static_cast<int>(D.rows());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(es.eigenvalues()[a] - sigma) < std::abs(es.eigenvalues()[b] - sigma);
  });
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  EigenPairs<Scalar> out;
  out.vectors.resize(n, count);
  for (int i = 0; i < count; ++i) {
    out.values.push_back(es.eigenvalues()[idx[i]]);
    out.vectors.col(i) = es.eigenvectors().col(idx[i]);
    out.max_residual = std::max(out.max_residual, residual_of<Scalar>(A, out.vectors.col(i), out.values.back()));
  }
  return out;
}

// Orthonormalize the columns of W against V (first k columns) and among
// themselves; columns that collapse are replaced by random directions.
template <class Scalar>
Mat<Scalar> orthonormalize(Mat<Scalar>& W, const Mat<Scalar>& V, int k, SplitMix& rng) {
  const int b = static_cast<int>(W.cols());
  Mat<Scalar> R = Mat<Scalar>::Zero(b, b);
  for (int c = 0; c < b; ++c) {
    const double original = W.col(c).norm();
    for (int pass = 0; pass < 2; ++pass) {
      if (k > 0) {
        Vec<Scalar> proj = V.leftCols(k).adjoint() * W.col(c);
        W.col(c) -= V.leftCols(k) * proj;
      }
      for (int d = 0; d < c; ++d) {
        const Scalar r = W.col(d).dot(W.col(c));
        W.col(c) -= r * W.col(d);
        R(d, c) += r;
      }
    }
    double nrm = W.col(c).norm();
    if (!(nrm > 1e-12 * std::max(original, 1e-300))) {
      for (int i = 0; i < W.rows(); ++i) W(i, c) = random_scalar<Scalar>(rng);
      for (int pass = 0; pass < 2; ++pass) {
        if (k > 0) W.col(c) -= V.leftCols(k) * (V.leftCols(k).adjoint() * W.col(c));
        for (int d = 0; d < c; ++d) W.col(c) -= W.col(d).dot(W.col(c)) * W.col(d);
      }
      W.col(c) /= W.col(c).norm();
      R(c, c) = 0.0;
    } else {
      W.col(c) /= nrm;
      R(c, c) = nrm;
    }
  }
  return R;
}

template <class Scalar>
EigenPairs<Scalar> lanczos_near(const Eigen::SparseMatrix<Scalar>& A, double sigma, int count,
                                const EigOptions& opt,
                                const std::function<bool(const std::vector<double>&)>& accept) {
  const int n = static_cast<int>(A.rows());
  Eigen::SparseMatrix<Scalar> I(n, n);
  I.setIdentity();
  Eigen::SparseMatrix<Scalar> S = A - Scalar(sigma) * I;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<Scalar>> ldlt(S);
  if (ldlt.info() != Eigen::Success) throw NumericalError("shift-invert factorization failed");

  const int b = std::max(1, opt.block_size);
  const int kmax = std::min(n, std::max(opt.max_basis, 2 * count + 4 * b));
  Mat<Scalar> V = Mat<Scalar>::Zero(n, kmax + b);
  Mat<Scalar> H = Mat<Scalar>::Zero(kmax + b, kmax + b);
  SplitMix rng{opt.seed};
  {
    Mat<Scalar> W(n, b);
    for (int c = 0; c < b; ++c)
      for (int i = 0; i < n; ++i) W(i, c) = random_scalar<Scalar>(rng);
    orthonormalize<Scalar>(W, V, 0, rng);
    V.leftCols(b) = W;
  }
  int k = b;
  for (int j = 0;; ++j) {
    const int m = (j + 1) * b;  // projected dimension after this step
    Mat<Scalar> W = ldlt.solve(Mat<Scalar>(V.middleCols(j * b, b)));
    for (int pass = 0; pass < 2; ++pass) {
      Mat<Scalar> C = V.leftCols(k).adjoint() * W;
      W -= V.leftCols(k) * C;
      H.block(0, j * b, k, b) += C;
    }
    Mat<Scalar> R = orthonormalize<Scalar>(W, V, k, rng);
    V.middleCols(k, b) = W;
    H.block(k, j * b, b, b) = R;
    k += b;

    const bool exhausted = k > kmax || m >= n;
    if (m < count + b && !exhausted) continue;
    if (!exhausted && (j % 2 == 1)) continue;

    Mat<Scalar> Hm = H.topLeftCorner(m, m);
    Mat<Scalar> Hs = (Hm + Hm.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(Hs);
    const Eigen::VectorXd& theta = es.eigenvalues();
    std::vector<int> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int c) { return std::abs(theta[a]) > std::abs(theta[c]); });
    const Mat<Scalar> Rn = H.block(m, m - b, b, b);
    bool converged = true;
    for (int i = 0; i < count && i < m; ++i) {
      const double res = (Rn * es.eigenvectors().col(idx[i]).tail(b)).norm();
      if (res > opt.ritz_tol * std::abs(theta[idx[i]])) converged = false;
    }
    if (!converged && !exhausted) continue;

    std::vector<int> pick(idx.begin(), idx.begin() + std::min(count, m));
    std::sort(pick.begin(), pick.end(), [&](int a, int c) {
      return sigma + 1.0 / theta[a] < sigma + 1.0 / theta[c];
    });
    EigenPairs<Scalar> out;
    out.vectors.resize(n, static_cast<int>(pick.size()));
    for (std::size_t i = 0; i < pick.size(); ++i) {
      const double lambda = sigma + 1.0 / theta[pick[i]];
      Vec<Scalar> x = V.leftCols(m) * es.eigenvectors().col(pick[i]);
      x /= x.norm();
      out.values.push_back(lambda);
      out.vectors.col(static_cast<int>(i)) = x;
      out.max_residual = std::max(out.max_residual, residual_of<Scalar>(A, x, lambda));
    }
    const bool ok = out.max_residual <= opt.residual_tol && accept(out.values);
    if (ok) return out;
    if (exhausted) throw NumericalError("shift-invert Lanczos did not converge within the basis budget");
  }
}

}  // namespace

template <class Scalar>
EigenPairs<Scalar> eigenpairs_near(const Eigen::SparseMatrix<Scalar>& A, double sigma, int count,
                                   const EigOptions& opt) {
  if (count <= 0) return {};
  if (count > A.rows()) throw ValidationError("more eigenvalues requested than the dimension");
  if (A.rows() <= opt.dense_limit) return dense_near<Scalar>(A, sigma, count);
  return lanczos_near<Scalar>(A, sigma, count, opt, [](const std::vector<double>&) { return true; });
}

template <class Scalar>
EigenPairs<Scalar> eigenpairs_in_window(const Eigen::SparseMatrix<Scalar>& A, double lo, double hi,
                                        int expected, const EigOptions& opt) {
  if (expected <= 0) return {};
  const double sigma = 0.5 * (lo + hi);
  const double slack = 1e-9 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  auto inside = [&](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x >= lo - slack && x <= hi + slack; });
  };
  EigenPairs<Scalar> out;
  if (A.rows() <= opt.dense_limit) out = dense_near<Scalar>(A, sigma, expected);
  else out = lanczos_near<Scalar>(A, sigma, expected, opt, inside);
  if (!inside(out.values)) throw NumericalError("eigenvalue count in window disagrees with inertia");
  return out;
}

template <class Scalar>
std::vector<double> dense_eigenvalues(const Eigen::SparseMatrix<Scalar>& A) {
  Mat<Scalar> D = Mat<Scalar>(A);
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(D, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

template EigenPairs<double> eigenpairs_near(const Eigen::SparseMatrix<double>&, double, int, const EigOptions&);
template EigenPairs<std::complex<double>> eigenpairs_near(const Eigen::SparseMatrix<std::complex<double>>&,
                                                          double, int, const EigOptions&);
template EigenPairs<double> eigenpairs_in_window(const Eigen::SparseMatrix<double>&, double, double, int,
                                                 const EigOptions&);
template EigenPairs<std::complex<double>> eigenpairs_in_window(
    const Eigen::SparseMatrix<std::complex<double>>&, double, double, int, const EigOptions&);
template std::vector<double> dense_eigenvalues(const Eigen::SparseMatrix<double>&);
template std::vector<double> dense_eigenvalues(const Eigen::SparseMatrix<std::complex<double>>&);

}  // namespace disloc::linalg
