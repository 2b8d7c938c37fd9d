#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "disloc/errors.hpp"

namespace disloc::linalg {

// Symmetric tridiagonal matrix, optionally closed into a ring by a corner
// entry coupling unknowns 0 and N-1. Eigenvalues are located by inertia:
// nodes are paired as (0, N-1), (1, N-2), ... so the ring becomes a
// block-tridiagonal chain of 2x2 blocks and a block LDL^T sweep counts the
// negative pivots.
template <class T>
struct PeriodicChain {
  std::vector<T> diag;  // size N
  std::vector<T> off;   // off[i] couples i and i+1, size N-1
  T corner = 0;         // couples 0 and N-1 (used when periodic)
  bool periodic = true;

  std::size_t size() const { return diag.size(); }

  // Number of eigenvalues strictly below E, or -1 if a pivot vanished.
  int count_below_raw(T E) const { return periodic ? ring_count(E) : line_count(E); }

  // Retries once at E + 1e-9 when a pivot vanishes.
  int count_below(T E) const {
    int c = count_below_raw(E);
    if (c < 0) c = count_below_raw(E + T(1e-9));
    if (c < 0) throw NumericalError("zero pivot in inertia count; choose a different energy");
    return c;
  }

  // Bound on the spectral radius (Gershgorin).
  T scale() const {
    T s = 0;
    for (std::size_t i = 0; i < diag.size(); ++i) {
      T r = abs_(diag[i]);
      if (i > 0) r += abs_(off[i - 1]);
      if (i + 1 < diag.size()) r += abs_(off[i]);
      if (periodic && (i == 0 || i + 1 == diag.size())) r += abs_(corner);
      s = s > r ? s : r;
    }
    return s;
  }

  // All eigenvalues in [lo, hi) with multiplicity, ascending, each resolved to
  // an interval of width <= tol by spectrum slicing.
  std::vector<T> eigenvalues_in(T lo, T hi, T tol) const {
    std::vector<T> out;
    if (!(hi > lo)) return out;
    slice(lo, count_below(lo), hi, count_below(hi), tol, out);
    return out;
  }

 private:
  static T abs_(T x) { return x < 0 ? -x : x; }

  void slice(T a, int ca, T b, int cb, T tol, std::vector<T>& out) const {
    if (cb <= ca) return;
    const T m = (a + b) / 2;
    if (b - a <= tol || m <= a || m >= b) {
      for (int i = ca; i < cb; ++i) out.push_back(m);
      return;
    }
    // Rounding can make counts non-monotone right at a multiple eigenvalue.
    const int cm = std::clamp(count_below(m), ca, cb);
    slice(a, ca, m, cm, tol, out);
    slice(m, cm, b, cb, tol, out);
  }

  int line_count(T E) const {
    int neg = 0;
    T d = 0;
    for (std::size_t i = 0; i < diag.size(); ++i) {
      d = diag[i] - E - (i > 0 ? off[i - 1] * off[i - 1] / d : T(0));
      if (d == 0) return -1;
      if (d < 0) ++neg;
    }
    return neg;
  }

  struct Sym2 {
    T p, q, r;  // [[p, q], [q, r]]
  };

  static int negatives(const Sym2& s) {
    const T det = s.p * s.r - s.q * s.q;
    if (det == 0) return -1;
    if (det < 0) return 1;
    return s.p < 0 ? 2 : 0;
  }

  int ring_count(T E) const {
    const std::size_t n = diag.size();
    if (n < 3) throw ValidationError("periodic chain needs at least 3 unknowns");
    const std::size_t pairs = n / 2;
    const bool odd = n % 2 == 1;
    int neg = 0;
    Sym2 S{diag[0] - E, corner, diag[n - 1] - E};
    if (!odd && pairs == 1) S.q += off[0];
    for (std::size_t s = 0;; ++s) {
      const int k = negatives(S);
      if (k < 0) return -1;
      neg += k;
      const T det = S.p * S.r - S.q * S.q;
      const Sym2 inv{S.r / det, -S.q / det, S.p / det};
      if (s + 1 == pairs) {
        if (!odd) return neg;
        // Middle node couples to both members of the last pair.
        const std::size_t c = pairs;
        const T b1 = off[c - 1], b2 = off[c];
        const T v = diag[c] - E - (b1 * b1 * inv.p + 2 * b1 * b2 * inv.q + b2 * b2 * inv.r);
        if (v == 0) return -1;
        return neg + (v < 0 ? 1 : 0);
      }
      const std::size_t i = s + 1, j = n - 2 - s;
      const T b1 = off[i - 1], b2 = off[j];
      Sym2 next{diag[i] - E - b1 * b1 * inv.p, -b1 * b2 * inv.q, diag[j] - E - b2 * b2 * inv.r};
      if (!odd && i + 1 == j) next.q += off[i];
      S = next;
    }
  }
};

}  // namespace disloc::linalg
