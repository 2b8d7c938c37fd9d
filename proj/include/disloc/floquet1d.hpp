#pragma once

#include <array>
#include <string>
#include <vector>

#include "disloc/potential.hpp"

namespace disloc {

// Maps (u(x0), u'(x0)) to (u(x1), u'(x1)) for -u'' + (V - E) u = 0.
struct TransferMatrix {
  double m11 = 1, m12 = 0, m21 = 0, m22 = 1;

  double det() const { return m11 * m22 - m12 * m21; }
  double trace() const { return m11 + m22; }
  double norm() const;  // max absolute entry
  std::array<double, 2> apply(const std::array<double, 2>& v) const {
    return {m11 * v[0] + m12 * v[1], m21 * v[0] + m22 * v[1]};
  }
  // (a * b) propagates by b first, then a.
  friend TransferMatrix operator*(const TransferMatrix& a, const TransferMatrix& b) {
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
  }
};

// Exact propagator for a constant potential value over length L.
TransferMatrix constant_block(double V, double E, double L);

// Exact blocks for piecewise potentials, classical RK4 otherwise.
TransferMatrix propagate(const PotentialSpec& V, double E, double x0, double x1);

struct Rk4Options {
  double trace_tol = 1e-9;   // entrywise change on halving, relative to max(1, |M|)
  int initial_steps_per_period = 64;
  int max_doublings = 14;
};

// Fixed-step RK4 with step halving until the propagator (hence its trace)
// settles, then one Richardson correction. Steps never cross singular points
// of V. Available for every form, including piecewise.
TransferMatrix propagate_rk4(const PotentialSpec& V, double E, double x0, double x1,
                             const Rk4Options& opt = {});

double discriminant(const PotentialSpec& V, double E);

struct Band {
  int index = 0;  // 1-based, counted from the bottom of the spectrum
  double lo = 0, hi = 0;
  bool truncated = false;  // continues beyond the scan window
};

struct Gap {
  int k = 0;  // gap k separates band k and band k+1
  double lo = 0, hi = 0;
  bool open() const { return hi > lo; }
  double mid() const { return 0.5 * (lo + hi); }
};

struct BandStructure {
  std::vector<Band> bands;
  std::vector<Gap> gaps;
  double emin = 0, emax = 0, tol = 0;

  const Gap* gap(int k) const;
};

BandStructure band_structure(const PotentialSpec& V, double Emin, double Emax, double tol = 1e-10);

// Finds gap k, extending the scan window upward until it is reached.
Gap find_gap(const PotentialSpec& V, int k, double tol = 1e-10);

struct FloquetMultipliers {
  double rho_minus = 0;  // |rho_minus| < 1
  double rho_plus = 0;   // |rho_plus| > 1
};

FloquetMultipliers floquet_multipliers(const PotentialSpec& V, double E);
// Roots of rho^2 - D rho + 1 for |D| > 2, cancellation-free.
FloquetMultipliers multipliers_from_discriminant(double D);

enum class Side { left, right };
enum class VectorNorm { euclidean, max };

// Eigenvector of the monodromy matrix for the multiplier rho, scaled to unit
// norm with its first nonzero component positive.
std::array<double, 2> monodromy_eigenvector(const TransferMatrix& M, double rho,
                                            VectorNorm norm = VectorNorm::euclidean);

// phi_+ (side right) decays at +infinity and is sampled on [0, n p];
// phi_- (side left) decays at -infinity and is sampled on [-n p, 0].
struct DecayingSolution {
  Side side = Side::right;
  double energy = 0;
  double multiplier = 0;  // u(x + p) = multiplier * u(x)
  std::array<double, 2> initial{};  // (u(0), u'(0)), unit norm
  int samples_per_period = 0;
  std::vector<double> x, u, du;     // u, du are scaled by exp(-log_scale[period])
  std::vector<double> log_scale;    // one entry per period
  double period = 1;

  std::size_t period_of(std::size_t i) const;
  double value(std::size_t i) const;
  double derivative(std::size_t i) const;
};

DecayingSolution decaying_solution(const PotentialSpec& V, double E, Side side, int n_periods,
                                   int samples_per_period = 256);

// Plain text emitters.
std::string discriminant_csv(const PotentialSpec& V, double Emin, double Emax, int n_points);

}  // namespace disloc
