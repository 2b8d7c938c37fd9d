#include "disloc/floquet1d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>

#include "disloc/errors.hpp"

namespace disloc {

double TransferMatrix::norm() const {
  return std::max({std::abs(m11), std::abs(m12), std::abs(m21), std::abs(m22)});
}

TransferMatrix constant_block(double V, double E, double L) {
  const double q = E - V;
  const double z = q * L * L;
  double c, s;
  if (std::abs(z) < 1e-3) {
    // Taylor series of cos(sqrt z) and sin(sqrt z)/sqrt z.
    double term_c = 1.0, term_s = 1.0;
    c = 1.0;
    s = 1.0;
    for (int m = 1; m <= 7; ++m) {
      term_c *= -z / ((2.0 * m - 1.0) * (2.0 * m));
      term_s *= -z / ((2.0 * m) * (2.0 * m + 1.0));
      c += term_c;
      s += term_s;
    }
    s *= L;
  } else if (q > 0.0) {
    const double k = std::sqrt(q);
    c = std::cos(k * L);
    s = std::sin(k * L) / k;
  } else {
    const double k = std::sqrt(-q);
    c = std::cosh(k * L);
    s = std::sinh(k * L) / k;
  }
  return {c, s, -q * s, c};
}

TransferMatrix propagate(const PotentialSpec& V, double E, double x0, double x1) {
  if (x0 > x1) throw DomainError("propagate requires x0 <= x1");
  if (!V.is_piecewise()) return propagate_rk4(V, E, x0, x1);
  TransferMatrix M;
  double x = x0;
  auto step = [&](double y) {
    if (y <= x) return;
    M = constant_block(V(0.5 * (x + y)), E, y - x) * M;
    x = y;
  };
  for (double p : V.singular_points(x0, x1)) step(p);
  step(x1);
  return M;
}

namespace {

TransferMatrix rk4_fixed(const PotentialSpec& V, double E, const std::vector<double>& knots,
                         double steps_per_length) {
  // Columns of Y solve u' = v, v' = (V - E) u.
  double y[2][2] = {{1.0, 0.0}, {0.0, 1.0}};  // y[col][component]
  for (std::size_t seg = 0; seg + 1 < knots.size(); ++seg) {
    const double a = knots[seg], b = knots[seg + 1];
    if (b <= a) continue;
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) * steps_per_length)));
    const double h = (b - a) / n;
    for (int i = 0; i < n; ++i) {
      const double x = a + i * h;
      // Keep evaluations inside the open segment so one-sided limits are used.
      const double q0 = V(i == 0 ? x + 1e-15 * std::max(1.0, std::abs(x)) : x) - E;
      const double qm = V(x + 0.5 * h) - E;
      const double q1 = V(i == n - 1 ? b - 1e-15 * std::max(1.0, std::abs(b)) : x + h) - E;
      for (auto& col : y) {
        const double u = col[0], v = col[1];
        const double k1u = v, k1v = q0 * u;
        const double k2u = v + 0.5 * h * k1v, k2v = qm * (u + 0.5 * h * k1u);
        const double k3u = v + 0.5 * h * k2v, k3v = qm * (u + 0.5 * h * k2u);
        const double k4u = v + h * k3v, k4v = q1 * (u + h * k3u);
        col[0] = u + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
        col[1] = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
      }
    }
  }
  return {y[0][0], y[1][0], y[0][1], y[1][1]};
}

}  // namespace

TransferMatrix propagate_rk4(const PotentialSpec& V, double E, double x0, double x1,
                             const Rk4Options& opt) {
  if (x0 > x1) throw DomainError("propagate requires x0 <= x1");
  if (x0 == x1) return {};
  std::vector<double> knots{x0};
  for (double p : V.singular_points(x0, x1))
    if (p > x0 && p < x1) knots.push_back(p);
  knots.push_back(x1);

  const double p = V.period();
  const double wav = std::sqrt(std::max({std::abs(E - V.min_value()), std::abs(E - V.max_value()), 1.0}));
  double per_length = std::max(opt.initial_steps_per_period / p, 2.0 * wav);
  TransferMatrix prev = rk4_fixed(V, E, knots, per_length);
  for (int d = 0; d < opt.max_doublings; ++d) {
    per_length *= 2.0;
    TransferMatrix next = rk4_fixed(V, E, knots, per_length);
    const TransferMatrix diff{next.m11 - prev.m11, next.m12 - prev.m12, next.m21 - prev.m21,
                              next.m22 - prev.m22};
    if (diff.norm() < opt.trace_tol * std::max(1.0, next.norm())) {
      // Fourth-order Richardson correction of the converged pair.
      return {next.m11 + diff.m11 / 15.0, next.m12 + diff.m12 / 15.0, next.m21 + diff.m21 / 15.0,
              next.m22 + diff.m22 / 15.0};
    }
    prev = next;
  }
  throw NumericalError("RK4 propagation did not settle within the step-halving budget");
}

double discriminant(const PotentialSpec& V, double E) {
  return propagate(V, E, 0.0, V.period()).trace();
}

const Gap* BandStructure::gap(int k) const {
  for (const auto& g : gaps)
    if (g.k == k) return &g;
  return nullptr;
}

namespace {

// Bisect a boolean predicate with pred(a) != pred(b) down to width tol.
template <class Pred>
double bisect_predicate(Pred pred, double a, double b, double tol) {
  const bool sa = pred(a);
  while (b - a > tol) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    if (pred(m) == sa) a = m;
    else b = m;
  }
  return 0.5 * (a + b);
}

// Golden-section search for the maximum of sign * D on [a, b].
double golden_extremum(const PotentialSpec& V, double a, double b, double sign, double& value) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = sign * discriminant(V, c), fd = sign * discriminant(V, d);
  for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = sign * discriminant(V, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = sign * discriminant(V, d);
    }
  }
  const double x = 0.5 * (a + b);
  value = discriminant(V, x);
  return x;
}

}  // namespace

BandStructure band_structure(const PotentialSpec& V, double Emin, double Emax, double tol) {
  if (!(Emin < Emax)) throw DomainError("band_structure requires Emin < Emax");
  if (!(tol > 0.0)) throw DomainError("band_structure requires tol > 0");
  const double touch_tol = 1e-9;
  const double elow = std::min(Emin, V.min_value() - 1.0);
  const double panel = 1.0 / 256.0;

  auto below_top = [&](double E) { return discriminant(V, E) <= 2.0; };
  auto above_bottom = [&](double E) { return discriminant(V, E) >= -2.0; };

  std::vector<double> E_s, D_s;
  auto sample = [&](double E) {
    E_s.push_back(E);
    D_s.push_back(discriminant(V, E));
  };
  const int n = std::max(16, static_cast<int>(std::ceil((Emax - elow) / panel)));
  for (int i = 0; i <= n; ++i) sample(elow + (Emax - elow) * i / n);
  // Extend past Emax while inside a gap so that straddling gaps are complete.
  const double step = (Emax - elow) / n;
  const bool seen_band = std::any_of(D_s.begin(), D_s.end(), [](double d) { return std::abs(d) <= 2.0; });
  for (int guard = 0; seen_band && guard < 1 << 20 && std::abs(D_s.back()) > 2.0; ++guard)
    sample(E_s.back() + step);

  std::vector<double> edges;
  const std::size_t m = E_s.size();
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const bool a0 = D_s[i] <= 2.0, a1 = D_s[i + 1] <= 2.0;
    const bool b0 = D_s[i] >= -2.0, b1 = D_s[i + 1] >= -2.0;
    if (a0 != a1) edges.push_back(bisect_predicate(below_top, E_s[i], E_s[i + 1], tol));
    if (b0 != b1) edges.push_back(bisect_predicate(above_bottom, E_s[i], E_s[i + 1], tol));
  }
  // Narrow or closed gaps can hide between samples: refine extrema near +-2.
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const bool is_max = D_s[i] > D_s[i - 1] && D_s[i] >= D_s[i + 1];
    const bool is_min = D_s[i] < D_s[i - 1] && D_s[i] <= D_s[i + 1];
    if (!is_max && !is_min) continue;
    const double sign = is_max ? 1.0 : -1.0;
    const double level = 2.0 * sign;
    if (sign * D_s[i] > 2.0) continue;          // already a sampled gap
    if (sign * D_s[i] < 1.5) continue;          // far from the band edge level
    double dext = 0.0;
    const double eext = golden_extremum(V, E_s[i - 1], E_s[i + 1], sign, dext);
    if (std::abs(dext - level) <= touch_tol) {
      edges.push_back(eext);
      edges.push_back(eext);
    } else if (sign * dext > 2.0) {
      auto pred = is_max ? std::function<bool(double)>(below_top) : std::function<bool(double)>(above_bottom);
      edges.push_back(bisect_predicate(pred, E_s[i - 1], eext, tol));
      edges.push_back(bisect_predicate(pred, eext, E_s[i + 1], tol));
    }
  }
  std::sort(edges.begin(), edges.end());

  BandStructure bs;
  bs.emin = Emin;
  bs.emax = Emax;
  bs.tol = tol;
  std::vector<Band> all;
  for (std::size_t i = 0; i < edges.size(); i += 2) {
    Band b;
    b.index = static_cast<int>(i / 2) + 1;
    b.lo = edges[i];
    if (i + 1 < edges.size()) {
      b.hi = edges[i + 1];
    } else {
      b.hi = E_s.back();
      b.truncated = true;
    }
    all.push_back(b);
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    const Band& b = all[i];
    if (b.lo <= Emax && b.hi >= Emin) bs.bands.push_back(b);
    if (i + 1 < all.size()) {
      Gap g{b.index, b.hi, all[i + 1].lo};
      if (g.hi >= Emin && g.lo <= Emax) bs.gaps.push_back(g);
    }
  }
  return bs;
}

Gap find_gap(const PotentialSpec& V, int k, double tol) {
  if (k < 1) throw DomainError("gap index must be >= 1");
  const double p = V.period();
  const double lo = V.min_value() - 1.0;
  double hi = V.max_value() + std::pow(std::numbers::pi * (k + 1) / p, 2) + 1.0;
  for (int it = 0; it < 8; ++it) {
    BandStructure bs = band_structure(V, lo, hi, tol);
    if (const Gap* g = bs.gap(k)) return *g;
    hi = lo + 2.0 * (hi - lo);
  }
  throw NumericalError("gap " + std::to_string(k) + " not found");
}

FloquetMultipliers floquet_multipliers(const PotentialSpec& V, double E) {
  const double D = discriminant(V, E);
  if (std::abs(D) <= 2.0 + 1e-10) {
    std::ostringstream os;
    os << "energy " << E << " is not in a spectral gap (|D| = " << std::abs(D) << ")";
    throw PreconditionError(os.str());
  }
  return multipliers_from_discriminant(D);
}

FloquetMultipliers multipliers_from_discriminant(double D) {
  if (!(std::abs(D) > 2.0)) throw PreconditionError("multipliers are real and distinct only for |D| > 2");
  const double s = D > 0 ? 1.0 : -1.0;
  const double big = 0.5 * (D + s * std::sqrt(D * D - 4.0));
  return {1.0 / big, big};
}

std::array<double, 2> monodromy_eigenvector(const TransferMatrix& M, double rho, VectorNorm norm) {
  std::array<double, 2> a{M.m12, rho - M.m11};
  std::array<double, 2> b{rho - M.m22, M.m21};
  auto n2 = [](const std::array<double, 2>& v) { return std::hypot(v[0], v[1]); };
  std::array<double, 2> v = n2(a) >= n2(b) ? a : b;
  const double nv = norm == VectorNorm::euclidean ? n2(v) : std::max(std::abs(v[0]), std::abs(v[1]));
  if (!(nv > 0.0)) throw NumericalError("degenerate monodromy eigenvector");
  v[0] /= nv;
  v[1] /= nv;
  if (v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0)) {
    v[0] = -v[0];
    v[1] = -v[1];
  }
  return v;
}

std::size_t DecayingSolution::period_of(std::size_t i) const {
  return std::min(i / static_cast<std::size_t>(samples_per_period), log_scale.size() - 1);
}

double DecayingSolution::value(std::size_t i) const {
  return u[i] * std::exp(log_scale[period_of(i)]);
}

double DecayingSolution::derivative(std::size_t i) const {
  return du[i] * std::exp(log_scale[period_of(i)]);
}

DecayingSolution decaying_solution(const PotentialSpec& V, double E, Side side, int n_periods,
                                   int samples_per_period) {
  if (n_periods < 1) throw DomainError("n_periods must be >= 1");
  if (samples_per_period < 1) throw DomainError("samples_per_period must be >= 1");
  const double p = V.period();
  const FloquetMultipliers fm = floquet_multipliers(V, E);
  const TransferMatrix M = propagate(V, E, 0.0, p);

  DecayingSolution sol;
  sol.side = side;
  sol.energy = E;
  sol.period = p;
  sol.samples_per_period = samples_per_period;
  sol.multiplier = side == Side::right ? fm.rho_minus : fm.rho_plus;
  sol.initial = monodromy_eigenvector(M, sol.multiplier);

  // Each period restarts from the exact eigenvector: forward propagation of a
  // decaying solution amplifies the growing component by rho_plus / rho_minus
  // per period.
  const double x_base = side == Side::left ? -n_periods * p : 0.0;
  const int k_offset = side == Side::left ? -n_periods : 0;
  const double log_rho = std::log(std::abs(sol.multiplier));
  const double dx = p / samples_per_period;
  for (int k = 0; k <= n_periods; ++k) {
    const int m = k + k_offset;  // phi(x + m p) = rho^m phi(x)
    const double sign = (sol.multiplier < 0.0 && (m % 2 != 0)) ? -1.0 : 1.0;
    std::array<double, 2> state = {sign * sol.initial[0], sign * sol.initial[1]};
    sol.log_scale.push_back(m * log_rho);
    const double x0 = x_base + k * p;
    const int count = k < n_periods ? samples_per_period : 1;
    double x = x0;
    for (int j = 0; j < count; ++j) {
      const double xj = x0 + j * dx;
      if (xj > x) {
        state = propagate(V, E, x, xj).apply(state);
        x = xj;
      }
      sol.x.push_back(xj);
      sol.u.push_back(state[0]);
      sol.du.push_back(state[1]);
    }
  }
  return sol;
}

std::string discriminant_csv(const PotentialSpec& V, double Emin, double Emax, int n_points) {
  if (n_points < 2) throw DomainError("need at least two points");
  std::string out = "E,D\n";
  char buf[96];
  for (int i = 0; i < n_points; ++i) {
    const double E = Emin + (Emax - Emin) * i / (n_points - 1);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", E, discriminant(V, E));
    out += buf;
  }
  return out;
}

}  // namespace disloc
