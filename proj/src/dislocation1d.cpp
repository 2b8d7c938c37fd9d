#include "disloc/dislocation1d.hpp"

#include <quadmath.h>

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <memory>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <tuple>

#include "disloc/errors.hpp"

namespace disloc {

// ---------------------------------------------------------------------------
// Matching

MatchingFunction::MatchingFunction(const PotentialSpec& V, double E, VectorNorm norm) : V_(V), E_(E) {
  const TransferMatrix M = propagate(V, E, 0.0, V.period());
  const FloquetMultipliers fm = floquet_multipliers(V, E);
  left0_ = monodromy_eigenvector(M, fm.rho_plus, norm);
  right0_ = monodromy_eigenvector(M, fm.rho_minus, norm);
}

double MatchingFunction::det_with(const std::array<double, 2>& left) const {
  return left[0] * right0_[1] - left[1] * right0_[0];
}

double MatchingFunction::operator()(double t) const {
  return det_with(propagate(V_, E_, 0.0, t * V_.period()).apply(left0_));
}

std::vector<double> MatchingFunction::scan(const std::vector<double>& ts) const {
  std::vector<double> out;
  out.reserve(ts.size());
  std::array<double, 2> state = left0_;
  double x = 0.0;
  for (double t : ts) {
    const double y = t * V_.period();
    if (y < x) throw DomainError("scan requires ascending t");
    if (y > x) state = propagate(V_, E_, x, y).apply(state);
    x = y;
    out.push_back(det_with(state));
  }
  return out;
}

double mismatch(const PotentialSpec& V, double t, double E, VectorNorm norm) {
  if (!(t > 0.0 && t < 1.0)) throw PreconditionError("mismatch requires 0 < t < 1");
  return MatchingFunction(V, E, norm)(t);
}

// ---------------------------------------------------------------------------
// Branches

double EigenBranch::t_min() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) m = std::min(m, s.t);
  return m;
}

double EigenBranch::t_max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) m = std::max(m, s.t);
  return m;
}

double EigenBranch::e_min() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) m = std::min(m, s.E);
  return m;
}

double EigenBranch::e_max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) m = std::max(m, s.E);
  return m;
}

std::pair<double, double> EigenBranch::max_jump() const {
  double dt = 0, de = 0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    dt = std::max(dt, std::abs(samples[i].t - samples[i - 1].t));
    de = std::max(de, std::abs(samples[i].E - samples[i - 1].E));
  }
  return {dt, de};
}

const EigenBranch& BranchTrace::primary() const {
  if (branches.empty()) throw NumericalError("no eigenvalue branch was found");
  const EigenBranch* best = &branches.front();
  for (const auto& b : branches) {
    if (b.samples.size() > best->samples.size() ||
        (b.samples.size() == best->samples.size() && b.t_min() < best->t_min()))
      best = &b;
  }
  return *best;
}

namespace {

Gap require_open_gap(const PotentialSpec& V, int k, double tol) {
  if (k < 1) throw ValidationError("gap index must be >= 1");
  const Gap g = find_gap(V, k, tol);
  if (!g.open()) throw ValidationError("gap " + std::to_string(k) + " is closed");
  return g;
}

// Roots of the matching function in t at one energy.
std::vector<BranchSample> roots_at(const PotentialSpec& V, double E, const std::vector<double>& ts,
                                   const TraceOptions& opt) {
  const MatchingFunction f(V, E, opt.norm);
  const std::vector<double> vals = f.scan(ts);
  std::vector<BranchSample> out;
  auto accept = [&](double t) {
    if (!(t > 0.0 && t < 1.0)) return;
    const double r = std::abs(f(t));
    if (r < opt.residual_tol) out.push_back({t, E, r});
  };
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    double a = ts[i], b = ts[i + 1], fa = vals[i];
    const double fb = vals[i + 1];
    if (fa == 0.0) {
      accept(a);
      continue;
    }
    if ((fa < 0) == (fb < 0) || fb == 0.0) continue;
    while (b - a > opt.root_tol) {
      const double m = 0.5 * (a + b);
      const double fm = f(m);
      if (fm == 0.0) {
        a = b = m;
        break;
      }
      if ((fm < 0) == (fa < 0)) a = m, fa = fm;
      else b = m;
    }
    accept(0.5 * (a + b));
  }
  if (!vals.empty() && vals.back() == 0.0) accept(ts.back());
  return out;
}

struct Path {
  std::vector<BranchSample> s;  // ascending energy
  double first = 0, last = 0;   // energies of the two ends; NaN once joined
};

}  // namespace

BranchTrace trace_branch(const PotentialSpec& V, int k, int n_subintervals, const TraceOptions& opt) {
  if (n_subintervals < 2) throw ValidationError("n_subintervals must be >= 2");
  if (!(opt.t_step > 0.0 && opt.t_step <= 0.5)) throw ValidationError("t_step must lie in (0, 0.5]");
  BranchTrace out;
  out.k = k;
  out.gap = require_open_gap(V, k, opt.gap_tol);
  const double guard = 10.0 * opt.gap_tol;
  double a = out.gap.lo + guard, b = out.gap.hi - guard;
  // Near a flat band edge the guard may not yet clear the |D| > 2 test.
  for (double g = guard; a < b && !(std::abs(discriminant(V, a)) > 2.0 + 1e-10); g *= 2) a = out.gap.lo + g;
  for (double g = guard; a < b && !(std::abs(discriminant(V, b)) > 2.0 + 1e-10); g *= 2) b = out.gap.hi - g;
  if (opt.energy_range) {
    std::tie(a, b) = *opt.energy_range;
    if (!(a >= out.gap.lo + guard && b <= out.gap.hi - guard && a < b))
      throw DomainError("energy range must be an interval inside the gap");
  }
  if (!(a < b)) throw ValidationError("gap too narrow for the edge guard");

  const int nt = static_cast<int>(std::lround(1.0 / opt.t_step));
  std::vector<double> ts(nt + 1);
  for (int i = 0; i <= nt; ++i) ts[i] = static_cast<double>(i) / nt;
  const double dE = (b - a) / n_subintervals;
  out.continuity_budget = 5.0 * std::max(dE, 1.0 / nt);

  // Energies are processed in ascending order. When an open path and a new
  // root fail to connect, the energy step is halved (up to 6 times) before
  // the path is closed; branches steepen in t near the gap edges.
  struct Pending {
    double E;
    bool on_grid;
    int depth;
  };
  std::vector<Pending> stack;
  for (int j = n_subintervals; j >= 0; --j) stack.push_back({j == n_subintervals ? b : a + j * dE, true, 0});
  std::vector<Path> done, open;
  double E_prev = std::numeric_limits<double>::quiet_NaN();
  int depth_prev = 0;
  while (!stack.empty()) {
    const Pending cur = stack.back();
    const double E = cur.E;
    std::vector<BranchSample> roots = roots_at(V, E, ts, opt);

    // Nearest-neighbour continuation; ties go to the smaller t.
    struct Cand {
      double d;
      double t;
      std::size_t path, root;
    };
    std::vector<Cand> cands;
    for (std::size_t p = 0; p < open.size(); ++p)
      for (std::size_t r = 0; r < roots.size(); ++r) {
        const double d = std::abs(roots[r].t - open[p].s.back().t);
        if (d <= out.continuity_budget) cands.push_back({d, roots[r].t, p, r});
      }
    std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
      if (x.d != y.d) return x.d < y.d;
      return x.t < y.t;
    });
    std::vector<bool> path_used(open.size(), false), root_used(roots.size(), false);
    std::vector<std::pair<std::size_t, std::size_t>> links;
    for (const Cand& c : cands) {
      if (path_used[c.path] || root_used[c.root]) continue;
      path_used[c.path] = root_used[c.root] = true;
      links.emplace_back(c.path, c.root);
    }
    const bool loose_path = std::find(path_used.begin(), path_used.end(), false) != path_used.end();
    const bool loose_root = std::find(root_used.begin(), root_used.end(), false) != root_used.end();
    const int depth = std::max(cur.depth, depth_prev);
    if (loose_path && loose_root && depth < 6) {
      stack.push_back({0.5 * (E_prev + E), false, depth + 1});
      continue;
    }
    stack.pop_back();
    if (cur.on_grid) {
      out.energies.push_back(E);
      out.roots_per_energy.push_back(static_cast<int>(roots.size()));
      if (roots.empty()) out.uncovered.push_back(E);
    }
    for (const auto& [p, r] : links) {
      open[p].s.push_back(roots[r]);
      open[p].last = E;
    }
    std::vector<Path> next;
    for (std::size_t p = 0; p < open.size(); ++p) (path_used[p] ? next : done).push_back(std::move(open[p]));
    for (std::size_t r = 0; r < roots.size(); ++r)
      if (!root_used[r]) next.push_back({{roots[r]}, E, E});
    open = std::move(next);
    E_prev = E;
    depth_prev = cur.on_grid ? 0 : cur.depth;
  }
  for (auto& p : open) done.push_back(std::move(p));

  // A branch that turns around in energy inside the sweep appears as two arms
  // starting (or ending) at the same energy; join them.
  auto try_merge = [&](bool at_start) {
    const double boundary = at_start ? a : b;
    for (std::size_t i = 0; i < done.size(); ++i)
      for (std::size_t j = i + 1; j < done.size(); ++j) {
        Path& x = done[i];
        Path& y = done[j];
        const double ex = at_start ? x.first : x.last, ey = at_start ? y.first : y.last;
        if (!(ex == ey) || ex == boundary) continue;
        const BranchSample& sx = at_start ? x.s.front() : x.s.back();
        const BranchSample& sy = at_start ? y.s.front() : y.s.back();
        if (std::abs(sx.t - sy.t) > out.continuity_budget) continue;
        Path m;
        if (at_start) {
          m.s.assign(x.s.rbegin(), x.s.rend());
          m.s.insert(m.s.end(), y.s.begin(), y.s.end());
        } else {
          m.s = x.s;
          m.s.insert(m.s.end(), y.s.rbegin(), y.s.rend());
        }
        m.first = m.last = std::numeric_limits<double>::quiet_NaN();
        done[i] = std::move(m);
        done.erase(done.begin() + static_cast<std::ptrdiff_t>(j));
        return true;
      }
    return false;
  };
  while (try_merge(true) || try_merge(false)) {
  }

  for (auto& p : done) {
    EigenBranch br;
    br.k = k;
    br.samples = std::move(p.s);
    if (br.samples.front().t > br.samples.back().t) std::reverse(br.samples.begin(), br.samples.end());
    out.branches.push_back(std::move(br));
  }
  std::sort(out.branches.begin(), out.branches.end(),
            [](const EigenBranch& x, const EigenBranch& y) { return x.t_min() < y.t_min(); });
  return out;
}

double branch_energy_at(const PotentialSpec& V, const EigenBranch& branch, double t, VectorNorm norm) {
  if (branch.samples.empty()) throw PreconditionError("empty branch");
  if (!(t > 0.0 && t < 1.0) || t < branch.t_min() || t > branch.t_max())
    throw PreconditionError("t lies outside the sampled range of the branch");
  // Linear interpolation along the first bracketing pair gives the guess.
  double guess = branch.samples.front().E, spread = 0.0;
  const auto& s = branch.samples;
  if (s.size() == 1) {
    guess = s[0].E;
  } else {
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      const double t0 = std::min(s[i].t, s[i + 1].t), t1 = std::max(s[i].t, s[i + 1].t);
      if (t < t0 || t > t1) continue;
      const double w = t1 > t0 ? (t - s[i].t) / (s[i + 1].t - s[i].t) : 0.5;
      guess = s[i].E + w * (s[i + 1].E - s[i].E);
      spread = std::abs(s[i + 1].E - s[i].E);
      break;
    }
  }
  const double radius = std::max(2.0 * spread, 1e-3);
  auto f = [&](double E) -> std::optional<double> {
    if (!(std::abs(discriminant(V, E)) > 2.0 + 1e-10)) return std::nullopt;
    try {
      return MatchingFunction(V, E, norm)(t);
    } catch (const PreconditionError&) {
      return std::nullopt;  // band edge within rounding
    }
  };
  const int m = 64;
  double best = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> prev;
  double prevE = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double E = guess - radius + 2.0 * radius * i / m;
    const auto v = f(E);
    if (v && prev && ((*v < 0) != (*prev < 0) || *v == 0.0)) {
      double a = prevE, b = E, fa = *prev;
      for (int it = 0; it < 200 && b - a > 4e-16 * std::max(1.0, std::abs(a)); ++it) {
        const double c = 0.5 * (a + b);
        const auto fc = f(c);
        if (!fc) break;
        if ((*fc < 0) == (fa < 0)) a = c, fa = *fc;
        else b = c;
      }
      const double root = 0.5 * (a + b);
      const auto r = f(root);
      if (r && std::abs(*r) < 1e-8 && (std::isnan(best) || std::abs(root - guess) < std::abs(best - guess)))
        best = root;
    }
    prev = v;
    prevE = E;
  }
  if (std::isnan(best)) {
    // The sign convention of the decaying solutions can flip exactly at the
    // root, leaving |mismatch| with a V-shaped zero; minimize it instead.
    double lo = guess - radius, hi = guess + radius, fmin = std::numeric_limits<double>::infinity(), emin = guess;
    for (int i = 0; i <= m; ++i) {
      const double E = guess - radius + 2.0 * radius * i / m;
      const auto v = f(E);
      if (v && std::abs(*v) < fmin) fmin = std::abs(*v), emin = E;
    }
    lo = std::max(lo, emin - 2.0 * radius / m);
    hi = std::min(hi, emin + 2.0 * radius / m);
    auto g = [&](double E) {
      const auto v = f(E);
      return v ? std::abs(*v) : std::numeric_limits<double>::infinity();
    };
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - r * (hi - lo), d = lo + r * (hi - lo), gc = g(c), gd = g(d);
    for (int it = 0; it < 200 && hi - lo > 4e-16 * std::max(1.0, std::abs(lo)); ++it) {
      if (gc < gd) hi = d, d = c, gd = gc, c = hi - r * (hi - lo), gc = g(c);
      else lo = c, c = d, gc = gd, d = lo + r * (hi - lo), gd = g(d);
    }
    const double root = 0.5 * (lo + hi);
    if (g(root) < 1e-8) best = root;
  }
  if (std::isnan(best)) throw NumericalError("no eigenvalue of H_t found near the branch");
  return best;
}

std::string branch_csv(const EigenBranch& branch) {
  std::string out = "t,E,residual,gap_index\n";
  char buf[128];
  for (const auto& s : branch.samples) {
    std::snprintf(buf, sizeof buf, "%.12f,%.12f,%.3e,%d\n", s.t, s.E, s.residual, branch.k);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Approximants

ApproximantGrid approximant_grid(const PotentialSpec& V, int n, double t, double h) {
  if (n < 1) throw ValidationError("n must be >= 1");
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("dislocation parameter t outside [0, 1]");
  if (!(h > 0.0)) throw ValidationError("grid spacing must be positive");
  const double p = V.period();
  const double length = (2.0 * n + t) * p;
  ApproximantGrid g;
  g.n = n;
  g.t = t;
  g.cells = static_cast<int>(std::ceil(length / h - 1e-9));
  g.h = length / g.cells;
  g.left = -(n + t) * p;
  if (p / g.h < 16.0 - 1e-9) throw ValidationError("grid too coarse: fewer than 16 points per period");
  return g;
}

template <class T>
linalg::PeriodicChain<T> approximant_chain(const PotentialSpec& V, const ApproximantGrid& g) {
  linalg::PeriodicChain<T> c;
  const T k = T(1) / (T(g.h) * T(g.h));
  c.diag.resize(g.cells);
  for (int j = 0; j < g.cells; ++j) {
    const double a = g.left + j * g.h, b = j + 1 == g.cells ? g.n * V.period() : g.left + (j + 1) * g.h;
    c.diag[j] = 2 * k + T(dislocated_average(V, g.t, a, b));
  }
  c.off.assign(g.cells - 1, -k);
  c.corner = -k;
  c.periodic = true;
  return c;
}

template linalg::PeriodicChain<double> approximant_chain(const PotentialSpec&, const ApproximantGrid&);
template linalg::PeriodicChain<__float128> approximant_chain(const PotentialSpec&, const ApproximantGrid&);

ApproximantSpectrum approximant_eigenvalues(const PotentialSpec& V, int n, double t,
                                            std::pair<double, double> window, double h) {
  const ApproximantGrid g = approximant_grid(V, n, t, h);
  if (!(window.first < window.second)) throw ValidationError("empty eigenvalue window");
  const auto chain = approximant_chain<double>(V, g);
  ApproximantSpectrum out;
  out.n = n;
  out.t = t;
  out.h = g.h;
  out.lo = window.first;
  out.hi = window.second;
  out.eigenvalues = chain.eigenvalues_in(window.first, window.second, 1e-14 * std::max(1.0, chain.scale()));
  return out;
}

int count_below(const PotentialSpec& V, int n, double t, double E, double h) {
  return approximant_chain<double>(V, approximant_grid(V, n, t, h)).count_below(E);
}

// ---------------------------------------------------------------------------
// Spectral flow

SpectralFlowResult spectral_flow(const PotentialSpec& V, int k, int n, double e_ref, double h, double gap_tol) {
  const Gap g = require_open_gap(V, k, gap_tol);
  if (!(e_ref > g.lo + 10 * gap_tol && e_ref < g.hi - 10 * gap_tol))
    throw DomainError("reference energy must lie inside gap " + std::to_string(k));
  SpectralFlowResult r;
  r.k = k;
  r.e_ref = e_ref;
  r.n = n;
  r.count_t0 = count_below(V, n, 0.0, e_ref, h);
  r.count_t1 = count_below(V, n, 1.0, e_ref, h);
  r.flow = r.count_t1 - r.count_t0;
  return r;
}

nlohmann::json to_json(const SpectralFlowResult& r) {
  return {{"k", r.k}, {"n", r.n}, {"E_ref", r.e_ref}, {"count_t0", r.count_t0}, {"count_t1", r.count_t1},
          {"flow", r.flow}};
}

// ---------------------------------------------------------------------------
// Closeness to the infinite discrete chain

namespace {

using quad = __float128;

quad qabs(quad x) { return x < 0 ? -x : x; }

struct Q2 {
  quad a = 1, b = 0, c = 0, d = 1;
  Q2 operator*(const Q2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
};

// (u_{j+1}, u_j) from (u_j, u_{j-1}) for the three-point scheme at node j.
Q2 node_transfer(quad w, quad E, quad h2) { return {2 + h2 * (w - E), -1, 1, 0}; }

// Eigenvector of a 2x2 matrix for eigenvalue rho, max-normalized with its
// first nonzero component positive.
std::array<quad, 2> eigvec(const Q2& P, quad rho) {
  std::array<quad, 2> u{P.b, rho - P.a}, v{rho - P.d, P.c};
  const quad nu = std::max(qabs(u[0]), qabs(u[1])), nv = std::max(qabs(v[0]), qabs(v[1]));
  std::array<quad, 2> x = nu >= nv ? u : v;
  const quad n = std::max(nu, nv);
  x[0] /= n;
  x[1] /= n;
  if (x[0] < 0 || (x[0] == 0 && x[1] < 0)) x = {-x[0], -x[1]};
  return x;
}

// The dislocated whole-line chain for cell averages w (one period, period
// index shift ts): right half uses w[j mod g], left half w[(j + ts) mod g].
struct DiscreteLine {
  std::vector<quad> w;
  int shift = 0;
  quad h2 = 0;

  // Matching determinant; nullopt outside the discrete gap.
  std::optional<quad> mismatch(quad E) const {
    const int g = static_cast<int>(w.size());
    Q2 R, L;
    for (int j = 0; j < g; ++j) R = node_transfer(w[j], E, h2) * R;
    for (int j = -g; j < 0; ++j) L = node_transfer(w[((j + shift) % g + g) % g], E, h2) * L;
    const quad D = R.a + R.d;
    if (!(qabs(D) > 2)) return std::nullopt;
    const quad big = (D + (D > 0 ? 1 : -1) * sqrtq(D * D - 4)) / 2;
    const auto sR = eigvec(R, 1 / big);
    const auto sL = eigvec(L, big);
    return sL[0] * sR[1] - sL[1] * sR[0];
  }
};

quad reference_root(const DiscreteLine& line, double guess, double radius) {
  const int m = 80;
  std::optional<quad> best;
  std::optional<quad> prev;
  quad prevE = 0;
  for (int i = 0; i <= m; ++i) {
    const quad E = quad(guess - radius) + quad(2 * radius) * i / m;
    const auto v = line.mismatch(E);
    if (v && prev && ((*v < 0) != (*prev < 0) || *v == 0)) {
      quad a = prevE, b = E, fa = *prev;
      for (int it = 0; it < 200 && b - a > quad(1e-30); ++it) {
        const quad c = (a + b) / 2;
        const auto fc = line.mismatch(c);
        if (!fc) break;
        if ((*fc < 0) == (fa < 0)) a = c, fa = *fc;
        else b = c;
      }
      const quad root = (a + b) / 2;
      const auto r = line.mismatch(root);
      if (r && qabs(*r) < quad(1e-8) && (!best || qabs(root - guess) < qabs(*best - guess))) best = root;
    }
    prev = v;
    prevE = E;
  }
  if (!best) throw NumericalError("the discrete whole-line chain has no eigenvalue near the branch");
  return *best;
}

}  // namespace

std::vector<ClosenessRow> branch_vs_approximant(const PotentialSpec& V, const EigenBranch& branch, double t,
                                                const std::vector<int>& n_list, const ClosenessOptions& opt) {
  if (opt.cells_per_period < 16) throw ValidationError("cells_per_period must be >= 16");
  if (!std::is_sorted(n_list.begin(), n_list.end())) throw ValidationError("n_list must be ascending");
  if (!(t > 0.0 && t < 1.0)) throw PreconditionError("branch_vs_approximant requires 0 < t < 1");
  const int M = opt.cells_per_period;
  const double ts = std::round(t * M) / M;
  if (!(ts > 0.0 && ts < 1.0) || ts < branch.t_min() || ts > branch.t_max())
    throw PreconditionError("t lies outside the sampled range of the branch");
  const double E_branch = branch_energy_at(V, branch, ts);
  const double p = V.period();

  quad ref[2];
  DiscreteLine lines[2];
  for (int level = 0; level < 2; ++level) {
    const int g = M << level;
    const double h = p / g;
    DiscreteLine& L = lines[level];
    L.shift = static_cast<int>(std::lround(ts * g));
    L.h2 = quad(h) * quad(h);
    for (int m = 0; m < g; ++m) L.w.push_back(V.cell_average(m * h, (m + 1) * h));
    ref[level] = reference_root(L, E_branch, opt.window_radius);
  }

  std::vector<ClosenessRow> rows;
  for (int n : n_list) {
    if (n < 1) throw ValidationError("n must be >= 1");
    ClosenessRow row;
    row.n = n;
    row.t = ts;
    row.branch_energy = E_branch;
    quad e[2];
    for (int level = 0; level < 2; ++level) {
      const DiscreteLine& L = lines[level];
      const int g = static_cast<int>(L.w.size());
      const int first = -(n * g + L.shift), cells = 2 * n * g + L.shift;
      linalg::PeriodicChain<quad> chain;
      const quad k = 1 / L.h2;
      for (int i = 0; i < cells; ++i) {
        const int j = first + i;
        const int idx = j < 0 ? ((j + L.shift) % g + g) % g : j % g;
        chain.diag.push_back(2 * k + L.w[idx]);
      }
      chain.off.assign(cells - 1, -k);
      chain.corner = -k;
      const quad r = opt.window_radius;
      const auto ev = chain.eigenvalues_in(ref[level] - r, ref[level] + r, quad(1e-28));
      row.reference[level] = static_cast<double>(ref[level]);
      if (ev.empty()) {
        row.flagged = true;
        e[level] = ref[level] + r;
      } else {
        e[level] = *std::min_element(ev.begin(), ev.end(), [&](quad x, quad y) {
          return qabs(x - ref[level]) < qabs(y - ref[level]);
        });
      }
      row.approximant[level] = static_cast<double>(e[level]);
    }
    row.richardson = static_cast<double>((4 * e[1] - e[0]) / 3);
    row.literal_distance = std::abs(row.richardson - E_branch);
    row.distance = row.flagged ? opt.window_radius
                               : static_cast<double>(qabs((4 * (e[1] - ref[1]) - (e[0] - ref[0])) / 3));
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Resolvents

double resolvent_difference(const PotentialSpec& V, int n, double t, double s, std::complex<double> z, double h) {
  if (n < 1) throw ValidationError("n must be >= 1");
  if (!(h > 0.0)) throw ValidationError("grid spacing must be positive");
  const double p = V.period();
  const double left = -(n + 1) * p, length = (2 * n + 1) * p;
  const int N = static_cast<int>(std::ceil(length / h - 1e-9));
  const double hh = length / N;
  if (p / hh < 16.0 - 1e-9) throw ValidationError("grid too coarse: fewer than 16 points per period");
  using cplx = std::complex<double>;
  std::vector<double> wt(N), ws(N);
  double wmax = 0.0;
  for (int j = 0; j < N; ++j) {
    wt[j] = dislocated_average(V, t, left + j * hh, left + (j + 1) * hh);
    ws[j] = dislocated_average(V, s, left + j * hh, left + (j + 1) * hh);
    wmax = std::max({wmax, std::abs(wt[j]), std::abs(ws[j])});
  }
  // R_t - R_s = R_t (W_s - W_t) R_s and W_s - W_t lives on few cells, so the
  // difference has low rank: with A = R_t[:, J] diag(dW_J) and B = R_s[J, :],
  // ||A B|| = ||R_A R_B^*|| from thin QR factors of A and B^*.
  std::vector<int> J;
  for (int j = 0; j < N; ++j)
    if (std::abs(ws[j] - wt[j]) > 1e-14 * (1.0 + wmax)) J.push_back(j);
  if (J.empty()) return 0.0;
  auto factor = [&](const std::vector<double>& w) {
    std::vector<Eigen::Triplet<cplx>> trip;
    const double k = 1.0 / (hh * hh);
    for (int j = 0; j < N; ++j) {
      trip.emplace_back(j, j, 2 * k + w[j] - z);
      trip.emplace_back(j, (j + 1) % N, -k);
      trip.emplace_back((j + 1) % N, j, -k);
    }
    Eigen::SparseMatrix<cplx> A(N, N);
    A.setFromTriplets(trip.begin(), trip.end());
    auto lu = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<cplx>>>();
    lu->compute(A);
    if (lu->info() != Eigen::Success) throw NumericalError("resolvent factorization failed; z is an eigenvalue");
    return lu;
  };
  const auto lt = factor(wt), ls = factor(ws);
  const int K = static_cast<int>(J.size());
  Eigen::MatrixXcd E = Eigen::MatrixXcd::Zero(N, K);
  for (int c = 0; c < K; ++c) E(J[c], c) = 1.0;
  Eigen::MatrixXcd A = lt->solve(E);
  for (int c = 0; c < K; ++c) A.col(c) *= ws[J[c]] - wt[J[c]];
  // R_s is complex symmetric, so B^* = conj(R_s[:, J]).
  const Eigen::MatrixXcd Bs = Eigen::MatrixXcd(ls->solve(E)).conjugate();
  const Eigen::MatrixXcd Ra = Eigen::HouseholderQR<Eigen::MatrixXcd>(A).matrixQR().topRows(K).triangularView<Eigen::Upper>();
  const Eigen::MatrixXcd Rb = Eigen::HouseholderQR<Eigen::MatrixXcd>(Bs).matrixQR().topRows(K).triangularView<Eigen::Upper>();
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(Ra * Rb.adjoint());
  return svd.singularValues()(0);
}

}  // namespace disloc
