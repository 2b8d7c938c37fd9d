#include "disloc/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "disloc/errors.hpp"

namespace disloc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

PotentialSpec::PotentialSpec(double period, Form form) : period_(period), form_(std::move(form)) {
  validate();
  if (auto* pc = std::get_if<PiecewiseConstant>(&form_)) {
    // Segment starts in [0, p): [0, b0) carries the last value.
    const auto& b = pc->breakpoints;
    const auto& v = pc->values;
    cumulative_.assign(b.size() + 1, 0.0);
    double acc = b[0] * v.back();
    for (std::size_t i = 0; i < b.size(); ++i) {
      double end = (i + 1 < b.size()) ? b[i + 1] : period_;
      cumulative_[i] = acc;
      acc += (end - b[i]) * v[i];
    }
    cumulative_[b.size()] = acc;
    mean_ = acc / period_;
  } else if (auto* s = std::get_if<Sampled>(&form_)) {
    const auto& y = s->samples;
    const std::size_t n = y.size();
    const double dx = period_ / static_cast<double>(n);
    cumulative_.assign(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      cumulative_[j + 1] = cumulative_[j] + 0.5 * dx * (y[j] + y[(j + 1) % n]);
    mean_ = cumulative_[n] / period_;
  } else {
    const auto& f = std::get<Fourier>(form_);
    mean_ = f.cos.empty() ? 0.0 : f.cos[0];
  }
}

void PotentialSpec::validate() const {
  if (!(period_ > 0.0) || !std::isfinite(period_))
    throw ValidationError("period must be a positive finite number");
  if (auto* pc = std::get_if<PiecewiseConstant>(&form_)) {
    if (pc->breakpoints.empty()) throw ValidationError("breakpoints must be non-empty");
    if (pc->breakpoints.size() != pc->values.size())
      throw ValidationError("breakpoints and values must have equal length");
    if (!all_finite(pc->breakpoints) || !all_finite(pc->values))
      throw ValidationError("breakpoints and values must be finite");
    for (std::size_t i = 0; i < pc->breakpoints.size(); ++i) {
      double b = pc->breakpoints[i];
      if (b < 0.0 || b >= period_) throw ValidationError("breakpoints must lie in [0, period)");
      if (i > 0 && !(b > pc->breakpoints[i - 1]))
        throw ValidationError("breakpoints must be strictly increasing");
    }
  } else if (auto* f = std::get_if<Fourier>(&form_)) {
    if (f->cos.empty() && f->sin.empty())
      throw ValidationError("fourier form needs at least one coefficient");
    if (!all_finite(f->cos) || !all_finite(f->sin))
      throw ValidationError("fourier coefficients must be finite");
  } else {
    const auto& s = std::get<Sampled>(form_);
    if (s.samples.empty()) throw ValidationError("sample grid must be non-empty");
    if (!all_finite(s.samples)) throw ValidationError("samples must be finite");
  }
}

PotentialSpec PotentialSpec::piecewise(double period, std::vector<double> breakpoints,
                                       std::vector<double> values) {
  return PotentialSpec(period, PiecewiseConstant{std::move(breakpoints), std::move(values)});
}

PotentialSpec PotentialSpec::fourier(double period, std::vector<double> cos_coeffs,
                                     std::vector<double> sin_coeffs) {
  return PotentialSpec(period, Fourier{std::move(cos_coeffs), std::move(sin_coeffs)});
}

PotentialSpec PotentialSpec::sampled(double period, std::vector<double> samples) {
  return PotentialSpec(period, Sampled{std::move(samples)});
}

PotentialSpec PotentialSpec::constant(double value, double period) {
  return piecewise(period, {0.0}, {value});
}

std::string PotentialSpec::kind() const {
  if (is_piecewise()) return "piecewise";
  if (std::holds_alternative<Fourier>(form_)) return "fourier";
  return "sampled";
}

double PotentialSpec::reduce(double x) const {
  double r = x - period_ * std::floor(x / period_);
  if (r >= period_ || r < 0.0) r = 0.0;
  return r;
}

double PotentialSpec::operator()(double x) const {
  const double r = reduce(x);
  if (auto* pc = std::get_if<PiecewiseConstant>(&form_)) {
    const auto& b = pc->breakpoints;
    auto it = std::upper_bound(b.begin(), b.end(), r);
    if (it == b.begin()) return pc->values.back();
    return pc->values[static_cast<std::size_t>(it - b.begin()) - 1];
  }
  if (auto* f = std::get_if<Fourier>(&form_)) {
    double v = f->cos.empty() ? 0.0 : f->cos[0];
    const double w = kTwoPi * r / period_;
    for (std::size_t k = 1; k < f->cos.size(); ++k) v += f->cos[k] * std::cos(w * k);
    for (std::size_t k = 1; k < f->sin.size(); ++k) v += f->sin[k] * std::sin(w * k);
    return v;
  }
  const auto& y = std::get<Sampled>(form_).samples;
  const std::size_t n = y.size();
  const double u = r / period_ * static_cast<double>(n);
  std::size_t j = std::min(static_cast<std::size_t>(u), n - 1);
  const double frac = u - static_cast<double>(j);
  return y[j] + frac * (y[(j + 1) % n] - y[j]);
}

double PotentialSpec::primitive_in_period(double r) const {
  if (auto* pc = std::get_if<PiecewiseConstant>(&form_)) {
    const auto& b = pc->breakpoints;
    if (r < b[0]) return r * pc->values.back();
    auto i = static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), r) - b.begin()) - 1;
    return cumulative_[i] + (r - b[i]) * pc->values[i];
  }
  if (auto* f = std::get_if<Fourier>(&form_)) {
    double acc = mean_ * r;
    const double w = kTwoPi * r / period_;
    for (std::size_t k = 1; k < f->cos.size(); ++k)
      acc += f->cos[k] * period_ / (kTwoPi * k) * std::sin(w * k);
    for (std::size_t k = 1; k < f->sin.size(); ++k)
      acc += f->sin[k] * period_ / (kTwoPi * k) * (1.0 - std::cos(w * k));
    return acc;
  }
  const auto& y = std::get<Sampled>(form_).samples;
  const std::size_t n = y.size();
  const double dx = period_ / static_cast<double>(n);
  const double u = r / dx;
  std::size_t j = std::min(static_cast<std::size_t>(u), n);
  if (j == n) return cumulative_[n];
  const double fr = u - static_cast<double>(j);
  return cumulative_[j] + dx * (fr * y[j] + 0.5 * fr * fr * (y[(j + 1) % n] - y[j]));
}

double PotentialSpec::integral(double a, double b) const {
  if (a > b) return -integral(b, a);
  const double ka = std::floor(a / period_), kb = std::floor(b / period_);
  double ra = a - ka * period_, rb = b - kb * period_;
  ra = std::clamp(ra, 0.0, period_);
  rb = std::clamp(rb, 0.0, period_);
  return (kb - ka) * period_ * mean_ + primitive_in_period(rb) - primitive_in_period(ra);
}

double PotentialSpec::cell_average(double a, double b) const {
  const double w = b - a;
  if (std::abs(w) <= 1e-14 * std::max(1.0, std::abs(a))) return (*this)(0.5 * (a + b));
  if (is_piecewise()) {
    // Direct summation over the pieces avoids cancellation in long cells.
    const auto pts = singular_points(std::min(a, b), std::max(a, b));
    double lo = std::min(a, b), hi = std::max(a, b), acc = 0.0, x = lo;
    for (double p : pts) {
      if (p <= x) continue;
      acc += (p - x) * (*this)(0.5 * (x + p));
      x = p;
    }
    acc += (hi - x) * (*this)(0.5 * (x + hi));
    return acc / (hi - lo);
  }
  return integral(a, b) / w;
}

double PotentialSpec::min_value() const {
  if (auto* pc = std::get_if<PiecewiseConstant>(&form_))
    return *std::min_element(pc->values.begin(), pc->values.end());
  if (auto* s = std::get_if<Sampled>(&form_))
    return *std::min_element(s->samples.begin(), s->samples.end());
  const auto& f = std::get<Fourier>(form_);
  double v = mean_;
  for (std::size_t k = 1; k < f.cos.size(); ++k) v -= std::abs(f.cos[k]);
  for (std::size_t k = 1; k < f.sin.size(); ++k) v -= std::abs(f.sin[k]);
  return v;
}

double PotentialSpec::max_value() const {
  if (auto* pc = std::get_if<PiecewiseConstant>(&form_))
    return *std::max_element(pc->values.begin(), pc->values.end());
  if (auto* s = std::get_if<Sampled>(&form_))
    return *std::max_element(s->samples.begin(), s->samples.end());
  const auto& f = std::get<Fourier>(form_);
  double v = mean_;
  for (std::size_t k = 1; k < f.cos.size(); ++k) v += std::abs(f.cos[k]);
  for (std::size_t k = 1; k < f.sin.size(); ++k) v += std::abs(f.sin[k]);
  return v;
}

std::vector<double> PotentialSpec::singular_points(double a, double b) const {
  std::vector<double> out;
  std::vector<double> local;
  if (auto* pc = std::get_if<PiecewiseConstant>(&form_)) {
    local = pc->breakpoints;
  } else if (auto* s = std::get_if<Sampled>(&form_)) {
    const std::size_t n = s->samples.size();
    for (std::size_t j = 0; j < n; ++j) local.push_back(period_ * j / static_cast<double>(n));
  } else {
    return out;
  }
  const double k0 = std::floor(a / period_), k1 = std::floor(b / period_);
  for (double k = k0; k <= k1; k += 1.0)
    for (double x : local) {
      double y = k * period_ + x;
      if (y >= a && y <= b) out.push_back(y);
    }
  std::sort(out.begin(), out.end());
  return out;
}

PotentialSpec PotentialSpec::shifted(double c) const {
  if (auto* pc = std::get_if<PiecewiseConstant>(&form_)) {
    auto v = pc->values;
    for (double& x : v) x += c;
    return piecewise(period_, pc->breakpoints, v);
  }
  if (auto* f = std::get_if<Fourier>(&form_)) {
    auto cs = f->cos;
    if (cs.empty()) cs.push_back(0.0);
    cs[0] += c;
    return fourier(period_, cs, f->sin);
  }
  auto y = std::get<Sampled>(form_).samples;
  for (double& x : y) x += c;
  return sampled(period_, y);
}

PotentialSpec PotentialSpec::rescaled(double new_period) const {
  if (auto* pc = std::get_if<PiecewiseConstant>(&form_)) {
    auto b = pc->breakpoints;
    for (double& x : b) x *= new_period / period_;
    return piecewise(new_period, b, pc->values);
  }
  if (auto* f = std::get_if<Fourier>(&form_)) return fourier(new_period, f->cos, f->sin);
  return sampled(new_period, std::get<Sampled>(form_).samples);
}

double evaluate(const PotentialSpec& V, double x) { return V(x); }

double dislocate(const PotentialSpec& V, double t, double x) {
  if (!(t >= 0.0 && t <= 1.0)) {
    std::ostringstream os;
    os << "dislocation parameter t = " << t << " outside [0, 1]";
    throw DomainError(os.str());
  }
  return x >= 0.0 ? V(x) : V(x + t * V.period());
}

double dislocated_average(const PotentialSpec& V, double t, double a, double b) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("dislocation parameter t outside [0, 1]");
  const double shift = t * V.period();
  if (b <= 0.0) return V.cell_average(a + shift, b + shift);
  if (a >= 0.0) return V.cell_average(a, b);
  const double left = -a * V.cell_average(a + shift, shift);
  const double right = b * V.cell_average(0.0, b);
  return (left + right) / (b - a);
}

double theta(const PotentialSpec& V, double s, const ThetaOptions& opt) {
  const double p = V.period();
  if (!(s >= 0.0 && s <= p)) throw DomainError("theta requires 0 <= s <= period");
  if (s == 0.0 || s == p) return 0.0;
  if (auto* pc = std::get_if<PiecewiseConstant>(&V.form())) {
    std::vector<double> pts{0.0, p};
    for (double b : pc->breakpoints) {
      pts.push_back(b);
      double c = b - s;
      if (c < 0.0) c += p;
      pts.push_back(c);
    }
    std::sort(pts.begin(), pts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double len = pts[i + 1] - pts[i];
      if (len <= 0.0) continue;
      const double m = 0.5 * (pts[i] + pts[i + 1]);
      acc += len * std::abs(V(m + s) - V(m));
    }
    return acc;
  }
  const int n = opt.resolution;
  const double dx = p / n;
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    const double x = (j + 0.5) * dx;
    acc += std::abs(V(x + s) - V(x));
  }
  return acc * dx;
}

double total_variation(const PotentialSpec& V, const ThetaOptions& opt) {
  if (auto* pc = std::get_if<PiecewiseConstant>(&V.form())) {
    const auto& v = pc->values;
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += std::abs(v[i] - v[(i + v.size() - 1) % v.size()]);
    return acc;
  }
  if (auto* s = std::get_if<Sampled>(&V.form())) {
    const auto& y = s->samples;
    double acc = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) acc += std::abs(y[(j + 1) % y.size()] - y[j]);
    return acc;
  }
  const auto& f = std::get<Fourier>(V.form());
  const double p = V.period();
  const int n = opt.resolution;
  const double dx = p / n;
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    const double w = kTwoPi * (j + 0.5) * dx / p;
    double d = 0.0;
    for (std::size_t k = 1; k < f.cos.size(); ++k) d -= f.cos[k] * k * std::sin(w * k);
    for (std::size_t k = 1; k < f.sin.size(); ++k) d += f.sin[k] * k * std::cos(w * k);
    acc += std::abs(d) * kTwoPi / p;
  }
  return acc * dx;
}

std::vector<double> default_s_grid(double period) {
  std::vector<double> s;
  for (int k = 3; k <= 10; ++k) s.push_back(std::ldexp(period, -k));
  return s;
}

RegularityReport regularity_class(const PotentialSpec& V, const std::vector<double>& s_grid,
                                  const ThetaOptions& opt) {
  const double p = V.period();
  if (s_grid.size() < 4) throw ValidationError("s_grid needs at least 4 points");
  for (double s : s_grid)
    if (!(s > 0.0 && s <= p)) throw ValidationError("s_grid values must lie in (0, period]");
  const auto [lo, hi] = std::minmax_element(s_grid.begin(), s_grid.end());
  if (*hi < 10.0 * *lo) throw ValidationError("s_grid must span at least a decade");

  RegularityReport rep;
  rep.s_grid = s_grid;
  rep.total_variation_per_period = total_variation(V, opt);
  const double scale = std::max({1.0, std::abs(V.min_value()), std::abs(V.max_value())}) * p;
  std::vector<double> lx, ly;
  for (double s : s_grid) {
    const double th = theta(V, s, opt);
    rep.theta_values.push_back(th);
    if (th > 1e-14 * scale) {
      lx.push_back(std::log(s));
      ly.push_back(std::log(th));
    }
  }
  if (lx.empty()) {
    rep.alpha_estimate = rep.alpha_raw = 1.0;
    rep.holder_constant = 0.0;
    rep.is_bv = std::isfinite(rep.total_variation_per_period);
    return rep;
  }
  if (lx.size() < 2) throw NumericalError("theta vanishes on most of the s grid; no fit possible");
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  rep.alpha_raw = sxy / sxx;
  rep.holder_constant = std::exp(my - rep.alpha_raw * mx);
  rep.alpha_estimate = std::clamp(rep.alpha_raw, 1e-12, 1.0);
  // Bounded variation shows up as linear growth of theta on the probed scales.
  rep.is_bv = std::isfinite(rep.total_variation_per_period) &&
              std::abs(rep.alpha_raw - 1.0) <= rep.fit_tolerance;
  return rep;
}

}  // namespace disloc
