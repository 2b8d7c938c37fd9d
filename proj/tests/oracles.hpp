#pragma once
// Independent reference computations used by the tests. Nothing here calls
// into the library's numerical code.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

// Midpoint Riemann sum of |f(x + s) - f(x)| over [0, p).
inline double theta(const std::function<double(double)>& f, double p, double s, int n) {
  double acc = 0.0;
  const double dx = p / n;
  for (int j = 0; j < n; ++j) {
    const double x = (j + 0.5) * dx;
    acc += std::abs(f(x + s) - f(x));
  }
  return acc * dx;
}

// Sum of |f(x_{j+1}) - f(x_j)| over a fine uniform grid of one period.
inline double total_variation(const std::function<double(double)>& f, double p, int n) {
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += std::abs(f(p * (j + 1) / n) - f(p * j / n));
  return acc;
}

// Ordinary least squares slope and intercept of y against x.
inline std::pair<double, double> line_fit(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= x.size();
  my /= y.size();
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxx += (x[i] - mx) * (x[i] - mx), sxy += (x[i] - mx) * (y[i] - my);
  return {sxy / sxx, my - sxy / sxx * mx};
}

// Step potential with value a on [0, p/2) and b on [p/2, p).
inline std::function<double(double)> step(double a, double b, double p) {
  return [=](double x) {
    double r = x - p * std::floor(x / p);
    return r < 0.5 * p ? a : b;
  };
}

// Antiderivative from 0 of the step potential above.
inline std::function<double(double)> step_primitive(double a, double b, double p) {
  return [=](double x) {
    const double k = std::floor(x / p), r = x - k * p;
    return k * 0.5 * (a + b) * p + a * std::min(r, 0.5 * p) + b * std::max(0.0, r - 0.5 * p);
  };
}

// 2x2 matrix as row-major array.
struct M2 {
  double a, b, c, d;
  M2 operator*(const M2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  double trace() const { return a + d; }
};

// Propagator of -u'' + (v - E) u = 0 over length L, closed form.
inline M2 closed_form_block(double v, double E, double L) {
  const double q = E - v;
  if (q > 0) {
    const double k = std::sqrt(q);
    return {std::cos(k * L), std::sin(k * L) / k, -k * std::sin(k * L), std::cos(k * L)};
  }
  if (q < 0) {
    const double k = std::sqrt(-q);
    return {std::cosh(k * L), std::sinh(k * L) / k, k * std::sinh(k * L), std::cosh(k * L)};
  }
  return {1.0, L, 0.0, 1.0};
}

// Classical RK4 with a fine fixed step, both fundamental solutions at once.
inline M2 rk4_propagator(const std::function<double(double)>& V, double E, double x0, double x1, int steps) {
  double y[2][2] = {{1, 0}, {0, 1}};
  const double h = (x1 - x0) / steps;
  for (int i = 0; i < steps; ++i) {
    const double x = x0 + i * h;
    for (auto& c : y) {
      auto f = [&](double xx, double u, double v, double& du, double& dv) {
        du = v;
        dv = (V(xx) - E) * u;
      };
      double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
      f(x, c[0], c[1], k1u, k1v);
      f(x + h / 2, c[0] + h / 2 * k1u, c[1] + h / 2 * k1v, k2u, k2v);
      f(x + h / 2, c[0] + h / 2 * k2u, c[1] + h / 2 * k2v, k3u, k3v);
      f(x + h, c[0] + h * k3u, c[1] + h * k3v, k4u, k4v);
      c[0] += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
      c[1] += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    }
  }
  return {y[0][0], y[1][0], y[0][1], y[1][1]};
}

// Bessel J_n from Bessel's integral (1/pi) int_0^pi cos(n tau - x sin tau);
// the trapezoid rule is spectrally accurate for this periodic integrand.
inline double bessel_j(int n, double x) {
  const int m = 400;
  double acc = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double tau = pi * i / m;
    const double w = (i == 0 || i == m) ? 0.5 : 1.0;
    acc += w * std::cos(n * tau - x * std::sin(tau));
  }
  return acc / m;
}

inline double bessel_zero(int nu, double lo, double hi) {
  double flo = bessel_j(nu, lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = bessel_j(nu, mid);
    if ((fm < 0) == (flo < 0)) lo = mid, flo = fm;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle
