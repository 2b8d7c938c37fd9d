#pragma once

#include <string>
#include <variant>
#include <vector>

namespace disloc {

struct PiecewiseConstant {
  std::vector<double> breakpoints;  // strictly increasing, inside [0, period)
  std::vector<double> values;       // values[i] holds on [breakpoints[i], breakpoints[i+1])
};

// V(x) = cos[0] + sum_k cos[k] cos(2 pi k x / p) + sin[k] sin(2 pi k x / p), k >= 1.
// sin[0] is ignored.
struct Fourier {
  std::vector<double> cos;
  std::vector<double> sin;
};

// samples[j] = V(j p / N); linear interpolation in between, periodic wrap.
struct Sampled {
  std::vector<double> samples;
};

// A periodic real potential on the line.
class PotentialSpec {
 public:
  using Form = std::variant<PiecewiseConstant, Fourier, Sampled>;

  static PotentialSpec piecewise(double period, std::vector<double> breakpoints,
                                 std::vector<double> values);
  static PotentialSpec fourier(double period, std::vector<double> cos_coeffs,
                               std::vector<double> sin_coeffs = {});
  static PotentialSpec sampled(double period, std::vector<double> samples);
  static PotentialSpec constant(double value, double period = 1.0);

  double period() const { return period_; }
  const Form& form() const { return form_; }
  bool is_piecewise() const { return std::holds_alternative<PiecewiseConstant>(form_); }
  std::string kind() const;

  double operator()(double x) const;

  // Exact integral over [a, b] for every form (a <= b not required).
  double integral(double a, double b) const;
  // integral(a, b) / (b - a); point value when a == b.
  double cell_average(double a, double b) const;

  double min_value() const;
  double max_value() const;

  // Points in [a, b] where V is not smooth (jumps for piecewise, nodes for
  // sampled), ascending. Fourier potentials have none.
  std::vector<double> singular_points(double a, double b) const;

  // V + c.
  PotentialSpec shifted(double c) const;
  // V(x / s) with period s * p; rescales the spatial variable.
  PotentialSpec rescaled(double new_period) const;

 private:
  PotentialSpec(double period, Form form);
  void validate() const;
  double reduce(double x) const;           // into [0, period)
  double primitive_in_period(double r) const;  // integral over [0, r], r in [0, p]

  double period_ = 1.0;
  Form form_;
  double mean_ = 0.0;
  std::vector<double> cumulative_;  // piecewise / sampled prefix integrals
};

double evaluate(const PotentialSpec& V, double x);

// W_t(x): V(x) for x >= 0 and V(x + t p) for x < 0. The shift is measured in
// periods so that t = 1 is a full-period translation.
double dislocate(const PotentialSpec& V, double t, double x);
// Exact cell average of W_t over [a, b], splitting at x = 0.
double dislocated_average(const PotentialSpec& V, double t, double a, double b);

struct ThetaOptions {
  int resolution = 1 << 16;  // midpoint nodes per period for non-piecewise forms
};

// L1 modulus of continuity: integral over one period of |V(x + s) - V(x)|.
double theta(const PotentialSpec& V, double s, const ThetaOptions& opt = {});

double total_variation(const PotentialSpec& V, const ThetaOptions& opt = {});

struct RegularityReport {
  double alpha_estimate = 1.0;   // clamped into (0, 1]
  double alpha_raw = 1.0;        // unclamped least-squares slope
  double holder_constant = 0.0;
  double total_variation_per_period = 0.0;
  bool is_bv = false;
  double fit_tolerance = 0.05;
  std::vector<double> s_grid;
  std::vector<double> theta_values;
};

std::vector<double> default_s_grid(double period);

RegularityReport regularity_class(const PotentialSpec& V, const std::vector<double>& s_grid,
                                  const ThetaOptions& opt = {});
inline RegularityReport regularity_class(const PotentialSpec& V) {
  return regularity_class(V, default_s_grid(V.period()));
}

}  // namespace disloc
