#include "disloc/strip2d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "disloc/errors.hpp"
#include "disloc/linalg/sliced_inertia.hpp"
#include "disloc/parallel.hpp"
#include "disloc/potential_io.hpp"

namespace disloc {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Exact integral of exp(i a x) over [x0, x1].
std::complex<double> exp_integral(double a, double x0, double x1) {
  const double d = x1 - x0, u = 0.5 * a * d;
  const double sinc = std::abs(u) < 1e-8 ? 1.0 - u * u / 6.0 : std::sin(u) / u;
  return std::polar(d * sinc, a * 0.5 * (x0 + x1));
}

double wrap_unit(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

double bilinear(const Sampled2D& s, double x, double y) {
  const double gx = wrap_unit(x) * s.nx, gy = wrap_unit(y) * s.ny;
  int i0 = std::min(static_cast<int>(gx), s.nx - 1), j0 = std::min(static_cast<int>(gy), s.ny - 1);
  const double fx = gx - i0, fy = gy - j0;
  const int i1 = (i0 + 1) % s.nx, j1 = (j0 + 1) % s.ny;
  auto v = [&](int i, int j) { return s.values[static_cast<std::size_t>(j) * s.nx + i]; };
  return (1 - fx) * (1 - fy) * v(i0, j0) + fx * (1 - fy) * v(i1, j0) + (1 - fx) * fy * v(i0, j1) +
         fx * fy * v(i1, j1);
}

// Cut points of [a, b] at multiples of 1 / m.
std::vector<double> cuts(double a, double b, int m) {
  std::vector<double> c{a};
  for (double k = std::floor(a * m) + 1; k / m < b; k += 1) c.push_back(k / m);
  c.push_back(b);
  return c;
}

}  // namespace

Potential2D Potential2D::separable(PotentialSpec v, PotentialSpec w) {
  if (std::abs(v.period() - 1.0) > 1e-12 || std::abs(w.period() - 1.0) > 1e-12)
    throw ValidationError("separable components must have period 1");
  return Potential2D(Separable2D{std::move(v), std::move(w)});
}

Potential2D Potential2D::fourier(std::vector<FourierTerm2D> terms) {
  for (const auto& t : terms)
    if (!std::isfinite(t.c) || !std::isfinite(t.s)) throw ValidationError("Fourier coefficients must be finite");
  return Potential2D(Fourier2D{std::move(terms)});
}

Potential2D Potential2D::sampled(int nx, int ny, std::vector<double> values) {
  if (nx < 1 || ny < 1) throw ValidationError("sample grid must be at least 1 x 1");
  if (values.size() != static_cast<std::size_t>(nx) * ny)
    throw ValidationError("sample grid needs nx * ny values");
  for (double v : values)
    if (!std::isfinite(v)) throw ValidationError("samples must be finite");
  return Potential2D(Sampled2D{nx, ny, std::move(values)});
}

Potential2D Potential2D::zero() { return separable(PotentialSpec::constant(0.0), PotentialSpec::constant(0.0)); }

std::string Potential2D::kind() const {
  switch (form_.index()) {
    case 0: return "separable";
    case 1: return "fourier2d";
    default: return "sampled2d";
  }
}

double Potential2D::operator()(double x, double y) const {
  if (const auto* s = std::get_if<Separable2D>(&form_)) return s->v(x) + s->w(y);
  if (const auto* f = std::get_if<Fourier2D>(&form_)) {
    double sum = 0;
    for (const auto& t : f->terms) {
      const double a = two_pi * (t.kx * x + t.ky * y);
      sum += t.c * std::cos(a) + t.s * std::sin(a);
    }
    return sum;
  }
  return bilinear(std::get<Sampled2D>(form_), x, y);
}

double Potential2D::cell_average(double x0, double x1, double y0, double y1) const {
  if (!(x1 > x0) || !(y1 > y0)) return (*this)(0.5 * (x0 + x1), 0.5 * (y0 + y1));
  const double area = (x1 - x0) * (y1 - y0);
  if (const auto* s = std::get_if<Separable2D>(&form_)) return s->v.cell_average(x0, x1) + s->w.cell_average(y0, y1);
  if (const auto* f = std::get_if<Fourier2D>(&form_)) {
    double sum = 0;
    for (const auto& t : f->terms) {
      const auto z = exp_integral(two_pi * t.kx, x0, x1) * exp_integral(two_pi * t.ky, y0, y1);
      sum += t.c * z.real() + t.s * z.imag();
    }
    return sum / area;
  }
  // The bilinear interpolant averages to its centre value on each sample cell.
  const auto& s = std::get<Sampled2D>(form_);
  const auto cx = cuts(x0, x1, s.nx), cy = cuts(y0, y1, s.ny);
  double sum = 0;
  for (std::size_t a = 0; a + 1 < cx.size(); ++a)
    for (std::size_t b = 0; b + 1 < cy.size(); ++b)
      sum += (cx[a + 1] - cx[a]) * (cy[b + 1] - cy[b]) *
             bilinear(s, 0.5 * (cx[a] + cx[a + 1]), 0.5 * (cy[b] + cy[b + 1]));
  return sum / area;
}

double Potential2D::lower_bound() const {
  if (const auto* s = std::get_if<Separable2D>(&form_)) return s->v.min_value() + s->w.min_value();
  if (const auto* f = std::get_if<Fourier2D>(&form_)) {
    double b = 0;
    for (const auto& t : f->terms) b += (t.kx == 0 && t.ky == 0) ? t.c : -std::hypot(t.c, t.s);
    return b;
  }
  const auto& v = std::get<Sampled2D>(form_).values;
  return *std::min_element(v.begin(), v.end());
}

double Potential2D::upper_bound() const {
  if (const auto* s = std::get_if<Separable2D>(&form_)) return s->v.max_value() + s->w.max_value();
  if (const auto* f = std::get_if<Fourier2D>(&form_)) {
    double b = 0;
    for (const auto& t : f->terms) b += (t.kx == 0 && t.ky == 0) ? t.c : std::hypot(t.c, t.s);
    return b;
  }
  const auto& v = std::get<Sampled2D>(form_).values;
  return *std::max_element(v.begin(), v.end());
}

std::optional<double> Potential2D::slope_estimate() const {
  const auto* s = std::get_if<Sampled2D>(&form_);
  if (!s) return std::nullopt;
  double m = 0;
  auto v = [&](int i, int j) { return s->values[static_cast<std::size_t>(j % s->ny) * s->nx + i % s->nx]; };
  for (int j = 0; j < s->ny; ++j)
    for (int i = 0; i < s->nx; ++i) {
      m = std::max(m, std::abs(v(i + 1, j) - v(i, j)) * s->nx);
      m = std::max(m, std::abs(v(i, j + 1) - v(i, j)) * s->ny);
    }
  return m;
}

double dislocate(const Potential2D& V, double t, double x, double y) { return x < 0 ? V(x + t, y) : V(x, y); }

double dislocated_average(const Potential2D& V, double t, double x0, double x1, double y0, double y1) {
  if (x1 <= 0) return V.cell_average(x0 + t, x1 + t, y0, y1);
  if (x0 >= 0) return V.cell_average(x0, x1, y0, y1);
  const double wl = -x0, wr = x1;
  return (wl * V.cell_average(x0 + t, t, y0, y1) + wr * V.cell_average(0, x1, y0, y1)) / (wl + wr);
}

Potential2D potential2d_from_json(const json& j, const std::string& path) {
  using namespace jsonutil;
  if (!j.is_object()) throw ValidationError(path + " must be an object");
  if (!j.contains("form") || !j.at("form").is_string())
    throw ValidationError("missing required key " + path + ".form");
  const std::string form = j.at("form").get<std::string>();
  if (form == "separable") {
    reject_unknown(j, {"form", "v", "w"}, path);
    if (!j.contains("v")) throw ValidationError("missing required key " + path + ".v");
    PotentialSpec v = potential_from_json(j.at("v"), path + ".v");
    PotentialSpec w = j.contains("w") ? potential_from_json(j.at("w"), path + ".w") : PotentialSpec::constant(0.0);
    return Potential2D::separable(std::move(v), std::move(w));
  }
  if (form == "fourier2d") {
    reject_unknown(j, {"form", "terms"}, path);
    if (!j.contains("terms") || !j.at("terms").is_array())
      throw ValidationError(path + ".terms must be an array");
    std::vector<FourierTerm2D> terms;
    for (std::size_t i = 0; i < j.at("terms").size(); ++i) {
      const auto& e = j.at("terms")[i];
      const std::string p = path + ".terms[" + std::to_string(i) + "]";
      if (!e.is_object()) throw ValidationError(p + " must be an object");
      reject_unknown(e, {"kx", "ky", "cos", "sin"}, p);
      FourierTerm2D t;
      for (const char* k : {"kx", "ky"}) {
        if (!e.contains(k) || !e.at(k).is_number_integer()) throw ValidationError(p + "." + k + " must be an integer");
      }
      t.kx = e.at("kx").get<int>();
      t.ky = e.at("ky").get<int>();
      t.c = e.contains("cos") ? number(e, "cos", p) : 0.0;
      t.s = e.contains("sin") ? number(e, "sin", p) : 0.0;
      terms.push_back(t);
    }
    return Potential2D::fourier(std::move(terms));
  }
  if (form == "sampled2d") {
    reject_unknown(j, {"form", "nx", "ny", "values"}, path);
    for (const char* k : {"nx", "ny"})
      if (!j.contains(k) || !j.at(k).is_number_integer()) throw ValidationError(path + "." + k + " must be an integer");
    return Potential2D::sampled(j.at("nx").get<int>(), j.at("ny").get<int>(), numbers(j, "values", path));
  }
  throw ValidationError(path + ".form must be one of separable, fourier2d, sampled2d");
}

json potential2d_to_json(const Potential2D& V) {
  if (const auto* s = std::get_if<Separable2D>(&V.form()))
    return {{"form", "separable"}, {"v", potential_to_json(s->v)}, {"w", potential_to_json(s->w)}};
  if (const auto* f = std::get_if<Fourier2D>(&V.form())) {
    json terms = json::array();
    for (const auto& t : f->terms) terms.push_back({{"kx", t.kx}, {"ky", t.ky}, {"cos", t.c}, {"sin", t.s}});
    return {{"form", "fourier2d"}, {"terms", terms}};
  }
  const auto& s = std::get<Sampled2D>(V.form());
  return {{"form", "sampled2d"}, {"nx", s.nx}, {"ny", s.ny}, {"values", s.values}};
}

std::optional<std::string> lipschitz_warning(const Potential2D& V, double bound) {
  const auto m = V.slope_estimate();
  if (!m || *m <= bound) return std::nullopt;
  std::ostringstream os;
  os << "sampled potential has difference quotients up to " << *m << " (bound " << bound
     << "); it may not be Lipschitz at this resolution";
  return os.str();
}

// ---------------------------------------------------------------------------

std::string to_string(Geometry g) { return g == Geometry::strip_periodic ? "strip-periodic" : "square-dirichlet"; }

Geometry geometry_from_string(const std::string& s) {
  if (s == "strip-periodic" || s == "strip") return Geometry::strip_periodic;
  if (s == "square-dirichlet" || s == "square") return Geometry::square_dirichlet;
  throw ValidationError("unknown geometry '" + s + "'");
}

namespace {

struct Layout {
  Grid2D grid;
  bool wrap_x = false, wrap_y = false;
  double phase_x = 0, phase_y = 0;
  bool paired_columns = false;  // interleave columns i and nx - 1 - i
};

bool is_real_phase(double theta) { return std::abs(std::sin(theta)) < 1e-14; }

template <class Scalar>
Eigen::SparseMatrix<Scalar> build(const Layout& L, const std::vector<double>& W, const std::vector<int>& row_of) {
  const Grid2D& g = L.grid;
  const double cx = 1.0 / (g.hx * g.hx), cy = 1.0 / (g.hy * g.hy);
  auto phase = [](double th) {
    if constexpr (std::is_same_v<Scalar, double>) return std::cos(th);
    else return std::polar(1.0, th);
  };
  const Scalar px = phase(L.phase_x), py = phase(L.phase_y);
  std::vector<Eigen::Triplet<Scalar>> trip;
  trip.reserve(5 * static_cast<std::size_t>(g.size()));
  auto node = [&](int i, int j) { return row_of[static_cast<std::size_t>(i) * g.ny + j]; };
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const int r = node(i, j);
      trip.emplace_back(r, r, Scalar(2 * cx + 2 * cy + W[static_cast<std::size_t>(i) * g.ny + j]));
      // Forward neighbours; the Hermitian partner is added alongside.
      auto link = [&](int c, Scalar v) {
        trip.emplace_back(r, c, v);
        if constexpr (std::is_same_v<Scalar, double>) trip.emplace_back(c, r, v);
        else trip.emplace_back(c, r, std::conj(v));
      };
      if (i + 1 < g.nx) link(node(i + 1, j), Scalar(-cx));
      else if (L.wrap_x && g.nx > 1) link(node(0, j), -cx * px);
      if (j + 1 < g.ny) link(node(i, j + 1), Scalar(-cy));
      else if (L.wrap_y && g.ny > 1) link(node(i, 0), -cy * py);
    }
  Eigen::SparseMatrix<Scalar> A(g.size(), g.size());
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

// Fills row ordering and slice starts.
void order(const Layout& L, std::vector<int>& row_of, std::vector<int>& node_of_row, std::vector<int>& starts) {
  const Grid2D& g = L.grid;
  row_of.assign(g.size(), 0);
  node_of_row.assign(g.size(), 0);
  starts.clear();
  int r = 0;
  auto put_column = [&](int i) {
    for (int j = 0; j < g.ny; ++j) {
      row_of[static_cast<std::size_t>(i) * g.ny + j] = r;
      node_of_row[r++] = i * g.ny + j;
    }
  };
  if (L.paired_columns) {
    for (int s = 0; s < (g.nx + 1) / 2; ++s) {
      starts.push_back(r);
      put_column(s);
      if (g.nx - 1 - s != s) put_column(g.nx - 1 - s);
    }
  } else {
    for (int i = 0; i < g.nx; ++i) {
      starts.push_back(r);
      put_column(i);
    }
  }
}

void check_spacing(double hx, double hy) {
  if (1.0 / hx < 16.0 - 1e-9 || 1.0 / hy < 16.0 - 1e-9)
    throw ValidationError("grid too coarse: fewer than 16 points per unit length");
}

AssembledOperator finish(const Layout& L, const std::vector<double>& W, const StripConfig& cfg) {
  AssembledOperator op;
  op.cfg = cfg;
  op.grid = L.grid;
  std::vector<int> row_of;
  order(L, row_of, op.node_of_row, op.slice_starts);
  op.is_complex = !is_real_phase(L.phase_x) || !is_real_phase(L.phase_y);
  if (op.is_complex) op.hermitian = build<std::complex<double>>(L, W, row_of);
  else op.real = build<double>(L, W, row_of);
  return op;
}

}  // namespace

AssembledOperator assemble(const Potential2D& V, const StripConfig& cfg) {
  if (cfg.n < 1) throw ValidationError("n must be >= 1");
  if (!(cfg.t >= 0.0 && cfg.t <= 1.0)) throw DomainError("dislocation parameter t outside [0, 1]");
  if (!(cfg.h > 0.0)) throw ValidationError("grid spacing must be positive");
  if (!(cfg.theta >= 0.0 && cfg.theta < two_pi)) throw DomainError("theta outside [0, 2 pi)");
  Layout L;
  Grid2D& g = L.grid;
  std::vector<double> xe, ye;  // cell edges
  if (cfg.geometry == Geometry::strip_periodic) {
    const double len = 2.0 * cfg.n + cfg.t, left = -(cfg.n + cfg.t);
    g.nx = static_cast<int>(std::ceil(len / cfg.h - 1e-9));
    g.ny = static_cast<int>(std::ceil(1.0 / cfg.h - 1e-9));
    g.hx = len / g.nx;
    g.hy = 1.0 / g.ny;
    check_spacing(g.hx, g.hy);
    g.x_first = left + 0.5 * g.hx;
    g.y_first = 0.5 * g.hy;
    for (int i = 0; i <= g.nx; ++i) xe.push_back(i == g.nx ? double(cfg.n) : left + i * g.hx);
    for (int j = 0; j <= g.ny; ++j) ye.push_back(j * g.hy);
    L.wrap_x = L.wrap_y = true;
    L.phase_y = cfg.theta;
    L.paired_columns = true;
  } else {
    if (cfg.theta != 0.0) throw ValidationError("theta is only used with the strip geometry");
    const int N = static_cast<int>(std::ceil(2.0 * cfg.n / cfg.h - 1e-9));
    const double hh = 2.0 * cfg.n / N;
    check_spacing(hh, hh);
    g.nx = g.ny = N - 1;
    g.hx = g.hy = hh;
    g.x_first = g.y_first = -cfg.n + hh;
    for (int i = 0; i <= g.nx; ++i) xe.push_back(-cfg.n + (i + 0.5) * hh);
    ye = xe;
  }
  std::vector<double> W(g.size());
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      W[static_cast<std::size_t>(i) * g.ny + j] = dislocated_average(V, cfg.t, xe[i], xe[i + 1], ye[j], ye[j + 1]);
  return finish(L, W, cfg);
}

int AssembledOperator::count_below(double E) const {
  if (!is_complex) return linalg::SlicedInertia(real, slice_starts).count_below(E);
  std::vector<int> ds;
  const auto D = linalg::doubled_hermitian(hermitian, slice_starts, ds);
  return linalg::SlicedInertia(D, ds).count_below(E) / 2;
}

int AssembledOperator::count_in(double lo, double hi) const {
  if (!(hi > lo)) return 0;
  if (!is_complex) return linalg::SlicedInertia(real, slice_starts).count_in(lo, hi);
  std::vector<int> ds;
  const auto D = linalg::doubled_hermitian(hermitian, slice_starts, ds);
  return linalg::SlicedInertia(D, ds).count_in(lo, hi) / 2;
}

// ---------------------------------------------------------------------------

namespace {

void check_window(std::pair<double, double> w) {
  if (!(w.first < w.second)) throw ValidationError("empty eigenvalue window");
}

StripSpectrum solve_window(const AssembledOperator& A, std::pair<double, double> w, bool with_vectors,
                           const linalg::EigOptions& eig) {
  StripSpectrum out;
  out.n = A.cfg.n;
  out.t = A.cfg.t;
  out.theta = A.cfg.theta;
  out.h = A.cfg.h;
  out.lo = w.first;
  out.hi = w.second;
  out.grid = A.grid;
  const int expected = A.count_in(w.first, w.second);
  if (expected == 0) {
    out.vectors.resize(A.dimension(), 0);
    return out;
  }
  auto scatter = [&](const auto& pairs) {
    out.eigenvalues = pairs.values;
    if (!with_vectors) return;
    out.vectors.resize(A.dimension(), static_cast<Eigen::Index>(pairs.values.size()));
    for (int r = 0; r < A.dimension(); ++r)
      for (Eigen::Index k = 0; k < out.vectors.cols(); ++k)
        out.vectors(A.node_of_row[r], k) = std::complex<double>(pairs.vectors(r, k));
  };
  if (A.is_complex) scatter(linalg::eigenpairs_in_window(A.hermitian, w.first, w.second, expected, eig));
  else scatter(linalg::eigenpairs_in_window(A.real, w.first, w.second, expected, eig));
  return out;
}

}  // namespace

StripSpectrum gap_eigenvalues_strip(const Potential2D& V, int n, double t, std::pair<double, double> window,
                                    double h, const StripOptions& opt) {
  check_window(window);
  StripConfig cfg{n, t, h, 0.0, Geometry::strip_periodic};
  if (opt.verify_gap) {
    StripConfig c0 = cfg;
    c0.t = 0.0;
    const int k = assemble(V, c0).count_in(window.first, window.second);
    if (k != 0)
      throw PreconditionError("window is not inside a gap of the t = 0 strip operator (" + std::to_string(k) +
                              " eigenvalues found)");
  }
  return solve_window(assemble(V, cfg), window, opt.with_vectors, opt.eig);
}

std::vector<StripSpectrum> theta_sweep(const Potential2D& V, int n, double t, std::pair<double, double> window,
                                       double h, int n_theta, int jobs) {
  check_window(window);
  if (n_theta < 1) throw ValidationError("n_theta must be >= 1");
  StripOptions opt;
  std::vector<StripSpectrum> out(n_theta);
  parallel_for(n_theta, jobs, [&](int k) {
    StripConfig cfg{n, t, h, two_pi * k / n_theta, Geometry::strip_periodic};
    out[k] = solve_window(assemble(V, cfg), window, false, opt.eig);
  });
  return out;
}

LocalizationReport interface_localization(const Grid2D& grid, const Eigen::VectorXcd& u,
                                          const std::vector<double>& cutoffs) {
  if (u.size() != grid.size()) throw ValidationError("eigenvector does not match the grid");
  const double total = u.squaredNorm();
  if (!(total > 0)) throw ValidationError("eigenvector is zero");
  LocalizationReport r;
  r.cutoffs = cutoffs;
  r.renormalized = std::abs(total - 1.0) > 1e-8;
  // Mass per column, then tail sums over |x|.
  std::vector<std::pair<double, double>> col;
  for (int i = 0; i < grid.nx; ++i)
    col.emplace_back(std::abs(grid.x(i)), u.segment(static_cast<Eigen::Index>(i) * grid.ny, grid.ny).squaredNorm());
  for (double L : cutoffs) {
    double m = 0;
    for (const auto& [ax, w] : col)
      if (ax >= L) m += w;
    r.fractions.push_back(m / total);
  }
  // Least squares for log fraction = a - 2 kappa L over the resolved tail.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < cutoffs.size(); ++k) {
    const double f = r.fractions[k];
    if (cutoffs[k] <= 0 || !(f > 1e-13) || f >= 1.0) continue;
    const double y = std::log(f);
    sx += cutoffs[k];
    sy += y;
    sxx += cutoffs[k] * cutoffs[k];
    sxy += cutoffs[k] * y;
    ++r.fitted_points;
  }
  if (r.fitted_points >= 2) {
    const double m = r.fitted_points;
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    r.decay_rate = -0.5 * slope;
  }
  return r;
}

// ---------------------------------------------------------------------------

int square_counts(const Potential2D& V, double t, int n, std::pair<double, double> interval, double h) {
  if (interval.second < interval.first) throw ValidationError("interval endpoints out of order");
  return assemble(V, StripConfig{n, t, h, 0.0, Geometry::square_dirichlet}).count_in(interval.first, interval.second);
}

bool verify_plane_gap(const Potential2D& V, std::pair<double, double> J, double h, int n_theta) {
  check_window(J);
  if (n_theta < 1) throw ValidationError("n_theta must be >= 1");
  Layout L;
  Grid2D& g = L.grid;
  g.nx = g.ny = static_cast<int>(std::ceil(1.0 / h - 1e-9));
  g.hx = g.hy = 1.0 / g.nx;
  check_spacing(g.hx, g.hy);
  g.x_first = g.y_first = 0.5 * g.hx;
  L.wrap_x = L.wrap_y = true;
  L.paired_columns = true;
  std::vector<double> W(g.size());
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      W[static_cast<std::size_t>(i) * g.ny + j] =
          V.cell_average(i * g.hx, (i + 1) * g.hx, j * g.hy, (j + 1) * g.hy);
  StripConfig cfg;
  for (int a = 0; a < n_theta; ++a)
    for (int b = 0; b < n_theta; ++b) {
      L.phase_x = two_pi * a / n_theta;
      L.phase_y = two_pi * b / n_theta;
      if (finish(L, W, cfg).count_in(J.first, J.second) != 0) return false;
    }
  return true;
}

namespace {

DosEstimate dos(DosKind kind, const Potential2D& V, double t, std::pair<double, double> I,
                const std::vector<int>& n_list, double h) {
  if (I.second < I.first) throw ValidationError("interval endpoints out of order");
  DosEstimate d;
  d.kind = kind;
  d.t = t;
  d.lo = I.first;
  d.hi = I.second;
  d.n_list = n_list;
  for (int n : n_list) {
    const int c = square_counts(V, t, n, I, h);
    d.counts.push_back(c);
    d.normalized.push_back(kind == DosKind::surface ? c / (2.0 * n) : c / (4.0 * n * n));
  }
  return d;
}

}  // namespace

DosEstimate surface_dos(const Potential2D& V, double t, std::pair<double, double> J, const std::vector<int>& n_list,
                        double h) {
  return dos(DosKind::surface, V, t, J, n_list, h);
}

DosEstimate bulk_dos(const Potential2D& V, double t, std::pair<double, double> I, const std::vector<int>& n_list,
                     double h) {
  return dos(DosKind::bulk, V, t, I, n_list, h);
}

json to_json(const StripSpectrum& s) {
  return {{"n", s.n}, {"t", s.t}, {"theta", s.theta}, {"h", s.h}, {"window", {s.lo, s.hi}},
          {"eigenvalues", s.eigenvalues}};
}

json to_json(const DosEstimate& d) {
  return {{"kind", d.kind == DosKind::surface ? "surface" : "bulk"},
          {"t", d.t},
          {"interval", {d.lo, d.hi}},
          {"n_list", d.n_list},
          {"counts", d.counts},
          {"normalized", d.normalized}};
}

json to_json(const LocalizationReport& r) {
  return {{"cutoffs", r.cutoffs},
          {"fractions", r.fractions},
          {"decay_rate", r.decay_rate},
          {"fitted_points", r.fitted_points},
          {"renormalized", r.renormalized}};
}

std::string eigenvector_csv(const StripSpectrum& s, int index) {
  if (index < 0 || index >= s.vectors.cols()) throw ValidationError("eigenvector index out of range");
  const auto u = s.vectors.col(index);
  Eigen::Index big = 0;
  u.cwiseAbs().maxCoeff(&big);
  const std::complex<double> fix = std::abs(u(big)) > 0 ? std::conj(u(big)) / std::abs(u(big)) : 1.0;
  std::ostringstream os;
  os.precision(10);
  os << "x,y,value\n";
  for (int i = 0; i < s.grid.nx; ++i)
    for (int j = 0; j < s.grid.ny; ++j)
      os << s.grid.x(i) << ',' << s.grid.y(j) << ','
         << (fix * u(static_cast<Eigen::Index>(i) * s.grid.ny + j)).real() << '\n';
  return os.str();
}

}  // namespace disloc
