#include "disloc/muffintin.hpp"

#include <quadmath.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>

#include <Eigen/Sparse>

#include "disloc/errors.hpp"
#include "disloc/linalg/eigensolve.hpp"
#include "disloc/parallel.hpp"
#include "disloc/potential_io.hpp"

namespace disloc {

using json = nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;
// Beyond this argument the alternating series loses too many digits even in
// quadruple precision.
constexpr double kBesselMaxArg = 50.0;

void check_radius(double r) {
  if (!(r > 0.0 && r < 0.5)) throw ValidationError("radius r must satisfy 0 < r < 1/2, got " + std::to_string(r));
}

void check_t(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("t must lie in [0, 1], got " + std::to_string(t));
}

}  // namespace

std::string to_string(Direction d) { return d == Direction::x ? "x" : "y"; }

std::string to_string(Connectivity c) { return c == Connectivity::connected ? "connected" : "disconnected"; }

void validate(const MuffinTinGeometry& g) {
  check_radius(g.r);
  if (!(g.x0 >= 0.0 && g.x0 < 1.0)) throw ValidationError("x0 must lie in [0, 1)");
  if (!(g.y0 >= 0.0 && g.y0 < 1.0)) throw ValidationError("y0 must lie in [0, 1)");
  check_t(g.t);
}

std::vector<std::string> check_geometry_json(const json& j, const std::string& path) {
  std::vector<std::string> out;
  if (!j.is_object()) return {path + " must be an object"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    static const std::vector<std::string> allowed{"r", "x0", "y0", "direction", "t"};
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      out.push_back("unknown key " + path + "." + it.key());
  }
  auto num = [&](const char* key, bool required) -> std::optional<double> {
    if (!j.contains(key)) {
      if (required) out.push_back("missing required key " + path + "." + key);
      return std::nullopt;
    }
    if (!j.at(key).is_number()) {
      out.push_back(path + "." + key + " must be a number");
      return std::nullopt;
    }
    return j.at(key).get<double>();
  };
  if (auto r = num("r", true); r && !(*r > 0.0 && *r < 0.5))
    out.push_back(path + ".r = " + j.at("r").dump() + " violates the bound 0 < r < 1/2");
  for (const char* k : {"x0", "y0"})
    if (auto v = num(k, false); v && !(*v >= 0.0 && *v < 1.0))
      out.push_back(path + "." + k + " = " + j.at(k).dump() + " must lie in [0, 1)");
  if (auto t = num("t", false); t && !(*t >= 0.0 && *t <= 1.0))
    out.push_back(path + ".t = " + j.at("t").dump() + " out of range: t in [0, 1]");
  if (j.contains("direction")) {
    const auto& d = j.at("direction");
    if (!d.is_string() || (d.get<std::string>() != "x" && d.get<std::string>() != "y"))
      out.push_back(path + ".direction must be \"x\" or \"y\"");
  }
  return out;
}

MuffinTinGeometry geometry_from_json(const json& j, const std::string& path) {
  const auto problems = check_geometry_json(j, path);
  if (!problems.empty()) throw ValidationError(problems.front());
  MuffinTinGeometry g;
  g.r = j.at("r").get<double>();
  g.x0 = j.value("x0", 0.0);
  g.y0 = j.value("y0", 0.0);
  g.t = j.value("t", 0.0);
  g.direction = j.value("direction", std::string("y")) == "x" ? Direction::x : Direction::y;
  return g;
}

json to_json(const MuffinTinGeometry& g) {
  return {{"r", g.r}, {"x0", g.x0}, {"y0", g.y0}, {"direction", to_string(g.direction)}, {"t", g.t}};
}

bool y_dislocation_is_inert(const MuffinTinGeometry& g) {
  // Discs stay off the line x = 0 when x0 - r > 0 and x0 + r < 1.
  return g.x0 - g.r > 0.0 && g.x0 + g.r < 1.0;
}

// ---------------------------------------------------------------------------
// Bessel functions.

double bessel_j(int nu, double x) {
  if (nu < 0) throw ValidationError("Bessel order must be non-negative");
  if (std::abs(x) > kBesselMaxArg) throw ValidationError("Bessel series argument out of range (|x| > 50)");
  using quad = __float128;
  const quad half = quad(x) / 2;
  quad term = 1;
  for (int k = 1; k <= nu; ++k) term *= half / k;
  const quad q = -half * half;
  quad sum = term;
  for (int m = 1; m < 400; ++m) {
    term *= q / (quad(m) * quad(m + nu));
    sum += term;
    if (m > std::abs(x) && fabsq(term) < 1e-34Q * fabsq(sum)) break;
  }
  return static_cast<double>(sum);
}

namespace {

// Zeros of J_nu in (nu, x_max), by a sign scan and bisection.
std::vector<double> zeros_below(int nu, double x_max, int max_count) {
  std::vector<double> out;
  const double step = 0.05;
  double a = std::max(1e-3, static_cast<double>(nu));
  double fa = bessel_j(nu, a);
  while (a < x_max && static_cast<int>(out.size()) < max_count) {
    const double b = std::min(a + step, x_max);
    const double fb = bessel_j(nu, b);
    if (fa == 0.0) {
      out.push_back(a);
    } else if ((fa < 0) != (fb < 0)) {
      double lo = a, hi = b, flo = fa;
      for (int i = 0; i < 80 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = bessel_j(nu, mid);
        if ((fm < 0) == (flo < 0)) lo = mid, flo = fm;
        else hi = mid;
      }
      out.push_back(0.5 * (lo + hi));
    }
    a = b;
    fa = fb;
  }
  return out;
}

}  // namespace

std::vector<double> bessel_zeros(int nu, int count) {
  if (nu < 0 || count < 1) throw ValidationError("bessel_zeros needs nu >= 0 and count >= 1");
  auto z = zeros_below(nu, kBesselMaxArg, count);
  if (static_cast<int>(z.size()) < count) throw ValidationError("requested Bessel zeros exceed the series range");
  return z;
}

std::vector<double> disc_eigenvalues(double r, int count) {
  if (!(r > 0.0)) throw ValidationError("disc radius must be positive");
  if (count < 1) throw ValidationError("count must be at least 1");
  // All zeros below X give every mu_k(1) below X^2 exactly.
  double X = 2.0 * std::sqrt(static_cast<double>(count)) + 4.0;
  for (;;) {
    X = std::min(X, kBesselMaxArg);
    std::vector<double> mu;
    for (int nu = 0; nu < X; ++nu) {
      for (double j : zeros_below(nu, X, 1 << 20)) {
        mu.push_back(j * j);
        if (nu > 0) mu.push_back(j * j);
      }
    }
    if (static_cast<int>(mu.size()) >= count) {
      std::sort(mu.begin(), mu.end());
      mu.resize(count);
      for (double& m : mu) m /= r * r;
      return mu;
    }
    if (X >= kBesselMaxArg) throw ValidationError("count too large for the Bessel series range");
    X *= 1.5;
  }
}

// ---------------------------------------------------------------------------
// Regions.

Region disc_region(double cx, double cy, double r) {
  Region g;
  g.inside = [=](double x, double y) { return (x - cx) * (x - cx) + (y - cy) * (y - cy) < r * r; };
  g.x_lo = cx - r, g.x_hi = cx + r, g.y_lo = cy - r, g.y_hi = cy + r;
  return g;
}

Region cut_disc_region(double r, double t) {
  const double c = 0.5 - t;
  Region g;
  g.inside = [=](double x, double y) { return x < 0.0 && (x - c) * (x - c) + y * y < r * r; };
  g.x_lo = c - r, g.x_hi = std::min(0.0, c + r), g.y_lo = -r, g.y_hi = r;
  return g;
}

Region half_disc_pair_region(double r, double s) {
  Region g;
  g.inside = [=](double x, double y) {
    const bool right = x * x + y * y < r * r;
    const bool left = x * x + (y - s) * (y - s) < r * r;
    if (x > 0) return right;
    if (x < 0) return left;
    return right && left;
  };
  g.x_lo = -r, g.x_hi = r;
  g.y_lo = std::min(-r, s - r), g.y_hi = std::max(r, s + r);
  return g;
}

Region channel_cell_region(double r, double t) {
  Region g;
  g.inside = [=](double x, double y) {
    const double yr = y - std::round(y);
    const double yl = y + t - std::round(y + t);
    const bool right = x * x + yr * yr < r * r;
    const bool left = x * x + yl * yl < r * r;
    if (x > 0) return right;
    if (x < 0) return left;
    return right && left;
  };
  g.x_lo = -r, g.x_hi = r, g.y_lo = 0.0, g.y_hi = 1.0;
  g.periodic_y = true;
  return g;
}

// ---------------------------------------------------------------------------
// Finite differences.

namespace {

template <class Scalar>
Eigen::SparseMatrix<Scalar> dirichlet_matrix(const Region& region, int cells, double theta) {
  const double h = 1.0 / cells;
  const int i0 = static_cast<int>(std::floor(region.x_lo / h)) - 1;
  const int i1 = static_cast<int>(std::ceil(region.x_hi / h)) + 1;
  int j0, j1;
  if (region.periodic_y) {
    j0 = 0, j1 = cells - 1;
  } else {
    j0 = static_cast<int>(std::floor(region.y_lo / h)) - 1;
    j1 = static_cast<int>(std::ceil(region.y_hi / h)) + 1;
  }
  const int nx = i1 - i0 + 1, ny = j1 - j0 + 1;
  std::vector<int> index(static_cast<std::size_t>(nx) * ny, -1);
  int n = 0;
  for (int i = i0; i <= i1; ++i)
    for (int j = j0; j <= j1; ++j)
      if (region.inside(i * h, j * h)) index[(i - i0) * ny + (j - j0)] = n++;
  if (n == 0) throw ValidationError("region contains no grid nodes at h = " + std::to_string(h));

  const double inv = 1.0 / (h * h);
  const Scalar up_phase = [&] {
    if constexpr (std::is_same_v<Scalar, double>) return Scalar(std::cos(theta));
    else return std::polar(1.0, theta);
  }();
  std::vector<Eigen::Triplet<Scalar>> trip;
  trip.reserve(5 * static_cast<std::size_t>(n));
  const int dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int i = i0; i <= i1; ++i) {
    for (int j = j0; j <= j1; ++j) {
      const int p = index[(i - i0) * ny + (j - j0)];
      if (p < 0) continue;
      const double x = i * h, y = j * h;
      double diag = 0.0;
      for (const auto& d : dirs) {
        const double qx = x + d[0] * h, qy = y + d[1] * h;
        if (region.inside(qx, qy)) {
          int qi = i + d[0], qj = j + d[1];
          Scalar phase = Scalar(1.0);
          if (region.periodic_y) {
            if (qj == cells) qj = 0, phase = up_phase;
            else if (qj == -1) qj = cells - 1, phase = [&] {
              if constexpr (std::is_same_v<Scalar, double>) return up_phase;
              else return std::conj(up_phase);
            }();
          }
          const int q = index[(qi - i0) * ny + (qj - j0)];
          if (q < 0) throw NumericalError("region predicate is inconsistent with its bounding box");
          trip.emplace_back(p, q, -inv * phase);
          diag += inv;
        } else {
          // Distance fraction to the boundary along the edge.
          double lo = 0.0, hi = 1.0;
          for (int it = 0; it < 52; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (region.inside(x + mid * d[0] * h, y + mid * d[1] * h)) lo = mid;
            else hi = mid;
          }
          diag += inv / std::max(0.5 * (lo + hi), 1e-6);
        }
      }
      trip.emplace_back(p, p, Scalar(diag));
    }
  }
  Eigen::SparseMatrix<Scalar> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

int cells_for(double h) {
  if (!(h > 0.0 && h <= 0.25)) throw ValidationError("grid spacing must lie in (0, 1/4]");
  return static_cast<int>(std::ceil(1.0 / h - 1e-9));
}

std::vector<double> solve_lowest(const Region& region, int count, int cells, double theta) {
  if (count < 1) throw ValidationError("count must be at least 1");
  const bool real = !region.periodic_y || std::sin(theta) == 0.0;
  auto run = [&](const auto& A) {
    if (A.rows() < count)
      throw ValidationError("region has only " + std::to_string(A.rows()) + " grid nodes, fewer than count");
    linalg::EigOptions opt;
    opt.dense_limit = 400;  // a dense solve of a few thousand nodes costs more than shift-invert
    auto pairs = linalg::eigenpairs_near(A, 0.0, count, opt);
    std::vector<double> v = pairs.values;
    std::sort(v.begin(), v.end());
    return v;
  };
  if (real) return run(dirichlet_matrix<double>(region, cells, theta));
  return run(dirichlet_matrix<std::complex<double>>(region, cells, theta));
}

}  // namespace

std::vector<double> fd_eigenvalues(const Region& region, int count, double h, double theta) {
  return solve_lowest(region, count, cells_for(h), theta);
}

std::vector<double> richardson_eigenvalues(const Region& region, int count, double h, double theta) {
  const int cells = cells_for(h);
  const auto coarse = solve_lowest(region, count, cells, theta);
  const auto fine = solve_lowest(region, count, 2 * cells, theta);
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) out[k] = (4.0 * fine[k] - coarse[k]) / 3.0;
  return out;
}

CutDiscSpectrum cut_disc_eigenvalues(double r, double t, int count, double h) {
  check_radius(r);
  check_t(t);
  if (count < 1) throw ValidationError("count must be at least 1");
  CutDiscSpectrum s;
  s.r = r, s.t = t, s.h = 1.0 / cells_for(h);
  if (t <= 0.5 - r) throw ValidationError("cut region is empty for t <= 1/2 - r");
  if (t >= 0.5 + r) {
    s.eigenvalues = disc_eigenvalues(r, count);
    s.full_disc = true;
    s.note = "t >= 1/2 + r: the region is the full disc, eigenvalues are mu_k(r)";
    return s;
  }
  s.eigenvalues = richardson_eigenvalues(cut_disc_region(r, t), count, h);
  return s;
}

// ---------------------------------------------------------------------------
// Interface connectivity.

namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) {
    a = find(a), b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

RasterMask interface_mask(double r, double t, double resolution, double y_lo, double y_hi) {
  check_radius(r);
  check_t(t);
  if (!(resolution > 0.0) || !(y_hi > y_lo)) throw ValidationError("raster needs resolution > 0 and y_lo < y_hi");
  RasterMask m;
  m.pixel = resolution;
  const int half = static_cast<int>(std::ceil(r / resolution)) + 1;
  m.nx = 2 * half;
  m.x_lo = -half * resolution;
  m.y_lo = y_lo;
  m.ny = static_cast<int>(std::ceil((y_hi - y_lo) / resolution - 1e-9));
  const auto cell = channel_cell_region(r, t);
  m.inside.assign(static_cast<std::size_t>(m.nx) * m.ny, 0);
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) m.inside[j * m.nx + i] = cell.inside(m.x(i), m.y(j)) ? 1 : 0;
  return m;
}

std::string raster_csv(const RasterMask& m) {
  std::ostringstream os;
  os.precision(10);
  os << "x,y,inside\n";
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) os << m.x(i) << ',' << m.y(j) << ',' << int(m.inside[j * m.nx + i]) << '\n';
  return os.str();
}

InterfaceRegion interface_connectivity(double r, double t, double resolution) {
  check_radius(r);
  check_t(t);
  InterfaceRegion out;
  out.r = r, out.t = t, out.resolution = resolution;
  // Right half-disc k meets left half-disc k' along x = 0 iff |k - k' + t| < 2r.
  const bool same = t < 2 * r;
  const bool next = 1.0 - t < 2 * r;
  if (same && next) {
    out.connectivity = Connectivity::connected;
    out.components_per_period = 1;
  } else {
    out.connectivity = Connectivity::disconnected;
    out.components_per_period = (same || next) ? 1 : 2;
  }
  out.resolvable = std::min(std::abs(2 * r - t), std::abs(2 * r - (1.0 - t))) >= 2 * resolution;

  // Five periods; the channel must join the first period to the last.
  const double y_lo = -2.0, y_hi = 3.0;
  const auto m = interface_mask(r, t, resolution, y_lo, y_hi);
  DisjointSets ds(m.nx * m.ny);
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) {
      const int p = j * m.nx + i;
      if (!m.inside[p]) continue;
      if (i + 1 < m.nx && m.inside[p + 1]) ds.unite(p, p + 1);
      if (j + 1 < m.ny && m.inside[p + m.nx]) ds.unite(p, p + m.nx);
    }
  std::vector<char> bottom(m.nx * m.ny, 0);
  for (int j = 0; j < m.ny && m.y(j) < y_lo + 1.0; ++j)
    for (int i = 0; i < m.nx; ++i)
      if (m.inside[j * m.nx + i]) bottom[ds.find(j * m.nx + i)] = 1;
  bool spans = false;
  for (int j = m.ny - 1; j >= 0 && m.y(j) >= y_hi - 1.0 && !spans; --j)
    for (int i = 0; i < m.nx; ++i)
      if (m.inside[j * m.nx + i] && bottom[ds.find(j * m.nx + i)]) {
        spans = true;
        break;
      }
  if (spans) {
    out.raster_connectivity = Connectivity::connected;
    out.raster_components_per_period = 1;
  } else {
    // Representatives are the smallest pixel index, i.e. the lowest row.
    int count = 0;
    for (int j = 0; j < m.ny; ++j) {
      const bool in_period = m.y(j) >= 0.0 && m.y(j) < 1.0;
      if (!in_period) continue;
      for (int i = 0; i < m.nx; ++i) {
        const int p = j * m.nx + i;
        if (m.inside[p] && ds.find(p) == p) ++count;
      }
    }
    out.raster_connectivity = Connectivity::disconnected;
    out.raster_components_per_period = count;
  }
  out.raster_agrees = out.raster_connectivity == out.connectivity &&
                      out.raster_components_per_period == out.components_per_period;
  return out;
}

SurfaceSpectrum surface_spectrum(double r, double t, int count, double h, int n_phases, int jobs) {
  check_radius(r);
  check_t(t);
  if (count < 1) throw ValidationError("count must be at least 1");
  if (n_phases < 2) throw ValidationError("n_phases must be at least 2");
  SurfaceSpectrum s;
  s.r = r, s.t = t, s.h = 1.0 / cells_for(h);
  s.region = interface_connectivity(r, t);
  if (s.region.connectivity == Connectivity::disconnected) {
    s.kind = SpectrumKind::point;
    Region component;
    if (t < 2 * r) {
      component = half_disc_pair_region(r, -t);
      s.note = "right half-disc joined to the left half-disc shifted by -t";
    } else if (1.0 - t < 2 * r) {
      component = half_disc_pair_region(r, 1.0 - t);
      s.note = "right half-disc joined to the left half-disc shifted by 1 - t";
    } else {
      component = disc_region(0.0, 0.0, r);
      component.inside = [r](double x, double y) { return x > 0 && x * x + y * y < r * r; };
      component.x_lo = 0.0;
      s.note = "two congruent half-disc components per period";
    }
    s.points = richardson_eigenvalues(component, count, h);
    s.note += "; each eigenvalue has infinite multiplicity";
    return s;
  }
  s.kind = SpectrumKind::bands;
  s.n_phases = n_phases;
  const auto cell = channel_cell_region(r, t);
  std::vector<std::vector<double>> per_phase(n_phases);
  parallel_for(n_phases, jobs, [&](int k) {
    per_phase[k] = richardson_eigenvalues(cell, count, h, 2.0 * kPi * k / n_phases);
  });
  for (int b = 0; b < count; ++b) {
    double lo = per_phase[0][b], hi = lo;
    for (const auto& v : per_phase) lo = std::min(lo, v[b]), hi = std::max(hi, v[b]);
    s.bands.emplace_back(lo, hi);
  }
  s.note = "band k spans the k-th Floquet eigenvalue over " + std::to_string(n_phases) + " phases";
  return s;
}

json to_json(const CutDiscSpectrum& s) {
  return {{"r", s.r}, {"t", s.t}, {"h", s.h}, {"eigenvalues", s.eigenvalues}, {"full_disc", s.full_disc},
          {"note", s.note}};
}

json to_json(const InterfaceRegion& r) {
  return {{"r", r.r},
          {"t", r.t},
          {"connectivity", to_string(r.connectivity)},
          {"components_per_period", r.components_per_period},
          {"resolution", r.resolution},
          {"raster_connectivity", to_string(r.raster_connectivity)},
          {"raster_components_per_period", r.raster_components_per_period},
          {"raster_agrees", r.raster_agrees},
          {"resolvable", r.resolvable}};
}

json to_json(const SurfaceSpectrum& s) {
  json j = {{"r", s.r}, {"t", s.t}, {"h", s.h}, {"region", to_json(s.region)}, {"note", s.note}};
  if (s.kind == SpectrumKind::point) {
    j["classification"] = "point";
    j["multiplicity"] = "infinite";
    j["eigenvalues"] = s.points;
  } else {
    j["classification"] = "bands";
    j["n_phases"] = s.n_phases;
    json bands = json::array();
    for (const auto& [lo, hi] : s.bands) bands.push_back({lo, hi});
    j["bands"] = bands;
  }
  return j;
}

}  // namespace disloc
