#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace disloc {

// ---------------------------------------------------------------------------
// Geometry. Discs of radius r centred at (x0, y0) + Z^2, dislocated by t in
// the x or y direction on the half-plane x < 0.

enum class Direction { x, y };

std::string to_string(Direction d);

struct MuffinTinGeometry {
  double r = 0.3;
  double x0 = 0, y0 = 0;
  Direction direction = Direction::y;
  double t = 0;
};

// Throws ValidationError unless 0 < r < 1/2, x0, y0 in [0, 1), t in [0, 1].
void validate(const MuffinTinGeometry& g);

// {"r", "x0", "y0", "direction": "x"|"y", "t"}; "r" is required.
MuffinTinGeometry geometry_from_json(const nlohmann::json& j, const std::string& path = "$");
nlohmann::json to_json(const MuffinTinGeometry& g);
// Same checks, reported instead of thrown.
std::vector<std::string> check_geometry_json(const nlohmann::json& j, const std::string& path = "$");

// With x0 = 1/2 the interface x = 0 never meets a disc under a y-dislocation.
bool y_dislocation_is_inert(const MuffinTinGeometry& g);

// ---------------------------------------------------------------------------
// Disc eigenvalues.

// J_nu(x) from its power series, summed in quadruple precision.
double bessel_j(int nu, double x);
// First `count` positive zeros of J_nu.
std::vector<double> bessel_zeros(int nu, int count);

// mu_k(r), ascending with multiplicity (two for orders >= 1).
std::vector<double> disc_eigenvalues(double r, int count);

// ---------------------------------------------------------------------------
// Finite-difference Dirichlet eigenvalues on planar regions.

// Nodes are the lattice points h Z^2 strictly inside the region. A neighbour
// outside is eliminated with the boundary distance folded into the diagonal,
// which keeps the matrix symmetric. With periodic_y the region is one period
// [0, 1) in y and the wrap carries the Floquet phase theta.
struct Region {
  std::function<bool(double, double)> inside;
  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;  // bounding box
  bool periodic_y = false;
};

Region disc_region(double cx, double cy, double r);
// B_r(1/2 - t, 0) intersected with {x < 0}.
Region cut_disc_region(double r, double t);
// Right half-disc at the origin joined to the left half-disc centred at (0, s).
Region half_disc_pair_region(double r, double s);
// One period of the interface channel of the y-dislocation.
Region channel_cell_region(double r, double t);

std::vector<double> fd_eigenvalues(const Region& region, int count, double h, double theta = 0);
// (4 lambda(h/2) - lambda(h)) / 3, paired by index.
std::vector<double> richardson_eigenvalues(const Region& region, int count, double h, double theta = 0);

struct CutDiscSpectrum {
  double r = 0, t = 0, h = 0;
  std::vector<double> eigenvalues;
  bool full_disc = false;
  std::string note;
};

// lambda_k(t, r) for the x0 = 1/2 geometry under an x-dislocation. For
// t >= 1/2 + r the region is the full disc and mu_k(r) is returned.
CutDiscSpectrum cut_disc_eigenvalues(double r, double t, int count, double h = 1.0 / 128);

// ---------------------------------------------------------------------------
// Interface region of the y-dislocation with x0 = y0 = 0: right half-discs at
// (0, k), left half-discs at (0, k - t).

enum class Connectivity { connected, disconnected };

std::string to_string(Connectivity c);

struct InterfaceRegion {
  double r = 0, t = 0;
  Connectivity connectivity = Connectivity::disconnected;
  int components_per_period = 0;
  double resolution = 0;
  Connectivity raster_connectivity = Connectivity::disconnected;
  int raster_components_per_period = 0;
  bool raster_agrees = false;
  // Every overlap margin |2r - |t - m|| is at least two pixels, so the
  // raster can resolve the classification.
  bool resolvable = false;
};

// Open overlap conditions: connected iff 1 - 2r < t < 2r.
InterfaceRegion interface_connectivity(double r, double t, double resolution = 1.0 / 512);

struct RasterMask {
  double x_lo = 0, y_lo = 0, pixel = 0;
  int nx = 0, ny = 0;
  std::vector<std::uint8_t> inside;  // row-major, inside[j * nx + i]

  double x(int i) const { return x_lo + (i + 0.5) * pixel; }
  double y(int j) const { return y_lo + (j + 0.5) * pixel; }
};

// Pixel-centre mask of the interface half-discs over y in [y_lo, y_hi).
RasterMask interface_mask(double r, double t, double resolution, double y_lo, double y_hi);
std::string raster_csv(const RasterMask& m);

enum class SpectrumKind { point, bands };

struct SurfaceSpectrum {
  double r = 0, t = 0, h = 0;
  InterfaceRegion region;
  SpectrumKind kind = SpectrumKind::point;
  std::vector<double> points;                       // each of infinite multiplicity
  std::vector<std::pair<double, double>> bands;
  int n_phases = 0;
  std::string note;
};

// Disconnected: eigenvalues of one bounded component. Connected: band
// intervals over n_phases Floquet phases on one period of the channel.
SurfaceSpectrum surface_spectrum(double r, double t, int count, double h = 1.0 / 64, int n_phases = 16,
                                 int jobs = 1);

nlohmann::json to_json(const CutDiscSpectrum& s);
nlohmann::json to_json(const InterfaceRegion& r);
nlohmann::json to_json(const SurfaceSpectrum& s);

}  // namespace disloc
