#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "disloc/linalg/eigensolve.hpp"
#include "disloc/potential.hpp"

namespace disloc {

// ---------------------------------------------------------------------------
// Z^2-periodic potentials (unit cell [0,1)^2).

struct Separable2D {
  PotentialSpec v, w;  // V(x, y) = v(x) + w(y), both of period 1
};

// c cos(2 pi (kx x + ky y)) + s sin(2 pi (kx x + ky y)).
struct FourierTerm2D {
  int kx = 0, ky = 0;
  double c = 0, s = 0;
};

struct Fourier2D {
  std::vector<FourierTerm2D> terms;
};

// values[j * nx + i] = V(i / nx, j / ny); bilinear interpolation, periodic wrap.
struct Sampled2D {
  int nx = 0, ny = 0;
  std::vector<double> values;
};

class Potential2D {
 public:
  using Form = std::variant<Separable2D, Fourier2D, Sampled2D>;

  static Potential2D separable(PotentialSpec v, PotentialSpec w);
  static Potential2D fourier(std::vector<FourierTerm2D> terms);
  static Potential2D sampled(int nx, int ny, std::vector<double> values);
  static Potential2D zero();

  const Form& form() const { return form_; }
  std::string kind() const;

  double operator()(double x, double y) const;
  // Exact average over [x0, x1] x [y0, y1].
  double cell_average(double x0, double x1, double y0, double y1) const;

  // Lower and upper bounds (exact for separable and sampled forms).
  double lower_bound() const;
  double upper_bound() const;

  // Largest neighbour difference quotient of a sampled form; nullopt otherwise.
  std::optional<double> slope_estimate() const;

 private:
  explicit Potential2D(Form f) : form_(std::move(f)) {}
  Form form_;
};

// W_t(x, y) = V(x + t, y) for x < 0 and V(x, y) otherwise.
double dislocate(const Potential2D& V, double t, double x, double y);
double dislocated_average(const Potential2D& V, double t, double x0, double x1, double y0, double y1);

// {"form": "separable", "v": {...}, "w": {...}} | {"form": "fourier2d", "terms":
// [{"kx", "ky", "cos", "sin"}]} | {"form": "sampled2d", "nx", "ny", "values"}.
Potential2D potential2d_from_json(const nlohmann::json& j, const std::string& path = "$");
nlohmann::json potential2d_to_json(const Potential2D& V);

// Warning text when a sampled form exceeds the slope bound.
std::optional<std::string> lipschitz_warning(const Potential2D& V, double bound = 1e3);

// ---------------------------------------------------------------------------
// Discretized operators.

enum class Geometry { strip_periodic, square_dirichlet };

std::string to_string(Geometry g);
Geometry geometry_from_string(const std::string& s);

struct StripConfig {
  int n = 4;
  double t = 0;
  double h = 1.0 / 64;
  double theta = 0;  // Floquet phase in y, strip geometry only
  Geometry geometry = Geometry::strip_periodic;
};

// Strip: cell-centred nodes on (-(n+t), n) x (0, 1), both directions wrapped.
// Square: interior nodes of (-n, n)^2 with Dirichlet boundary.
struct Grid2D {
  int nx = 0, ny = 0;
  double hx = 0, hy = 0;
  double x_first = 0, y_first = 0;  // coordinates of node (0, 0)

  double x(int i) const { return x_first + i * hx; }
  double y(int j) const { return y_first + j * hy; }
  int size() const { return nx * ny; }
};

struct AssembledOperator {
  StripConfig cfg;
  Grid2D grid;
  bool is_complex = false;
  Eigen::SparseMatrix<double> real;                      // when !is_complex
  Eigen::SparseMatrix<std::complex<double>> hermitian;   // when is_complex
  std::vector<int> slice_starts;  // groups of columns coupling only to neighbours
  std::vector<int> node_of_row;   // row -> i * ny + j

  int dimension() const { return grid.size(); }
  // Eigenvalues strictly below E, and in [lo, hi), by sliced inertia.
  int count_below(double E) const;
  int count_in(double lo, double hi) const;
};

// Five-point Laplacian plus the cell average of W_t around each node. The
// strip orders column pairs (i, nx - 1 - i) together so that the x wrap
// stays between neighbouring slices. Grid counts are ceil(length / h).
AssembledOperator assemble(const Potential2D& V, const StripConfig& cfg);

// ---------------------------------------------------------------------------
// Gap eigenvalues of the strip operator.

struct StripSpectrum {
  int n = 0;
  double t = 0, theta = 0, h = 0;
  double lo = 0, hi = 0;           // window [lo, hi]
  std::vector<double> eigenvalues;
  Eigen::MatrixXcd vectors;        // columns in grid order (i * ny + j), unit norm
  Grid2D grid;
};

struct StripOptions {
  bool verify_gap = true;  // check that the t = 0 operator has no eigenvalue in the window
  bool with_vectors = true;
  linalg::EigOptions eig = [] {
    linalg::EigOptions o;
    o.dense_limit = 4096;
    return o;
  }();
};

StripSpectrum gap_eigenvalues_strip(const Potential2D& V, int n, double t, std::pair<double, double> window,
                                    double h, const StripOptions& opt = {});

// Eigenvalues in the window for Floquet phases 2 pi k / n_theta, k = 0..n_theta-1,
// spread over `jobs` threads.
std::vector<StripSpectrum> theta_sweep(const Potential2D& V, int n, double t, std::pair<double, double> window,
                                       double h, int n_theta = 16, int jobs = 1);

struct LocalizationReport {
  std::vector<double> cutoffs;
  std::vector<double> fractions;  // mass in {|x| >= L}
  double decay_rate = 0;          // kappa with |u| ~ exp(-kappa |x|)
  int fitted_points = 0;
  bool renormalized = false;      // input was not of unit norm
};

LocalizationReport interface_localization(const Grid2D& grid, const Eigen::VectorXcd& u,
                                          const std::vector<double>& cutoffs);

// ---------------------------------------------------------------------------
// Counts and densities of states on Dirichlet squares.

// Eigenvalues of the discretized D_t^(n) in [lo, hi).
int square_counts(const Potential2D& V, double t, int n, std::pair<double, double> interval, double h);

// Checks that no discrete Bloch operator on the unit cell, over an
// n_theta x n_theta grid of quasimomenta, has an eigenvalue in J.
bool verify_plane_gap(const Potential2D& V, std::pair<double, double> J, double h, int n_theta = 8);

enum class DosKind { surface, bulk };

struct DosEstimate {
  DosKind kind = DosKind::surface;
  double t = 0;
  double lo = 0, hi = 0;
  std::vector<int> n_list;
  std::vector<int> counts;
  std::vector<double> normalized;  // counts / (2n) or counts / (4n^2)
};

DosEstimate surface_dos(const Potential2D& V, double t, std::pair<double, double> J, const std::vector<int>& n_list,
                        double h);
DosEstimate bulk_dos(const Potential2D& V, double t, std::pair<double, double> I, const std::vector<int>& n_list,
                     double h);

nlohmann::json to_json(const StripSpectrum& s);
nlohmann::json to_json(const DosEstimate& d);
nlohmann::json to_json(const LocalizationReport& r);
// x,y,value rows; value is the real part after fixing the global phase.
std::string eigenvector_csv(const StripSpectrum& s, int index);

}  // namespace disloc
