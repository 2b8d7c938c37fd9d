#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "disloc/dislocation1d.hpp"
#include "disloc/errors.hpp"
#include "disloc/strip2d.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace disloc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Deep step: strongly localized interface states, so n = 4 already mimics
// the whole line. Its strip gap at t = 0 is about (-4.6, 19.8).
const std::pair<double, double> kWindow{-3.0, 18.0};

Potential2D step_strip() { return Potential2D::separable(fixture::unit_step(-20, 20), PotentialSpec::constant(0.0)); }

// Shallow step with a narrow gap near (9.23, 10.50).
Potential2D weak_strip() { return Potential2D::separable(fixture::unit_step(), PotentialSpec::constant(0.0)); }

Potential2D plane_fixture() { return Potential2D::separable(fixture::unit_step(-20, 20), fixture::unit_step(-20, 20)); }

std::vector<double> dense_spectrum(const AssembledOperator& A) {
  if (A.is_complex) return linalg::dense_eigenvalues(A.hermitian);
  return linalg::dense_eigenvalues(A.real);
}

int dense_count(const std::vector<double>& ev, double lo, double hi) {
  return static_cast<int>(std::count_if(ev.begin(), ev.end(), [&](double e) { return e >= lo && e < hi; }));
}

// Unit-period step chain with Bloch phase theta, cell averages from the
// closed-form antiderivative.
std::vector<double> step_cell_eigenvalues(double a, double b, int cells, double theta) {
  const auto F = oracle::step_primitive(a, b, 1.0);
  const double h = 1.0 / cells;
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(cells, cells);
  for (int j = 0; j < cells; ++j) {
    M(j, j) = 2 / (h * h) + (F((j + 1) * h) - F(j * h)) / h;
    const std::complex<double> c = j + 1 < cells ? 1.0 : std::polar(1.0, theta);
    M(j, (j + 1) % cells) += -c / (h * h);
    M((j + 1) % cells, j) += -std::conj(c) / (h * h);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().data(), es.eigenvalues().data() + cells};
}

// Closed-form Dirichlet eigenvalues of the discrete Laplacian on (-n, n)^2.
int free_square_count(int n, double h, double lo, double hi) {
  const int N = static_cast<int>(std::lround(2 * n / h));
  const double hh = 2.0 * n / N;
  std::vector<double> mu;
  for (int k = 1; k < N; ++k) mu.push_back(4 / (hh * hh) * std::pow(std::sin(k * oracle::pi / (2 * N)), 2));
  int c = 0;
  for (double a : mu)
    for (double b : mu)
      if (a + b >= lo && a + b < hi) ++c;
  return c;
}

}  // namespace

TEST_CASE("two-dimensional potentials are unit periodic") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(-3, 3);
  std::vector<double> samples(12 * 10);
  for (auto& s : samples) s = U(rng);
  const std::vector<Potential2D> pots = {
      step_strip(), Potential2D::fourier({{1, 0, 0.5, 0}, {0, 1, 0.5, 0.2}, {1, 2, 0.1, -0.3}}),
      Potential2D::sampled(12, 10, samples)};
  for (const auto& V : pots)
    for (int k = 0; k < 50; ++k) {
      const double x = U(rng), y = U(rng);
      CHECK_THAT(V(x + 1, y), WithinAbs(V(x, y), 1e-12));
      CHECK_THAT(V(x, y - 1), WithinAbs(V(x, y), 1e-12));
    }
}

TEST_CASE("cell averages match fine midpoint quadrature") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> U(-2, 2);
  std::vector<double> samples(7 * 5);
  for (auto& s : samples) s = U(rng);
  const std::vector<Potential2D> pots = {Potential2D::fourier({{1, 0, 0.7, 0.1}, {2, -1, 0.3, 0.4}, {0, 0, 1.5, 0}}),
                                         Potential2D::sampled(7, 5, samples)};
  for (const auto& V : pots)
    for (int k = 0; k < 10; ++k) {
      const double x0 = U(rng), y0 = U(rng), dx = 0.05 + 0.3 * std::abs(U(rng)), dy = 0.05 + 0.2 * std::abs(U(rng));
      const int m = 1200;
      double acc = 0;
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) acc += V(x0 + (a + 0.5) * dx / m, y0 + (b + 0.5) * dy / m);
      CHECK_THAT(V.cell_average(x0, x0 + dx, y0, y0 + dy), WithinAbs(acc / (m * m), 2e-6));
    }
}

TEST_CASE("two-dimensional potentials round-trip through JSON") {
  const std::vector<Potential2D> pots = {plane_fixture(), Potential2D::fourier({{1, 1, 0.5, -0.5}}),
                                         Potential2D::sampled(2, 2, {0, 1, 2, 3})};
  for (const auto& V : pots) {
    const auto back = potential2d_from_json(potential2d_to_json(V));
    CHECK(back.kind() == V.kind());
    for (double x : {-0.3, 0.1, 0.77})
      for (double y : {0.05, 0.5, 1.9}) CHECK_THAT(back(x, y), WithinAbs(V(x, y), 1e-14));
  }
  CHECK_THROWS_AS(potential2d_from_json(nlohmann::json{{"form", "hexagonal"}}), ValidationError);
  CHECK_THROWS_AS(potential2d_from_json(nlohmann::json{{"form", "sampled2d"}, {"nx", 2}, {"ny", 2}, {"values", {1, 2}}}),
                  ValidationError);
  CHECK_THROWS_AS(potential2d_from_json(nlohmann::json{{"form", "fourier2d"}, {"terms", {{{"kx", 1}}}}, {"extra", 1}}),
                  ValidationError);
  CHECK_THROWS_AS(Potential2D::separable(fixture::step(), PotentialSpec::constant(0)), ValidationError);
}

TEST_CASE("steep sampled potentials draw a Lipschitz warning") {
  CHECK_FALSE(lipschitz_warning(Potential2D::sampled(4, 4, std::vector<double>(16, 1.0))).has_value());
  std::vector<double> v(16, 0.0);
  v[5] = 1e4;
  CHECK(lipschitz_warning(Potential2D::sampled(4, 4, v)).has_value());
  CHECK_FALSE(lipschitz_warning(step_strip()).has_value());
}

TEST_CASE("free strip reproduces the closed-form periodic grid spectrum") {
  const StripConfig cfg{1, 0.0, 1.0 / 16, 0.0, Geometry::strip_periodic};
  const auto A = assemble(Potential2D::zero(), cfg);
  REQUIRE_FALSE(A.is_complex);
  const auto ev = dense_spectrum(A);
  std::vector<double> ref;
  const int nx = A.grid.nx, ny = A.grid.ny;
  REQUIRE(nx == 32);
  REQUIRE(ny == 16);
  for (int a = 0; a < nx; ++a)
    for (int b = 0; b < ny; ++b)
      ref.push_back((2 - 2 * std::cos(2 * oracle::pi * a / nx)) * nx * nx / 4.0 +
                    (2 - 2 * std::cos(2 * oracle::pi * b / ny)) * ny * ny);
  std::sort(ref.begin(), ref.end());
  REQUIRE(ev.size() == ref.size());
  for (std::size_t k = 0; k < ev.size(); ++k) CHECK_THAT(ev[k], WithinAbs(ref[k], 1e-9));
}

TEST_CASE("assembled operators are symmetric or Hermitian") {
  const auto V = Potential2D::fourier({{1, 0, 1.0, 0.3}, {1, 1, 0.2, 0.1}});
  const auto A = assemble(V, StripConfig{2, 0.3, 1.0 / 16, 0.0, Geometry::strip_periodic});
  REQUIRE_FALSE(A.is_complex);
  CHECK(Eigen::MatrixXd(A.real - Eigen::SparseMatrix<double>(A.real.transpose())).cwiseAbs().maxCoeff() == 0.0);
  const auto P = assemble(V, StripConfig{2, 0.3, 1.0 / 16, 3.14159265358979323846, Geometry::strip_periodic});
  CHECK_FALSE(P.is_complex);
  const auto B = assemble(V, StripConfig{2, 0.3, 1.0 / 16, 1.0, Geometry::strip_periodic});
  REQUIRE(B.is_complex);
  CHECK(Eigen::MatrixXcd(B.hermitian - Eigen::SparseMatrix<std::complex<double>>(B.hermitian.adjoint()))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  const auto S = assemble(V, StripConfig{2, 0.3, 1.0 / 16, 0.0, Geometry::square_dirichlet});
  CHECK(S.grid.nx == 63);
  CHECK(Eigen::MatrixXd(S.real - Eigen::SparseMatrix<double>(S.real.transpose())).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("assembly rejects unusable configurations") {
  const auto V = step_strip();
  CHECK_THROWS_AS(assemble(V, StripConfig{4, 0.0, 1.0 / 15, 0.0, Geometry::strip_periodic}), ValidationError);
  CHECK_THROWS_AS(assemble(V, StripConfig{0, 0.0, 1.0 / 16, 0.0, Geometry::strip_periodic}), ValidationError);
  CHECK_THROWS_AS(assemble(V, StripConfig{2, 1.5, 1.0 / 16, 0.0, Geometry::strip_periodic}), DomainError);
  CHECK_THROWS_AS(assemble(V, StripConfig{2, 0.0, 1.0 / 16, 1.0, Geometry::square_dirichlet}), ValidationError);
  CHECK_THROWS_AS(assemble(V, StripConfig{2, 0.0, 1.0 / 16, 7.0, Geometry::strip_periodic}), DomainError);
}

TEST_CASE("separable strip spectrum is the sum of 1D and transverse spectra") {
  const auto v = fixture::unit_step();
  const auto V = weak_strip();
  for (double t : {0.0, 0.3, 0.65}) {
    const double h = 1.0 / 16;
    const auto A = assemble(V, StripConfig{2, t, h, 0.0, Geometry::strip_periodic});
    const auto ev = dense_spectrum(A);
    const double lo = -5, hi = 120;
    const auto one_d = approximant_eigenvalues(v, 2, t, {lo - 1, hi}, h).eigenvalues;
    const int ny = A.grid.ny;
    std::vector<double> ref;
    for (double e : one_d)
      for (int m = 0; m < ny; ++m) {
        const double s = e + (2 - 2 * std::cos(2 * oracle::pi * m / ny)) * ny * ny;
        if (s >= lo && s < hi) ref.push_back(s);
      }
    std::sort(ref.begin(), ref.end());
    std::vector<double> got;
    for (double e : ev)
      if (e >= lo && e < hi) got.push_back(e);
    REQUIRE(got.size() == ref.size());
    for (std::size_t k = 0; k < got.size(); ++k) CHECK_THAT(got[k], WithinAbs(ref[k], 1e-8));
  }
}

TEST_CASE("gap eigenvalues of the strip") {
  const auto V = step_strip();
  SECTION("none at t = 0") {
    CHECK(gap_eigenvalues_strip(V, 4, 0.0, kWindow, 1.0 / 64).eigenvalues.empty());
  }
  SECTION("a t sweep finds window eigenvalues") {
    StripOptions opt;
    opt.with_vectors = false;
    int hits = 0;
    for (int k = 0; k <= 20; ++k) {
      opt.verify_gap = k == 0;
      const auto s = gap_eigenvalues_strip(V, 4, 0.05 * k, kWindow, 1.0 / 32, opt);
      for (double e : s.eigenvalues) CHECK((e >= kWindow.first && e <= kWindow.second));
      hits += static_cast<int>(s.eigenvalues.size());
    }
    CHECK(hits >= 1);
  }
  SECTION("Richardson-paired eigenvalues follow the 1D branch") {
    const auto v = fixture::unit_step(-20, 20);
    const auto trace = trace_branch(v, 1, 40);
    const double t = 0.25;
    StripOptions opt;
    opt.with_vectors = false;
    opt.verify_gap = false;
    const auto a = gap_eigenvalues_strip(V, 4, t, kWindow, 1.0 / 64, opt);
    const auto b = gap_eigenvalues_strip(V, 4, t, kWindow, 1.0 / 128, opt);
    REQUIRE(a.eigenvalues.size() == 1);
    REQUIRE(b.eigenvalues.size() == 1);
    const double rich = (4 * b.eigenvalues[0] - a.eigenvalues[0]) / 3;
    const double E = branch_energy_at(v, trace.primary(), t);
    CHECK_THAT(rich, WithinAbs(E, 1e-2));
  }
  SECTION("a window that overlaps a band is rejected") {
    CHECK_THROWS_AS(gap_eigenvalues_strip(V, 4, 0.5, {-6.0, 0.0}, 1.0 / 32), PreconditionError);
    CHECK_THROWS_AS(gap_eigenvalues_strip(V, 4, 0.5, {10.0, 9.5}, 1.0 / 32), ValidationError);
  }
}

TEST_CASE("gap states are localized at the interface") {
  const auto v = fixture::unit_step(-20, 20);
  const auto s = gap_eigenvalues_strip(step_strip(), 6, 0.25, kWindow, 1.0 / 32);
  REQUIRE(s.eigenvalues.size() == 1);
  // Whole periods, so that both tails shrink by the multiplier squared per step.
  const std::vector<double> L{0, 1, 2, 3, 4, 5};
  const auto r = interface_localization(s.grid, s.vectors.col(0), L);
  CHECK_FALSE(r.renormalized);
  CHECK_THAT(r.fractions[0], WithinAbs(1.0, 1e-12));
  for (std::size_t k = 1; k < L.size(); ++k) CHECK(r.fractions[k] <= r.fractions[k - 1]);
  const auto mult = floquet_multipliers(v, s.eigenvalues[0]);
  const double kappa = -std::log(std::abs(mult.rho_minus));
  CHECK(r.fitted_points >= 3);
  CHECK_THAT(r.decay_rate, WithinRel(kappa, 0.2));

  const auto scaled = interface_localization(s.grid, 3.0 * s.vectors.col(0), L);
  CHECK(scaled.renormalized);
  for (std::size_t k = 0; k < L.size(); ++k) CHECK_THAT(scaled.fractions[k], WithinAbs(r.fractions[k], 1e-12));
  CHECK_THROWS_AS(interface_localization(s.grid, Eigen::VectorXcd::Ones(3), L), ValidationError);
}

TEST_CASE("eigenvector CSV lists every node") {
  const auto s = gap_eigenvalues_strip(step_strip(), 4, 0.25, kWindow, 1.0 / 16);
  REQUIRE_FALSE(s.eigenvalues.empty());
  const auto csv = eigenvector_csv(s, 0);
  CHECK(csv.rfind("x,y,value\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == s.grid.size() + 1);
  CHECK_THROWS_AS(eigenvector_csv(s, 5), ValidationError);
  const auto j = to_json(s);
  CHECK(j.at("window").size() == 2);
  CHECK(j.at("eigenvalues").size() == s.eigenvalues.size());
}

TEST_CASE("non-gap eigenvalues stay in the t = 0 bands") {
  const auto V = weak_strip();
  const double h = 1.0 / 16, guard = 2 * h * h;
  const int n = 4;
  const double top = 30;  // the first transverse excitation sits near 39, inside band 2
  const auto e0 = dense_spectrum(assemble(V, StripConfig{n, 0.0, h, 0.0, Geometry::strip_periodic}));
  // At t = 0 the ring holds 2n Bloch states per band, band edges included.
  // Band 2 is cut at the check range; its top lies above it.
  const std::vector<std::pair<double, double>> bands{{e0[0], e0[2 * n - 1]}, {e0[2 * n], top}};
  // Declared gaps: those of the continuum operator, including the one below the spectrum.
  const auto bs = band_structure(fixture::unit_step(), -5, top);
  REQUIRE(bs.gaps.size() >= 1);
  std::vector<std::pair<double, double>> gaps{{-1e300, bs.bands[0].lo}};
  for (const auto& g : bs.gaps) gaps.push_back({g.lo, g.hi});
  int checked = 0;
  for (double t : {0.25, 0.5, 0.75}) {
    const auto et = dense_spectrum(assemble(V, StripConfig{n, t, h, 0.0, Geometry::strip_periodic}));
    for (double e : et) {
      if (e > top) break;
      if (std::any_of(gaps.begin(), gaps.end(), [&](const auto& g) { return e > g.first && e < g.second; }))
        continue;
      const bool inside = std::any_of(bands.begin(), bands.end(), [&](const auto& b) {
        return e >= b.first - guard && e <= b.second + guard;
      });
      CHECK(inside);
      ++checked;
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("Floquet phase sweep closes the two-dimensional gap") {
  const auto V = plane_fixture();
  const double h = 1.0 / 16;
  const int cells = 16;
  double gx_lo = -1e300, gx_hi = 1e300, b1 = 1e300;
  for (double th : {0.0, oracle::pi}) {
    const auto e = step_cell_eigenvalues(-20, 20, cells, th);
    gx_lo = std::max(gx_lo, e[0]);
    gx_hi = std::min(gx_hi, e[1]);
    b1 = std::min(b1, e[0]);
  }
  // Separable: bands add, so the first 2D gap is (2 top(B1), bottom(B1) + bottom(B2)).
  const double lo2 = 2 * gx_lo, hi2 = b1 + gx_hi;
  REQUIRE(hi2 > lo2);
  const auto sweep = theta_sweep(V, 2, 0.0, {lo2 - 3, hi2 + 3}, h, 8);
  REQUIRE(sweep.size() == 8);
  double below = -1e300, above = 1e300;
  for (const auto& s : sweep)
    for (double e : s.eigenvalues) {
      CHECK_FALSE((e > lo2 + 1e-8 && e < hi2 - 1e-8));
      if (e <= lo2 + 1e-8) below = std::max(below, e);
      else above = std::min(above, e);
    }
  CHECK_THAT(below, WithinAbs(lo2, 1e-8));
  CHECK_THAT(above, WithinAbs(hi2, 1e-8));
  CHECK(verify_plane_gap(V, {lo2 + 0.1, hi2 - 0.1}, h));
  CHECK_FALSE(verify_plane_gap(V, {lo2 - 0.1, hi2 - 0.1}, h));
}

TEST_CASE("square counts agree with dense diagonalization") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> U(-30, 60);
  const auto V = plane_fixture();
  for (double t : {0.0, 0.4}) {
    const auto A = assemble(V, StripConfig{1, t, 1.0 / 24, 0.0, Geometry::square_dirichlet});
    REQUIRE(A.dimension() == 47 * 47);
    const auto ev = dense_spectrum(A);
    for (int k = 0; k < 6; ++k) {
      double lo = U(rng), hi = U(rng);
      if (lo > hi) std::swap(lo, hi);
      CHECK(square_counts(V, t, 1, {lo, hi}, 1.0 / 24) == dense_count(ev, lo, hi));
    }
  }
  // Complex strip counts use the doubled real system.
  const auto B = assemble(step_strip(), StripConfig{1, 0.3, 1.0 / 16, 2.0, Geometry::strip_periodic});
  const auto eb = dense_spectrum(B);
  for (auto [lo, hi] : {std::pair{0.0, 50.0}, std::pair{9.0, 11.0}, std::pair{-3.0, 300.0}})
    CHECK(B.count_in(lo, hi) == dense_count(eb, lo, hi));
}

TEST_CASE("square counts basic properties") {
  const auto V = plane_fixture();
  const double h = 1.0 / 32;
  CHECK(square_counts(V, 0.3, 2, {V.lower_bound() - 5, V.lower_bound() - 1}, h) == 0);
  const int c1 = square_counts(V, 0.3, 2, {-5, 5}, h);
  const int c2 = square_counts(V, 0.3, 2, {-10, 10}, h);
  CHECK(c1 <= c2);
  CHECK(square_counts(Potential2D::zero(), 0.0, 4, {0, 1}, h) == free_square_count(4, h, 0, 1));
  CHECK_THROWS_AS(square_counts(V, 0.3, 2, {1, 0}, h), ValidationError);
}

TEST_CASE("surface density of states") {
  const auto v = fixture::unit_step(-20, 20);
  const auto V = plane_fixture();
  const double h = 1.0 / 32;
  TraceOptions opt;
  opt.energy_range = std::pair{10.5, 11.5};
  const auto trace = trace_branch(v, 1, 2, opt);
  double t_star = -1;
  for (const auto& b : trace.branches)
    for (const auto& s : b.samples)
      if (s.E == 11.0) t_star = s.t;
  REQUIRE(t_star > 0);
  const auto bands = band_structure(v, -30, 30).bands;
  const std::pair<double, double> J{11 + bands[0].lo + 0.5, 11 + bands[0].hi - 0.5};
  REQUIRE(verify_plane_gap(V, J, h));
  const auto d = surface_dos(V, t_star, J, {3}, h);
  const auto base = surface_dos(V, 0.0, J, {3}, h);
  CHECK(d.normalized[0] > base.normalized[0]);
  CHECK(d.normalized[0] == d.counts[0] / 6.0);
  const double mid = 0.5 * (J.first + J.second), half = 0.5 * (J.second - J.first);
  const auto narrow = surface_dos(V, t_star, {mid - 0.5 * half, mid + 0.5 * half}, {3}, h);
  CHECK(narrow.counts[0] <= d.counts[0]);
  for (double x : d.normalized) CHECK(x >= 0);
  const auto j = to_json(d);
  CHECK(j.at("kind") == "surface");
  CHECK(j.at("normalized").size() == 1);
}

TEST_CASE("bulk density of states") {
  const double h = 1.0 / 16;
  const auto free = bulk_dos(Potential2D::zero(), 0.0, {0, 1}, {4, 5}, h);
  for (std::size_t k = 0; k < 2; ++k) {
    const int n = free.n_list[k];
    const double ref = free_square_count(n, h, 0, 1) / (4.0 * n * n);
    CHECK_THAT(free.normalized[k], WithinRel(ref, 0.15));
  }
  const auto V = plane_fixture();
  const auto below = bulk_dos(V, 0.5, {V.lower_bound() - 10, V.lower_bound() - 1}, {2, 3}, h);
  for (int c : below.counts) CHECK(c == 0);
  // Smooth background without gaps: the bulk quotient ignores the dislocation.
  const auto S = Potential2D::fourier({{1, 0, 0.5, 0}, {0, 1, 0.5, 0}});
  const auto a = bulk_dos(S, 0.0, {0, 40}, {4, 5}, h);
  const auto b = bulk_dos(S, 0.5, {0, 40}, {4, 5}, h);
  for (std::size_t k = 0; k < 2; ++k) CHECK_THAT(b.normalized[k], WithinRel(a.normalized[k], 0.1));
  CHECK_THAT(a.normalized[1], WithinRel(a.normalized[0], 0.1));
  CHECK(to_json(a).at("kind") == "bulk");
}
