#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "disloc/errors.hpp"
#include "disloc/floquet1d.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace disloc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Band edges of the period-2 pi step, from closed-form 2x2 products and
// bisection on D -+ 2, computed once and frozen.
const double kStepEdges[] = {-0.5466924461856426, -0.5270355508659428, 0.560730804532016,
                             0.7658211587687238, 1.4664553663221174, 2.261229549260197};
const double kStepD0 = -23.183906551043037;

double oracle_step_discriminant(double E) {
  const auto lo = oracle::closed_form_block(-1.0, E, oracle::pi);
  const auto hi = oracle::closed_form_block(1.0, E, oracle::pi);
  return (hi * lo).trace();
}

}  // namespace

TEST_CASE("free propagation") {
  const auto Z = PotentialSpec::constant(0.0);
  const auto M = propagate(Z, 0.0, 0.0, 1.0);
  CHECK(M.m11 == 1.0);
  CHECK(M.m12 == 1.0);
  CHECK(M.m21 == 0.0);
  CHECK(M.m22 == 1.0);
  CHECK_THROWS_AS(propagate(Z, 0.0, 1.0, 0.0), DomainError);
  CHECK_THAT(discriminant(Z, oracle::pi * oracle::pi), WithinAbs(-2.0, 1e-12));
  CHECK_THAT(discriminant(Z, 4 * oracle::pi * oracle::pi), WithinAbs(2.0, 1e-12));
}

TEST_CASE("step discriminant at E = 0") {
  REQUIRE_THAT(oracle_step_discriminant(0.0), WithinAbs(kStepD0, 1e-11));
  const auto osc = [](double x) { return oracle::step(-1.0, 1.0, 2 * oracle::pi)(x); };
  // Fine fixed-step RK4 oracle; the jump at pi sits on a step boundary.
  REQUIRE_THAT(oracle::rk4_propagator(osc, 0.0, 0.0, 2 * oracle::pi, 1 << 14).trace(),
               WithinRel(kStepD0, 1e-8));
  const auto V = fixture::step();
  const auto M = propagate(V, 0.0, 0.0, V.period());
  CHECK(M.trace() < -2.0);
  CHECK_THAT(M.trace(), WithinAbs(kStepD0, 1e-10));
  CHECK_THAT(discriminant(V, 0.0), WithinAbs(kStepD0, 1e-10));
}

TEST_CASE("unit determinant over random draws") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> val(-1.0, 1.0), unit(0.0, 1.0), energy(-2.0, 40.0);
  for (int draw = 0; draw < 10000; ++draw) {
    std::vector<PotentialSpec> pool;
    if (draw % 10 == 0) {
      pool.push_back(PotentialSpec::fourier(1.0, {val(rng), val(rng)}, {0.0, val(rng)}));
    } else {
      const double b = 0.05 + 0.9 * unit(rng);
      pool.push_back(PotentialSpec::piecewise(1.0, {0.0, b}, {val(rng), val(rng)}));
    }
    const double x0 = 4.0 * val(rng), x1 = x0 + 2.0 * unit(rng);
    const double E = energy(rng);
    CHECK_THAT(propagate(pool[0], E, x0, x1).det(), WithinAbs(1.0, 1e-9));
  }
}

TEST_CASE("cocycle property") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0), energy(-2.0, 40.0);
  const auto V = fixture::step();
  const auto C = fixture::cosine(0.8);
  for (int i = 0; i < 300; ++i) {
    double x[3] = {8 * unit(rng) - 4, 8 * unit(rng) - 4, 8 * unit(rng) - 4};
    std::sort(x, x + 3);
    const double E = energy(rng);
    for (const auto* W : {&V, &C}) {
      const auto a = propagate(*W, E, x[0], x[2]);
      const auto b = propagate(*W, E, x[1], x[2]) * propagate(*W, E, x[0], x[1]);
      const double scale = std::max(1.0, a.norm());
      CHECK_THAT(a.m11, WithinAbs(b.m11, 1e-9 * scale));
      CHECK_THAT(a.m12, WithinAbs(b.m12, 1e-9 * scale));
      CHECK_THAT(a.m21, WithinAbs(b.m21, 1e-9 * scale));
      CHECK_THAT(a.m22, WithinAbs(b.m22, 1e-9 * scale));
    }
  }
}

TEST_CASE("exact blocks agree with the generic integrator") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> energy(-2.0, 40.0);
  const auto V = fixture::step();
  for (int i = 0; i < 100; ++i) {
    const double E = energy(rng);
    const double exact = discriminant(V, E);
    const double rk = propagate_rk4(V, E, 0.0, V.period()).trace();
    CHECK_THAT(rk, WithinAbs(exact, 1e-8 * std::max(1.0, std::abs(exact))));
  }
}

TEST_CASE("free potential has only closed gaps") {
  const auto Z = PotentialSpec::constant(0.0);
  const auto bs = band_structure(Z, 0.5, 100.0);
  REQUIRE(bs.gaps.size() == 3);
  for (const auto& g : bs.gaps) {
    CHECK_FALSE(g.open());
    CHECK_THAT(g.lo, WithinRel(g.k * g.k * oracle::pi * oracle::pi, 1e-7));
  }
}

TEST_CASE("step potential band structure") {
  const auto V = fixture::step();
  const auto bs = band_structure(V, -1.0, 2.3, 1e-10);
  const Gap* g1 = bs.gap(1);
  REQUIRE(g1 != nullptr);
  CHECK(g1->lo < -0.5);
  CHECK(g1->hi > 0.5);
  REQUIRE(bs.bands.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK_THAT(bs.bands[i].lo, WithinAbs(kStepEdges[2 * i], 1e-8));
    CHECK_THAT(bs.bands[i].hi, WithinAbs(kStepEdges[2 * i + 1], 1e-8));
  }
  for (int i = 0; i < 6; ++i)
    CHECK_THAT(oracle_step_discriminant(kStepEdges[i]), WithinAbs(i % 4 == 0 || i % 4 == 3 ? 2.0 : -2.0, 1e-7));
  const Gap* g3 = bs.gap(3);
  REQUIRE(g3 != nullptr);
  CHECK_THAT(g3->hi, WithinAbs(2.4630026879762665, 1e-8));
}

TEST_CASE("band structure invariants") {
  const std::vector<PotentialSpec> Vs{fixture::step(), fixture::cosine(), fixture::unit_step(-3, 3)};
  for (const auto& V : Vs) {
    const auto bs = band_structure(V, -5.0, 45.0);
    for (std::size_t i = 0; i < bs.bands.size(); ++i) {
      const auto& b = bs.bands[i];
      CHECK(b.lo < b.hi);
      if (i + 1 < bs.bands.size()) CHECK(b.hi <= bs.bands[i + 1].lo);
      for (int j = 0; j <= 8; ++j) {
        const double E = b.lo + (b.hi - b.lo) * (j + 0.5) / 9.5;
        if (!b.truncated) CHECK(std::abs(discriminant(V, E)) <= 2.0 + 1e-9);
      }
    }
    for (const auto& g : bs.gaps)
      if (g.open()) CHECK(std::abs(discriminant(V, g.mid())) > 2.0);
    CHECK(std::abs(discriminant(V, bs.bands.front().lo - 0.5)) > 2.0);
  }
}

TEST_CASE("band edges move with a constant shift") {
  const auto V = fixture::step();
  const double c = 0.75;
  const auto a = band_structure(V, -1.0, 2.0, 1e-10);
  const auto b = band_structure(V.shifted(c), -1.0 + c, 2.0 + c, 1e-10);
  REQUIRE(a.bands.size() == b.bands.size());
  for (std::size_t i = 0; i < a.bands.size(); ++i) {
    CHECK_THAT(b.bands[i].lo, WithinAbs(a.bands[i].lo + c, 2e-10));
    if (!a.bands[i].truncated) CHECK_THAT(b.bands[i].hi, WithinAbs(a.bands[i].hi + c, 2e-10));
  }
}

TEST_CASE("single-cosine gap edges match a finite-difference approximant") {
  // Periodic FD spectrum on 16 periods at h and h/2, Richardson-combined.
  const auto V = fixture::cosine();
  auto fd_spectrum = [&](int per_period) {
    const int n = 16 * per_period;
    const double h = 1.0 / per_period;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
      A(j, j) = 2.0 / (h * h) + 5.0 * std::cos(2 * oracle::pi * j * h);
      A(j, (j + 1) % n) = A((j + 1) % n, j) = -1.0 / (h * h);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  };
  const Eigen::VectorXd coarse = fd_spectrum(32), fine = fd_spectrum(64);
  std::vector<double> rich;
  for (int i = 0; i < coarse.size() && coarse[i] < 45.0; ++i) rich.push_back((4 * fine[i] - coarse[i]) / 3);

  const auto bs = band_structure(V, 0.0, 40.0);
  int checked = 0;
  for (const auto& g : bs.gaps) {
    if (g.hi > 40.0 || g.lo < 0.0) continue;
    for (double edge : {g.lo, g.hi}) {
      double best = 1e9;
      for (double e : rich) best = std::min(best, std::abs(e - edge));
      CHECK(best < 1e-3);
      ++checked;
    }
  }
  CHECK(checked >= 4);
}

TEST_CASE("find_gap reaches a requested gap") {
  const auto g = find_gap(fixture::cosine(), 2);
  CHECK(g.k == 2);
  CHECK(g.open());
  CHECK(std::abs(discriminant(fixture::cosine(), g.mid())) > 2.0);
}

TEST_CASE("Floquet multipliers") {
  const auto V = fixture::step();
  const auto m = floquet_multipliers(V, 0.0);
  CHECK(m.rho_minus < 0.0);
  CHECK(m.rho_plus < 0.0);
  CHECK_THAT(m.rho_minus * m.rho_plus, WithinAbs(1.0, 1e-10));
  for (double E : {-0.5, -0.2, 0.3, 0.55, 1.0, -3.0}) {
    const auto r = floquet_multipliers(V, E);
    CHECK(std::abs(r.rho_minus) < 1.0);
    CHECK(std::abs(r.rho_plus) > 1.0);
    CHECK_THAT(r.rho_minus * r.rho_plus, WithinAbs(1.0, 1e-10));
  }
  const auto q = multipliers_from_discriminant(-2.5);
  CHECK_THAT(q.rho_plus, WithinAbs(-2.0, 1e-15));
  CHECK_THAT(q.rho_minus, WithinAbs(-0.5, 1e-15));
  CHECK_THROWS_AS(floquet_multipliers(V, 0.65), PreconditionError);
}

TEST_CASE("monodromy eigenvector normalization") {
  const auto V = fixture::step();
  const auto M = propagate(V, 0.0, 0.0, V.period());
  const auto m = floquet_multipliers(V, 0.0);
  for (double rho : {m.rho_minus, m.rho_plus}) {
    const auto v = monodromy_eigenvector(M, rho);
    CHECK_THAT(std::hypot(v[0], v[1]), WithinAbs(1.0, 1e-15));
    CHECK(v[0] >= 0.0);
    const auto w = M.apply(v);
    CHECK_THAT(w[0], WithinAbs(rho * v[0], 1e-9 * std::abs(rho)));
    CHECK_THAT(w[1], WithinAbs(rho * v[1], 1e-9 * std::abs(rho)));
    const auto u = monodromy_eigenvector(M, rho, VectorNorm::max);
    CHECK_THAT(std::max(std::abs(u[0]), std::abs(u[1])), WithinAbs(1.0, 1e-15));
  }
}

TEST_CASE("decaying solutions") {
  const auto V = fixture::step();
  const int S = 4096;
  for (Side side : {Side::right, Side::left}) {
    const auto sol = decaying_solution(V, 0.0, side, 8, S);
    REQUIRE(sol.x.size() == static_cast<std::size_t>(8 * S + 1));
    CHECK_THAT(std::hypot(sol.initial[0], sol.initial[1]), WithinAbs(1.0, 1e-15));
    CHECK(sol.initial[0] >= 0.0);

    // Multiplier relation at every grid point, relative to the size of the
    // solution over the period it lands in.
    for (std::size_t i = 0; i + S < sol.x.size(); ++i) {
      const std::size_t k = (i + S) / S;
      double local = 0.0;
      for (std::size_t j = k * S; j < std::min(sol.x.size(), (k + 1) * S); ++j)
        local = std::max(local, std::abs(sol.value(j)));
      const double a = sol.value(i), b = sol.value(i + S);
      CHECK_THAT(b, WithinAbs(sol.multiplier * a, 1e-8 * local));
    }

    // Second-difference residual away from the jumps.
    const double h = sol.period / S;
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < sol.x.size(); ++i) scale = std::max(scale, std::abs(sol.value(i)));
    const auto jumps = V.singular_points(sol.x.front(), sol.x.back());
    for (std::size_t i = 1; i + 1 < sol.x.size(); ++i) {
      bool straddles = false;
      for (double p : jumps) straddles = straddles || (p > sol.x[i - 1] - 1e-12 && p < sol.x[i + 1] + 1e-12);
      if (straddles) continue;
      const double upp = (sol.value(i + 1) - 2 * sol.value(i) + sol.value(i - 1)) / (h * h);
      const double r = -upp + V(sol.x[i]) * sol.value(i);
      worst = std::max(worst, std::abs(r));
    }
    CHECK(worst < 1e-6 * scale);
  }
  // The value at x = 0 of the left solution is its initial vector.
  const auto left = decaying_solution(V, 0.0, Side::left, 3, 16);
  CHECK_THAT(left.value(left.x.size() - 1), WithinAbs(left.initial[0], 1e-12));
  CHECK_THAT(left.derivative(left.x.size() - 1), WithinAbs(left.initial[1], 1e-12));
}

TEST_CASE("decay rate of phi_plus matches the multiplier") {
  const auto V = fixture::step();
  const auto sol = decaying_solution(V, 0.0, Side::right, 8, 64);
  std::vector<double> k, lg;
  for (int p = 0; p <= 8; ++p) {
    k.push_back(p);
    lg.push_back(std::log(std::abs(sol.value(static_cast<std::size_t>(p) * 64))));
  }
  const double rate = oracle::line_fit(k, lg).first;
  CHECK_THAT(rate, WithinAbs(std::log(std::abs(floquet_multipliers(V, 0.0).rho_minus)), 1e-6));
}

TEST_CASE("discriminant CSV") {
  const auto csv = discriminant_csv(fixture::step(), -1.0, 1.0, 5);
  CHECK(csv.rfind("E,D\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}
