#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "disloc/errors.hpp"
#include "disloc/potential.hpp"
#include "disloc/potential_io.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace disloc;
using Catch::Approx;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

PotentialSpec random_piecewise(std::mt19937_64& rng, double period = 1.0) {
  std::uniform_int_distribution<int> count(1, 6);
  std::uniform_real_distribution<double> unit(0.0, 1.0), val(-2.0, 2.0);
  const int m = count(rng);
  std::vector<double> b;
  while (static_cast<int>(b.size()) < m) {
    double x = std::round(unit(rng) * 1000.0) / 1000.0 * period;
    if (x < period && std::find(b.begin(), b.end(), x) == b.end()) b.push_back(x);
  }
  std::sort(b.begin(), b.end());
  std::vector<double> v(m);
  for (double& x : v) x = val(rng);
  return PotentialSpec::piecewise(period, b, v);
}

}  // namespace

TEST_CASE("evaluate follows the form rules") {
  const auto V = fixture::step();
  CHECK(evaluate(V, oracle::pi / 2) == -1.0);
  CHECK(evaluate(V, 1.5 * oracle::pi) == 1.0);
  CHECK(evaluate(V, oracle::pi) == 1.0);

  const auto F = PotentialSpec::fourier(1.0, {0.25, 1.5});
  CHECK_THAT(evaluate(F, 0.0), WithinAbs(1.75, 1e-15));

  const auto S = PotentialSpec::sampled(2.0, {0.0, 1.0, 4.0, 1.0});
  CHECK_THAT(S(0.25), WithinAbs(0.5, 1e-15));
  CHECK_THAT(S(1.75), WithinAbs(0.5, 1e-15));
}

TEST_CASE("breakpoints before the first one carry the last value") {
  const auto V = PotentialSpec::piecewise(1.0, {0.25, 0.5}, {3.0, 7.0});
  CHECK(V(0.1) == 7.0);
  CHECK(V(0.3) == 3.0);
  CHECK(V(0.9) == 7.0);
}

TEST_CASE("evaluation is periodic") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> x(-50.0, 50.0);
  const std::vector<PotentialSpec> Vs{fixture::step(), fixture::cosine(), fixture::sqrt_cusp(64),
                                      PotentialSpec::fourier(0.7, {0.1, 0.3, -0.2}, {0.0, 0.5})};
  for (const auto& V : Vs)
    for (int i = 0; i < 200; ++i) {
      const double y = x(rng);
      CHECK_THAT(V(y + V.period()), WithinAbs(V(y), 1e-12));
    }
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(PotentialSpec::piecewise(1.0, {0.5, 0.2}, {1.0, 2.0}), ValidationError);
  CHECK_THROWS_AS(PotentialSpec::piecewise(1.0, {0.0, 1.0}, {1.0, 2.0}), ValidationError);
  CHECK_THROWS_AS(PotentialSpec::piecewise(1.0, {0.0}, {1.0, 2.0}), ValidationError);
  CHECK_THROWS_AS(PotentialSpec::piecewise(-1.0, {0.0}, {1.0}), ValidationError);
  CHECK_THROWS_AS(PotentialSpec::sampled(1.0, {}), ValidationError);
  CHECK_THROWS_AS(PotentialSpec::fourier(1.0, {}, {}), ValidationError);
}

TEST_CASE("dislocate shifts only the left half-line") {
  const auto V = fixture::unit_step();
  for (double x : {-2.3, -0.7, -0.1, 0.0, 0.4, 2.5}) CHECK(dislocate(V, 0.0, x) == V(x));
  for (double t : {0.0, 0.3, 0.77, 1.0}) CHECK(dislocate(V, t, 2.5) == V(2.5));
  CHECK(dislocate(V, 1.0, -0.5) == V(0.5));
  CHECK(dislocate(V, 0.25, -0.1) == V(0.15));
  CHECK_THROWS_AS(dislocate(V, 1.5, 0.0), DomainError);
  CHECK_THROWS_AS(dislocate(V, -0.1, 0.0), DomainError);
}

TEST_CASE("dislocate is bit-identical to evaluate on x >= 0") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> x(0.0, 20.0), t(0.0, 1.0);
  const auto V = fixture::cosine(1.3);
  for (int i = 0; i < 1000; ++i) {
    const double y = x(rng);
    CHECK(dislocate(V, t(rng), y) == evaluate(V, y));
  }
}

TEST_CASE("cell averages are exact") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> a(-5.0, 5.0), w(1e-3, 3.0);
  const std::vector<PotentialSpec> Vs{fixture::step(), fixture::cosine(2.0),
                                      PotentialSpec::sampled(1.0, {0.0, 2.0, -1.0, 0.5, 3.0})};
  for (const auto& V : Vs)
    for (int i = 0; i < 20; ++i) {
      const double lo = a(rng), hi = lo + w(rng);
      // Fine midpoint sum as reference.
      const int n = 200000;
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += V(lo + (j + 0.5) * (hi - lo) / n);
      CHECK_THAT(V.cell_average(lo, hi), WithinAbs(acc / n, 2e-5));
    }
  const auto S = fixture::unit_step();
  CHECK_THAT(dislocated_average(S, 0.25, -0.5, 0.5), WithinAbs(-0.5, 1e-15));
  CHECK_THAT(dislocated_average(S, 0.0, -0.5, 0.0), WithinAbs(1.0, 1e-15));
  CHECK_THAT(dislocated_average(S, 0.5, -0.5, 0.0), WithinAbs(-1.0, 1e-15));
  CHECK_THAT(dislocated_average(S, 0.5, -0.25, 0.25), WithinAbs(-1.0, 1e-15));
}

TEST_CASE("theta of simple potentials") {
  const auto C = PotentialSpec::constant(2.5);
  for (double s : {0.0, 0.1, 0.5, 1.0}) CHECK(theta(C, s) == 0.0);
  const auto V = fixture::unit_step();
  CHECK(theta(V, 0.0) == 0.0);

  // Riemann-sum oracle at resolution 1e-5, frozen.
  const double frozen = 0.4;
  const double riemann = oracle::theta(oracle::step(-1.0, 1.0, 1.0), 1.0, 0.1, 100000);
  REQUIRE_THAT(riemann, WithinAbs(frozen, 1e-4));
  CHECK_THAT(theta(V, 0.1), WithinAbs(frozen, 1e-14));
  // Slope 2 |a - b| below the half period.
  for (double s : {0.01, 0.2, 0.45}) CHECK_THAT(theta(V, s), WithinAbs(4.0 * s, 1e-14));
}

TEST_CASE("theta on smooth forms uses configurable quadrature") {
  const auto V = fixture::cosine(1.0);  // cos(2 pi x)
  // Integral of |cos(2 pi (x+s)) - cos(2 pi x)| = (4/pi) |sin(pi s)|.
  for (double s : {0.05, 0.25, 0.5}) {
    const double exact = 4.0 / oracle::pi * std::abs(std::sin(oracle::pi * s));
    CHECK_THAT(theta(V, s), WithinRel(exact, 1e-6));
    CHECK_THAT(theta(V, s, {1 << 10}), WithinRel(exact, 1e-3));
  }
  CHECK_THROWS_AS(theta(V, 1.5), DomainError);
}

TEST_CASE("total variation") {
  CHECK(total_variation(PotentialSpec::constant(4.0)) == 0.0);
  for (auto [a, b] : std::vector<std::pair<double, double>>{{-1, 1}, {0.5, 3}, {2, -7}})
    CHECK(total_variation(fixture::unit_step(a, b)) == 2.0 * std::abs(a - b));
  // Single cosine amplitude A: fine-grid adjacent difference oracle, frozen at 4A.
  const double A = 1.7;
  const auto V = PotentialSpec::fourier(1.0, {0.0, A});
  const double fine = oracle::total_variation([&](double x) { return A * std::cos(2 * oracle::pi * x); }, 1.0, 1 << 18);
  REQUIRE_THAT(fine, WithinRel(4.0 * A, 1e-9));
  CHECK_THAT(total_variation(V), WithinRel(4.0 * A, 1e-8));
  CHECK_THAT(total_variation(fixture::sqrt_cusp()), WithinRel(std::sqrt(2.0), 1e-12));
}

TEST_CASE("regularity class of fixtures") {
  auto step = regularity_class(fixture::unit_step());
  CHECK_THAT(step.alpha_estimate, WithinAbs(1.0, 0.05));
  CHECK_THAT(step.holder_constant, WithinRel(4.0, 1e-12));
  CHECK(step.is_bv);

  auto flat = regularity_class(PotentialSpec::constant(1.0));
  CHECK(flat.holder_constant == 0.0);
  CHECK(flat.alpha_estimate == 1.0);

  auto big = regularity_class(fixture::step());
  CHECK_THAT(big.alpha_estimate, WithinAbs(1.0, 0.05));

  // Log-log fit of the analytic cusp's theta by fine quadrature, frozen.
  const double frozen_alpha = 0.9453;
  std::vector<double> lx, ly;
  auto cusp = [](double x) { return std::sqrt(std::abs(x - std::floor(x) - 0.5)); };
  for (double s : default_s_grid(1.0)) {
    lx.push_back(std::log(s));
    ly.push_back(std::log(oracle::theta(cusp, 1.0, s, 1 << 20)));
  }
  REQUIRE_THAT(oracle::line_fit(lx, ly).first, WithinAbs(frozen_alpha, 1e-3));
  auto rep = regularity_class(fixture::sqrt_cusp());
  CHECK_THAT(rep.alpha_estimate, WithinAbs(frozen_alpha, 2e-3));
  CHECK_FALSE(rep.is_bv);
  CHECK(rep.total_variation_per_period > 0.0);
}

TEST_CASE("regularity_class validates the s grid") {
  const auto V = fixture::unit_step();
  CHECK_THROWS_AS(regularity_class(V, {0.1, 0.2, 0.3}), ValidationError);
  CHECK_THROWS_AS(regularity_class(V, {0.1, 0.2, 0.3, 0.4}), ValidationError);
  CHECK_THROWS_AS(regularity_class(V, {0.0, 0.01, 0.1, 0.5}), ValidationError);
}

TEST_CASE("theta properties on random piecewise potentials") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double p = 0.5 + 2.0 * unit(rng);
    const auto V = random_piecewise(rng, p);
    CHECK(theta(V, p) == 0.0);
    const double s1 = unit(rng) * p * 0.5, s2 = unit(rng) * p * 0.5;
    const double t1 = theta(V, s1), t2 = theta(V, s2), t12 = theta(V, s1 + s2);
    CHECK(t1 >= 0.0);
    CHECK(t12 <= t1 + t2 + 1e-12);

    const auto& b = std::get<PiecewiseConstant>(V.form()).breakpoints;
    double spacing = b.front() + p - b.back();
    for (std::size_t i = 1; i < b.size(); ++i) spacing = std::min(spacing, b[i] - b[i - 1]);
    const double s = unit(rng) * spacing;
    CHECK(theta(V, s) <= total_variation(V) * s + 1e-12);
  }
}

TEST_CASE("shift and rescale") {
  const auto V = fixture::step();
  const auto W = V.shifted(0.5);
  CHECK(W(1.0) == V(1.0) + 0.5);
  const auto U = V.rescaled(1.0);
  CHECK(U.period() == 1.0);
  CHECK(U(0.25) == -1.0);
  CHECK(U(0.75) == 1.0);
}

TEST_CASE("potential JSON round trip and diagnostics") {
  for (const auto& V : {fixture::step(), fixture::cosine(), fixture::sqrt_cusp(8)}) {
    const auto j = potential_to_json(V);
    const auto back = potential_from_json(j);
    CHECK(potential_to_json(back) == j);
  }
  json missing = {{"form", "piecewise"}, {"breakpoints", {0.0}}, {"values", {1.0}}};
  try {
    potential_from_json(missing);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("period") != std::string::npos);
  }
  json unknown = {{"period", 1.0}, {"form", "sampled"}, {"samples", {1.0}}, {"colour", 3}};
  CHECK_THROWS_AS(potential_from_json(unknown), ValidationError);
  json foreign = {{"period", 1.0}, {"form", "sampled"}, {"samples", {1.0}}, {"cos", {1.0}}};
  CHECK_FALSE(check_potential_json(foreign).empty());
  json bad = {{"period", 1.0}, {"form", "piecewise"}, {"breakpoints", {0.5, 0.1}}, {"values", {1, 2}}};
  CHECK_FALSE(check_potential_json(bad).empty());
  CHECK(check_potential_json(potential_to_json(fixture::step())).empty());
}
