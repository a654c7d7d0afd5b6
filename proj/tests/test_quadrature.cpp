#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "duhop/quadrature.hpp"

using namespace duhop;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("domain construction and classification") {
  CHECK(Domain1D::full_line().kind() == DomainKind::FullLine);
  CHECK(Domain1D::half_line_positive().kind() == DomainKind::HalfLinePositive);
  CHECK(Domain1D::half_line_negative().kind() == DomainKind::HalfLineNegative);
  CHECK(Domain1D::interval(0.0, 1.0).kind() == DomainKind::Interval);
  CHECK(Domain1D::half_line_positive(3.0).contains(4.0));
  CHECK_FALSE(Domain1D::half_line_positive(3.0).contains(2.0));

  CHECK_THROWS_AS(Domain1D::interval(1.0, 1.0), DomainError);
  CHECK_THROWS_AS(Domain1D::interval(2.0, 1.0), DomainError);
  CHECK_THROWS_AS(Domain1D::interval(0.0, kInfinity), DomainError);

  CHECK_FALSE(intersect(Domain1D::interval(0, 1), Domain1D::interval(2, 3)).has_value());
  auto hit = intersect(Domain1D::interval(0, 2), Domain1D::half_line_positive(1));
  REQUIRE(hit.has_value());
  CHECK(hit->a == 1.0);
  CHECK(hit->b == 2.0);
}

TEST_CASE("inverse square root over (0,1) with declared singularity") {
  // antiderivative 2*sqrt(t) -> 2
  const double tol = 1e-10;
  std::vector<SingularityHint> hints{hint_at(0.0, 0.5)};
  auto r = integrate_line([](double t) { return 1.0 / std::sqrt(t); },
                          Domain1D::interval(0.0, 1.0), hints, tol);
  CHECK(r.converged);
  CHECK(r.value == Catch::Approx(2.0).margin(tol));
  CHECK(r.abs_error_estimate <= tol);
}

TEST_CASE("inverse square tail over (1,inf)") {
  // antiderivative -1/t -> 1
  const double tol = 1e-10;
  auto r = integrate_line([](double t) { return 1.0 / (t * t); },
                          Domain1D::half_line_positive(1.0), tol);
  CHECK(r.converged);
  CHECK(r.value == Catch::Approx(1.0).margin(tol));
}

TEST_CASE("gaussian over the full line") {
  const double tol = 1e-10;
  auto r = integrate_line([](double t) { return std::exp(-t * t); },
                          Domain1D::full_line(), tol);
  CHECK(r.converged);
  CHECK(r.value == Catch::Approx(std::sqrt(kPi)).margin(tol));
}

TEST_CASE("declared tail exponents sharpen half-line integrals") {
  const double tol = 1e-12;
  std::vector<SingularityHint> hints{hint_tail_pos(1.5)};
  auto r = integrate_line([](double t) { return std::pow(t, -1.5); },
                          Domain1D::half_line_positive(1.0), hints, tol);
  CHECK(r.converged);
  CHECK(r.value == Catch::Approx(2.0).margin(tol));
}

TEST_CASE("interior breakpoint hints split the domain") {
  // |t|^{-1/2} over (-1,1): 4 by symmetry of the antiderivative
  const double tol = 1e-9;
  std::vector<SingularityHint> hints{hint_at(0.0, 0.5)};
  auto r = integrate_line([](double t) { return 1.0 / std::sqrt(std::abs(t)); },
                          Domain1D::interval(-1.0, 1.0), hints, tol);
  CHECK(r.converged);
  CHECK(r.value == Catch::Approx(4.0).margin(tol));
}

TEST_CASE("non-integrable hints are rejected") {
  std::vector<SingularityHint> bad_point{hint_at(0.0, 1.0)};
  CHECK_THROWS_AS(integrate_line([](double t) { return 1.0 / t; },
                                 Domain1D::interval(0.0, 1.0), bad_point, 1e-8),
                  NonIntegrableError);
  std::vector<SingularityHint> bad_tail{hint_tail_pos(1.0)};
  CHECK_THROWS_AS(integrate_line([](double t) { return 1.0 / t; },
                                 Domain1D::half_line_positive(1.0), bad_tail, 1e-8),
                  NonIntegrableError);
  CHECK_THROWS_AS(integrate_line([](double) { return 0.0; },
                                 Domain1D::interval(0.0, 1.0), 0.0),
                  ParamError);
}

TEST_CASE("harmonic tail is reported divergent, not silently summed") {
  auto r = integrate_line([](double t) { return 1.0 / t; },
                          Domain1D::half_line_positive(1.0), 1e-8);
  CHECK_FALSE(r.converged);
  CHECK(r.diverging);
}

TEST_CASE("harmonic endpoint is reported divergent") {
  auto r = integrate_line([](double t) { return 1.0 / t; },
                          Domain1D::interval(0.0, 1.0), 1e-8);
  CHECK_FALSE(r.converged);
  CHECK(r.diverging);
}

TEST_CASE("slow but convergent integrals are not flagged divergent") {
  // t^{-0.9} over (0,1), undeclared: converges to 10 but grinds
  auto r = integrate_line([](double t) { return std::pow(t, -0.9); },
                          Domain1D::interval(0.0, 1.0), 1e-10, 200'000);
  CHECK_FALSE(r.diverging);
}

TEST_CASE("budget exhaustion returns the best estimate unconverged") {
  auto r = integrate_line([](double t) { return std::sin(50.0 * t) * std::sin(51.0 * t); },
                          Domain1D::interval(0.0, 200.0), 1e-14, 2'000);
  CHECK_FALSE(r.converged);
  CHECK(r.n_evals <= 2'100);
  CHECK(std::isfinite(r.value));
}

TEST_CASE("results are deterministic for fixed tolerance and budget") {
  auto run = [] {
    return integrate_line([](double t) { return std::exp(-t) * std::cos(7.0 * t); },
                          Domain1D::half_line_positive(), 1e-11);
  };
  auto r1 = run();
  auto r2 = run();
  CHECK(r1.value == r2.value);
  CHECK(r1.abs_error_estimate == r2.abs_error_estimate);
  CHECK(r1.n_evals == r2.n_evals);
}

TEST_CASE("linearity within tolerance") {
  const double tol = 1e-10;
  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> coeff(-3.0, 3.0);
  auto f = [](double t) { return std::exp(-t * t); };
  auto g = [](double t) { return 1.0 / (1.0 + t * t); };
  const Domain1D d = Domain1D::full_line();
  const double fi = integrate_line(f, d, tol).value;
  const double gi = integrate_line(g, d, tol).value;
  for (int k = 0; k < 10; ++k) {
    const double a = coeff(rng), b = coeff(rng);
    auto combo = integrate_line([&](double t) { return a * f(t) + b * g(t); }, d, tol);
    REQUIRE(combo.converged);
    CHECK(combo.value == Catch::Approx(a * fi + b * gi).margin(2 * tol * (1 + std::abs(a) + std::abs(b))));
  }
}

TEST_CASE("reflection symmetry") {
  const double tol = 1e-10;
  auto f = [](double t) { return std::exp(-std::abs(t)) * (2.0 + std::sin(3.0 * t)); };
  auto fwd = integrate_line(f, Domain1D::interval(1.0, 5.0), tol);
  auto mir = integrate_line([&](double t) { return f(-t); }, Domain1D::interval(-5.0, -1.0), tol);
  CHECK(fwd.value == Catch::Approx(mir.value).margin(2 * tol));

  auto fwd_ray = integrate_line(f, Domain1D::half_line_positive(2.0), tol);
  auto mir_ray = integrate_line([&](double t) { return f(-t); }, Domain1D::half_line_negative(-2.0), tol);
  CHECK(fwd_ray.value == Catch::Approx(mir_ray.value).margin(2 * tol));
}

TEST_CASE("plane: constant over a box") {
  const double tol = 1e-9;
  auto r = integrate_plane([](double, double) { return 1.0; },
                           {Domain1D::interval(0, 1), Domain1D::interval(0, 2)}, {}, {}, tol);
  CHECK(r.converged);
  CHECK(r.value == Catch::Approx(2.0).margin(tol));
}

TEST_CASE("plane: product tails over (1,inf)^2") {
  const double tol = 1e-8;
  auto r = integrate_plane([](double x, double y) { return 1.0 / (x * x * y * y); },
                           {Domain1D::half_line_positive(1.0), Domain1D::half_line_positive(1.0)},
                           {}, {}, tol);
  CHECK(r.converged);
  CHECK(r.value == Catch::Approx(1.0).margin(tol));
}

TEST_CASE("plane: log box matches the per-axis antiderivative") {
  // 1/(y1*y2) over (u,1/u)^2 = (2 log(1/u))^2 per the log antiderivative on each axis
  const double tol = 1e-8;
  const double u = 0.1;
  auto r = integrate_plane([](double x, double y) { return 1.0 / std::abs(x * y); },
                           {Domain1D::interval(u, 1 / u), Domain1D::interval(u, 1 / u)},
                           {}, {}, tol);
  const double expected = std::pow(2.0 * std::log(1.0 / u), 2);  // ~21.2076
  CHECK(r.converged);
  CHECK(r.value == Catch::Approx(expected).margin(tol));
  CHECK(expected == Catch::Approx(21.2076).margin(1e-3));
}

TEST_CASE("plane: product consistency with line integrals") {
  const double tol = 1e-8;
  auto f1 = [](double x) { return std::exp(-x); };
  auto f2 = [](double y) { return 1.0 / (1.0 + y * y); };
  const double a = integrate_line(f1, Domain1D::half_line_positive(), tol).value;
  const double b = integrate_line(f2, Domain1D::interval(-3, 5), tol).value;
  auto r = integrate_plane([&](double x, double y) { return f1(x) * f2(y); },
                           {Domain1D::half_line_positive(), Domain1D::interval(-3, 5)},
                           {}, {}, tol);
  REQUIRE(r.converged);
  CHECK(r.value == Catch::Approx(a * b).margin(4 * tol));
}
