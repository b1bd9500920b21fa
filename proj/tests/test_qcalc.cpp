#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "qhmc/qcalc.hpp"
#include "test_util.hpp"

using namespace qhmc;
using test_util::close_abs;
using test_util::close_rel;

namespace {

ScalarField field1(double (*f)(double)) {
  return ScalarField{.eval = [f](std::span<const double> z) { return f(z[0]); },
                     .dim = 1};
}

DeformationParameter dp_q(double q) {
  DeformationParameter dp;
  dp.q = q;
  return dp;
}

// Closed form of the Jackson derivative of x^n: ((q^{2n} - 1) / (q^2 - 1)) x^{n-1}.
double monomial_oracle(int n, double x, double q) {
  const double q2 = q * q;
  return (std::pow(q2, n) - 1.0) / (q2 - 1.0) * std::pow(x, n - 1);
}

HamiltonianSpec separable_unit_mass(ScalarField potential) {
  return HamiltonianSpec{.potential = std::move(potential),
                         .mass = {1.0},
                         .separable = true,
                         .kinetic = std::nullopt};
}

}  // namespace

TEST_CASE("jackson derivative: quadratic away from the classical limit") {
  const auto f = field1([](double x) { return x * x; });
  const double got = jackson_dx(f, std::vector<double>{2.0}, 0, dp_q(0.9));
  // (q^2 + 1) x for the quadratic
  CHECK(close_rel(got, (0.81 + 1.0) * 2.0, 1e-12));
  CHECK(close_abs(got, 3.62, 1e-12));
}

TEST_CASE("jackson derivative: classical fallback at q = 1") {
  const auto f = field1([](double x) { return x * x; });
  const double got = jackson_dx(f, std::vector<double>{2.0}, 0, dp_q(1.0));
  CHECK(close_abs(got, 4.0, 1e-6));
}

TEST_CASE("jackson derivative: quartic at q = 1.2") {
  const auto f = field1([](double x) { return (x * x) * (x * x); });
  const double got = jackson_dx(f, std::vector<double>{1.0}, 0, dp_q(1.2));
  CHECK(close_rel(got, monomial_oracle(4, 1.0, 1.2), 1e-12));
  // (q^8 - 1) / (q^2 - 1) = 3.29981696 / 0.44
  CHECK(close_abs(got, 3.29981696 / 0.44, 1e-10));
}

TEST_CASE("jackson derivative: octic high-gradient point") {
  const auto f = field1([](double x) {
    const double x2 = x * x;
    const double x4 = x2 * x2;
    return x4 * x4;
  });
  const double got = jackson_dx(f, std::vector<double>{1.7}, 0, dp_q(0.9));
  const double oracle = (std::pow(1.377, 8) - std::pow(1.7, 8)) / (-0.19 * 1.7);
  CHECK(close_rel(got, oracle, 1e-12));
  CHECK(close_abs(got, 175.95, 0.01));
}

TEST_CASE("jackson derivative: monomial closed form over the q and x grid") {
  for (int n = 1; n <= 8; ++n) {
    const auto f = [n](std::span<const double> z) { return std::pow(z[0], n); };
    const ScalarField field{.eval = f, .dim = 1};
    for (double q : {0.5, 0.9, 1.1, 2.0}) {
      for (double x : {-2.0, -0.5, 0.5, 2.0}) {
        const double got = jackson_dx(field, std::vector<double>{x}, 0, dp_q(q));
        CHECK_MESSAGE(close_rel(got, monomial_oracle(n, x, q), 1e-12),
                      "n=", n, " q=", q, " x=", x);
      }
    }
  }
}

TEST_CASE("jackson derivative: error halves as q - 1 halves") {
  struct Case {
    double (*f)(double);
    double (*df)(double);
  };
  const Case cases[] = {
      {[](double x) { return x * x; }, [](double x) { return 2.0 * x; }},
      {[](double x) { return std::sin(x); }, [](double x) { return std::cos(x); }},
      {[](double x) { return std::exp(x); }, [](double x) { return std::exp(x); }},
  };
  for (const auto& c : cases) {
    const auto f = field1(c.f);
    for (double x : {0.5, 1.0, 2.0, 3.0}) {
      const double exact = c.df(x);
      // Close enough to the limit that the first-order term dominates the
      // expansion at every listed point.
      const double delta = 0.01;
      const double e1 =
          std::abs(jackson_dx(f, std::vector<double>{x}, 0, dp_q(1.0 + delta)) - exact);
      const double e2 = std::abs(
          jackson_dx(f, std::vector<double>{x}, 0, dp_q(1.0 + delta / 2.0)) - exact);
      const double ratio = e1 / e2;
      CHECK_MESSAGE(ratio > 1.7, "x=", x, " ratio=", ratio);
      CHECK_MESSAGE(ratio < 2.3, "x=", x, " ratio=", ratio);
    }
  }
}

TEST_CASE("jackson derivative: linear in the field") {
  const auto f = field1([](double x) { return x * x * x; });
  const auto g = field1([](double x) { return std::sin(x); });
  const double a = 2.5, b = -1.25;
  const ScalarField combo{
      .eval = [&](std::span<const double> z) { return a * f.eval(z) + b * g.eval(z); },
      .dim = 1};
  for (double q : {0.7, 1.3}) {
    for (double x : {0.6, 1.9}) {
      const std::vector<double> z{x};
      const double lhs = jackson_dx(combo, z, 0, dp_q(q));
      const double rhs =
          a * jackson_dx(f, z, 0, dp_q(q)) + b * jackson_dx(g, z, 0, dp_q(q));
      CHECK(close_rel(lhs, rhs, 1e-12));
    }
  }
}

TEST_CASE("jackson derivative: continuity across the classical-fallback boundary") {
  // At the default classical_tol the quotient's cancellation noise dominates,
  // so the boundary handoff is checked at a configuration where both branches
  // carry small truncation error.
  DeformationParameter just_outside;
  just_outside.classical_tol = 1e-8;
  just_outside.fd_step = 1e-3;
  just_outside.q = 1.0 + 1.0001e-8;

  DeformationParameter just_inside = just_outside;
  just_inside.q = 1.0 + 0.9999e-8;

  const auto f = field1([](double x) { return std::sin(x); });
  for (double x : {0.5, 1.3, 2.2}) {
    const std::vector<double> z{x};
    const double outside = jackson_dx(f, z, 0, just_outside);
    const double inside = jackson_dx(f, z, 0, just_inside);
    CHECK(close_abs(outside, inside, 10.0 * just_outside.fd_step * just_outside.fd_step));
  }
}

TEST_CASE("jackson derivative: degenerate and error cases") {
  const auto f = field1([](double x) { return x * x; });

  SUBCASE("small-argument fallback") {
    const double got = jackson_dx(f, std::vector<double>{0.0}, 0, dp_q(0.8));
    CHECK(close_abs(got, 0.0, 1e-6));
  }
  SUBCASE("q = 0 is the secant to the origin") {
    // (f(0) - f(z)) / (-z) = z for the quadratic
    const double got = jackson_dx(f, std::vector<double>{2.0}, 0, dp_q(0.0));
    CHECK(close_rel(got, 2.0, 1e-12));
  }
  SUBCASE("negative q rejected") {
    CHECK_THROWS_AS(jackson_dx(f, std::vector<double>{1.0}, 0, dp_q(-0.5)),
                    std::invalid_argument);
  }
  SUBCASE("non-positive tolerances rejected") {
    DeformationParameter dp;
    dp.fd_step = 0.0;
    CHECK_THROWS_AS(jackson_dx(f, std::vector<double>{1.0}, 0, dp),
                    std::invalid_argument);
  }
  SUBCASE("coordinate out of range") {
    CHECK_THROWS_AS(jackson_dx(f, std::vector<double>{1.0}, 1, dp_q(0.9)),
                    std::invalid_argument);
  }
  SUBCASE("non-finite evaluation carries the offending input") {
    const ScalarField bad{
        .eval = [](std::span<const double> z) { return 1.0 / (z[0] - 1.62); },
        .dim = 1};
    try {
      jackson_dx(bad, std::vector<double>{2.0}, 0, dp_q(0.9));
      FAIL("expected non_finite_error");
    } catch (const non_finite_error& e) {
      REQUIRE(e.point().size() == 1);
      CHECK(close_rel(e.point()[0], 0.81 * 2.0, 1e-12));
    }
  }
}

TEST_CASE("scalar fields evaluate deterministically") {
  const auto f = field1([](double x) { return std::sin(3.0 * x) + x * x; });
  const std::vector<double> z{1.234567};
  const double first = f(z);
  for (int i = 0; i < 10; ++i) CHECK(f(z) == first);
}

TEST_CASE("dilatation scales componentwise") {
  CHECK(dilate(std::vector<double>{1.7}, 1.0) == std::vector<double>{1.7});
  CHECK(close_rel(dilate(std::vector<double>{1.7}, 1.1)[0], 1.87, 1e-12));
  const auto two = dilate(std::vector<double>{2.0, -3.0}, 0.5);
  CHECK(two == std::vector<double>({1.0, -1.5}));
}

TEST_CASE("velocity field on the quadratic kinetic term") {
  auto H = separable_unit_mass(field1([](double x) { return 0.5 * x * x; }));

  SUBCASE("q = 0.9 closed form") {
    const auto v = velocity_field(H, std::vector<double>{0.0},
                                  std::vector<double>{1.0}, dp_q(0.9));
    const double oracle = std::sqrt(1.0 / 0.9) * (0.81 + 1.0) / 2.0;
    CHECK(close_abs(v[0], oracle, 1e-9));
    CHECK(close_abs(v[0], 0.953954, 1e-6));
  }
  SUBCASE("classical limit") {
    const auto v = velocity_field(H, std::vector<double>{0.3},
                                  std::vector<double>{1.0}, dp_q(1.0));
    CHECK(close_abs(v[0], 1.0, 1e-6));
  }
  SUBCASE("odd in p: zero momentum gives zero velocity") {
    const auto v = velocity_field(H, std::vector<double>{2.4},
                                  std::vector<double>{0.0}, dp_q(0.9));
    CHECK(close_abs(v[0], 0.0, 1e-6));
  }
}

TEST_CASE("force field on the octic potential") {
  auto H = separable_unit_mass(field1([](double x) {
    const double x2 = x * x;
    const double x4 = x2 * x2;
    return x4 * x4;
  }));
  const std::vector<double> x{1.7};
  const std::vector<double> p{0.0};

  SUBCASE("classical value within half a percent of the reference 328.06") {
    const auto f = force_field(H, x, p, dp_q(1.0));
    CHECK(close_rel(f[0], 8.0 * std::pow(1.7, 7), 1e-4));
    CHECK(std::abs(f[0] - 328.06) / 328.06 < 0.005);
  }
  SUBCASE("q = 0.9 reduces the force") {
    const auto f = force_field(H, x, p, dp_q(0.9));
    const double jackson = (std::pow(1.377, 8) - std::pow(1.7, 8)) / (-0.19 * 1.7);
    CHECK(close_abs(f[0], std::sqrt(0.9) * jackson, 1e-9));
    CHECK(close_abs(f[0], 166.92, 0.01));
  }
  SUBCASE("force ordering is monotone in q") {
    const double f09 = std::abs(force_field(H, x, p, dp_q(0.9))[0]);
    const double f10 = std::abs(force_field(H, x, p, dp_q(1.0))[0]);
    const double f11 = std::abs(force_field(H, x, p, dp_q(1.1))[0]);
    CHECK(f09 < f10);
    CHECK(f10 < f11);
  }
}

TEST_CASE("force field vanishes at a symmetric minimum") {
  auto H = separable_unit_mass(field1([](double x) { return 0.5 * x * x; }));
  for (double q : {0.7, 1.0, 1.4}) {
    const auto f =
        force_field(H, std::vector<double>{0.0}, std::vector<double>{0.4}, dp_q(q));
    CHECK(close_abs(f[0], 0.0, 1e-6));
  }
}

TEST_CASE("q-Poisson bracket") {
  auto H = separable_unit_mass(field1([](double x) { return 0.5 * x * x; }));
  const ScalarField Hf = hamiltonian_field(H);
  const ScalarField proj_x{.eval = [](std::span<const double> z) { return z[0]; },
                           .dim = 2};
  const ScalarField proj_p{.eval = [](std::span<const double> z) { return z[1]; },
                           .dim = 2};

  SUBCASE("{x, H} matches the velocity") {
    const std::vector<double> z{1.0, 2.0};
    const double got = poisson_bracket_q(proj_x, Hf, z, dp_q(0.9));
    CHECK(close_abs(got, 1.907908, 1e-6));
    const auto v = velocity_field(H, std::vector<double>{1.0},
                                  std::vector<double>{2.0}, dp_q(0.9));
    CHECK(close_abs(got, v[0], 1e-9));
  }
  SUBCASE("{p, H} is minus the force at q = 1") {
    const std::vector<double> z{2.0, 1.0};
    const double got = poisson_bracket_q(proj_p, Hf, z, dp_q(1.0));
    CHECK(close_abs(got, -2.0, 1e-6));
  }
  SUBCASE("{x, x} vanishes") {
    for (double q : {0.8, 1.0, 1.3}) {
      const std::vector<double> z{1.4, -0.7};
      CHECK(poisson_bracket_q(proj_x, proj_x, z, dp_q(q)) == 0.0);
    }
  }
  SUBCASE("bracket consistency at random phase points") {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> mag(0.2, 2.0);
    std::bernoulli_distribution sign(0.5);
    auto Hoct = separable_unit_mass(field1([](double x) {
      const double x2 = x * x;
      return x2 * x2;
    }));
    const ScalarField Hoct_f = hamiltonian_field(Hoct);
    for (int trial = 0; trial < 20; ++trial) {
      const double x = (sign(gen) ? 1.0 : -1.0) * mag(gen);
      const double p = (sign(gen) ? 1.0 : -1.0) * mag(gen);
      const std::vector<double> z{x, p};
      for (double q : {0.85, 1.1}) {
        const auto dp = dp_q(q);
        const double vel = poisson_bracket_q(proj_x, Hoct_f, z, dp);
        const double frc = poisson_bracket_q(proj_p, Hoct_f, z, dp);
        const auto v =
            velocity_field(Hoct, std::vector<double>{x}, std::vector<double>{p}, dp);
        const auto f =
            force_field(Hoct, std::vector<double>{x}, std::vector<double>{p}, dp);
        CHECK(close_rel(vel, v[0], 1e-10));
        CHECK(close_rel(frc, -f[0], 1e-10));
      }
    }
  }
  SUBCASE("unsupported dimension") {
    const ScalarField wrong{.eval = [](std::span<const double> z) { return z[0]; },
                            .dim = 3};
    CHECK_THROWS_AS(
        poisson_bracket_q(wrong, wrong, std::vector<double>{1.0, 2.0, 3.0}, dp_q(0.9)),
        std::invalid_argument);
  }
}
