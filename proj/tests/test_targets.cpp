#include <doctest.h>

#include <cmath>
#include <random>

#include "modlab/targets.hpp"

using namespace modlab;

TEST_CASE("builtin targets") {
  const Target t1 = Target::parse("target1d");
  CHECK(t1.dim() == 1);
  std::vector<double> g(2);
  for (double x : {-2.0, 0.3, 1.1}) {
    const std::vector<double> p{x};
    CHECK(t1.value_and_gradient(p, g) == doctest::Approx(std::exp(-x * x) * std::sin(3 * x)).epsilon(1e-15));
    CHECK(g[0] == doctest::Approx(std::exp(-x * x) * (3 * std::cos(3 * x) - 2 * x * std::sin(3 * x))).epsilon(1e-14));
  }
  const Target t2 = Target::parse("target2d");
  CHECK(t2.dim() == 2);
  const std::vector<double> p{0.4, -1.2};
  const double e = std::exp(-(0.16 + 1.44));
  CHECK(t2.value_and_gradient(p, g) == doctest::Approx(e * std::sin(-0.8)).epsilon(1e-15));
  CHECK(g[0] == doctest::Approx(e * (std::cos(-0.8) - 0.8 * std::sin(-0.8))).epsilon(1e-14));
  CHECK(g[1] == doctest::Approx(e * (std::cos(-0.8) + 2.4 * std::sin(-0.8))).epsilon(1e-14));
}

TEST_CASE("expression gradients match central differences") {
  const char* exprs[] = {"x^3 - 2*x + 0.5", "cos(x*y) * gauss(x - y)", "-(sin(2*x))^2 + 3*y", "gauss(0.5*x)*(x^2 + y^3)"};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (const char* src : exprs) {
    const Target t = Target::parse(src, 2);
    for (int i = 0; i < 50; ++i) {
      std::vector<double> x{u(rng), u(rng)}, g(2);
      t.value_and_gradient(x, g);
      for (std::size_t k = 0; k < 2; ++k) {
        auto xp = x, xm = x;
        xp[k] += 1e-6;
        xm[k] -= 1e-6;
        const double fd = (t.value(xp) - t.value(xm)) / 2e-6;
        CHECK(g[k] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
      }
    }
  }
}

TEST_CASE("grammar errors") {
  CHECK_THROWS_AS(Target::parse("x^4"), ExpressionError);
  CHECK_THROWS_AS(Target::parse("exp(x)"), ExpressionError);
  CHECK_THROWS_AS(Target::parse("sin(x"), ExpressionError);
  CHECK_THROWS_AS(Target::parse("x + y", 1), ExpressionError);
  CHECK_THROWS_AS(Target::parse("x +"), ExpressionError);
  CHECK(Target::parse("x + y").dim() == 2);
  CHECK(Target::parse("2*x").dim() == 1);
}
