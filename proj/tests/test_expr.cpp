#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "fmpinn/expr.hpp"
#include "fmpinn/problems.hpp"
#include "fmpinn/rng.hpp"

using namespace fmpinn;

TEST_CASE("expression parsing and evaluation") {
    ScalarField f = Expression::parse("2 + cos(2*pi*x1) * sin(x2) - x1^2 / (1 + x2^2)", 2).to_field();
    Rng rng(63);
    for (int i = 0; i < 50; ++i) {
        const double a = rng.uniform_open(-1, 1), b = rng.uniform_open(-1, 1);
        const double want = 2.0 + std::cos(2 * std::numbers::pi * a) * std::sin(b) - a * a / (1 + b * b);
        CHECK(f(std::vector<double>{a, b}) == doctest::Approx(want).epsilon(1e-14));
    }
}

TEST_CASE("parsed expressions differentiate through the primitive set") {
    ScalarField f = Expression::parse("tanh(x1) * exp(-x1^2) + sqrt(1 + x1^2)", 1).to_field();
    Rng rng(67);
    for (int i = 0; i < 30; ++i) {
        const double x = rng.uniform_open(-1.5, 1.5);
        const double h = 1e-6;
        const double fd = (f(std::vector<double>{x + h}) - f(std::vector<double>{x - h})) / (2 * h);
        CHECK(std::abs(f.partial(std::vector<double>{x}, 0) - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
}

TEST_CASE("unary minus, precedence, negative powers") {
    ScalarField f = Expression::parse("-x1 + 2*x1^2 - x1^-1", 1).to_field();
    const double x = 0.8;
    CHECK(f(std::vector<double>{x}) == doctest::Approx(-x + 2 * x * x - 1.0 / x).epsilon(1e-14));
}

TEST_CASE("parse errors carry positions and names") {
    CHECK_THROWS_AS((void)Expression::parse("sin(x1", 1), ConfigError);
    CHECK_THROWS_AS((void)Expression::parse("x2", 1), ConfigError);
    CHECK_THROWS_AS((void)Expression::parse("foo(x1)", 1), ConfigError);
    CHECK_THROWS_AS((void)Expression::parse("x1 ^ x1", 1), ConfigError);  // integer exponents only
    CHECK_THROWS_AS((void)Expression::parse("x1 + + 2 @", 1), ConfigError);
}

TEST_CASE("custom problem file loads and derives its forcing") {
    const char* path = "/tmp/fmpinn_test_problem.ini";
    {
        std::ofstream out(path);
        out << "[problem]\n"
               "name = toy\n"
               "dim = 1\n"
               "lo = 0\n"
               "hi = 1\n"
               "coefficient = 2 + cos(2*pi*x1)\n"
               "exact_u = sin(pi*x1)\n"
               "boundary = 0\n";
    }
    ProblemDefinition p = problem_from_file(path);
    CHECK(p.dim == 1);
    CHECK(p.lambda_min > 0.0);
    CHECK(p.has_exact());
    // forcing was produced by exact differentiation: check against hand math
    // f = -(A u')' = -(A' u' + A u'')
    Rng rng(71);
    for (int i = 0; i < 20; ++i) {
        const double x = rng.uniform_open(0.01, 0.99);
        const double pi_ = std::numbers::pi;
        const double A = 2 + std::cos(2 * pi_ * x);
        const double dA = -2 * pi_ * std::sin(2 * pi_ * x);
        const double du = pi_ * std::cos(pi_ * x);
        const double d2u = -pi_ * pi_ * std::sin(pi_ * x);
        const double want = -(dA * du + A * d2u);
        CHECK(p.forcing(std::vector<double>{x}) == doctest::Approx(want).epsilon(1e-10));
    }
    std::remove(path);
}

TEST_CASE("custom problem without forcing or exact solution is rejected") {
    const char* path = "/tmp/fmpinn_test_problem_bad.ini";
    {
        std::ofstream out(path);
        out << "[problem]\nname = bad\ndim = 1\nlo = 0\nhi = 1\ncoefficient = 1\n";
    }
    CHECK_THROWS_AS((void)problem_from_file(path), ConfigError);
    std::remove(path);
}
