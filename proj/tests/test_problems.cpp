#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fmpinn/problems.hpp"
#include "fmpinn/rng.hpp"
#include "fmpinn/sampling.hpp"

using namespace fmpinn;

namespace {
constexpr double pi = std::numbers::pi;

double fd_divergence_of_flux(const ProblemDefinition& p, std::span<const double> x, double h = 1e-6) {
    double acc = 0.0;
    std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
    for (int k = 0; k < p.dim; ++k) {
        xp[static_cast<std::size_t>(k)] = x[k] + h;
        xm[static_cast<std::size_t>(k)] = x[k] - h;
        acc += ((*p.exact_flux)[static_cast<std::size_t>(k)](xp) -
                (*p.exact_flux)[static_cast<std::size_t>(k)](xm)) / (2.0 * h);
        xp[static_cast<std::size_t>(k)] = x[k];
        xm[static_cast<std::size_t>(k)] = x[k];
    }
    return acc;
}
}  // namespace

TEST_CASE("two-scale 1d instance: coefficient, boundary values, midpoint") {
    ProblemDefinition p = example_1d_two_scale(0.1);
    CHECK(p.coefficient(std::vector<double>{0.0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(std::abs((*p.exact_u)(std::vector<double>{0.0})) <= 1e-15);
    CHECK(std::abs((*p.exact_u)(std::vector<double>{1.0})) <= 1e-15);
    // at x = 1/2 the oscillatory terms cancel, leaving the parabola value
    CHECK((*p.exact_u)(std::vector<double>{0.5}) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(p.forcing(std::vector<double>{0.3}) == 1.0);
}

TEST_CASE("two-scale 1d flux simplifies to (1-2x)/2") {
    // A * u' collapses algebraically; independent check of the closed form
    for (double eps : {0.1, 0.01}) {
        ProblemDefinition p = example_1d_two_scale(eps);
        Rng rng(43);
        for (int i = 0; i < 50; ++i) {
            const double x = rng.uniform_open(0, 1);
            const double flux = (*p.exact_flux)[0](std::vector<double>{x});
            CHECK(flux == doctest::Approx((1.0 - 2.0 * x) / 2.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("two-scale 1d rejects invalid scale parameters") {
    CHECK_THROWS_AS((void)example_1d_two_scale(-0.1), ConfigError);
    CHECK_THROWS_AS((void)example_1d_two_scale(0.3), ConfigError);  // 1/eps not integral
}

TEST_CASE("three-scale 1d instance: boundary, coefficient, derived forcing vs finite differences") {
    ProblemDefinition p = example_1d_three_scale(0.1, 0.01);
    CHECK(std::abs((*p.exact_u)(std::vector<double>{0.0})) <= 1e-15);
    CHECK(std::abs((*p.exact_u)(std::vector<double>{1.0})) <= 1e-14);
    CHECK(p.coefficient(std::vector<double>{0.0}) == doctest::Approx(9.0).epsilon(1e-15));
    Rng rng(47);
    for (int i = 0; i < 20; ++i) {
        std::vector<double> x = {rng.uniform_open(0.01, 0.99)};
        const double f = p.forcing(x);
        const double fd = -fd_divergence_of_flux(p, x);
        CHECK(std::abs(f - fd) <= 1e-5 * std::max(1.0, std::abs(f)));
    }
}

TEST_CASE("2d two-scale instance values") {
    ProblemDefinition p = example_2d_two_scale(0.05);
    CHECK(p.coefficient(std::vector<double>{0.0, 0.0}) == doctest::Approx(2.6).epsilon(1e-15));
    CHECK(p.forcing(std::vector<double>{0.3, -0.4}) == 5.0);
    CHECK(p.lambda_min > 0.0);
    CHECK_FALSE(p.has_exact());
}

TEST_CASE("2d multi-frequency instance values") {
    ProblemDefinition p = example_2d_multifreq();
    CHECK(p.coefficient(std::vector<double>{0.0, 0.0}) ==
          doctest::Approx(std::pow(1.5, 5)).epsilon(1e-14));
    CHECK(p.forcing(std::vector<double>{0.2, 0.9}) == 1.0);
    CHECK(p.lambda_min > 0.0);
}

TEST_CASE("3d instance values and coefficient range") {
    ProblemDefinition p = example_3d(0.1);
    CHECK(p.coefficient(std::vector<double>{0.0, 0.0, 0.0}) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(p.forcing(std::vector<double>{0.5, 0.5, 0.5}) == 20.0);
    CHECK(p.boundary(std::vector<double>{0.0, 0.2, 0.3}) == 0.0);
    CHECK(p.lambda_min >= 1.0);
    CHECK(p.lambda_max <= 3.0);
}

TEST_CASE("8d instance values") {
    ProblemDefinition p = example_8d();
    std::vector<double> mid(8, 0.5);
    CHECK((*p.exact_u)(mid) == doctest::Approx(1.0).epsilon(1e-14));
    std::vector<double> zero(8, 0.0);
    CHECK(p.coefficient(zero) == doctest::Approx(2.0).epsilon(1e-15));
    // g vanishes on every face
    Rng rng(51);
    Eigen::MatrixXd bd = sample_boundary(100, p.domain, rng);
    for (int i = 0; i < bd.cols(); ++i) {
        std::vector<double> x(bd.col(i).data(), bd.col(i).data() + 8);
        CHECK(std::abs((*p.exact_u)(x)) <= 1e-12);
        CHECK(p.boundary(x) == 0.0);
    }
}

TEST_CASE("differentiate_forcing on hand-checkable cases") {
    // A = 1, u = x^2 in 1d: f = -2
    ScalarField one = ScalarField::from([]<class T>(std::span<const T> x) -> T { return x[0] * 0.0 + 1.0; });
    ScalarField usq = ScalarField::from([]<class T>(std::span<const T> x) -> T { return square(x[0]); });
    ScalarField f = differentiate_forcing(one, usq, 1);
    CHECK(f(std::vector<double>{0.37}) == doctest::Approx(-2.0).epsilon(1e-14));

    // A = 1, u = prod sin(pi x_j) in 8d: f = 8 pi^2 u (Laplacian eigenfunction)
    ScalarField one8 = ScalarField::from([]<class T>(std::span<const T> x) -> T { return x[0] * 0.0 + 1.0; });
    ScalarField uprod = ScalarField::from([]<class T>(std::span<const T> x) -> T {
        T acc = sin(pi * x[0]);
        for (int j = 1; j < 8; ++j) acc = acc * sin(pi * x[j]);
        return acc;
    });
    ScalarField f8 = differentiate_forcing(one8, uprod, 8);
    Rng rng(53);
    for (int i = 0; i < 10; ++i) {
        std::vector<double> x(8);
        for (double& v : x) v = rng.uniform_open(0.05, 0.95);
        const double want = 8.0 * pi * pi * uprod(x);
        CHECK(std::abs(f8(x) - want) <= 1e-10 * std::max(1.0, std::abs(want)));
    }

    // cross-check on the catalog entry whose forcing is the constant 1
    ProblemDefinition p = example_1d_two_scale(0.1);
    ScalarField derived = differentiate_forcing(p.coefficient, *p.exact_u, 1);
    for (int i = 0; i < 20; ++i) {
        std::vector<double> x = {rng.uniform_open(0, 1)};
        CHECK(std::abs(derived(x) - 1.0) <= 1e-8);
    }
}

TEST_CASE("catalog residual consistency: -div(A grad u) = f at random interior points") {
    const std::vector<ProblemDefinition> probs = {example_1d_two_scale(0.1),
                                                  example_1d_three_scale(0.1, 0.01), example_8d()};
    Rng rng(59);
    for (const auto& p : probs) {
        for (int i = 0; i < 100; ++i) {
            std::vector<double> x(static_cast<std::size_t>(p.dim));
            for (int k = 0; k < p.dim; ++k) x[static_cast<std::size_t>(k)] = rng.uniform_open(0.01, 0.99);
            double acc = 0.0;
            for (int k = 0; k < p.dim; ++k) {
                double a, da, d2a, u, du, d2u;
                p.coefficient.partial2(x, k, a, da, d2a);
                p.exact_u->partial2(x, k, u, du, d2u);
                acc += da * du + a * d2u;
            }
            const double scale = std::max(1.0, std::abs(p.forcing(x)));
            CHECK(std::abs(-acc - p.forcing(x)) <= 1e-8 * scale);
        }
    }
}

TEST_CASE("exact solutions satisfy the boundary data") {
    const std::vector<ProblemDefinition> probs = {example_1d_two_scale(0.01),
                                                  example_1d_three_scale(0.1, 0.01), example_8d()};
    Rng rng(61);
    for (const auto& p : probs) {
        Eigen::MatrixXd bd = sample_boundary(100, p.domain, rng);
        for (int i = 0; i < bd.cols(); ++i) {
            std::vector<double> x(bd.col(i).data(), bd.col(i).data() + p.dim);
            CHECK(std::abs((*p.exact_u)(x) - p.boundary(x)) <= 1e-12);
        }
    }
}

TEST_CASE("problem names resolve and bad ones fail loudly") {
    CHECK(problem_by_name("ex1_eps0.01").name == "ex1_eps0.01");
    CHECK(problem_by_name("ex2").dim == 1);
    CHECK(problem_by_name("ex3_eps0.1").dim == 2);
    CHECK(problem_by_name("ex4").dim == 2);
    CHECK(problem_by_name("ex5_eps0.5").dim == 3);
    CHECK(problem_by_name("ex6").dim == 8);
    CHECK_THROWS_AS((void)problem_by_name("ex7"), ConfigError);
    CHECK_THROWS_AS((void)problem_by_name("ex1_epsabc"), ConfigError);
}

TEST_CASE("ellipticity probe records positive bounds for every instance") {
    for (const char* name : {"ex1_eps0.1", "ex2", "ex3_eps0.05", "ex4", "ex5_eps0.1", "ex6"}) {
        ProblemDefinition p = problem_by_name(name);
        CHECK(p.lambda_min > 0.0);
        CHECK(p.lambda_max >= p.lambda_min);
    }
}
