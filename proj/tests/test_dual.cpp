#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "fmpinn/dual.hpp"
#include "fmpinn/rng.hpp"

using namespace fmpinn;

namespace {

// Independent oracle: central finite differences at h = 1e-6.
double central_fd(const std::function<double(double)>& f, double x, double h = 1e-6) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}
double central_fd2(const std::function<double(double)>& f, double x, double h = 1e-5) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

}  // namespace

TEST_CASE("linear map: y = 2x + 1 at x = 3") {
    D2 x = D2::variable(3.0);
    D2 y = 2.0 * x + 1.0;
    CHECK(y.v == 7.0);
    CHECK(y.d1 == 2.0);
    CHECK(y.d2 == 0.0);
}

TEST_CASE("sin at 0") {
    D2 y = sin(D2::variable(0.0));
    CHECK(y.v == 0.0);
    CHECK(y.d1 == 1.0);
    CHECK(y.d2 == 0.0);
}

TEST_CASE("product rule holds exactly") {
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        D1 a(rng.uniform_open(-2, 2), rng.uniform_open(-2, 2));
        D1 b(rng.uniform_open(-2, 2), rng.uniform_open(-2, 2));
        D1 p = a * b;
        CHECK(p.d == a.v * b.d + a.d * b.v);
    }
}

TEST_CASE("every primitive matches finite differences") {
    struct Prim {
        const char* name;
        std::function<D1(D1)> dual;
        std::function<double(double)> plain;
        double lo, hi;
    };
    const std::vector<Prim> prims = {
        {"sin", [](D1 x) { return sin(x); }, [](double x) { return std::sin(x); }, -3, 3},
        {"cos", [](D1 x) { return cos(x); }, [](double x) { return std::cos(x); }, -3, 3},
        {"exp", [](D1 x) { return exp(x); }, [](double x) { return std::exp(x); }, -2, 2},
        {"sqrt", [](D1 x) { return sqrt(x); }, [](double x) { return std::sqrt(x); }, 0.1, 4},
        {"tanh", [](D1 x) { return tanh(x); }, [](double x) { return std::tanh(x); }, -3, 3},
        {"log", [](D1 x) { return log(x); }, [](double x) { return std::log(x); }, 0.1, 4},
        {"square", [](D1 x) { return square(x); }, [](double x) { return x * x; }, -3, 3},
        {"recip", [](D1 x) { return 1.0 / x; }, [](double x) { return 1.0 / x; }, 0.3, 4},
        {"powi3", [](D1 x) { return powi(x, 3); }, [](double x) { return x * x * x; }, -2, 2},
        {"powi-2", [](D1 x) { return powi(x, -2); }, [](double x) { return 1.0 / (x * x); }, 0.4, 3},
    };
    Rng rng(7);
    for (const auto& p : prims) {
        for (int i = 0; i < 40; ++i) {
            const double x = rng.uniform_open(p.lo, p.hi);
            const double ad = p.dual(D1::variable(x)).d;
            const double fd = central_fd(p.plain, x);
            CHECK_MESSAGE(std::abs(ad - fd) <= 1e-6 * std::max(1.0, std::abs(ad)),
                          p.name << " at " << x << ": ad " << ad << " fd " << fd);
        }
    }
}

TEST_CASE("second derivatives match finite differences of the plain function") {
    auto f = [](auto x) {
        return sin(3.0 * x) * exp(0.3 * x) + 1.0 / (2.0 + cos(x)) + powi(x, 3) * 0.1;
    };
    Rng rng(11);
    for (int i = 0; i < 30; ++i) {
        const double x = rng.uniform_open(-1.5, 1.5);
        D2 y = f(D2::variable(x));
        const double fd2 = central_fd2([&](double v) { return f(v); }, x);
        CHECK(std::abs(y.d2 - fd2) <= 2e-5 * std::max(1.0, std::abs(y.d2)));
    }
}

TEST_CASE("Dual2 first component is bit-identical to Dual1") {
    auto expr = [](auto x) {
        auto a = sin(2.5 * x) + cos(x * 0.7);
        auto b = exp(0.2 * x) / (1.5 + square(x));
        auto c = tanh(a * b) - sqrt(2.0 + a * a);
        return c * b + a / (3.0 + b) + powi(c, 2);
    };
    Rng rng(13);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.uniform_open(-2, 2);
        D1 r1 = expr(D1::variable(x));
        D2 r2 = expr(D2::variable(x));
        CHECK(r1.v == r2.v);
        CHECK(r1.d == r2.d1);  // exact, same op order
    }
}

TEST_CASE("Dual2 degenerates to Dual1 semantics on linear expressions") {
    Rng rng(17);
    for (int i = 0; i < 50; ++i) {
        const double a = rng.uniform_open(-3, 3), b = rng.uniform_open(-3, 3);
        D2 y = a * D2::variable(rng.uniform_open(-1, 1)) + b;
        CHECK(y.d2 == 0.0);
    }
}

TEST_CASE("lifting a constant has zero derivative") {
    D1 c(4.2);
    CHECK(c.v == 4.2);
    CHECK(c.d == 0.0);
    D1 x = D1::variable(1.0);
    CHECK((x + 0.0).d == 1.0);
}

TEST_CASE("hard numeric errors instead of NaN propagation") {
    CHECK_THROWS_AS((void)(D1::variable(1.0) / D1(0.0)), NumericError);
    CHECK_THROWS_AS((void)log(D1::variable(-1.0)), NumericError);
    CHECK_THROWS_AS((void)sqrt(D1::variable(-0.5)), NumericError);
    CHECK_THROWS_AS((void)(D2::variable(1.0) / D2(0.0)), NumericError);
}

TEST_CASE("nested duals: Dual2 via Dual1<Dual1> cross-check") {
    auto f = [](auto x) { return sin(x) * exp(0.5 * x); };
    Rng rng(19);
    for (int i = 0; i < 20; ++i) {
        const double x = rng.uniform_open(-1, 1);
        D2 direct = f(D2::variable(x));
        Dual1<D1> nested = f(Dual1<D1>(D1(x, 1.0), D1(1.0, 0.0)));
        CHECK(direct.v == doctest::Approx(nested.v.v).epsilon(1e-15));
        CHECK(direct.d1 == doctest::Approx(nested.v.d).epsilon(1e-15));
        CHECK(direct.d2 == doctest::Approx(nested.d.d).epsilon(1e-14));
    }
}
