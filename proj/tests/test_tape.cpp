#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fmpinn/problems.hpp"
#include "fmpinn/rng.hpp"
#include "fmpinn/tape.hpp"

using namespace fmpinn;

TEST_CASE("gradient of theta^2 at theta = 3 is 6") {
    Tape tape;
    TVar th = tape.leaf(3.0);
    TVar loss = th * th;
    std::vector<TVar> wrt = {th};
    CHECK(tape.gradient(loss, wrt)[0] == 6.0);
}

TEST_CASE("least squares: d/dtheta (theta*x - y)^2") {
    Tape tape;
    TVar th = tape.leaf(1.0);
    TVar r = th * 2.0 - 1.0;
    TVar loss = r * r;
    std::vector<TVar> wrt = {th};
    CHECK(tape.gradient(loss, wrt)[0] == 4.0);
}

TEST_CASE("forward/reverse consistency on random recorded scalars") {
    Rng rng(29);
    auto f = []<class T>(std::span<const T> p) -> T {
        T y = p[0] * p[1] + sin(p[2]) * tanh(p[3]);
        T z = exp(0.2 * p[4]) / (1.0 + square(p[0]));
        return y * y + z + sqrt(1.0 + square(p[1])) - cos(p[3] * p[4]);
    };
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> vals(5);
        for (double& v : vals) v = rng.uniform_open(-1.5, 1.5);
        Tape tape;
        std::vector<TVar> leaves;
        for (double v : vals) leaves.push_back(tape.leaf(v));
        std::vector<double> grad = tape.gradient(f(std::span<const TVar>(leaves)), leaves);
        // oracle: sum of forward-mode directional derivatives per leaf
        for (std::size_t i = 0; i < vals.size(); ++i) {
            std::vector<D1> dv(vals.begin(), vals.end());
            dv[i].d = 1.0;
            const double fwd = f(std::span<const D1>(dv)).d;
            CHECK(std::abs(grad[i] - fwd) <= 1e-10 * std::max(1.0, std::abs(fwd)));
        }
    }
}

TEST_CASE("nodes are topologically ordered and visited once") {
    Tape tape;
    TVar a = tape.leaf(2.0);
    TVar b = tape.leaf(3.0);
    TVar c = a * b + sin(a);
    CHECK(tape.size() == 5);  // two leaves, mul, sin, add
    std::vector<TVar> wrt = {a, b};
    std::vector<double> g = tape.gradient(c, wrt);
    CHECK(g[0] == doctest::Approx(3.0 + std::cos(2.0)));
    CHECK(g[1] == doctest::Approx(2.0));
}

TEST_CASE("non-finite loss refuses to produce a gradient") {
    Tape tape;
    TVar x = tape.leaf(1e308);
    TVar y = x * 1e308;  // overflows to inf
    std::vector<TVar> wrt = {x};
    CHECK_THROWS_AS((void)tape.gradient(y, wrt), NumericError);
}

TEST_CASE("division by zero and log domain are hard errors on the tape") {
    Tape tape;
    TVar x = tape.leaf(0.0);
    CHECK_THROWS_AS((void)(1.0 / x), NumericError);
    CHECK_THROWS_AS((void)log(x), NumericError);
}

TEST_CASE("primitive set covers the required operations") {
    const auto prims = primitive_set();
    auto has = [&](const char* n) { return std::find(prims.begin(), prims.end(), n) != prims.end(); };
    CHECK(has("sin"));
    CHECK(has("cos"));
    CHECK(has("tanh"));
    CHECK(has("add"));
    CHECK(has("mul"));
    CHECK(has("div"));
    CHECK(has("exp"));
    CHECK(has("sqrt"));
    CHECK(has("square"));
    CHECK(has("powi"));
}

TEST_CASE("every catalog coefficient and exact solution evaluates through the primitives") {
    // the closure audit: dual and value paths agree, which only holds if the
    // field is composed from the supported primitive set
    const std::vector<ProblemDefinition> probs = {
        example_1d_two_scale(0.1), example_1d_three_scale(0.5, 0.25), example_2d_two_scale(0.5),
        example_2d_multifreq(),    example_3d(0.5),                   example_8d()};
    Rng rng(31);
    for (const auto& p : probs) {
        std::vector<double> x(static_cast<std::size_t>(p.dim));
        for (int k = 0; k < p.dim; ++k)
            x[static_cast<std::size_t>(k)] =
                rng.uniform_open(p.domain.lo[static_cast<std::size_t>(k)], p.domain.hi[static_cast<std::size_t>(k)]);
        CHECK(p.coefficient.differentiable());
        CHECK(std::isfinite(p.coefficient.partial(x, 0)));
        if (p.exact_u) CHECK(std::isfinite(p.exact_u->partial(x, 0)));
    }
}
