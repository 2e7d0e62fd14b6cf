#include <doctest.h>

#include <cmath>

#include "fmpinn/network.hpp"
#include "fmpinn/rng.hpp"

using namespace fmpinn;

namespace {

NetworkConfig tiny_config() {
    NetworkConfig cfg;
    cfg.dim_in = 1;
    cfg.dim_out = 2;
    cfg.scales = {1, 2, 4};
    cfg.hidden = {5, 6, 6};
    return cfg;
}

}  // namespace

TEST_CASE("initialization is deterministic under a fixed seed") {
    NetworkConfig cfg = tiny_config();
    Parameters a = init_parameters(cfg, 42);
    Parameters b = init_parameters(cfg, 42);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
    Parameters c = init_parameters(cfg, 43);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.values.size(); ++i) any_diff |= (a.values[i] != c.values[i]);
    CHECK(any_diff);
}

TEST_CASE("a 1-in/1-out affine layer holds exactly 2 parameters") {
    NetworkConfig cfg;
    cfg.dim_in = 1;
    cfg.dim_out = 1;
    cfg.scales = {1};
    cfg.hidden = {1};
    cfg.first_activation = FirstActivation::tanh;
    ParamLayout lay = ParamLayout::build(cfg);
    const auto& L0 = lay.subnet[0][0];
    CHECK(static_cast<long long>(L0.rows) * L0.cols + L0.rows == 2);
    // plus the linear output layer, same shape
    CHECK(lay.total == 4);
    CHECK(cfg.param_count() == 4);
}

TEST_CASE("stock 1d configuration: closed-form count equals enumeration") {
    NetworkConfig cfg;
    cfg.dim_in = 1;
    cfg.dim_out = 2;
    cfg.hidden = {30, 40, 30, 30, 30};
    // scales default to the 25-entry vector
    REQUIRE(cfg.scales.size() == 25);
    // independent arithmetic: fourier layer (30x1 + 30), then widths double
    const long long per_subnet = (30 * 1 + 30) + (40 * 60 + 40) + (30 * 40 + 30) +
                                 (30 * 30 + 30) + (30 * 30 + 30) + (2 * 30 + 2);
    CHECK(per_subnet == 5652);
    CHECK(cfg.param_count() == 25 * per_subnet);
    Parameters p = init_parameters(cfg, 1);
    CHECK(p.count() == 25 * per_subnet);
}

TEST_CASE("default scale vector: 25 entries, all >= 1, documented endpoints") {
    const auto s = NetworkConfig::default_scales();
    REQUIRE(s.size() == 25);
    for (double a : s) CHECK(a >= 1.0);
    CHECK(s[0] == 1);
    CHECK(s[1] == 2);
    CHECK(s[4] == 5);
    CHECK(s.back() == 100);
    CHECK(std::count(s.begin(), s.end(), 10.0) == 1);
    CHECK(std::count(s.begin(), s.end(), 95.0) == 1);
}

TEST_CASE("fourier layer at zero pre-activation emits (1,...,1,0,...,0)") {
    NetworkConfig cfg;
    cfg.dim_in = 1;
    cfg.dim_out = 6;  // identity read-out of the six fourier features
    cfg.scales = {1};
    cfg.hidden = {3};
    Parameters p = init_parameters(cfg, 5);
    std::fill(p.values.begin(), p.values.end(), 0.0);
    const auto& Lout = p.layout.subnet[0][1];
    for (int r = 0; r < 6; ++r)
        p.values[static_cast<std::size_t>(Lout.w_off + r * Lout.rows + r)] = 1.0;  // identity
    NetworkOutput out = mscale_forward(p, std::vector<double>{0.0});
    CHECK(out.u == 1.0);
    CHECK(out.flux[0] == 1.0);
    CHECK(out.flux[1] == 1.0);
    CHECK(out.flux[2] == 0.0);
    CHECK(out.flux[3] == 0.0);
    CHECK(out.flux[4] == 0.0);
}

TEST_CASE("sincos activation value at zero pre-activation is 1/2") {
    NetworkConfig cfg;
    cfg.dim_in = 1;
    cfg.dim_out = 2;
    cfg.scales = {1};
    cfg.hidden = {2};
    cfg.first_activation = FirstActivation::sincos;
    Parameters p = init_parameters(cfg, 5);
    std::fill(p.values.begin(), p.values.end(), 0.0);
    const auto& Lout = p.layout.subnet[0][1];
    p.values[static_cast<std::size_t>(Lout.w_off + 0)] = 1.0;  // read feature 0 into u
    NetworkOutput out = mscale_forward(p, std::vector<double>{0.7});
    CHECK(out.u == 0.5);
}

TEST_CASE("skip connection with zero weights is the identity") {
    // two equal-width hidden layers; second one zeroed: its output must
    // equal its input, so the whole net equals the one-layer version
    NetworkConfig one;
    one.dim_in = 1;
    one.dim_out = 1;
    one.scales = {1};
    one.hidden = {4};
    one.first_activation = FirstActivation::tanh;  // no width doubling, so the widths match
    NetworkConfig two = one;
    two.hidden = {4, 4};
    REQUIRE(two.skip_mask() == std::vector<bool>{false, true});

    Parameters p1 = init_parameters(one, 9);
    Parameters p2 = init_parameters(two, 9);
    // copy layer 1 and the output layer of the small net; zero the middle layer
    const auto& a0 = p1.layout.subnet[0][0];
    const auto& b0 = p2.layout.subnet[0][0];
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(a0.rows) * a0.cols + a0.rows; ++i)
        p2.values[static_cast<std::size_t>(b0.w_off + i)] = p1.values[static_cast<std::size_t>(a0.w_off + i)];
    const auto& m = p2.layout.subnet[0][1];
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(m.rows) * m.cols + m.rows; ++i)
        p2.values[static_cast<std::size_t>(m.w_off + i)] = 0.0;
    const auto& ao = p1.layout.subnet[0][1];
    const auto& bo = p2.layout.subnet[0][2];
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(ao.rows) * ao.cols + ao.rows; ++i)
        p2.values[static_cast<std::size_t>(bo.w_off + i)] = p1.values[static_cast<std::size_t>(ao.w_off + i)];

    Rng rng(33);
    for (int i = 0; i < 30; ++i) {
        std::vector<double> x = {rng.uniform_open(0, 1)};
        // requ(0) = 0 and sincos(0) = 1/2; use requ so sigma(0) = 0 makes the
        // zeroed layer a pure pass-through
        // (hidden activation applies to layer 2 only; with zero weights its
        // pre-activation is 0)
        NetworkConfig cfg_requ1 = one;
        cfg_requ1.hidden_activation = HiddenActivation::requ;
        NetworkConfig cfg_requ2 = two;
        cfg_requ2.hidden_activation = HiddenActivation::requ;
        Parameters q1 = p1, q2 = p2;
        q1.config = cfg_requ1;
        q2.config = cfg_requ2;
        CHECK(mscale_forward(q1, x).u == mscale_forward(q2, x).u);
    }
}

TEST_CASE("skip mask follows equal consecutive widths") {
    NetworkConfig cfg;
    cfg.hidden = {30, 40, 30, 30, 30};
    const auto mask = cfg.skip_mask();
    // fourier doubles the first width to 60, so only layers 4 and 5 match
    CHECK(mask == std::vector<bool>{false, false, false, true, true});
    cfg.first_activation = FirstActivation::tanh;
    const auto mask2 = cfg.skip_mask();
    CHECK(mask2 == std::vector<bool>{false, false, false, true, true});
    cfg.hidden = {20, 20, 20};
    CHECK(cfg.skip_mask() == std::vector<bool>{false, true, true});
}

TEST_CASE("two constant subnets aggregate as the scaled mean") {
    NetworkConfig cfg;
    cfg.dim_in = 1;
    cfg.dim_out = 1;
    cfg.scales = {1, 2};
    cfg.hidden = {2};
    Parameters p = init_parameters(cfg, 3);
    std::fill(p.values.begin(), p.values.end(), 0.0);
    // zero weights: subnet output is its output bias
    p.values[static_cast<std::size_t>(p.layout.subnet[0][1].b_off)] = 3.0;  // c1
    p.values[static_cast<std::size_t>(p.layout.subnet[1][1].b_off)] = 5.0;  // c2
    NetworkOutput out = mscale_forward(p, std::vector<double>{0.4});
    CHECK(out.u == doctest::Approx(0.5 * (3.0 + 5.0 / 2.0)).epsilon(1e-15));
}

TEST_CASE("doubling a scale and halving the first-layer weights commutes") {
    NetworkConfig cfg = tiny_config();
    Parameters p = init_parameters(cfg, 21);
    NetworkConfig cfg2 = cfg;
    cfg2.scales[1] *= 2.0;
    Parameters p2 = p;
    p2.config = cfg2;
    const auto& L0 = p2.layout.subnet[1][0];
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(L0.rows) * L0.cols; ++i)
        p2.values[static_cast<std::size_t>(L0.w_off + i)] *= 0.5;
    // identical fourier pre-activations up to the exact *2 / *0.5 round trip,
    // but the aggregation weight of subnet 1 changes; compare the subnet
    // outputs directly
    Rng rng(35);
    for (int i = 0; i < 20; ++i) {
        const double x = rng.uniform_open(0, 1);
        std::vector<double> xh1 = {x * cfg.scales[1]};
        std::vector<double> xh2 = {x * cfg2.scales[1]};
        auto f1 = subnet_forward<double, double>(cfg, p.layout, 1, std::span<const double>(p.values), xh1);
        auto f2 = subnet_forward<double, double>(cfg2, p2.layout, 1, std::span<const double>(p2.values), xh2);
        CHECK(f1[0] == f2[0]);
        CHECK(f1[1] == f2[1]);
    }
}

TEST_CASE("dual lifting reproduces the plain forward bit-for-bit") {
    NetworkConfig cfg = tiny_config();
    Parameters p = init_parameters(cfg, 77);
    Rng rng(37);
    std::span<const double> flat(p.values);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> x = {rng.uniform_open(0, 1)};
        std::vector<double> out = mscale_forward_raw<double, double>(cfg, p.layout, flat, x);
        std::vector<D1> xd = {D1::variable(x[0])};
        std::vector<D1> outd = mscale_forward_raw<D1, double>(cfg, p.layout, flat, xd);
        std::vector<D2> xd2 = {D2::variable(x[0])};
        std::vector<D2> outd2 = mscale_forward_raw<D2, double>(cfg, p.layout, flat, xd2);
        for (std::size_t j = 0; j < out.size(); ++j) {
            CHECK(out[j] == outd[j].v);
            CHECK(outd[j].v == outd2[j].v);
            CHECK(outd[j].d == outd2[j].d1);
        }
    }
}

TEST_CASE("network output is continuous in x (finite empirical Lipschitz)") {
    NetworkConfig cfg = tiny_config();
    Parameters p = init_parameters(cfg, 91);
    Rng rng(39);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.uniform_open(0.001, 0.999);
        const double delta = 1e-7;
        NetworkOutput a = mscale_forward(p, std::vector<double>{x});
        NetworkOutput b = mscale_forward(p, std::vector<double>{x + delta});
        worst = std::max(worst, std::abs(a.u - b.u) / delta);
    }
    CHECK(std::isfinite(worst));
    CHECK(worst < 1e4);
}

TEST_CASE("forward_directional validates its inputs") {
    NetworkConfig cfg = tiny_config();
    Parameters p = init_parameters(cfg, 2);
    std::vector<double> x = {0.5};
    CHECK_THROWS_AS((void)forward_directional(p, x, 1, 1), ConfigError);
    CHECK_THROWS_AS((void)forward_directional(p, x, 0, 3), ConfigError);
    Parameters bad = p;
    bad.values.pop_back();
    CHECK_THROWS_AS((void)forward_directional(bad, x, 0, 1), ConfigError);
    std::vector<double> x2 = {0.5, 0.1};
    CHECK_THROWS_AS((void)forward_directional(p, x2, 0, 1), ConfigError);
}

TEST_CASE("directional derivatives match finite differences on a random net") {
    NetworkConfig cfg;
    cfg.dim_in = 2;
    cfg.dim_out = 3;
    cfg.scales = {1, 3};
    cfg.hidden = {6, 6, 6};
    Parameters p = init_parameters(cfg, 101);
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x = {rng.uniform_open(0, 1), rng.uniform_open(0, 1)};
        for (int dir = 0; dir < 2; ++dir) {
            DirectionalDerivatives dd = forward_directional(p, x, dir, 2);
            const double h = 1e-6;
            std::vector<double> xp = x, xm = x;
            xp[static_cast<std::size_t>(dir)] += h;
            xm[static_cast<std::size_t>(dir)] -= h;
            NetworkOutput up = mscale_forward(p, xp);
            NetworkOutput um = mscale_forward(p, xm);
            NetworkOutput u0 = mscale_forward(p, x);
            const double fd1 = (up.u - um.u) / (2 * h);
            const double fd2 = (up.u - 2 * u0.u + um.u) / (h * h);
            CHECK(std::abs(dd.d1[0] - fd1) <= 1e-6 * std::max(1.0, std::abs(fd1)));
            CHECK(std::abs(dd.d2[0] - fd2) <= 5e-3 * std::max(1.0, std::abs(dd.d2[0])));
        }
    }
}

TEST_CASE("fourier feature outputs stay within [-1, 1]") {
    NetworkConfig cfg;
    cfg.dim_in = 1;
    cfg.dim_out = 12;
    cfg.scales = {1, 50, 100};
    cfg.hidden = {6};
    Parameters p = init_parameters(cfg, 55);
    // identity read-out per subnet would mix; instead check through the raw
    // subnet forward, whose outputs after layer 1 are linear images of the
    // fourier features; bound the features themselves analytically per unit:
    Rng rng(57);
    for (int s = 0; s < 3; ++s) {
        const auto& L0 = p.layout.subnet[static_cast<std::size_t>(s)][0];
        for (int i = 0; i < 300; ++i) {
            const double x = rng.uniform_open(0, 1) * cfg.scales[static_cast<std::size_t>(s)];
            for (int r = 0; r < L0.rows; ++r) {
                const double z = p.values[static_cast<std::size_t>(L0.w_off + r)] * x +
                                 p.values[static_cast<std::size_t>(L0.b_off + r)];
                CHECK(std::cos(z) <= 1.0);
                CHECK(std::cos(z) >= -1.0);
                CHECK(std::sin(z) <= 1.0);
                CHECK(std::sin(z) >= -1.0);
            }
        }
    }
}
