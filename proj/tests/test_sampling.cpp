#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fmpinn/sampling.hpp"

using namespace fmpinn;

TEST_CASE("interior sampling: mean, openness, determinism") {
    Box box = Box::cube(1, 0.0, 1.0);
    Rng rng(123);
    Eigen::MatrixXd pts = sample_interior(1000, box, rng);
    CHECK(pts.mean() == doctest::Approx(0.5).epsilon(0.1));  // within 0.5 +- 0.05
    CHECK(std::abs(pts.mean() - 0.5) <= 0.05);
    for (int i = 0; i < pts.cols(); ++i) {
        CHECK(pts(0, i) > 0.0);
        CHECK(pts(0, i) < 1.0);
    }
    Rng rng2(123);
    Eigen::MatrixXd pts2 = sample_interior(1000, box, rng2);
    CHECK((pts - pts2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("boundary sampling in 1d alternates the endpoints") {
    Box box = Box::cube(1, 0.0, 1.0);
    Rng rng(5);
    Eigen::MatrixXd pts = sample_boundary(4, box, rng);
    CHECK(pts(0, 0) == 0.0);
    CHECK(pts(0, 1) == 1.0);
    CHECK(pts(0, 2) == 0.0);
    CHECK(pts(0, 3) == 1.0);
}

TEST_CASE("boundary sampling in 2d: faces balanced, exactly one pinned coordinate") {
    Box box = Box::cube(2, -1.0, 1.0);
    Rng rng(9);
    Eigen::MatrixXd pts = sample_boundary(8000, box, rng);
    int face_count[4] = {0, 0, 0, 0};
    for (int i = 0; i < pts.cols(); ++i) {
        int pinned = 0, face = -1;
        for (int k = 0; k < 2; ++k) {
            if (pts(k, i) == -1.0) {
                ++pinned;
                face = 2 * k;
            } else if (pts(k, i) == 1.0) {
                ++pinned;
                face = 2 * k + 1;
            }
        }
        REQUIRE(pinned == 1);
        ++face_count[face];
    }
    for (int f = 0; f < 4; ++f) CHECK(std::abs(face_count[f] - 2000) <= 150);
}

TEST_CASE("evaluation grids") {
    CHECK(eval_grid(Box::cube(1, 0.0, 1.0), 1.0 / 999.0).cols() == 1000);
    Eigen::MatrixXd g2 = eval_grid(Box::cube(2, -1.0, 1.0), 1.0 / 128.0);
    CHECK(g2.cols() == 257LL * 257LL);
    // slice: a 3d grid pinned at x3 = 0.3125 collapses to a 2d grid
    Eigen::MatrixXd g3 = eval_grid(Box::cube(3, 0.0, 1.0), 1.0 / 16.0, {{2, 0.3125}});
    CHECK(g3.cols() == 17LL * 17LL);
    for (int i = 0; i < g3.cols(); ++i) CHECK(g3(2, i) == 0.3125);
    CHECK_THROWS_AS((void)eval_grid(Box::cube(1, 0.0, 1.0), 0.3), ConfigError);
    CHECK_THROWS_AS((void)eval_grid(Box::cube(1, 0.0, 1.0), -0.1), ConfigError);
}

TEST_CASE("grid ordering is row-major by coordinate (first axis slowest)") {
    Eigen::MatrixXd g = eval_grid(Box::cube(2, 0.0, 1.0), 0.5);
    REQUIRE(g.cols() == 9);
    CHECK(g(0, 0) == 0.0);
    CHECK(g(1, 0) == 0.0);
    CHECK(g(1, 1) == 0.5);  // second axis moves fastest
    CHECK(g(0, 3) == 0.5);
}

TEST_CASE("Kolmogorov-Smirnov statistic of interior marginals") {
    Box box = Box::cube(2, 0.0, 1.0);
    Rng rng(77);
    Eigen::MatrixXd pts = sample_interior(10000, box, rng);
    for (int k = 0; k < 2; ++k) {
        std::vector<double> v(static_cast<std::size_t>(pts.cols()));
        for (int i = 0; i < pts.cols(); ++i) v[static_cast<std::size_t>(i)] = pts(k, i);
        std::sort(v.begin(), v.end());
        double ks = 0.0;
        const double n = static_cast<double>(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            ks = std::max(ks, std::abs((i + 1) / n - v[i]));
            ks = std::max(ks, std::abs(v[i] - i / n));
        }
        CHECK(ks <= 0.02);
    }
}

TEST_CASE("per-epoch resampling produces distinct batches") {
    Box box = Box::cube(1, 0.0, 1.0);
    Rng rng(81);
    SampleBatch b1 = draw_batch(100, 10, box, rng);
    SampleBatch b2 = draw_batch(100, 10, box, rng);
    CHECK((b1.interior - b2.interior).cwiseAbs().maxCoeff() > 0.0);
    CHECK(b1.domain_measure == 1.0);
    CHECK(b1.rng_counter == 0);
    CHECK(b2.rng_counter > 0);  // snapshot advanced between draws
}

TEST_CASE("degenerate boxes are rejected") {
    CHECK_THROWS_AS((void)Box(std::vector<double>{1.0}, std::vector<double>{1.0}), ConfigError);
    CHECK_THROWS_AS((void)Box(std::vector<double>{2.0}, std::vector<double>{1.0}), ConfigError);
    Box ok = Box::cube(1, 0.0, 1.0);
    Rng rng(1);
    CHECK_THROWS_AS((void)sample_interior(0, ok, rng), ConfigError);
    CHECK_THROWS_AS((void)sample_boundary(-1, ok, rng), ConfigError);
}
