#include "fmpinn/sampling.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "fmpinn/errors.hpp"

namespace fmpinn {

Eigen::MatrixXd sample_interior(int n, const Box& box, Rng& rng) {
    if (n <= 0) throw ConfigError("sample_interior: count must be positive");
    const int d = box.dim();
    Eigen::MatrixXd pts(d, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k)
            pts(k, i) = rng.uniform_open(box.lo[static_cast<std::size_t>(k)],
                                         box.hi[static_cast<std::size_t>(k)]);
    return pts;
}

Eigen::MatrixXd sample_boundary(int n, const Box& box, Rng& rng) {
    if (n <= 0) throw ConfigError("sample_boundary: count must be positive");
    const int d = box.dim();
    Eigen::MatrixXd pts(d, n);
    if (d == 1) {
        for (int i = 0; i < n; ++i) pts(0, i) = (i % 2 == 0) ? box.lo[0] : box.hi[0];
        return pts;
    }
    for (int i = 0; i < n; ++i) {
        const auto face = rng.next_below(static_cast<std::uint64_t>(2 * d));
        const int axis = static_cast<int>(face / 2);
        const bool high = (face % 2 == 1);
        for (int k = 0; k < d; ++k) {
            if (k == axis)
                pts(k, i) = high ? box.hi[static_cast<std::size_t>(k)] : box.lo[static_cast<std::size_t>(k)];
            else
                pts(k, i) = rng.uniform_open(box.lo[static_cast<std::size_t>(k)],
                                             box.hi[static_cast<std::size_t>(k)]);
        }
    }
    return pts;
}

SampleBatch draw_batch(int n_interior, int n_boundary, const Box& box, Rng& rng) {
    SampleBatch b;
    b.rng_seed = rng.seed();
    b.rng_counter = rng.counter();
    b.interior = sample_interior(n_interior, box, rng);
    b.boundary = sample_boundary(n_boundary, box, rng);
    b.domain_measure = box.measure();
    return b;
}

Eigen::MatrixXd eval_grid(const Box& box, double h, const std::map<int, double>& slice) {
    if (!(h > 0.0)) throw ConfigError("eval_grid: mesh size must be positive");
    const int d = box.dim();
    std::vector<int> counts;   // nodes per free axis
    std::vector<int> free_axes;
    for (int k = 0; k < d; ++k) {
        if (slice.count(k)) continue;
        const double len = box.hi[static_cast<std::size_t>(k)] - box.lo[static_cast<std::size_t>(k)];
        const double steps = len / h;
        const double rounded = std::round(steps);
        if (std::abs(steps - rounded) > 1e-12 * std::max(1.0, steps))
            throw ConfigError("eval_grid: h does not divide the edge of coordinate " + std::to_string(k));
        counts.push_back(static_cast<int>(rounded) + 1);
        free_axes.push_back(k);
    }
    long long total = 1;
    for (int c : counts) total *= c;

    Eigen::MatrixXd pts(d, total);
    std::vector<int> idx(counts.size(), 0);
    for (long long p = 0; p < total; ++p) {
        for (int k = 0; k < d; ++k) {
            auto it = slice.find(k);
            if (it != slice.end()) pts(k, p) = it->second;
        }
        for (std::size_t a = 0; a < free_axes.size(); ++a) {
            const int k = free_axes[a];
            pts(k, p) = box.lo[static_cast<std::size_t>(k)] + idx[a] * h;
        }
        // advance multi-index, last axis fastest
        for (int a = static_cast<int>(counts.size()) - 1; a >= 0; --a) {
            if (++idx[static_cast<std::size_t>(a)] < counts[static_cast<std::size_t>(a)]) break;
            idx[static_cast<std::size_t>(a)] = 0;
        }
    }
    return pts;
}

void write_points_csv(const std::string& path, const Eigen::MatrixXd& points) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    for (int k = 0; k < points.rows(); ++k)
        out << (k ? "," : "") << "x" << (k + 1);
    out << "\n";
    char buf[32];
    for (int i = 0; i < points.cols(); ++i) {
        for (int k = 0; k < points.rows(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", points(k, i));
            out << (k ? "," : "") << buf;
        }
        out << "\n";
    }
}

}  // namespace fmpinn
