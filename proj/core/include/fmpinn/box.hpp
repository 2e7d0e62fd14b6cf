#pragma once

#include <span>
#include <vector>

#include "fmpinn/errors.hpp"

namespace fmpinn {

/// Axis-aligned box domain [lo_k, hi_k]^d.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    Box() = default;
    Box(std::vector<double> lo_, std::vector<double> hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
        if (lo.size() != hi.size() || lo.empty())
            throw ConfigError("box: lo/hi must be nonempty and of equal dimension");
        for (std::size_t k = 0; k < lo.size(); ++k)
            if (!(lo[k] < hi[k]))
                throw ConfigError("box: degenerate extent in coordinate " + std::to_string(k));
    }

    static Box cube(int dim, double lo, double hi) {
        return Box(std::vector<double>(dim, lo), std::vector<double>(dim, hi));
    }

    int dim() const { return static_cast<int>(lo.size()); }

    double measure() const {
        double m = 1.0;
        for (std::size_t k = 0; k < lo.size(); ++k) m *= hi[k] - lo[k];
        return m;
    }

    bool contains(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != dim()) return false;
        for (std::size_t k = 0; k < lo.size(); ++k)
            if (x[k] < lo[k] || x[k] > hi[k]) return false;
        return true;
    }

    bool strictly_inside(std::span<const double> x) const {
        for (std::size_t k = 0; k < lo.size(); ++k)
            if (!(x[k] > lo[k] && x[k] < hi[k])) return false;
        return true;
    }
};

}  // namespace fmpinn
