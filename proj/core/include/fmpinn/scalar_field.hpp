#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "fmpinn/dual.hpp"
#include "fmpinn/errors.hpp"

namespace fmpinn {

/// A scalar function of a point, evaluable at plain doubles and (when built
/// from a generic closure) at first- and second-order duals. Problem
/// coefficients, forcings, boundary data and exact solutions are all carried
/// as ScalarFields.
class ScalarField {
public:
    ScalarField() = default;

    /// Build from a single generic lambda `[]<class T>(std::span<const T> x) -> T`.
    template <class F>
    static ScalarField from(F f) {
        ScalarField s;
        s.f0_ = [f](std::span<const double> x) { return f(x); };
        s.f1_ = [f](std::span<const D1> x) { return f(x); };
        s.f2_ = [f](std::span<const D2> x) { return f(x); };
        return s;
    }

    /// Build from a plain double-only closure. Derivative evaluations throw.
    static ScalarField values_only(std::function<double(std::span<const double>)> f) {
        ScalarField s;
        s.f0_ = std::move(f);
        return s;
    }

    bool valid() const { return static_cast<bool>(f0_); }
    bool differentiable() const { return static_cast<bool>(f1_); }

    double operator()(std::span<const double> x) const { return f0_(x); }

    D1 eval1(std::span<const D1> x) const {
        require_diff();
        return f1_(x);
    }
    D2 eval2(std::span<const D2> x) const {
        require_diff();
        return f2_(x);
    }

    /// First partial derivative along coordinate k (forward mode).
    double partial(std::span<const double> x, int k) const {
        require_diff();
        std::vector<D1> lifted(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) lifted[i] = D1(x[i]);
        lifted[static_cast<std::size_t>(k)].d = 1.0;
        return f1_(lifted).d;
    }

    /// Value, first and second partial along coordinate k in one pass.
    void partial2(std::span<const double> x, int k, double& v, double& d1, double& d2) const {
        require_diff();
        std::vector<D2> lifted(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) lifted[i] = D2(x[i]);
        lifted[static_cast<std::size_t>(k)].d1 = 1.0;
        D2 r = f2_(lifted);
        v = r.v;
        d1 = r.d1;
        d2 = r.d2;
    }

private:
    void require_diff() const {
        if (!f1_)
            throw ConfigError("scalar field does not support derivative evaluation");
    }

    std::function<double(std::span<const double>)> f0_;
    std::function<D1(std::span<const D1>)> f1_;
    std::function<D2(std::span<const D2>)> f2_;
};

}  // namespace fmpinn
