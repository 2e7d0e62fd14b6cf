#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fmpinn/dual.hpp"
#include "fmpinn/errors.hpp"
#include "fmpinn/rng.hpp"

namespace fmpinn {

enum class FirstActivation { fourier, sincos, tanh };
enum class HiddenActivation { sincos, tanh, requ };
enum class Aggregation { inverse_scale_mean, linear_head };

std::string to_string(FirstActivation a);
std::string to_string(HiddenActivation a);
std::string to_string(Aggregation a);
FirstActivation first_activation_from_string(const std::string& s);
HiddenActivation hidden_activation_from_string(const std::string& s);
Aggregation aggregation_from_string(const std::string& s);

/// Architecture of a multi-subnetwork model: Q subnetworks, each fed the
/// input stretched by its scale factor, aggregated into a (1+d)- or
/// 1-dimensional output.
struct NetworkConfig {
    int dim_in = 1;
    int dim_out = 2;  // u plus d flux components; 1 for the plain baseline
    std::vector<double> scales = default_scales();
    std::vector<int> hidden = {30, 40, 30, 30, 30};
    FirstActivation first_activation = FirstActivation::fourier;
    HiddenActivation hidden_activation = HiddenActivation::sincos;
    double soften = 1.0;  // relaxation factor applied inside the first-layer cos/sin
    Aggregation aggregation = Aggregation::inverse_scale_mean;
    bool resnet_skips = true;
    bool fourier_trainable = true;  // frozen first layer when false

    /// The stock 25-entry scale vector (1..5 plus multiples of 5 up to 100).
    static std::vector<double> default_scales();

    int num_subnets() const { return static_cast<int>(scales.size()); }

    /// Output width of each subnet layer, first entry accounting for the
    /// cos/sin doubling of the fourier first layer, last entry dim_out.
    std::vector<int> layer_widths() const;

    /// Skip connection mask per hidden layer (index 0 = first hidden layer,
    /// never skipped; layer l skipped iff widths l-1 and l match).
    std::vector<bool> skip_mask() const;

    std::int64_t param_count() const;

    void validate() const;  // throws ConfigError
};

/// Flat-parameter addressing. Weights are stored column-major (Eigen's
/// native order), followed by the bias, per layer, subnet-major; the shared
/// linear head, when present, comes last.
struct ParamLayout {
    struct LayerSpan {
        std::int64_t w_off = 0;
        int rows = 0;   // layer output size (pre-activation)
        int cols = 0;   // layer input size
        std::int64_t b_off = 0;
    };
    std::vector<std::vector<LayerSpan>> subnet;  // [subnet][layer], output layer last
    LayerSpan head;
    bool has_head = false;
    std::int64_t total = 0;

    static ParamLayout build(const NetworkConfig& cfg);
};

/// The full trainable parameter set of a model.
struct Parameters {
    NetworkConfig config;
    ParamLayout layout;
    std::vector<double> values;

    std::int64_t count() const { return static_cast<std::int64_t>(values.size()); }
};

/// Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases.
/// Bit-identical for equal seeds.
Parameters init_parameters(const NetworkConfig& cfg, std::uint64_t seed);

struct NetworkOutput {
    double u = 0.0;
    std::vector<double> flux;
};

// ---- generic forward pass ---------------------------------------------------
//
// S is the activation scalar (double, Dual1<double>, Dual2<double>, TVar,
// Dual1<TVar>, Dual2<TVar>), P the parameter scalar (double or TVar); S must
// support multiplication by P and by double. One instantiation serves plain
// evaluation, input-derivative passes and tape recording alike.

namespace detail {

template <class S>
S hidden_act(HiddenActivation act, const S& z) {
    switch (act) {
        case HiddenActivation::sincos:
            return 0.5 * sin(z) + 0.5 * cos(z);
        case HiddenActivation::tanh:
            return tanh(z);
        case HiddenActivation::requ:
        default:
            return value_of(z) > 0.0 ? square(z) : z * 0.0;
    }
}

template <class S, class P>
void affine(std::span<const P> flat, const ParamLayout::LayerSpan& L, const std::vector<S>& in,
            std::vector<S>& out) {
    out.resize(static_cast<std::size_t>(L.rows));
    for (int r = 0; r < L.rows; ++r) {
        S acc = in[0] * flat[static_cast<std::size_t>(L.w_off) + static_cast<std::size_t>(r)];
        for (int c = 1; c < L.cols; ++c)
            acc = acc + in[static_cast<std::size_t>(c)] *
                            flat[static_cast<std::size_t>(L.w_off + static_cast<std::int64_t>(c) * L.rows + r)];
        out[static_cast<std::size_t>(r)] = acc + flat[static_cast<std::size_t>(L.b_off) + static_cast<std::size_t>(r)];
    }
}

template <class S>
void check_layer_finite(const std::vector<S>& v, int layer) {
    for (const S& x : v)
        if (!std::isfinite(value_of(x)))
            throw NumericError("network: non-finite activation", -1, layer);
}

}  // namespace detail

/// Forward pass of one subnetwork on an already-scaled input x_hat = a_i * x.
template <class S, class P>
std::vector<S> subnet_forward(const NetworkConfig& cfg, const ParamLayout& layout, int subnet,
                              std::span<const P> flat, std::span<const S> x_scaled) {
    if (static_cast<int>(x_scaled.size()) != cfg.dim_in)
        throw ConfigError("subnet_forward: input dimension mismatch");
    const auto& layers = layout.subnet[static_cast<std::size_t>(subnet)];
    const std::vector<bool> skips = cfg.skip_mask();

    std::vector<S> in(x_scaled.begin(), x_scaled.end());
    std::vector<S> pre, act;

    // first layer
    detail::affine<S, P>(flat, layers[0], in, pre);
    if (cfg.first_activation == FirstActivation::fourier) {
        const double s = cfg.soften;
        act.resize(pre.size() * 2);
        for (std::size_t j = 0; j < pre.size(); ++j) {
            act[j] = cos(pre[j] * s);
            act[pre.size() + j] = sin(pre[j] * s);
        }
    } else if (cfg.first_activation == FirstActivation::sincos) {
        act.resize(pre.size());
        for (std::size_t j = 0; j < pre.size(); ++j)
            act[j] = detail::hidden_act(HiddenActivation::sincos, pre[j]);
    } else {
        act.resize(pre.size());
        for (std::size_t j = 0; j < pre.size(); ++j) act[j] = tanh(pre[j]);
    }
    detail::check_layer_finite(act, 0);

    // remaining hidden layers
    const int n_hidden = static_cast<int>(cfg.hidden.size());
    for (int l = 1; l < n_hidden; ++l) {
        detail::affine<S, P>(flat, layers[static_cast<std::size_t>(l)], act, pre);
        std::vector<S> next(pre.size());
        for (std::size_t j = 0; j < pre.size(); ++j)
            next[j] = detail::hidden_act(cfg.hidden_activation, pre[j]);
        if (skips[static_cast<std::size_t>(l)])
            for (std::size_t j = 0; j < pre.size(); ++j) next[j] = next[j] + act[j];
        act = std::move(next);
        detail::check_layer_finite(act, l);
    }

    // linear output layer
    std::vector<S> out;
    detail::affine<S, P>(flat, layers.back(), act, out);
    detail::check_layer_finite(out, n_hidden);
    return out;
}

/// Full model forward: scale, run every subnet, aggregate.
template <class S, class P>
std::vector<S> mscale_forward_raw(const NetworkConfig& cfg, const ParamLayout& layout,
                                  std::span<const P> flat, std::span<const S> x) {
    const int q = cfg.num_subnets();
    const int m = cfg.dim_out;
    std::vector<S> agg;
    std::vector<S> concat;
    if (cfg.aggregation == Aggregation::linear_head)
        concat.reserve(static_cast<std::size_t>(q) * static_cast<std::size_t>(m));

    std::vector<S> xhat(x.size());
    for (int i = 0; i < q; ++i) {
        const double a = cfg.scales[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < x.size(); ++k) xhat[k] = x[k] * a;
        std::vector<S> fi = subnet_forward<S, P>(cfg, layout, i, flat, xhat);
        if (cfg.aggregation == Aggregation::inverse_scale_mean) {
            const double w = 1.0 / (static_cast<double>(q) * a);
            if (i == 0) {
                agg.resize(fi.size());
                for (std::size_t j = 0; j < fi.size(); ++j) agg[j] = fi[j] * w;
            } else {
                for (std::size_t j = 0; j < fi.size(); ++j) agg[j] = agg[j] + fi[j] * w;
            }
        } else {
            for (auto& v : fi) concat.push_back(std::move(v));
        }
    }
    if (cfg.aggregation == Aggregation::linear_head)
        detail::affine<S, P>(flat, layout.head, concat, agg);
    return agg;
}

/// Plain evaluation convenience wrapper.
NetworkOutput mscale_forward(const Parameters& params, std::span<const double> x);

/// Network outputs with exact directional derivatives along coordinate
/// `dir`: first order (d2 empty) or second order.
struct DirectionalDerivatives {
    std::vector<double> value;
    std::vector<double> d1;
    std::vector<double> d2;
};
DirectionalDerivatives forward_directional(const Parameters& params, std::span<const double> x,
                                           int dir, int order);

}  // namespace fmpinn
