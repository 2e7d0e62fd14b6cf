#include "fmpinn/network.hpp"

#include <cmath>

namespace fmpinn {

std::string to_string(FirstActivation a) {
    switch (a) {
        case FirstActivation::fourier: return "fourier";
        case FirstActivation::sincos: return "sincos";
        default: return "tanh";
    }
}
std::string to_string(HiddenActivation a) {
    switch (a) {
        case HiddenActivation::sincos: return "sincos";
        case HiddenActivation::tanh: return "tanh";
        default: return "requ";
    }
}
std::string to_string(Aggregation a) {
    return a == Aggregation::inverse_scale_mean ? "inverse_scale_mean" : "linear_head";
}

FirstActivation first_activation_from_string(const std::string& s) {
    if (s == "fourier") return FirstActivation::fourier;
    if (s == "sincos") return FirstActivation::sincos;
    if (s == "tanh") return FirstActivation::tanh;
    throw ConfigError("unknown first_activation: " + s);
}
HiddenActivation hidden_activation_from_string(const std::string& s) {
    if (s == "sincos") return HiddenActivation::sincos;
    if (s == "tanh") return HiddenActivation::tanh;
    if (s == "requ") return HiddenActivation::requ;
    throw ConfigError("unknown hidden_activation: " + s);
}
Aggregation aggregation_from_string(const std::string& s) {
    if (s == "inverse_scale_mean") return Aggregation::inverse_scale_mean;
    if (s == "linear_head") return Aggregation::linear_head;
    throw ConfigError("unknown aggregation: " + s);
}

std::vector<double> NetworkConfig::default_scales() {
    // 25 factors: 1..5 plus every multiple of 5 up to 100.
    std::vector<double> s = {1, 2, 3, 4, 5};
    for (int k = 1; k <= 20; ++k) s.push_back(5.0 * k);
    return s;
}

std::vector<int> NetworkConfig::layer_widths() const {
    std::vector<int> w;
    w.reserve(hidden.size() + 1);
    for (std::size_t l = 0; l < hidden.size(); ++l) {
        int width = hidden[l];
        if (l == 0 && first_activation == FirstActivation::fourier) width *= 2;
        w.push_back(width);
    }
    w.push_back(dim_out);
    return w;
}

std::vector<bool> NetworkConfig::skip_mask() const {
    std::vector<int> w = layer_widths();
    std::vector<bool> skip(hidden.size(), false);
    if (!resnet_skips) return skip;
    for (std::size_t l = 1; l < hidden.size(); ++l)
        skip[l] = (w[l] == w[l - 1]);
    return skip;
}

void NetworkConfig::validate() const {
    if (dim_in < 1) throw ConfigError("network: dim_in must be positive");
    if (dim_out < 1) throw ConfigError("network: dim_out must be positive");
    if (scales.empty()) throw ConfigError("network: at least one subnetwork scale required");
    for (double a : scales)
        if (!(a >= 1.0)) throw ConfigError("network: every scale factor must be >= 1");
    if (hidden.empty()) throw ConfigError("network: hidden layer list must be nonempty");
    for (int h : hidden)
        if (h < 1) throw ConfigError("network: hidden widths must be positive");
    if (!(soften > 0.0 && soften <= 1.0)) throw ConfigError("network: soften must lie in (0,1]");
}

ParamLayout ParamLayout::build(const NetworkConfig& cfg) {
    cfg.validate();
    ParamLayout lay;
    const std::vector<int> w = cfg.layer_widths();
    std::int64_t off = 0;
    lay.subnet.resize(static_cast<std::size_t>(cfg.num_subnets()));
    for (auto& layers : lay.subnet) {
        int in = cfg.dim_in;
        for (std::size_t l = 0; l < cfg.hidden.size() + 1; ++l) {
            LayerSpan s;
            s.rows = (l < cfg.hidden.size()) ? cfg.hidden[l] : cfg.dim_out;
            s.cols = in;
            s.w_off = off;
            off += static_cast<std::int64_t>(s.rows) * s.cols;
            s.b_off = off;
            off += s.rows;
            layers.push_back(s);
            in = w[l];
        }
    }
    if (cfg.aggregation == Aggregation::linear_head) {
        lay.has_head = true;
        lay.head.rows = cfg.dim_out;
        lay.head.cols = cfg.num_subnets() * cfg.dim_out;
        lay.head.w_off = off;
        off += static_cast<std::int64_t>(lay.head.rows) * lay.head.cols;
        lay.head.b_off = off;
        off += lay.head.rows;
    }
    lay.total = off;
    return lay;
}

std::int64_t NetworkConfig::param_count() const {
    validate();
    const std::vector<int> w = layer_widths();
    std::int64_t per_subnet = 0;
    int in = dim_in;
    for (std::size_t l = 0; l < hidden.size() + 1; ++l) {
        const int rows = (l < hidden.size()) ? hidden[l] : dim_out;
        per_subnet += static_cast<std::int64_t>(rows) * (in + 1);
        in = w[l];
    }
    std::int64_t total = per_subnet * num_subnets();
    if (aggregation == Aggregation::linear_head)
        total += static_cast<std::int64_t>(dim_out) * (num_subnets() * dim_out + 1);
    return total;
}

Parameters init_parameters(const NetworkConfig& cfg, std::uint64_t seed) {
    Parameters p;
    p.config = cfg;
    p.layout = ParamLayout::build(cfg);
    p.values.assign(static_cast<std::size_t>(p.layout.total), 0.0);
    Rng rng(seed);

    auto fill_glorot = [&](const ParamLayout::LayerSpan& L) {
        const double bound = std::sqrt(6.0 / (L.cols + L.rows));
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(L.rows) * L.cols; ++i)
            p.values[static_cast<std::size_t>(L.w_off + i)] = -bound + 2.0 * bound * rng.next_double();
        // biases stay zero
    };
    for (const auto& layers : p.layout.subnet)
        for (const auto& L : layers) fill_glorot(L);
    if (p.layout.has_head) fill_glorot(p.layout.head);

    if (p.count() != cfg.param_count())
        throw ConfigError("network: layout and closed-form parameter counts disagree");
    return p;
}

NetworkOutput mscale_forward(const Parameters& params, std::span<const double> x) {
    std::vector<double> raw = mscale_forward_raw<double, double>(
        params.config, params.layout, std::span<const double>(params.values), x);
    NetworkOutput out;
    out.u = raw[0];
    out.flux.assign(raw.begin() + 1, raw.end());
    return out;
}

DirectionalDerivatives forward_directional(const Parameters& params, std::span<const double> x,
                                           int dir, int order) {
    if (static_cast<int>(x.size()) != params.config.dim_in)
        throw ConfigError("forward_directional: point dimension mismatch");
    if (dir < 0 || dir >= params.config.dim_in)
        throw ConfigError("forward_directional: direction out of range");
    if (static_cast<std::int64_t>(params.values.size()) != params.layout.total)
        throw ConfigError("forward_directional: parameter vector does not match layout");

    DirectionalDerivatives r;
    std::span<const double> flat(params.values);
    if (order == 1) {
        std::vector<D1> in(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) in[k] = D1(x[k]);
        in[static_cast<std::size_t>(dir)].d = 1.0;
        std::vector<D1> out = mscale_forward_raw<D1, double>(params.config, params.layout, flat, in);
        for (const D1& o : out) {
            r.value.push_back(o.v);
            r.d1.push_back(o.d);
        }
    } else if (order == 2) {
        std::vector<D2> in(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) in[k] = D2(x[k]);
        in[static_cast<std::size_t>(dir)].d1 = 1.0;
        std::vector<D2> out = mscale_forward_raw<D2, double>(params.config, params.layout, flat, in);
        for (const D2& o : out) {
            r.value.push_back(o.v);
            r.d1.push_back(o.d1);
            r.d2.push_back(o.d2);
        }
    } else {
        throw ConfigError("forward_directional: order must be 1 or 2");
    }
    return r;
}

}  // namespace fmpinn
