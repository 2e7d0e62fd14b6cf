#include "fmpinn/tape.hpp"

#include <string>

namespace fmpinn {

std::vector<double> Tape::adjoints(TVar out) const {
    if (out.tape != this || out.idx < 0 || static_cast<std::size_t>(out.idx) >= vals_.size())
        throw ConfigError("tape: output handle does not belong to this tape");
    if (!std::isfinite(vals_[static_cast<std::size_t>(out.idx)]))
        throw NumericError("tape: non-finite value at gradient root, no gradient produced");

    std::vector<double> adj(vals_.size(), 0.0);
    adj[static_cast<std::size_t>(out.idx)] = 1.0;
    for (std::int32_t i = out.idx; i >= 0; --i) {
        const double a = adj[static_cast<std::size_t>(i)];
        if (a == 0.0) continue;
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        if (n.a >= 0) adj[static_cast<std::size_t>(n.a)] += n.da * a;
        if (n.b >= 0) adj[static_cast<std::size_t>(n.b)] += n.db * a;
    }
    return adj;
}

std::vector<double> Tape::gradient(TVar out, std::span<const TVar> wrt) const {
    std::vector<double> adj = adjoints(out);
    std::vector<double> g(wrt.size());
    for (std::size_t i = 0; i < wrt.size(); ++i)
        g[i] = adj[static_cast<std::size_t>(wrt[i].idx)];
    return g;
}

std::vector<std::string> primitive_set() {
    return {"add", "sub", "neg", "mul", "div", "sin", "cos",
            "exp", "sqrt", "tanh", "log", "square", "powi"};
}

}  // namespace fmpinn
