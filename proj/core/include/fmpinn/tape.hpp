#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fmpinn/errors.hpp"

namespace fmpinn {

class Tape;

/// Handle to a scalar recorded on a Tape. Arithmetic on TVars appends
/// primitive records and returns new handles.
struct TVar {
    Tape* tape = nullptr;
    std::int32_t idx = -1;
};

/// Reverse-mode tape. Each node stores at most two operand indices together
/// with the local partial derivatives evaluated at record time, so the
/// reverse sweep is a single pass of fused multiply-adds. Nodes are appended
/// in evaluation order, which keeps the list topologically sorted by
/// construction. The tape is cheap to clear and is rebuilt for every
/// recorded expression rather than retained.
class Tape {
public:
    struct Node {
        std::int32_t a;
        std::int32_t b;
        double da;
        double db;
    };

    /// Fresh leaf (input or parameter). Leaves have no operands.
    TVar leaf(double v) { return push(v, -1, 0.0, -1, 0.0); }

    TVar push(double val, std::int32_t a, double da, std::int32_t b, double db) {
        nodes_.push_back(Node{a, b, da, db});
        vals_.push_back(val);
        return TVar{this, static_cast<std::int32_t>(vals_.size() - 1)};
    }
    TVar push1(double val, std::int32_t a, double da) { return push(val, a, da, -1, 0.0); }

    double value(TVar x) const { return vals_[static_cast<std::size_t>(x.idx)]; }
    std::size_t size() const { return vals_.size(); }

    void clear() {
        nodes_.clear();
        vals_.clear();
    }

    /// Adjoint of every node with respect to `out`. Seeds the output with 1
    /// and visits each node exactly once, in reverse order.
    std::vector<double> adjoints(TVar out) const;

    /// Gradient of `out` with respect to the given leaves.
    std::vector<double> gradient(TVar out, std::span<const TVar> wrt) const;

private:
    std::vector<Node> nodes_;
    std::vector<double> vals_;
};

// ---- recorded arithmetic ----------------------------------------------------

inline TVar operator+(TVar a, TVar b) {
    Tape& t = *a.tape;
    return t.push(t.value(a) + t.value(b), a.idx, 1.0, b.idx, 1.0);
}
inline TVar operator-(TVar a, TVar b) {
    Tape& t = *a.tape;
    return t.push(t.value(a) - t.value(b), a.idx, 1.0, b.idx, -1.0);
}
inline TVar operator-(TVar a) {
    Tape& t = *a.tape;
    return t.push1(-t.value(a), a.idx, -1.0);
}
inline TVar operator*(TVar a, TVar b) {
    Tape& t = *a.tape;
    const double va = t.value(a), vb = t.value(b);
    return t.push(va * vb, a.idx, vb, b.idx, va);
}
inline TVar operator/(TVar a, TVar b) {
    Tape& t = *a.tape;
    const double va = t.value(a), vb = t.value(b);
    if (vb == 0.0) throw NumericError("tape: division by zero");
    const double q = va / vb;
    return t.push(q, a.idx, 1.0 / vb, b.idx, -q / vb);
}

inline TVar operator+(TVar a, double c) {
    Tape& t = *a.tape;
    return t.push1(t.value(a) + c, a.idx, 1.0);
}
inline TVar operator+(double c, TVar a) { return a + c; }
inline TVar operator-(TVar a, double c) {
    Tape& t = *a.tape;
    return t.push1(t.value(a) - c, a.idx, 1.0);
}
inline TVar operator-(double c, TVar a) {
    Tape& t = *a.tape;
    return t.push1(c - t.value(a), a.idx, -1.0);
}
inline TVar operator*(TVar a, double c) {
    Tape& t = *a.tape;
    return t.push1(t.value(a) * c, a.idx, c);
}
inline TVar operator*(double c, TVar a) { return a * c; }
inline TVar operator/(TVar a, double c) {
    if (c == 0.0) throw NumericError("tape: division by zero");
    Tape& t = *a.tape;
    return t.push1(t.value(a) / c, a.idx, 1.0 / c);
}
inline TVar operator/(double c, TVar a) {
    Tape& t = *a.tape;
    const double va = t.value(a);
    if (va == 0.0) throw NumericError("tape: division by zero");
    const double q = c / va;
    return t.push1(q, a.idx, -q / va);
}

inline TVar sin(TVar a) {
    Tape& t = *a.tape;
    const double va = t.value(a);
    return t.push1(std::sin(va), a.idx, std::cos(va));
}
inline TVar cos(TVar a) {
    Tape& t = *a.tape;
    const double va = t.value(a);
    return t.push1(std::cos(va), a.idx, -std::sin(va));
}
inline TVar exp(TVar a) {
    Tape& t = *a.tape;
    const double e = std::exp(t.value(a));
    return t.push1(e, a.idx, e);
}
inline TVar sqrt(TVar a) {
    Tape& t = *a.tape;
    const double va = t.value(a);
    if (va < 0.0) throw NumericError("tape: sqrt of negative value");
    const double r = std::sqrt(va);
    return t.push1(r, a.idx, 0.5 / r);
}
inline TVar tanh(TVar a) {
    Tape& t = *a.tape;
    const double v = std::tanh(t.value(a));
    return t.push1(v, a.idx, 1.0 - v * v);
}
inline TVar log(TVar a) {
    Tape& t = *a.tape;
    const double va = t.value(a);
    if (!(va > 0.0)) throw NumericError("tape: log of non-positive value");
    return t.push1(std::log(va), a.idx, 1.0 / va);
}

inline double value_of(TVar x) { return x.tape->value(x); }

/// Names of the primitive operations every scalar type in this library
/// supports. Problem coefficients, forcings and activations must compose
/// from these.
std::vector<std::string> primitive_set();

}  // namespace fmpinn
