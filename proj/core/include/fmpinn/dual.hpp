#pragma once

#include <cmath>
#include <concepts>

#include "fmpinn/errors.hpp"

namespace fmpinn {

using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;
using std::tanh;

inline double value_of(double x) { return x; }

/// First-order dual number: value plus one directional derivative.
///
/// The scalar type T nests: Dual1<double> for plain forward mode,
/// Dual1<TVar> when the forward sweep itself must be recorded on a tape
/// (reverse-over-forward). Constants enter through the mixed double
/// overloads below, which is what keeps the derivative of a lifted
/// constant exactly zero without materializing zero-valued scalars.
template <class T>
struct Dual1 {
    T v{};
    T d{};

    Dual1() = default;
    Dual1(T v_, T d_) : v(std::move(v_)), d(std::move(d_)) {}
    Dual1(double c)
        requires std::constructible_from<T, double>
        : v(c), d(0.0) {}

    static Dual1 variable(T v_)
        requires std::constructible_from<T, double>
    {
        return Dual1(std::move(v_), T(1.0));
    }
};

template <class T>
double value_of(const Dual1<T>& x) {
    return value_of(x.v);
}

// ---- Dual1 arithmetic ------------------------------------------------------

template <class T>
Dual1<T> operator+(const Dual1<T>& a, const Dual1<T>& b) {
    return {a.v + b.v, a.d + b.d};
}
template <class T>
Dual1<T> operator-(const Dual1<T>& a, const Dual1<T>& b) {
    return {a.v - b.v, a.d - b.d};
}
template <class T>
Dual1<T> operator-(const Dual1<T>& a) {
    return {-a.v, -a.d};
}
template <class T>
Dual1<T> operator*(const Dual1<T>& a, const Dual1<T>& b) {
    return {a.v * b.v, a.d * b.v + a.v * b.d};
}
template <class T>
Dual1<T> operator/(const Dual1<T>& a, const Dual1<T>& b) {
    if (value_of(b.v) == 0.0) throw NumericError("dual: division by zero");
    auto q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
}

template <class T>
Dual1<T> operator+(const Dual1<T>& a, double c) {
    return {a.v + c, a.d};
}
template <class T>
Dual1<T> operator+(double c, const Dual1<T>& a) {
    return {c + a.v, a.d};
}
template <class T>
Dual1<T> operator-(const Dual1<T>& a, double c) {
    return {a.v - c, a.d};
}
template <class T>
Dual1<T> operator-(double c, const Dual1<T>& a) {
    return {c - a.v, -a.d};
}
template <class T>
Dual1<T> operator*(const Dual1<T>& a, double c) {
    return {a.v * c, a.d * c};
}
template <class T>
Dual1<T> operator*(double c, const Dual1<T>& a) {
    return {c * a.v, c * a.d};
}
template <class T>
Dual1<T> operator/(const Dual1<T>& a, double c) {
    if (c == 0.0) throw NumericError("dual: division by zero");
    return {a.v / c, a.d / c};
}
template <class T>
Dual1<T> operator/(double c, const Dual1<T>& a) {
    if (value_of(a.v) == 0.0) throw NumericError("dual: division by zero");
    auto q = c / a.v;
    return {q, -((q * a.d) / a.v)};
}

template <class T>
Dual1<T> sin(const Dual1<T>& a) {
    return {sin(a.v), cos(a.v) * a.d};
}
template <class T>
Dual1<T> cos(const Dual1<T>& a) {
    return {cos(a.v), -(sin(a.v) * a.d)};
}
template <class T>
Dual1<T> exp(const Dual1<T>& a) {
    auto e = exp(a.v);
    return {e, e * a.d};
}
template <class T>
Dual1<T> sqrt(const Dual1<T>& a) {
    if (value_of(a.v) < 0.0) throw NumericError("dual: sqrt of negative value");
    auto r = sqrt(a.v);
    return {r, a.d / (2.0 * r)};
}
template <class T>
Dual1<T> tanh(const Dual1<T>& a) {
    auto t = tanh(a.v);
    return {t, (1.0 - t * t) * a.d};
}
template <class T>
Dual1<T> log(const Dual1<T>& a) {
    if (!(value_of(a.v) > 0.0)) throw NumericError("dual: log of non-positive value");
    return {log(a.v), a.d / a.v};
}

/// Second-order dual: value, first and second directional derivative along
/// the same direction. The d1 component is computed with expressions
/// identical to Dual1's, so both agree bit-for-bit on a shared op sequence.
template <class T>
struct Dual2 {
    T v{};
    T d1{};
    T d2{};

    Dual2() = default;
    Dual2(T v_, T d1_, T d2_) : v(std::move(v_)), d1(std::move(d1_)), d2(std::move(d2_)) {}
    Dual2(double c)
        requires std::constructible_from<T, double>
        : v(c), d1(0.0), d2(0.0) {}

    static Dual2 variable(T v_)
        requires std::constructible_from<T, double>
    {
        return Dual2(std::move(v_), T(1.0), T(0.0));
    }
};

template <class T>
double value_of(const Dual2<T>& x) {
    return value_of(x.v);
}

using D1 = Dual1<double>;
using D2 = Dual2<double>;

// ---- Dual2 arithmetic ------------------------------------------------------

template <class T>
Dual2<T> operator+(const Dual2<T>& a, const Dual2<T>& b) {
    return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2};
}
template <class T>
Dual2<T> operator-(const Dual2<T>& a, const Dual2<T>& b) {
    return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2};
}
template <class T>
Dual2<T> operator-(const Dual2<T>& a) {
    return {-a.v, -a.d1, -a.d2};
}
template <class T>
Dual2<T> operator*(const Dual2<T>& a, const Dual2<T>& b) {
    return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * (a.d1 * b.d1) + a.v * b.d2};
}
template <class T>
Dual2<T> operator/(const Dual2<T>& a, const Dual2<T>& b) {
    if (value_of(b.v) == 0.0) throw NumericError("dual: division by zero");
    auto q = a.v / b.v;
    auto d1 = (a.d1 - q * b.d1) / b.v;
    return {q, d1, (a.d2 - 2.0 * (d1 * b.d1) - q * b.d2) / b.v};
}

template <class T>
Dual2<T> operator+(const Dual2<T>& a, double c) {
    return {a.v + c, a.d1, a.d2};
}
template <class T>
Dual2<T> operator+(double c, const Dual2<T>& a) {
    return {c + a.v, a.d1, a.d2};
}
template <class T>
Dual2<T> operator-(const Dual2<T>& a, double c) {
    return {a.v - c, a.d1, a.d2};
}
template <class T>
Dual2<T> operator-(double c, const Dual2<T>& a) {
    return {c - a.v, -a.d1, -a.d2};
}
template <class T>
Dual2<T> operator*(const Dual2<T>& a, double c) {
    return {a.v * c, a.d1 * c, a.d2 * c};
}
template <class T>
Dual2<T> operator*(double c, const Dual2<T>& a) {
    return {c * a.v, c * a.d1, c * a.d2};
}
template <class T>
Dual2<T> operator/(const Dual2<T>& a, double c) {
    if (c == 0.0) throw NumericError("dual: division by zero");
    return {a.v / c, a.d1 / c, a.d2 / c};
}
template <class T>
Dual2<T> operator/(double c, const Dual2<T>& a) {
    if (value_of(a.v) == 0.0) throw NumericError("dual: division by zero");
    auto q = c / a.v;
    auto d1 = -((q * a.d1) / a.v);
    // f*g = c  =>  f''g + 2 f'g' + f g'' = 0
    return {q, d1, -((a.d2 * q + 2.0 * (a.d1 * d1)) / a.v)};
}

template <class T>
Dual2<T> sin(const Dual2<T>& a) {
    auto s = sin(a.v);
    auto c = cos(a.v);
    return {s, c * a.d1, c * a.d2 - s * (a.d1 * a.d1)};
}
template <class T>
Dual2<T> cos(const Dual2<T>& a) {
    auto s = sin(a.v);
    auto c = cos(a.v);
    return {c, -(s * a.d1), -(s * a.d2) - c * (a.d1 * a.d1)};
}
template <class T>
Dual2<T> exp(const Dual2<T>& a) {
    auto e = exp(a.v);
    return {e, e * a.d1, e * a.d2 + e * (a.d1 * a.d1)};
}
template <class T>
Dual2<T> sqrt(const Dual2<T>& a) {
    if (value_of(a.v) < 0.0) throw NumericError("dual: sqrt of negative value");
    auto r = sqrt(a.v);
    auto d1 = a.d1 / (2.0 * r);
    return {r, d1, (a.d2 - 2.0 * (d1 * d1)) / (2.0 * r)};
}
template <class T>
Dual2<T> tanh(const Dual2<T>& a) {
    auto t = tanh(a.v);
    auto g = 1.0 - t * t;
    return {t, g * a.d1, g * a.d2 - 2.0 * (t * (g * (a.d1 * a.d1)))};
}
template <class T>
Dual2<T> log(const Dual2<T>& a) {
    if (!(value_of(a.v) > 0.0)) throw NumericError("dual: log of non-positive value");
    auto d1 = a.d1 / a.v;
    return {log(a.v), d1, a.d2 / a.v - d1 * d1};
}

// ---- mixed arithmetic with the underlying scalar ----------------------------
//
// In nested use (T = TVar) the inner scalar carries no directional
// derivative of its own: parameters are constants with respect to the input
// direction. Restricted to T != double so the plain-double overloads above
// stay unambiguous.

template <class T>
concept NestedScalar = !std::same_as<T, double>;

template <NestedScalar T>
Dual1<T> operator+(const Dual1<T>& a, const T& c) {
    return {a.v + c, a.d};
}
template <NestedScalar T>
Dual1<T> operator+(const T& c, const Dual1<T>& a) {
    return {c + a.v, a.d};
}
template <NestedScalar T>
Dual1<T> operator-(const Dual1<T>& a, const T& c) {
    return {a.v - c, a.d};
}
template <NestedScalar T>
Dual1<T> operator-(const T& c, const Dual1<T>& a) {
    return {c - a.v, -a.d};
}
template <NestedScalar T>
Dual1<T> operator*(const Dual1<T>& a, const T& c) {
    return {a.v * c, a.d * c};
}
template <NestedScalar T>
Dual1<T> operator*(const T& c, const Dual1<T>& a) {
    return {c * a.v, c * a.d};
}
template <NestedScalar T>
Dual1<T> operator/(const Dual1<T>& a, const T& c) {
    if (value_of(c) == 0.0) throw NumericError("dual: division by zero");
    return {a.v / c, a.d / c};
}
template <NestedScalar T>
Dual1<T> operator/(const T& c, const Dual1<T>& a) {
    if (value_of(a.v) == 0.0) throw NumericError("dual: division by zero");
    auto q = c / a.v;
    return {q, -((q * a.d) / a.v)};
}

template <NestedScalar T>
Dual2<T> operator+(const Dual2<T>& a, const T& c) {
    return {a.v + c, a.d1, a.d2};
}
template <NestedScalar T>
Dual2<T> operator+(const T& c, const Dual2<T>& a) {
    return {c + a.v, a.d1, a.d2};
}
template <NestedScalar T>
Dual2<T> operator-(const Dual2<T>& a, const T& c) {
    return {a.v - c, a.d1, a.d2};
}
template <NestedScalar T>
Dual2<T> operator-(const T& c, const Dual2<T>& a) {
    return {c - a.v, -a.d1, -a.d2};
}
template <NestedScalar T>
Dual2<T> operator*(const Dual2<T>& a, const T& c) {
    return {a.v * c, a.d1 * c, a.d2 * c};
}
template <NestedScalar T>
Dual2<T> operator*(const T& c, const Dual2<T>& a) {
    return {c * a.v, c * a.d1, c * a.d2};
}
template <NestedScalar T>
Dual2<T> operator/(const Dual2<T>& a, const T& c) {
    if (value_of(c) == 0.0) throw NumericError("dual: division by zero");
    return {a.v / c, a.d1 / c, a.d2 / c};
}
template <NestedScalar T>
Dual2<T> operator/(const T& c, const Dual2<T>& a) {
    if (value_of(a.v) == 0.0) throw NumericError("dual: division by zero");
    auto q = c / a.v;
    auto d1 = -((q * a.d1) / a.v);
    return {q, d1, -((a.d2 * q + 2.0 * (a.d1 * d1)) / a.v)};
}

// ---- generic helpers over any supported scalar -----------------------------

template <class T>
T square(const T& x) {
    return x * x;
}

/// Integer power by repeated multiplication, so derivatives of any order
/// fall out of the product rule for every scalar type.
template <class T>
T powi(const T& x, int n) {
    if (n < 0) return 1.0 / powi(x, -n);
    if (n == 0) return x * 0.0 + 1.0;
    T acc = x;
    int done = 1;
    while (2 * done <= n) {
        acc = acc * acc;
        done *= 2;
    }
    for (; done < n; ++done) acc = acc * x;
    return acc;
}

}  // namespace fmpinn
