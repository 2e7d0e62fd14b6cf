#include "fmpinn/fastmath.hpp"

#include <cmath>

namespace fmpinn {

namespace {

// pi/2 split (fdlibm): PIO2_HI + PIO2_LO carries ~69 bits
constexpr double TWO_OVER_PI = 6.36619772367581382433e-01;
constexpr double PIO2_HI = 1.57079632673412561417e+00;
constexpr double PIO2_LO = 6.07710050650619224932e-11;
// round-to-nearest integer via the shifter trick (|t| < 2^51)
constexpr double SHIFTER = 6755399441055744.0;  // 1.5 * 2^52

constexpr double S1 = -1.66666666666666324348e-01;
constexpr double S2 = 8.33333333332248946124e-03;
constexpr double S3 = -1.98412698298579493134e-04;
constexpr double S4 = 2.75573137070700676789e-06;
constexpr double S5 = -2.50507602534068634195e-08;
constexpr double S6 = 1.58969099521155010221e-10;

constexpr double C1 = 4.16666666666666019037e-02;
constexpr double C2 = -1.38888888888741095749e-03;
constexpr double C3 = 2.48015872894767294178e-05;
constexpr double C4 = -2.75573143513906633035e-07;
constexpr double C5 = 2.08757232129817482790e-09;
constexpr double C6 = -1.13596475577881948265e-11;

constexpr std::ptrdiff_t BLOCK = 256;

inline void sincos_block(const double* x, double* s, double* c, std::ptrdiff_t n) {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double t = x[i] * TWO_OVER_PI;
        const double kd = (t + SHIFTER) - SHIFTER;
        const long long q = static_cast<long long>(kd);
        double r = x[i] - kd * PIO2_HI;
        r -= kd * PIO2_LO;
        const double z = r * r;
        const double sr = r + r * z * (S1 + z * (S2 + z * (S3 + z * (S4 + z * (S5 + z * S6)))));
        const double cr =
            1.0 - 0.5 * z + z * z * (C1 + z * (C2 + z * (C3 + z * (C4 + z * (C5 + z * C6)))));
        const bool swap = q & 1;
        const double sv = swap ? cr : sr;
        const double cv = swap ? sr : cr;
        s[i] = (q & 2) ? -sv : sv;
        c[i] = ((q + 1) & 2) ? -cv : cv;
    }
}

}  // namespace

void sincos_array(const double* x, double* s, double* c, std::ptrdiff_t n) {
    for (std::ptrdiff_t off = 0; off < n; off += BLOCK) {
        const std::ptrdiff_t len = (off + BLOCK <= n) ? BLOCK : n - off;
        double mx = 0.0;
        for (std::ptrdiff_t i = 0; i < len; ++i) {
            const double a = std::abs(x[off + i]);
            mx = a > mx ? a : mx;
        }
        if (mx <= 1e6) {
            sincos_block(x + off, s + off, c + off, len);
        } else {
            for (std::ptrdiff_t i = 0; i < len; ++i) {
                s[off + i] = std::sin(x[off + i]);
                c[off + i] = std::cos(x[off + i]);
            }
        }
    }
}

void tanh_array(const double* x, double* t, std::ptrdiff_t n) {
    for (std::ptrdiff_t i = 0; i < n; ++i) t[i] = std::tanh(x[i]);
}

}  // namespace fmpinn
