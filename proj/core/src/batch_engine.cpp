#include "fmpinn/batch_engine.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "fmpinn/fastmath.hpp"

namespace fmpinn {

namespace {

using Eigen::ArrayXXd;
using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Column-block structure of the stacked matrices: [primal | dot_1..dot_d |
/// ddot_1..ddot_d], each block C points wide. Second-order chains exist only
/// for the classical-residual objective.
struct ChainSpec {
    int n_dot = 0;
    int n_ddot = 0;
    int chains() const { return 1 + n_dot + n_ddot; }
};

/// Everything a layer touches lives in persistent buffers; resizing to the
/// same shape is free, so steady-state training does no large allocations.
struct LayerCache {
    MatrixXd Z;        // stacked pre-activations (w x nc*C)
    MatrixXd A;        // stacked activations after skip (w x nc*C)
    ArrayXXd e1, e2;   // primal-block activation caches (w x C)
    MatrixXd adjZ;     // reverse-sweep scratch
    MatrixXd adjA;     // adjoint of this layer's activations
    MatrixXd zp;       // softened fourier pre-activations (only when soften != 1)
};

struct SubnetWork {
    MatrixXd X;                     // stacked input (d x nc*C)
    std::vector<LayerCache> layer;  // one per hidden layer
    MatrixXd Y;                     // stacked subnet output (m x nc*C)
    MatrixXd adjY;                  // adjoint of the subnet output
};

struct PassScratch {
    std::vector<SubnetWork> works;
    MatrixXd aggY;
    MatrixXd concat;  // linear-head only
    MatrixXd adjY;
};

}  // namespace

struct EngineScratch::Impl {
    PassScratch interior, interior_tail;
    PassScratch boundary, boundary_tail;
    PassScratch forward, forward_tail;
    std::vector<double> fv, av;
    MatrixXd dav;
};

EngineScratch::EngineScratch() : impl_(std::make_unique<Impl>()) {}
EngineScratch::~EngineScratch() = default;
EngineScratch::EngineScratch(EngineScratch&&) noexcept = default;
EngineScratch& EngineScratch::operator=(EngineScratch&&) noexcept = default;

namespace {

void fill_trig(const double* z, double* s, double* c, std::ptrdiff_t n, bool fast) {
    if (fast) {
        sincos_array(z, s, c, n);
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            s[i] = std::sin(z[i]);
            c[i] = std::cos(z[i]);
        }
    }
}

HiddenActivation layer_act(const NetworkConfig& cfg, int l) {
    if (l == 0 && cfg.first_activation == FirstActivation::sincos) return HiddenActivation::sincos;
    if (l == 0 && cfg.first_activation == FirstActivation::tanh) return HiddenActivation::tanh;
    return cfg.hidden_activation;
}

// Per-element activation derivative rules. The fused pass kernels below walk
// each column block exactly once, which keeps the memory-bound part of the
// engine near its minimum traffic.
struct SinCosAct {
    static double s0(double e1, double e2) { return 0.5 * (e1 + e2); }
    static double s1(double e1, double e2) { return 0.5 * (e2 - e1); }
    static double s2(double e1, double e2) { return -0.5 * (e1 + e2); }
    static double s3(double e1, double e2) { return -0.5 * (e2 - e1); }
};
struct TanhAct {
    static double s0(double e1, double) { return e1; }
    static double s1(double e1, double) { return 1.0 - e1 * e1; }
    static double s2(double e1, double) { return -2.0 * e1 * (1.0 - e1 * e1); }
    static double s3(double e1, double) {
        const double g = 1.0 - e1 * e1;
        return -2.0 * g * (1.0 - 3.0 * e1 * e1);
    }
};
struct RequAct {
    static double s0(double e1, double) { return e1 > 0.0 ? e1 * e1 : 0.0; }
    static double s1(double e1, double) { return e1 > 0.0 ? 2.0 * e1 : 0.0; }
    static double s2(double e1, double) { return e1 > 0.0 ? 2.0 : 0.0; }
    static double s3(double, double) { return 0.0; }
};

// Column block k of a stacked (rows x nc*C) matrix is one contiguous slab.
inline double* block_ptr(MatrixXd& m, long long k, long long C) {
    return m.data() + k * C * m.rows();
}
inline const double* block_ptr(const MatrixXd& m, long long k, long long C) {
    return m.data() + k * C * m.rows();
}

template <class Act>
void hidden_fwd_fused(LayerCache& lc, const MatrixXd* prev, bool skip, const ChainSpec& spec,
                      long long C) {
    const long long n = lc.Z.rows() * C;
    const double* e1 = lc.e1.data();
    const double* e2 = lc.e2.size() ? lc.e2.data() : lc.e1.data();
    {
        double* a = block_ptr(lc.A, 0, C);
        if (skip) {
            const double* ap = block_ptr(*prev, 0, C);
            for (long long i = 0; i < n; ++i) a[i] = Act::s0(e1[i], e2[i]) + ap[i];
        } else {
            for (long long i = 0; i < n; ++i) a[i] = Act::s0(e1[i], e2[i]);
        }
    }
    for (int k = 1; k <= spec.n_dot; ++k) {
        const double* zd = block_ptr(lc.Z, k, C);
        double* a = block_ptr(lc.A, k, C);
        if (skip) {
            const double* ap = block_ptr(*prev, k, C);
            for (long long i = 0; i < n; ++i) a[i] = Act::s1(e1[i], e2[i]) * zd[i] + ap[i];
        } else {
            for (long long i = 0; i < n; ++i) a[i] = Act::s1(e1[i], e2[i]) * zd[i];
        }
    }
    for (int k = 1; k <= spec.n_ddot; ++k) {
        const long long kb = spec.n_dot + k;
        const double* zd = block_ptr(lc.Z, k, C);
        const double* zdd = block_ptr(lc.Z, kb, C);
        double* a = block_ptr(lc.A, kb, C);
        if (skip) {
            const double* ap = block_ptr(*prev, kb, C);
            for (long long i = 0; i < n; ++i)
                a[i] = Act::s2(e1[i], e2[i]) * (zd[i] * zd[i]) + Act::s1(e1[i], e2[i]) * zdd[i] + ap[i];
        } else {
            for (long long i = 0; i < n; ++i)
                a[i] = Act::s2(e1[i], e2[i]) * (zd[i] * zd[i]) + Act::s1(e1[i], e2[i]) * zdd[i];
        }
    }
}

template <class Act>
void hidden_bwd_fused(LayerCache& lc, const ChainSpec& spec, long long C) {
    const long long n = lc.Z.rows() * C;
    const double* e1 = lc.e1.data();
    const double* e2 = lc.e2.size() ? lc.e2.data() : lc.e1.data();
    double* az0 = block_ptr(lc.adjZ, 0, C);
    {
        const double* aa = block_ptr(lc.adjA, 0, C);
        for (long long i = 0; i < n; ++i) az0[i] = aa[i] * Act::s1(e1[i], e2[i]);
    }
    for (int k = 1; k <= spec.n_dot; ++k) {
        const double* aa = block_ptr(lc.adjA, k, C);
        const double* zd = block_ptr(lc.Z, k, C);
        double* az = block_ptr(lc.adjZ, k, C);
        for (long long i = 0; i < n; ++i) {
            az[i] = aa[i] * Act::s1(e1[i], e2[i]);
            az0[i] += aa[i] * Act::s2(e1[i], e2[i]) * zd[i];
        }
    }
    for (int k = 1; k <= spec.n_ddot; ++k) {
        const long long kb = spec.n_dot + k;
        const double* aa = block_ptr(lc.adjA, kb, C);
        const double* zd = block_ptr(lc.Z, k, C);
        const double* zdd = block_ptr(lc.Z, kb, C);
        double* az = block_ptr(lc.adjZ, kb, C);
        double* azk = block_ptr(lc.adjZ, k, C);
        for (long long i = 0; i < n; ++i) {
            az[i] = aa[i] * Act::s1(e1[i], e2[i]);
            azk[i] += 2.0 * (aa[i] * Act::s2(e1[i], e2[i]) * zd[i]);
            az0[i] += aa[i] * (Act::s3(e1[i], e2[i]) * (zd[i] * zd[i]) + Act::s2(e1[i], e2[i]) * zdd[i]);
        }
    }
}

template <class Fn>
void dispatch_act(HiddenActivation act, Fn&& fn) {
    switch (act) {
        case HiddenActivation::sincos: fn(SinCosAct{}); break;
        case HiddenActivation::tanh: fn(TanhAct{}); break;
        case HiddenActivation::requ: fn(RequAct{}); break;
    }
}

/// Long-K weight-gradient product, accumulated in column chunks (better
/// blocking than one skinny GEMM).
void accumulate_weight_grad(Map<MatrixXd> gW, const MatrixXd& adjZ, const MatrixXd& aprev) {
    const long long n = adjZ.cols();
    constexpr long long B = 2048;
    for (long long j = 0; j < n; j += B) {
        const long long len = std::min(B, n - j);
        gW.noalias() += adjZ.middleCols(j, len) * aprev.middleCols(j, len).transpose();
    }
}

struct EngineCtx {
    const NetworkConfig* cfg;
    const ParamLayout* layout;
    const double* flat;
    ChainSpec spec;
    long long C = 0;  // chunk width in points
    bool fast_trig = true;
};

Map<const MatrixXd> weight(const EngineCtx& cx, const ParamLayout::LayerSpan& L) {
    return Map<const MatrixXd>(cx.flat + L.w_off, L.rows, L.cols);
}
Map<const VectorXd> bias(const EngineCtx& cx, const ParamLayout::LayerSpan& L) {
    return Map<const VectorXd>(cx.flat + L.b_off, L.rows);
}

/// Forward through one subnet on the stacked input work.X; fills the
/// per-layer caches and work.Y.
void forward_subnet(const EngineCtx& cx, int s, SubnetWork& work) {
    const auto& layers = cx.layout->subnet[static_cast<std::size_t>(s)];
    const std::vector<bool> skips = cx.cfg->skip_mask();
    const int n_hidden = static_cast<int>(cx.cfg->hidden.size());
    const long long C = cx.C;
    const int nc = cx.spec.chains();
    const long long SC = nc * C;

    work.layer.resize(static_cast<std::size_t>(n_hidden));
    const MatrixXd* prev = &work.X;

    for (int l = 0; l < n_hidden; ++l) {
        LayerCache& lc = work.layer[static_cast<std::size_t>(l)];
        const auto& L = layers[static_cast<std::size_t>(l)];
        const int h = L.rows;
        lc.Z.resize(h, SC);
        lc.Z.noalias() = weight(cx, L) * (*prev);
        lc.Z.leftCols(C).colwise() += bias(cx, L);

        const bool fourier = (l == 0 && cx.cfg->first_activation == FirstActivation::fourier);
        if (fourier) {
            const double soft = cx.cfg->soften;
            lc.e1.resize(h, C);
            lc.e2.resize(h, C);
            if (soft == 1.0) {
                fill_trig(lc.Z.data(), lc.e1.data(), lc.e2.data(),
                          static_cast<std::ptrdiff_t>(h * C), cx.fast_trig);
            } else {
                lc.zp.resize(h, C);
                lc.zp = soft * lc.Z.leftCols(C);
                fill_trig(lc.zp.data(), lc.e1.data(), lc.e2.data(),
                          static_cast<std::ptrdiff_t>(h * C), cx.fast_trig);
            }
            lc.A.resize(2 * h, SC);
            for (long long j = 0; j < C; ++j) {
                const double* e1c = lc.e1.data() + j * h;
                const double* e2c = lc.e2.data() + j * h;
                double* a = lc.A.data() + j * 2 * h;
                for (int r = 0; r < h; ++r) a[r] = e2c[r];          // cos
                for (int r = 0; r < h; ++r) a[h + r] = e1c[r];      // sin
            }
            for (int k = 1; k <= cx.spec.n_dot; ++k) {
                for (long long j = 0; j < C; ++j) {
                    const double* e1c = lc.e1.data() + j * h;
                    const double* e2c = lc.e2.data() + j * h;
                    const double* zd = lc.Z.data() + (k * C + j) * h;
                    double* a = lc.A.data() + (k * C + j) * 2 * h;
                    for (int r = 0; r < h; ++r) a[r] = (-soft) * e1c[r] * zd[r];
                    for (int r = 0; r < h; ++r) a[h + r] = soft * e2c[r] * zd[r];
                }
            }
            for (int k = 1; k <= cx.spec.n_ddot; ++k) {
                // input ddot is zero, so only the quadratic term survives
                const long long kb = cx.spec.n_dot + k;
                const double s2f = -soft * soft;
                for (long long j = 0; j < C; ++j) {
                    const double* e1c = lc.e1.data() + j * h;
                    const double* e2c = lc.e2.data() + j * h;
                    const double* zd = lc.Z.data() + (k * C + j) * h;
                    double* a = lc.A.data() + (kb * C + j) * 2 * h;
                    for (int r = 0; r < h; ++r) a[r] = s2f * e2c[r] * (zd[r] * zd[r]);
                    for (int r = 0; r < h; ++r) a[h + r] = s2f * e1c[r] * (zd[r] * zd[r]);
                }
            }
        } else {
            const HiddenActivation act = layer_act(*cx.cfg, l);
            lc.e1.resize(h, C);
            if (act == HiddenActivation::sincos) {
                lc.e2.resize(h, C);
                fill_trig(lc.Z.data(), lc.e1.data(), lc.e2.data(),
                          static_cast<std::ptrdiff_t>(h * C), cx.fast_trig);
            } else if (act == HiddenActivation::tanh) {
                tanh_array(lc.Z.data(), lc.e1.data(), static_cast<std::ptrdiff_t>(h * C));
            } else {
                lc.e1 = lc.Z.leftCols(C).array();
            }
            lc.A.resize(h, SC);
            const bool skip = skips[static_cast<std::size_t>(l)];
            dispatch_act(act, [&](auto kit) {
                hidden_fwd_fused<decltype(kit)>(lc, prev, skip, cx.spec, C);
            });
            prev = &lc.A;
            continue;
        }
        if (skips[static_cast<std::size_t>(l)]) lc.A += *prev;
        prev = &lc.A;
    }

    const auto& Lout = layers.back();
    work.Y.resize(Lout.rows, SC);
    work.Y.noalias() = weight(cx, Lout) * (*prev);
    work.Y.leftCols(C).colwise() += bias(cx, Lout);
}

/// Reverse sweep through one subnet starting from work.adjY. Gradients
/// accumulate into grad; subnet segments are disjoint.
void backward_subnet(const EngineCtx& cx, int s, SubnetWork& work, double* grad) {
    const auto& layers = cx.layout->subnet[static_cast<std::size_t>(s)];
    const std::vector<bool> skips = cx.cfg->skip_mask();
    const int n_hidden = static_cast<int>(cx.cfg->hidden.size());
    const long long C = cx.C;
    const int nc = cx.spec.chains();
    const long long SC = nc * C;

    {
        const auto& Lout = layers.back();
        LayerCache& last = work.layer.back();
        Map<MatrixXd> gW(grad + Lout.w_off, Lout.rows, Lout.cols);
        Map<VectorXd> gb(grad + Lout.b_off, Lout.rows);
        accumulate_weight_grad(gW, work.adjY, last.A);
        gb.noalias() += work.adjY.leftCols(C).rowwise().sum();
        last.adjA.resize(Lout.cols, SC);
        last.adjA.noalias() = weight(cx, Lout).transpose() * work.adjY;
    }

    for (int l = n_hidden - 1; l >= 0; --l) {
        LayerCache& lc = work.layer[static_cast<std::size_t>(l)];
        const auto& L = layers[static_cast<std::size_t>(l)];
        const MatrixXd& Aprev = (l == 0) ? work.X : work.layer[static_cast<std::size_t>(l - 1)].A;
        const MatrixXd& adjA = lc.adjA;
        const bool fourier = (l == 0 && cx.cfg->first_activation == FirstActivation::fourier);

        lc.adjZ.resize(L.rows, SC);
        MatrixXd& adjZ = lc.adjZ;
        if (fourier) {
            const double soft = cx.cfg->soften;
            const int h = L.rows;
            const double s2f = soft * soft;
            const double s3f = soft * soft * soft;
            for (long long j = 0; j < C; ++j) {
                const double* e1c = lc.e1.data() + j * h;
                const double* e2c = lc.e2.data() + j * h;
                const double* aa = adjA.data() + j * 2 * h;
                double* az0 = adjZ.data() + j * h;
                for (int r = 0; r < h; ++r)
                    az0[r] = (-soft) * (aa[r] * e1c[r]) + soft * (aa[h + r] * e2c[r]);
            }
            for (int k = 1; k <= cx.spec.n_dot; ++k) {
                for (long long j = 0; j < C; ++j) {
                    const double* e1c = lc.e1.data() + j * h;
                    const double* e2c = lc.e2.data() + j * h;
                    const double* aa = adjA.data() + (k * C + j) * 2 * h;
                    const double* zd = lc.Z.data() + (k * C + j) * h;
                    double* az = adjZ.data() + (k * C + j) * h;
                    double* az0 = adjZ.data() + j * h;
                    for (int r = 0; r < h; ++r) {
                        az[r] = (-soft) * (aa[r] * e1c[r]) + soft * (aa[h + r] * e2c[r]);
                        az0[r] -= s2f * ((aa[r] * e2c[r] + aa[h + r] * e1c[r]) * zd[r]);
                    }
                }
            }
            for (int k = 1; k <= cx.spec.n_ddot; ++k) {
                const long long kb = cx.spec.n_dot + k;
                for (long long j = 0; j < C; ++j) {
                    const double* e1c = lc.e1.data() + j * h;
                    const double* e2c = lc.e2.data() + j * h;
                    const double* aa = adjA.data() + (kb * C + j) * 2 * h;
                    const double* zd = lc.Z.data() + (k * C + j) * h;
                    double* azk = adjZ.data() + (k * C + j) * h;
                    double* az0 = adjZ.data() + j * h;
                    double* azb = adjZ.data() + (kb * C + j) * h;
                    for (int r = 0; r < h; ++r) {
                        azk[r] -= 2.0 * s2f * ((aa[r] * e2c[r] + aa[h + r] * e1c[r]) * zd[r]);
                        az0[r] += s3f * ((aa[r] * e1c[r] - aa[h + r] * e2c[r]) * (zd[r] * zd[r]));
                        // the Z-ddot block has no parameter path (input ddot is zero)
                        azb[r] = 0.0;
                    }
                }
            }
        } else {
            dispatch_act(layer_act(*cx.cfg, l),
                         [&](auto kit) { hidden_bwd_fused<decltype(kit)>(lc, cx.spec, C); });
        }

        Map<MatrixXd> gW(grad + L.w_off, L.rows, L.cols);
        Map<VectorXd> gb(grad + L.b_off, L.rows);
        accumulate_weight_grad(gW, adjZ, Aprev);
        gb.noalias() += adjZ.leftCols(C).rowwise().sum();

        if (l > 0) {
            LayerCache& down = work.layer[static_cast<std::size_t>(l - 1)];
            down.adjA.resize(L.cols, SC);
            down.adjA.noalias() = weight(cx, L).transpose() * adjZ;
            if (skips[static_cast<std::size_t>(l)]) down.adjA += adjA;
        }
    }
}

long long auto_chunk(const NetworkConfig& cfg, const ChainSpec& spec, long long n,
                     const EngineOptions& opt) {
    if (n <= 0) return 1;
    if (opt.chunk > 0) return std::min<long long>(opt.chunk, n);
    const std::vector<int> w = cfg.layer_widths();
    long long per_point = cfg.dim_in * spec.chains();
    for (std::size_t l = 0; l + 1 < w.size(); ++l)
        per_point += static_cast<long long>(w[l]) * (3 * spec.chains() + 4);
    per_point += cfg.dim_out * spec.chains();
    // upper bound from total cache memory across subnets
    const long long bytes_per_point = 8 * per_point * cfg.num_subnets();
    long long mem_c = static_cast<long long>(opt.memory_budget) / std::max<long long>(bytes_per_point, 1);
    // target: one subnet's chunk working set stays roughly cache-resident;
    // plain forward passes are lighter per point and can run wider
    const long long cache_target = (spec.chains() == 1 ? 16ll : 4ll) << 20;
    long long cache_c = cache_target / std::max<long long>(8 * per_point, 1);
    long long c = std::min(mem_c, std::max<long long>(cache_c, 128));
    c = std::max<long long>(c, 64);
    return std::min<long long>(c, n);
}

void forward_chunk(const EngineCtx& cx, const MatrixXd& pts, long long off, PassScratch& ps,
                   int threads) {
    const int q = cx.cfg->num_subnets();
    const int d = cx.cfg->dim_in;
    const long long C = cx.C;
    const int nc = cx.spec.chains();
    ps.works.resize(static_cast<std::size_t>(q));

#pragma omp parallel for schedule(static) num_threads(threads)
    for (int s = 0; s < q; ++s) {
        SubnetWork& work = ps.works[static_cast<std::size_t>(s)];
        const double a = cx.cfg->scales[static_cast<std::size_t>(s)];
        work.X.resize(d, nc * C);
        work.X.setZero();
        work.X.leftCols(C) = a * pts.middleCols(off, C);
        for (int k = 0; k < cx.spec.n_dot; ++k)
            work.X.row(k).segment((1 + k) * C, C).setConstant(a);
        forward_subnet(cx, s, work);
    }

    const int m = cx.cfg->dim_out;
    if (cx.cfg->aggregation == Aggregation::inverse_scale_mean) {
        ps.aggY.resize(m, nc * C);
        ps.aggY.setZero();
        for (int s = 0; s < q; ++s) {
            const double w = 1.0 / (q * cx.cfg->scales[static_cast<std::size_t>(s)]);
            ps.aggY.noalias() += w * ps.works[static_cast<std::size_t>(s)].Y;
        }
    } else {
        ps.concat.resize(q * m, nc * C);
        for (int s = 0; s < q; ++s)
            ps.concat.middleRows(s * m, m) = ps.works[static_cast<std::size_t>(s)].Y;
        const auto& H = cx.layout->head;
        ps.aggY.resize(m, nc * C);
        ps.aggY.noalias() = Map<const MatrixXd>(cx.flat + H.w_off, H.rows, H.cols) * ps.concat;
        ps.aggY.leftCols(C).colwise() += Map<const VectorXd>(cx.flat + H.b_off, H.rows);
    }
}

void backward_chunk(const EngineCtx& cx, PassScratch& ps, double* grad, int threads) {
    const int q = cx.cfg->num_subnets();
    const int m = cx.cfg->dim_out;
    const long long C = cx.C;

    MatrixXd adjC;
    if (cx.cfg->aggregation == Aggregation::linear_head) {
        const auto& H = cx.layout->head;
        Map<MatrixXd> gW(grad + H.w_off, H.rows, H.cols);
        Map<VectorXd> gb(grad + H.b_off, H.rows);
        gW.noalias() += ps.adjY * ps.concat.transpose();
        gb.noalias() += ps.adjY.leftCols(C).rowwise().sum();
        adjC.resize(q * m, ps.adjY.cols());
        adjC.noalias() = Map<const MatrixXd>(cx.flat + H.w_off, H.rows, H.cols).transpose() * ps.adjY;
    }

#pragma omp parallel for schedule(static) num_threads(threads)
    for (int s = 0; s < q; ++s) {
        SubnetWork& work = ps.works[static_cast<std::size_t>(s)];
        if (cx.cfg->aggregation == Aggregation::inverse_scale_mean) {
            const double w = 1.0 / (q * cx.cfg->scales[static_cast<std::size_t>(s)]);
            work.adjY = w * ps.adjY;
        } else {
            work.adjY = adjC.middleRows(s * m, m);
        }
        backward_subnet(cx, s, work, grad);
    }
}

int resolve_threads(const EngineOptions& opt) {
    return opt.threads > 0 ? opt.threads : omp_get_max_threads();
}

void zero_frozen_first_layer(const Parameters& params, VectorXd& grad) {
    if (params.config.fourier_trainable) return;
    for (const auto& layers : params.layout.subnet) {
        const auto& L0 = layers.front();
        grad.segment(L0.w_off, static_cast<long long>(L0.rows) * L0.cols).setZero();
        grad.segment(L0.b_off, L0.rows).setZero();
    }
}

}  // namespace

namespace { struct PhaseProf { double fwd=0,seed=0,bwd=0,bfwd=0,bbwd=0,closure=0; long calls=0;
  ~PhaseProf(){ if(calls && std::getenv("FMPINN_PROFILE")) std::fprintf(stderr,
    "[prof] calls=%ld fwd=%.3f closure=%.3f seed=%.3f bwd=%.3f bfwd=%.3f bbwd=%.3f (ms/call)\n",
    calls, fwd/calls*1e3, closure/calls*1e3, seed/calls*1e3, bwd/calls*1e3, bfwd/calls*1e3, bbwd/calls*1e3); } };
  PhaseProf g_prof; }

EngineResult fmpinn_loss_grad(const Parameters& params, const SampleBatch& batch,
                              const ProblemDefinition& problem, const EngineOptions& opt,
                              EngineScratch* scratch) {
    const NetworkConfig& cfg = params.config;
    const int d = cfg.dim_in;
    if (cfg.dim_out != d + 1)
        throw ConfigError("fmpinn_loss_grad: network must emit (u, flux), dim_out = 1+d");
    if (problem.dim != d) throw ConfigError("fmpinn_loss_grad: problem/network dimension mismatch");
    if (!(opt.beta > 0.0)) throw ConfigError("fmpinn_loss_grad: beta must be positive");
    const long long n = batch.interior.cols();
    const long long nb = batch.boundary.cols();
    if (n <= 0 || nb <= 0) throw ConfigError("fmpinn_loss_grad: empty batch");
    const double w_in = batch.domain_measure / static_cast<double>(n);
    const int threads = resolve_threads(opt);

    EngineScratch local;
    EngineScratch::Impl& ws = (scratch ? *scratch : local).impl();

    EngineResult res;
    res.grad = VectorXd::Zero(params.count());
    KahanSum pde_sum, flux_sum, bd_sum;

    EngineCtx cx{&cfg, &params.layout, params.values.data(), ChainSpec{d, 0}, 0, opt.fast_trig};
    const long long chunk = auto_chunk(cfg, cx.spec, n, opt);

    for (long long off = 0; off < n; off += chunk) {
        const long long C = std::min(chunk, n - off);
        cx.C = C;
        PassScratch& pass = (C == chunk) ? ws.interior : ws.interior_tail;
        double t0 = omp_get_wtime();
        forward_chunk(cx, batch.interior, off, pass, threads);
        double t1 = omp_get_wtime(); g_prof.fwd += t1-t0; g_prof.calls++;

        ws.fv.resize(static_cast<std::size_t>(C));
        ws.av.resize(static_cast<std::size_t>(C));
        for (long long j = 0; j < C; ++j) {
            std::span<const double> x(batch.interior.col(off + j).data(), static_cast<std::size_t>(d));
            ws.fv[static_cast<std::size_t>(j)] = problem.forcing(x);
            ws.av[static_cast<std::size_t>(j)] = problem.coefficient(x);
        }
        double t2 = omp_get_wtime(); g_prof.closure += t2-t1;

        MatrixXd& adjY = pass.adjY;
        adjY.resize(cfg.dim_out, (1 + d) * C);
        adjY.setZero();
        const MatrixXd& Y = pass.aggY;
        for (long long j = 0; j < C; ++j) {
            double div_phi = 0.0;
            for (int k = 0; k < d; ++k) div_phi += Y(1 + k, (1 + k) * C + j);
            const double r1 = -div_phi - ws.fv[static_cast<std::size_t>(j)];
            pde_sum.add(r1 * r1);
            for (int k = 0; k < d; ++k) {
                const double r2 = Y(1 + k, j) - ws.av[static_cast<std::size_t>(j)] * Y(0, (1 + k) * C + j);
                flux_sum.add(r2 * r2);
                adjY(1 + k, j) = 2.0 * w_in * opt.beta * r2;
                adjY(0, (1 + k) * C + j) = -2.0 * w_in * opt.beta * ws.av[static_cast<std::size_t>(j)] * r2;
                adjY(1 + k, (1 + k) * C + j) = -2.0 * w_in * r1;
            }
        }
        double t3 = omp_get_wtime(); g_prof.seed += t3-t2;
        backward_chunk(cx, pass, res.grad.data(), threads);
        g_prof.bwd += omp_get_wtime()-t3;
    }

    EngineCtx cxb{&cfg, &params.layout, params.values.data(), ChainSpec{0, 0}, 0, opt.fast_trig};
    const long long bchunk = auto_chunk(cfg, cxb.spec, nb, opt);
    for (long long off = 0; off < nb; off += bchunk) {
        const long long C = std::min(bchunk, nb - off);
        cxb.C = C;
        PassScratch& bpass = (C == bchunk) ? ws.boundary : ws.boundary_tail;
        double tb0 = omp_get_wtime();
        forward_chunk(cxb, batch.boundary, off, bpass, threads);
        g_prof.bfwd += omp_get_wtime()-tb0;
        MatrixXd& adjY = bpass.adjY;
        adjY.resize(cfg.dim_out, C);
        adjY.setZero();
        for (long long j = 0; j < C; ++j) {
            std::span<const double> x(batch.boundary.col(off + j).data(), static_cast<std::size_t>(d));
            const double r = bpass.aggY(0, j) - problem.boundary(x);
            bd_sum.add(r * r);
            adjY(0, j) = 2.0 * opt.gamma / static_cast<double>(nb) * r;
        }
        double tb1 = omp_get_wtime();
        backward_chunk(cxb, bpass, res.grad.data(), threads);
        g_prof.bbwd += omp_get_wtime()-tb1;
    }

    zero_frozen_first_layer(params, res.grad);

    res.parts.interior_pde = w_in * pde_sum.value();
    res.parts.interior_flux = w_in * flux_sum.value();
    res.parts.boundary = bd_sum.value() / static_cast<double>(nb);
    res.parts.beta = opt.beta;
    res.parts.gamma = opt.gamma;
    res.parts.total = LossBreakdown::combine(res.parts.interior_pde, res.parts.interior_flux,
                                             res.parts.boundary, opt.beta, opt.gamma);
    if (!std::isfinite(res.parts.total)) throw NumericError("fmpinn_loss_grad: non-finite loss");
    if (!res.grad.allFinite()) throw NumericError("fmpinn_loss_grad: non-finite gradient");
    return res;
}

EngineResult mpinn_loss_grad(const Parameters& params, const SampleBatch& batch,
                             const ProblemDefinition& problem, const EngineOptions& opt,
                             EngineScratch* scratch) {
    const NetworkConfig& cfg = params.config;
    const int d = cfg.dim_in;
    if (cfg.dim_out != 1)
        throw ConfigError("mpinn_loss_grad: baseline network must have dim_out = 1");
    if (problem.dim != d) throw ConfigError("mpinn_loss_grad: problem/network dimension mismatch");
    if (!problem.coefficient.differentiable())
        throw ConfigError("mpinn_loss_grad: coefficient is not differentiable through the primitive set");
    const long long n = batch.interior.cols();
    const long long nb = batch.boundary.cols();
    if (n <= 0 || nb <= 0) throw ConfigError("mpinn_loss_grad: empty batch");
    const double w_in = 1.0 / static_cast<double>(n);
    const int threads = resolve_threads(opt);

    EngineScratch local;
    EngineScratch::Impl& ws = (scratch ? *scratch : local).impl();

    EngineResult res;
    res.grad = VectorXd::Zero(params.count());
    KahanSum pde_sum, bd_sum;

    EngineCtx cx{&cfg, &params.layout, params.values.data(), ChainSpec{d, d}, 0, opt.fast_trig};
    const long long chunk = auto_chunk(cfg, cx.spec, n, opt);

    for (long long off = 0; off < n; off += chunk) {
        const long long C = std::min(chunk, n - off);
        cx.C = C;
        PassScratch& pass = (C == chunk) ? ws.interior : ws.interior_tail;
        forward_chunk(cx, batch.interior, off, pass, threads);

        ws.fv.resize(static_cast<std::size_t>(C));
        ws.av.resize(static_cast<std::size_t>(C));
        ws.dav.resize(d, C);
        for (long long j = 0; j < C; ++j) {
            std::span<const double> x(batch.interior.col(off + j).data(), static_cast<std::size_t>(d));
            ws.fv[static_cast<std::size_t>(j)] = problem.forcing(x);
            ws.av[static_cast<std::size_t>(j)] = problem.coefficient(x);
            for (int k = 0; k < d; ++k) ws.dav(k, j) = problem.coefficient.partial(x, k);
        }

        MatrixXd& adjY = pass.adjY;
        adjY.resize(1, (1 + 2 * d) * C);
        adjY.setZero();
        const MatrixXd& Y = pass.aggY;
        for (long long j = 0; j < C; ++j) {
            double div_flux = 0.0;
            for (int k = 0; k < d; ++k)
                div_flux += ws.dav(k, j) * Y(0, (1 + k) * C + j) +
                            ws.av[static_cast<std::size_t>(j)] * Y(0, (1 + d + k) * C + j);
            const double r = -div_flux - ws.fv[static_cast<std::size_t>(j)];
            pde_sum.add(r * r);
            for (int k = 0; k < d; ++k) {
                adjY(0, (1 + k) * C + j) = -2.0 * w_in * r * ws.dav(k, j);
                adjY(0, (1 + d + k) * C + j) = -2.0 * w_in * r * ws.av[static_cast<std::size_t>(j)];
            }
        }
        backward_chunk(cx, pass, res.grad.data(), threads);
    }

    EngineCtx cxb{&cfg, &params.layout, params.values.data(), ChainSpec{0, 0}, 0, opt.fast_trig};
    const long long bchunk = auto_chunk(cfg, cxb.spec, nb, opt);
    for (long long off = 0; off < nb; off += bchunk) {
        const long long C = std::min(bchunk, nb - off);
        cxb.C = C;
        PassScratch& bpass = (C == bchunk) ? ws.boundary : ws.boundary_tail;
        forward_chunk(cxb, batch.boundary, off, bpass, threads);
        MatrixXd& adjY = bpass.adjY;
        adjY.resize(1, C);
        adjY.setZero();
        for (long long j = 0; j < C; ++j) {
            std::span<const double> x(batch.boundary.col(off + j).data(), static_cast<std::size_t>(d));
            const double r = bpass.aggY(0, j) - problem.boundary(x);
            bd_sum.add(r * r);
            adjY(0, j) = 2.0 * opt.gamma / static_cast<double>(nb) * r;
        }
        backward_chunk(cxb, bpass, res.grad.data(), threads);
    }

    zero_frozen_first_layer(params, res.grad);

    res.parts.interior_pde = w_in * pde_sum.value();
    res.parts.interior_flux = 0.0;
    res.parts.boundary = bd_sum.value() / static_cast<double>(nb);
    res.parts.beta = 0.0;
    res.parts.gamma = opt.gamma;
    res.parts.total =
        LossBreakdown::combine(res.parts.interior_pde, 0.0, res.parts.boundary, 0.0, opt.gamma);
    if (!std::isfinite(res.parts.total)) throw NumericError("mpinn_loss_grad: non-finite loss");
    if (!res.grad.allFinite()) throw NumericError("mpinn_loss_grad: non-finite gradient");
    return res;
}

Eigen::MatrixXd mscale_forward_batch(const Parameters& params, const Eigen::MatrixXd& pts,
                                     const EngineOptions& opt, EngineScratch* scratch) {
    const NetworkConfig& cfg = params.config;
    if (pts.rows() != cfg.dim_in) throw ConfigError("mscale_forward_batch: point dimension mismatch");
    const long long n = pts.cols();
    if (n == 0) return MatrixXd(cfg.dim_out, 0);
    const int threads = resolve_threads(opt);

    EngineScratch local;
    EngineScratch::Impl& ws = (scratch ? *scratch : local).impl();

    EngineCtx cx{&cfg, &params.layout, params.values.data(), ChainSpec{0, 0}, 0, opt.fast_trig};
    MatrixXd out(cfg.dim_out, n);
    const long long chunk = auto_chunk(cfg, cx.spec, n, opt);
    for (long long off = 0; off < n; off += chunk) {
        const long long C = std::min(chunk, n - off);
        cx.C = C;
        PassScratch& fpass = (C == chunk) ? ws.forward : ws.forward_tail;
        forward_chunk(cx, pts, off, fpass, threads);
        out.middleCols(off, C) = fpass.aggY;
    }
    return out;
}

}  // namespace fmpinn
