#include "fmpinn/fdm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "fmpinn/loss.hpp"

namespace fmpinn {

namespace {

struct Mesh {
    int dim;
    std::vector<int> npts;        // nodes per axis
    std::vector<int> inpts;       // interior nodes per axis
    long long n_interior = 1;
    long long strides[3] = {1, 1, 1};   // interior-index strides, axis0 slowest
    long long gstrides[3] = {1, 1, 1};  // full-grid strides
};

Mesh make_mesh(const ProblemDefinition& p, double h) {
    if (p.dim < 1 || p.dim > 3) throw ConfigError("fdm_solve: supported dimensions are 1, 2, 3");
    Mesh m;
    m.dim = p.dim;
    for (int a = 0; a < p.dim; ++a) {
        const double len = p.domain.hi[static_cast<std::size_t>(a)] - p.domain.lo[static_cast<std::size_t>(a)];
        const double steps = len / h;
        const double rounded = std::round(steps);
        if (std::abs(steps - rounded) > 1e-12 * std::max(1.0, steps))
            throw ConfigError("fdm_solve: h does not divide the domain edge on axis " + std::to_string(a));
        const int n = static_cast<int>(rounded);
        if (n < 2) throw ConfigError("fdm_solve: grid too coarse");
        m.npts.push_back(n + 1);
        m.inpts.push_back(n - 1);
    }
    for (int a = m.dim - 1; a >= 0; --a) {
        m.strides[a] = (a == m.dim - 1) ? 1 : m.strides[a + 1] * m.inpts[static_cast<std::size_t>(a + 1)];
        m.gstrides[a] = (a == m.dim - 1) ? 1 : m.gstrides[a + 1] * m.npts[static_cast<std::size_t>(a + 1)];
    }
    for (int a = 0; a < m.dim; ++a) m.n_interior *= m.inpts[static_cast<std::size_t>(a)];
    return m;
}

inline double harmonic(double a, double b) { return 2.0 / (1.0 / a + 1.0 / b); }

/// Deterministic dot product (fixed-order compensated sum).
double dot(const std::vector<double>& a, const std::vector<double>& b) {
    KahanSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
    return s.value();
}

struct Assembled {
    Mesh m;
    GridField field;                        // boundary nodes already hold g
    std::vector<std::vector<double>> face_lo, face_hi;
    std::vector<double> diag, rhs;

    void apply(const std::vector<double>& u, std::vector<double>& out) const {
        const int d = m.dim;
#pragma omp parallel for schedule(static)
        for (long long p = 0; p < m.n_interior; ++p) {
            double acc = diag[static_cast<std::size_t>(p)] * u[static_cast<std::size_t>(p)];
            long long rem = p;
            for (int a = 0; a < d; ++a) {
                const long long ia = rem / m.strides[a];
                rem -= ia * m.strides[a];
                if (ia > 0)
                    acc -= face_lo[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)] * u[static_cast<std::size_t>(p - m.strides[a])];
                if (ia < m.inpts[static_cast<std::size_t>(a)] - 1)
                    acc -= face_hi[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)] * u[static_cast<std::size_t>(p + m.strides[a])];
            }
            out[static_cast<std::size_t>(p)] = acc;
        }
    }
};

Assembled assemble(const ProblemDefinition& problem, double h) {
    Assembled as;
    as.m = make_mesh(problem, h);
    const Mesh& m = as.m;
    const int d = m.dim;

    GridField& field = as.field;
    field.domain = problem.domain;
    field.h = h;
    field.npts = m.npts;
    field.values.assign(static_cast<std::size_t>(field.total()), 0.0);

    const long long n_nodes = field.total();
    std::vector<double> coeff(static_cast<std::size_t>(n_nodes));
    std::vector<int> gidx(static_cast<std::size_t>(d), 0);
    std::vector<double> x(static_cast<std::size_t>(d));
    for (long long p = 0; p < n_nodes; ++p) {
        for (int a = 0; a < d; ++a) x[static_cast<std::size_t>(a)] = field.node_coord(a, gidx[static_cast<std::size_t>(a)]);
        coeff[static_cast<std::size_t>(p)] = problem.coefficient(x);
        bool on_boundary = false;
        for (int a = 0; a < d; ++a)
            if (gidx[static_cast<std::size_t>(a)] == 0 || gidx[static_cast<std::size_t>(a)] == m.npts[static_cast<std::size_t>(a)] - 1)
                on_boundary = true;
        if (on_boundary) field.values[static_cast<std::size_t>(p)] = problem.boundary(x);
        for (int a = d - 1; a >= 0; --a) {
            if (++gidx[static_cast<std::size_t>(a)] < m.npts[static_cast<std::size_t>(a)]) break;
            gidx[static_cast<std::size_t>(a)] = 0;
        }
    }

    const double inv_h2 = 1.0 / (h * h);
    as.face_lo.resize(static_cast<std::size_t>(d));
    as.face_hi.resize(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
        as.face_lo[static_cast<std::size_t>(a)].resize(static_cast<std::size_t>(m.n_interior));
        as.face_hi[static_cast<std::size_t>(a)].resize(static_cast<std::size_t>(m.n_interior));
    }
    as.diag.assign(static_cast<std::size_t>(m.n_interior), 0.0);
    as.rhs.assign(static_cast<std::size_t>(m.n_interior), 0.0);

    std::vector<int> iidx(static_cast<std::size_t>(d), 0);
    for (long long p = 0; p < m.n_interior; ++p) {
        long long gp = 0;
        for (int a = 0; a < d; ++a) gp += (iidx[static_cast<std::size_t>(a)] + 1) * m.gstrides[a];
        for (int a = 0; a < d; ++a) x[static_cast<std::size_t>(a)] = field.node_coord(a, iidx[static_cast<std::size_t>(a)] + 1);

        double dval = 0.0;
        double r = problem.forcing(x);
        for (int a = 0; a < d; ++a) {
            const double alo = harmonic(coeff[static_cast<std::size_t>(gp)], coeff[static_cast<std::size_t>(gp - m.gstrides[a])]) * inv_h2;
            const double ahi = harmonic(coeff[static_cast<std::size_t>(gp)], coeff[static_cast<std::size_t>(gp + m.gstrides[a])]) * inv_h2;
            as.face_lo[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)] = alo;
            as.face_hi[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)] = ahi;
            dval += alo + ahi;
            // Dirichlet neighbors move to the right-hand side
            if (iidx[static_cast<std::size_t>(a)] == 0)
                r += alo * field.values[static_cast<std::size_t>(gp - m.gstrides[a])];
            if (iidx[static_cast<std::size_t>(a)] == m.inpts[static_cast<std::size_t>(a)] - 1)
                r += ahi * field.values[static_cast<std::size_t>(gp + m.gstrides[a])];
        }
        as.diag[static_cast<std::size_t>(p)] = dval;
        as.rhs[static_cast<std::size_t>(p)] = r;
        for (int a = d - 1; a >= 0; --a) {
            if (++iidx[static_cast<std::size_t>(a)] < m.inpts[static_cast<std::size_t>(a)]) break;
            iidx[static_cast<std::size_t>(a)] = 0;
        }
    }
    return as;
}

}  // namespace

GridField fdm_solve(const ProblemDefinition& problem, double h, const FdmOptions& opt) {
    if (!problem.epsilons.empty()) {
        const double fine = *std::min_element(problem.epsilons.begin(), problem.epsilons.end());
        if (h > fine / 10.0 && !opt.quiet)
            std::fprintf(stderr,
                         "fdm_solve: warning: h=%g does not resolve the finest scale eps=%g "
                         "(want h <= eps/10); continuing anyway\n",
                         h, fine);
    }

    Assembled as = assemble(problem, h);
    const Mesh& m = as.m;
    const int d = m.dim;
    GridField& field = as.field;

    // Jacobi-preconditioned conjugate gradients
    const long long n = m.n_interior;
    std::vector<double> u(static_cast<std::size_t>(n), 0.0), r(as.rhs), z(static_cast<std::size_t>(n)),
        pvec(static_cast<std::size_t>(n)), ap(static_cast<std::size_t>(n));
    if (opt.start_seed != 0) {
        Rng rng(opt.start_seed);
        for (long long i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = rng.uniform_open(-1.0, 1.0);
        as.apply(u, ap);
        for (long long i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] -= ap[static_cast<std::size_t>(i)];
    }
    const double bnorm = std::sqrt(std::max(dot(as.rhs, as.rhs), 1e-300));
    for (long long i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i)] / as.diag[static_cast<std::size_t>(i)];
    pvec = z;
    double rz = dot(r, z);
    const long long cap = opt.max_iter > 0
                              ? opt.max_iter
                              : std::max<long long>(2000, 80LL * *std::max_element(m.npts.begin(), m.npts.end()));
    bool converged = std::sqrt(dot(r, r)) <= opt.tol * bnorm;
    long long it = 0;
    while (!converged && it < cap) {
        as.apply(pvec, ap);
        const double pap = dot(pvec, ap);
        if (!(pap > 0.0))
            throw NumericError("fdm_solve: system not positive definite (p'Ap = " + std::to_string(pap) + ")");
        const double alpha = rz / pap;
        for (long long i = 0; i < n; ++i) {
            u[static_cast<std::size_t>(i)] += alpha * pvec[static_cast<std::size_t>(i)];
            r[static_cast<std::size_t>(i)] -= alpha * ap[static_cast<std::size_t>(i)];
        }
        if (std::sqrt(dot(r, r)) <= opt.tol * bnorm) {
            converged = true;
            break;
        }
        for (long long i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i)] / as.diag[static_cast<std::size_t>(i)];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (long long i = 0; i < n; ++i)
            pvec[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] + beta * pvec[static_cast<std::size_t>(i)];
        ++it;
    }
    if (!converged)
        throw NumericError("fdm_solve: CG did not reach tol " + std::to_string(opt.tol) + " within " +
                           std::to_string(cap) + " iterations");

    // scatter interior solution into the grid
    std::vector<int> iidx(static_cast<std::size_t>(d), 0);
    for (long long p = 0; p < n; ++p) {
        long long gp = 0;
        for (int a = 0; a < d; ++a) gp += (iidx[static_cast<std::size_t>(a)] + 1) * m.gstrides[a];
        field.values[static_cast<std::size_t>(gp)] = u[static_cast<std::size_t>(p)];
        for (int a = d - 1; a >= 0; --a) {
            if (++iidx[static_cast<std::size_t>(a)] < m.inpts[static_cast<std::size_t>(a)]) break;
            iidx[static_cast<std::size_t>(a)] = 0;
        }
    }
    return field;
}

double fdm_symmetry_defect(const ProblemDefinition& problem, double h, std::uint64_t seed) {
    Assembled as = assemble(problem, h);
    const long long n = as.m.n_interior;
    Rng rng(seed);
    double worst = 0.0;
    std::vector<double> u(static_cast<std::size_t>(n)), v(static_cast<std::size_t>(n)),
        au(static_cast<std::size_t>(n)), av(static_cast<std::size_t>(n));
    for (int trial = 0; trial < 4; ++trial) {
        for (long long i = 0; i < n; ++i) {
            u[static_cast<std::size_t>(i)] = rng.uniform_open(-1.0, 1.0);
            v[static_cast<std::size_t>(i)] = rng.uniform_open(-1.0, 1.0);
        }
        as.apply(u, au);
        as.apply(v, av);
        const double a = dot(au, v), b = dot(u, av);
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
    }
    return worst;
}

double interpolate(const GridField& field, std::span<const double> x) {
    const int d = static_cast<int>(field.npts.size());
    if (!field.domain.contains(x)) throw ConfigError("interpolate: point outside the field domain");
    int base[3] = {0, 0, 0};
    double w[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a) {
        const double t = (x[static_cast<std::size_t>(a)] - field.domain.lo[static_cast<std::size_t>(a)]) / field.h;
        int i = static_cast<int>(std::floor(t));
        i = std::clamp(i, 0, field.npts[static_cast<std::size_t>(a)] - 2);
        base[a] = i;
        w[a] = t - i;
    }
    double acc = 0.0;
    for (int corner = 0; corner < (1 << d); ++corner) {
        double weight = 1.0;
        std::vector<int> idx(static_cast<std::size_t>(d));
        for (int a = 0; a < d; ++a) {
            const int bit = (corner >> a) & 1;
            idx[static_cast<std::size_t>(a)] = base[a] + bit;
            weight *= bit ? w[a] : (1.0 - w[a]);
        }
        acc += weight * field.values[static_cast<std::size_t>(field.index(idx))];
    }
    return acc;
}

double grid_rel_error(const GridField& field, const ScalarField& exact_u) {
    const int d = static_cast<int>(field.npts.size());
    KahanSum num, den;
    std::vector<int> gidx(static_cast<std::size_t>(d), 0);
    std::vector<double> x(static_cast<std::size_t>(d));
    const long long n = field.total();
    for (long long p = 0; p < n; ++p) {
        bool interior = true;
        for (int a = 0; a < d; ++a)
            if (gidx[static_cast<std::size_t>(a)] == 0 || gidx[static_cast<std::size_t>(a)] == field.npts[static_cast<std::size_t>(a)] - 1)
                interior = false;
        if (interior) {
            for (int a = 0; a < d; ++a) x[static_cast<std::size_t>(a)] = field.node_coord(a, gidx[static_cast<std::size_t>(a)]);
            const double ue = exact_u(x);
            const double diff = field.values[static_cast<std::size_t>(p)] - ue;
            num.add(diff * diff);
            den.add(ue * ue);
        }
        for (int a = d - 1; a >= 0; --a) {
            if (++gidx[static_cast<std::size_t>(a)] < field.npts[static_cast<std::size_t>(a)]) break;
            gidx[static_cast<std::size_t>(a)] = 0;
        }
    }
    if (!(den.value() > 0.0)) throw NumericError("grid_rel_error: zero reference norm");
    return std::sqrt(num.value() / den.value());
}

ConvergenceResult convergence_order(const ProblemDefinition& problem, const std::vector<double>& hs,
                                    const FdmOptions& opt) {
    if (!problem.exact_u) throw ConfigError("convergence_order: problem has no exact solution");
    if (hs.size() < 3) throw ConfigError("convergence_order: need at least three mesh sizes");
    ConvergenceResult res;
    for (double h : hs) {
        GridField f = fdm_solve(problem, h, opt);
        res.errors.push_back(grid_rel_error(f, *problem.exact_u));
    }
    // least-squares slope of log(err) against log(h)
    const std::size_t k = hs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double lx = std::log(hs[i]);
        const double ly = std::log(std::max(res.errors[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    res.order = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    bool rounding_level = false;
    for (double e : res.errors)
        if (e < 1e-12) rounding_level = true;
    bool monotone = true;
    for (std::size_t i = 1; i < k; ++i)
        if (res.errors[i - 1] <= res.errors[i]) monotone = false;  // hs assumed descending
    res.reliable = !rounding_level && monotone;
    return res;
}

void write_grid_field(const std::string& path, const GridField& field) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    const char magic[8] = {'F', 'M', 'G', 'R', 'I', 'D', '0', '1'};
    out.write(magic, 8);
    const std::int32_t d = static_cast<std::int32_t>(field.npts.size());
    out.write(reinterpret_cast<const char*>(&d), 4);
    out.write(reinterpret_cast<const char*>(&field.h), 8);
    for (int a = 0; a < d; ++a) {
        const std::int64_t n = field.npts[static_cast<std::size_t>(a)];
        out.write(reinterpret_cast<const char*>(&n), 8);
        out.write(reinterpret_cast<const char*>(&field.domain.lo[static_cast<std::size_t>(a)]), 8);
        out.write(reinterpret_cast<const char*>(&field.domain.hi[static_cast<std::size_t>(a)]), 8);
    }
    out.write(reinterpret_cast<const char*>(field.values.data()),
              static_cast<std::streamsize>(field.values.size() * 8));
    if (!out) throw ConfigError("short write: " + path);
}

GridField read_grid_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open grid field: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "FMGRID01", 8) != 0)
        throw ConfigError(path + ": not a grid field file");
    std::int32_t d = 0;
    in.read(reinterpret_cast<char*>(&d), 4);
    GridField f;
    in.read(reinterpret_cast<char*>(&f.h), 8);
    std::vector<double> lo, hi;
    for (int a = 0; a < d; ++a) {
        std::int64_t n = 0;
        double l = 0, hgh = 0;
        in.read(reinterpret_cast<char*>(&n), 8);
        in.read(reinterpret_cast<char*>(&l), 8);
        in.read(reinterpret_cast<char*>(&hgh), 8);
        f.npts.push_back(static_cast<int>(n));
        lo.push_back(l);
        hi.push_back(hgh);
    }
    f.domain = Box(lo, hi);
    f.values.resize(static_cast<std::size_t>(f.total()));
    in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * 8));
    if (!in) throw ConfigError(path + ": truncated grid field file");
    return f;
}

}  // namespace fmpinn
