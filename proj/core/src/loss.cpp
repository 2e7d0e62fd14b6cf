#include "fmpinn/loss.hpp"

#include <cmath>

#include "fmpinn/tape.hpp"

namespace fmpinn {

double gamma_schedule(std::int64_t epoch, std::int64_t m_max, double gamma0) {
    if (epoch < 0 || epoch >= m_max)
        throw ConfigError("gamma_schedule: epoch " + std::to_string(epoch) + " outside [0, " +
                          std::to_string(m_max) + ")");
    const double e = static_cast<double>(epoch);
    const double m = static_cast<double>(m_max);
    if (e < 0.1 * m) return gamma0;
    if (e < 0.2 * m) return 10.0 * gamma0;
    if (e < 0.25 * m) return 50.0 * gamma0;
    if (e < 0.5 * m) return 100.0 * gamma0;
    if (e < 0.75 * m) return 200.0 * gamma0;
    return 500.0 * gamma0;
}

// ---- models -----------------------------------------------------------------

NetworkFluxModel::NetworkFluxModel(const Parameters& params) : params_(params) {
    if (params_.config.dim_out != params_.config.dim_in + 1 && params_.config.dim_out != 1)
        throw ConfigError("NetworkFluxModel: dim_out must be 1+d (mixed) or 1 (baseline)");
}

double NetworkFluxModel::u_value(std::span<const double> x) const {
    return mscale_forward(params_, x).u;
}

PointState NetworkFluxModel::eval(std::span<const double> x) const {
    const int d = params_.config.dim_in;
    if (params_.config.dim_out != d + 1)
        throw ConfigError("NetworkFluxModel::eval needs a multi-output (u, flux) network");
    PointState st;
    st.flux.resize(static_cast<std::size_t>(d));
    st.grad_u.resize(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        DirectionalDerivatives dd = forward_directional(params_, x, k, 1);
        if (k == 0) {
            st.u = dd.value[0];
            for (int j = 0; j < d; ++j) st.flux[static_cast<std::size_t>(j)] = dd.value[static_cast<std::size_t>(1 + j)];
        }
        st.grad_u[static_cast<std::size_t>(k)] = dd.d1[0];
        st.div_flux += dd.d1[static_cast<std::size_t>(1 + k)];
    }
    return st;
}

void NetworkFluxModel::eval_second(std::span<const double> x, double& u, std::vector<double>& grad_u,
                                   std::vector<double>& d2_diag) const {
    const int d = params_.config.dim_in;
    grad_u.resize(static_cast<std::size_t>(d));
    d2_diag.resize(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        DirectionalDerivatives dd = forward_directional(params_, x, k, 2);
        if (k == 0) u = dd.value[0];
        grad_u[static_cast<std::size_t>(k)] = dd.d1[0];
        d2_diag[static_cast<std::size_t>(k)] = dd.d2[0];
    }
}

ExactSolutionModel::ExactSolutionModel(ScalarField u, std::vector<ScalarField> flux)
    : u_(std::move(u)), flux_(std::move(flux)) {}

ExactSolutionModel ExactSolutionModel::for_problem(const ProblemDefinition& p) {
    if (!p.exact_u || !p.exact_flux)
        throw ConfigError(p.name + ": problem has no closed-form solution/flux for a stub model");
    return ExactSolutionModel(*p.exact_u, *p.exact_flux);
}

PointState ExactSolutionModel::eval(std::span<const double> x) const {
    const int d = dim();
    PointState st;
    st.u = u_(x);
    st.flux.resize(static_cast<std::size_t>(d));
    st.grad_u.resize(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        st.flux[static_cast<std::size_t>(k)] = flux_[static_cast<std::size_t>(k)](x);
        st.grad_u[static_cast<std::size_t>(k)] = u_.partial(x, k);
        st.div_flux += flux_[static_cast<std::size_t>(k)].partial(x, k);
    }
    return st;
}

void ExactSolutionModel::eval_second(std::span<const double> x, double& u, std::vector<double>& grad_u,
                                     std::vector<double>& d2_diag) const {
    const int d = dim();
    grad_u.resize(static_cast<std::size_t>(d));
    d2_diag.resize(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        double v, d1, d2;
        u_.partial2(x, k, v, d1, d2);
        if (k == 0) u = v;
        grad_u[static_cast<std::size_t>(k)] = d1;
        d2_diag[static_cast<std::size_t>(k)] = d2;
    }
}

// ---- reference loss assembly --------------------------------------------------

std::pair<double, double> fmpinn_interior_loss(const FluxModel& model, const Eigen::MatrixXd& interior,
                                               const ProblemDefinition& problem, double measure) {
    const int d = problem.dim;
    const int n = static_cast<int>(interior.cols());
    if (n <= 0) throw ConfigError("fmpinn_interior_loss: empty interior batch");
    KahanSum pde, flux;
    for (int i = 0; i < n; ++i) {
        std::span<const double> x(interior.col(i).data(), static_cast<std::size_t>(d));
        PointState st = model.eval(x);
        const double a = problem.coefficient(x);
        const double f = problem.forcing(x);
        const double r1 = -st.div_flux - f;
        pde.add(r1 * r1);
        for (int k = 0; k < d; ++k) {
            const double r2 = st.flux[static_cast<std::size_t>(k)] - a * st.grad_u[static_cast<std::size_t>(k)];
            flux.add(r2 * r2);
        }
    }
    const double w = measure / n;
    return {w * pde.value(), w * flux.value()};
}

double boundary_loss(const FluxModel& model, const Eigen::MatrixXd& boundary,
                     const ProblemDefinition& problem) {
    const int nb = static_cast<int>(boundary.cols());
    if (nb <= 0) throw ConfigError("boundary_loss: empty boundary batch");
    KahanSum acc;
    for (int j = 0; j < nb; ++j) {
        std::span<const double> x(boundary.col(j).data(), static_cast<std::size_t>(problem.dim));
        const double r = model.u_value(x) - problem.boundary(x);
        acc.add(r * r);
    }
    return acc.value() / nb;
}

LossBreakdown fmpinn_total_loss(const FluxModel& model, const SampleBatch& batch,
                                const ProblemDefinition& problem, double beta, double gamma) {
    if (!(beta > 0.0)) throw ConfigError("fmpinn_total_loss: beta must be positive");
    LossBreakdown b;
    std::tie(b.interior_pde, b.interior_flux) =
        fmpinn_interior_loss(model, batch.interior, problem, batch.domain_measure);
    b.boundary = boundary_loss(model, batch.boundary, problem);
    b.beta = beta;
    b.gamma = gamma;
    b.total = LossBreakdown::combine(b.interior_pde, b.interior_flux, b.boundary, beta, gamma);
    return b;
}

double mpinn_interior_loss(const FluxModel& model, const Eigen::MatrixXd& interior,
                           const ProblemDefinition& problem) {
    const int d = problem.dim;
    const int n = static_cast<int>(interior.cols());
    if (n <= 0) throw ConfigError("mpinn_interior_loss: empty interior batch");
    if (!problem.coefficient.differentiable())
        throw ConfigError("mpinn_interior_loss: coefficient is not differentiable through the primitive set");
    KahanSum acc;
    std::vector<double> grad_u, d2_diag;
    for (int i = 0; i < n; ++i) {
        std::span<const double> x(interior.col(i).data(), static_cast<std::size_t>(d));
        double u = 0.0;
        model.eval_second(x, u, grad_u, d2_diag);
        const double a = problem.coefficient(x);
        double div_flux = 0.0;
        for (int k = 0; k < d; ++k)
            div_flux += problem.coefficient.partial(x, k) * grad_u[static_cast<std::size_t>(k)] +
                        a * d2_diag[static_cast<std::size_t>(k)];
        const double r = -div_flux - problem.forcing(x);
        acc.add(r * r);
    }
    return acc.value() / n;
}

LossBreakdown mpinn_total_loss(const FluxModel& model, const SampleBatch& batch,
                               const ProblemDefinition& problem, double gamma) {
    LossBreakdown b;
    b.interior_pde = mpinn_interior_loss(model, batch.interior, problem);
    b.interior_flux = 0.0;
    b.boundary = boundary_loss(model, batch.boundary, problem);
    b.beta = 0.0;
    b.gamma = gamma;
    b.total = LossBreakdown::combine(b.interior_pde, 0.0, b.boundary, 0.0, gamma);
    return b;
}

// ---- recorded-tape losses -----------------------------------------------------

namespace {

std::vector<TVar> lift_params(Tape& tape, const Parameters& params) {
    std::vector<TVar> leaves;
    leaves.reserve(params.values.size());
    for (double v : params.values) leaves.push_back(tape.leaf(v));
    return leaves;
}

}  // namespace

TapeLossResult fmpinn_loss_tape_grad(const Parameters& params, const SampleBatch& batch,
                                     const ProblemDefinition& problem, double beta, double gamma) {
    const int d = problem.dim;
    const int n = static_cast<int>(batch.interior.cols());
    const int nb = static_cast<int>(batch.boundary.cols());
    Tape tape;
    std::vector<TVar> theta = lift_params(tape, params);
    std::span<const TVar> flat(theta);

    using DT = Dual1<TVar>;
    TVar pde_sum = tape.leaf(0.0);
    TVar flux_sum = tape.leaf(0.0);
    std::vector<DT> in(static_cast<std::size_t>(d));
    for (int i = 0; i < n; ++i) {
        TVar div_phi = tape.leaf(0.0);
        std::vector<TVar> phi(static_cast<std::size_t>(d));
        std::vector<TVar> grad_u(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            for (int j = 0; j < d; ++j)
                in[static_cast<std::size_t>(j)] =
                    DT{tape.leaf(batch.interior(j, i)), tape.leaf(j == k ? 1.0 : 0.0)};
            std::vector<DT> out =
                mscale_forward_raw<DT, TVar>(params.config, params.layout, flat, in);
            if (k == 0) {
                for (int j = 0; j < d; ++j) phi[static_cast<std::size_t>(j)] = out[static_cast<std::size_t>(1 + j)].v;
            }
            grad_u[static_cast<std::size_t>(k)] = out[0].d;
            div_phi = div_phi + out[static_cast<std::size_t>(1 + k)].d;
        }
        std::span<const double> x(batch.interior.col(i).data(), static_cast<std::size_t>(d));
        const double a = problem.coefficient(x);
        const double f = problem.forcing(x);
        TVar r1 = -div_phi - f;
        pde_sum = pde_sum + r1 * r1;
        for (int k = 0; k < d; ++k) {
            TVar r2 = phi[static_cast<std::size_t>(k)] - a * grad_u[static_cast<std::size_t>(k)];
            flux_sum = flux_sum + r2 * r2;
        }
    }

    TVar bd_sum = tape.leaf(0.0);
    for (int j = 0; j < nb; ++j) {
        std::vector<TVar> xb(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) xb[static_cast<std::size_t>(k)] = tape.leaf(batch.boundary(k, j));
        std::vector<TVar> out = mscale_forward_raw<TVar, TVar>(params.config, params.layout, flat, xb);
        std::span<const double> x(batch.boundary.col(j).data(), static_cast<std::size_t>(d));
        TVar r = out[0] - problem.boundary(x);
        bd_sum = bd_sum + r * r;
    }

    const double w_in = batch.domain_measure / n;
    TVar pde = pde_sum * w_in;
    TVar flux = flux_sum * w_in;
    TVar bd = bd_sum * (1.0 / nb);
    TVar total = pde + beta * flux + gamma * bd;

    TapeLossResult r;
    r.parts.interior_pde = tape.value(pde);
    r.parts.interior_flux = tape.value(flux);
    r.parts.boundary = tape.value(bd);
    r.parts.beta = beta;
    r.parts.gamma = gamma;
    r.parts.total = tape.value(total);
    r.gradient = tape.gradient(total, theta);
    return r;
}

TapeLossResult mpinn_loss_tape_grad(const Parameters& params, const SampleBatch& batch,
                                    const ProblemDefinition& problem, double gamma) {
    if (params.config.dim_out != 1)
        throw ConfigError("mpinn_loss_tape_grad: baseline network must have dim_out = 1");
    const int d = problem.dim;
    const int n = static_cast<int>(batch.interior.cols());
    const int nb = static_cast<int>(batch.boundary.cols());
    Tape tape;
    std::vector<TVar> theta = lift_params(tape, params);
    std::span<const TVar> flat(theta);

    using DT = Dual2<TVar>;
    TVar res_sum = tape.leaf(0.0);
    std::vector<DT> in(static_cast<std::size_t>(d));
    for (int i = 0; i < n; ++i) {
        std::span<const double> x(batch.interior.col(i).data(), static_cast<std::size_t>(d));
        const double a = problem.coefficient(x);
        TVar div_flux = tape.leaf(0.0);
        for (int k = 0; k < d; ++k) {
            for (int j = 0; j < d; ++j)
                in[static_cast<std::size_t>(j)] = DT{tape.leaf(batch.interior(j, i)),
                                                     tape.leaf(j == k ? 1.0 : 0.0), tape.leaf(0.0)};
            std::vector<DT> out =
                mscale_forward_raw<DT, TVar>(params.config, params.layout, flat, in);
            const double da = problem.coefficient.partial(x, k);
            div_flux = div_flux + da * out[0].d1 + a * out[0].d2;
        }
        TVar r = -div_flux - problem.forcing(x);
        res_sum = res_sum + r * r;
    }

    TVar bd_sum = tape.leaf(0.0);
    for (int j = 0; j < nb; ++j) {
        std::vector<TVar> xb(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) xb[static_cast<std::size_t>(k)] = tape.leaf(batch.boundary(k, j));
        std::vector<TVar> out = mscale_forward_raw<TVar, TVar>(params.config, params.layout, flat, xb);
        std::span<const double> x(batch.boundary.col(j).data(), static_cast<std::size_t>(d));
        TVar r = out[0] - problem.boundary(x);
        bd_sum = bd_sum + r * r;
    }

    TVar pde = res_sum * (1.0 / n);
    TVar bd = bd_sum * (1.0 / nb);
    TVar total = pde + gamma * bd;

    TapeLossResult r;
    r.parts.interior_pde = tape.value(pde);
    r.parts.boundary = tape.value(bd);
    r.parts.gamma = gamma;
    r.parts.total = tape.value(total);
    r.gradient = tape.gradient(total, theta);
    return r;
}

}  // namespace fmpinn
