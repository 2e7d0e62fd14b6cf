#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "fmpinn/network.hpp"
#include "fmpinn/problems.hpp"
#include "fmpinn/sampling.hpp"

namespace fmpinn {

/// Compensated (Kahan) accumulator; summation order is fixed everywhere it
/// is used, so losses are reproducible and permutation effects stay at
/// rounding level.
struct KahanSum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    double value() const { return s; }
};

struct LossBreakdown {
    double interior_pde = 0.0;   // |Omega|/N-weighted divergence residual
    double interior_flux = 0.0;  // |Omega|/N-weighted flux discrepancy (beta not applied)
    double boundary = 0.0;       // 1/N_bd-weighted boundary mismatch
    double gamma = 0.0;
    double beta = 0.0;
    double total = 0.0;          // interior_pde + beta*interior_flux + gamma*boundary

    static double combine(double pde, double flux, double bd, double beta, double gamma) {
        return pde + beta * flux + gamma * bd;
    }
};

/// Piecewise-constant boundary penalty: gamma0 through 500*gamma0 with
/// breakpoints at 0.1, 0.2, 0.25, 0.5 and 0.75 of the epoch budget,
/// left-closed from the second branch on.
double gamma_schedule(std::int64_t epoch, std::int64_t m_max, double gamma0);

/// Pointwise state of a (u, flux) ansatz.
struct PointState {
    double u = 0.0;
    std::vector<double> flux;
    std::vector<double> grad_u;
    double div_flux = 0.0;
};

/// Anything that can stand in the loss where the network goes: the real
/// model, or an exact-solution stub.
class FluxModel {
public:
    virtual ~FluxModel() = default;
    virtual int dim() const = 0;
    virtual double u_value(std::span<const double> x) const = 0;
    virtual PointState eval(std::span<const double> x) const = 0;
    /// u, its gradient and diagonal second derivatives (baseline residual).
    virtual void eval_second(std::span<const double> x, double& u, std::vector<double>& grad_u,
                             std::vector<double>& d2_diag) const = 0;
};

/// Pointwise evaluation of an actual network through dual-number forwards.
class NetworkFluxModel final : public FluxModel {
public:
    explicit NetworkFluxModel(const Parameters& params);
    int dim() const override { return params_.config.dim_in; }
    double u_value(std::span<const double> x) const override;
    PointState eval(std::span<const double> x) const override;
    void eval_second(std::span<const double> x, double& u, std::vector<double>& grad_u,
                     std::vector<double>& d2_diag) const override;

private:
    Parameters params_;
};

/// Exact-function stub built from closed-form u and flux fields.
class ExactSolutionModel final : public FluxModel {
public:
    ExactSolutionModel(ScalarField u, std::vector<ScalarField> flux);
    static ExactSolutionModel for_problem(const ProblemDefinition& p);
    int dim() const override { return static_cast<int>(flux_.size()); }
    double u_value(std::span<const double> x) const override { return u_(x); }
    PointState eval(std::span<const double> x) const override;
    void eval_second(std::span<const double> x, double& u, std::vector<double>& grad_u,
                     std::vector<double>& d2_diag) const override;

private:
    ScalarField u_;
    std::vector<ScalarField> flux_;
};

/// Monte-Carlo interior loss parts: (|Omega|/N) sum |−div phi − f|^2 and
/// (|Omega|/N) sum |phi − A grad u|^2. The caller applies beta.
std::pair<double, double> fmpinn_interior_loss(const FluxModel& model, const Eigen::MatrixXd& interior,
                                               const ProblemDefinition& problem, double measure);

/// (1/N_bd) sum (u − g)^2.
double boundary_loss(const FluxModel& model, const Eigen::MatrixXd& boundary,
                     const ProblemDefinition& problem);

LossBreakdown fmpinn_total_loss(const FluxModel& model, const SampleBatch& batch,
                                const ProblemDefinition& problem, double beta, double gamma);

/// Classical residual (1/N) sum |−div(A grad u) − f|^2; needs second
/// derivatives of u and the coefficient's gradient.
double mpinn_interior_loss(const FluxModel& model, const Eigen::MatrixXd& interior,
                           const ProblemDefinition& problem);

LossBreakdown mpinn_total_loss(const FluxModel& model, const SampleBatch& batch,
                               const ProblemDefinition& problem, double gamma);

/// Loss value and full parameter gradient through the recorded tape
/// (reverse over the forward-mode input-derivative computation). Reference
/// path: exact but built for small models.
struct TapeLossResult {
    LossBreakdown parts;
    std::vector<double> gradient;
};
TapeLossResult fmpinn_loss_tape_grad(const Parameters& params, const SampleBatch& batch,
                                     const ProblemDefinition& problem, double beta, double gamma);
TapeLossResult mpinn_loss_tape_grad(const Parameters& params, const SampleBatch& batch,
                                    const ProblemDefinition& problem, double gamma);

}  // namespace fmpinn
