#include "fmpinn/trainer.hpp"

#include <omp.h>

#include <cmath>

#include "fmpinn/loss.hpp"
#include "fmpinn/sampling.hpp"

namespace fmpinn {

std::string to_string(Method m) { return m == Method::fmpinn ? "fmpinn" : "mpinn"; }

Method method_from_string(const std::string& s) {
    if (s == "fmpinn") return Method::fmpinn;
    if (s == "mpinn") return Method::mpinn;
    throw ConfigError("unknown method: " + s + " (expected fmpinn or mpinn)");
}

void TrainConfig::validate() const {
    if (epochs < 0) throw ConfigError("train: epochs must be non-negative");
    if (!(lr0 > 0.0)) throw ConfigError("train: lr0 must be positive");
    if (!(lr_decay > 0.0 && lr_decay < 1.0)) throw ConfigError("train: lr_decay must lie in (0,1)");
    if (eval_every <= 0) throw ConfigError("train: eval_every must be positive");
    if (n_interior <= 0 || n_boundary <= 0) throw ConfigError("train: sample counts must be positive");
    if (!(beta > 0.0)) throw ConfigError("train: beta must be positive");
    if (!(gamma0 > 0.0)) throw ConfigError("train: gamma0 must be positive");
}

double lr_schedule(std::int64_t epoch, double lr0, double decay) {
    if (epoch < 0) throw ConfigError("lr_schedule: negative epoch");
    return lr0 * std::pow(1.0 - decay, static_cast<double>(epoch / 100));
}

AdamState AdamState::init(std::int64_t n) {
    AdamState s;
    s.m = Eigen::VectorXd::Zero(n);
    s.v = Eigen::VectorXd::Zero(n);
    return s;
}

void adam_step(AdamState& st, Eigen::Ref<Eigen::VectorXd> theta,
               const Eigen::Ref<const Eigen::VectorXd>& grad, double lr) {
    if (grad.size() != theta.size() || st.m.size() != theta.size())
        throw ConfigError("adam_step: shape mismatch");
    if (!grad.allFinite()) throw NumericError("adam_step: non-finite gradient");
    ++st.t;
    st.m = st.beta1 * st.m + (1.0 - st.beta1) * grad;
    st.v = st.beta2 * st.v + (1.0 - st.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
    const double step = lr / bc1;
    const double vscale = 1.0 / bc2;
    theta.array() -=
        step * st.m.array() / ((st.v.array() * vscale).sqrt() + st.eps);
}

TestSet make_test_set(const ProblemDefinition& problem, std::uint64_t seed,
                      const GridField* reference_field) {
    TestSet t;
    const int d = problem.dim;
    if (d == 1) {
        t.points = eval_grid(problem.domain, (problem.domain.hi[0] - problem.domain.lo[0]) / 999.0);
    } else if (reference_field) {
        std::map<int, double> slice;
        if (d == 3) slice[2] = 0.3125;  // reporting plane for the 3d benchmark
        t.points = eval_grid(problem.domain, reference_field->h, slice);
    } else if (problem.exact_u && d > 3) {
        Rng rng = Rng(seed).substream(2);
        t.points = sample_interior(1600, problem.domain, rng);
    } else if (problem.exact_u) {
        t.points = eval_grid(problem.domain, (problem.domain.hi[0] - problem.domain.lo[0]) / 64.0);
    } else {
        throw ConfigError(problem.name +
                          ": no reference available for testing (need exact_u or an oracle field)");
    }

    const long long n = t.points.cols();
    t.reference.resize(n);
    for (long long i = 0; i < n; ++i) {
        std::span<const double> x(t.points.col(i).data(), static_cast<std::size_t>(d));
        t.reference[i] = problem.exact_u ? (*problem.exact_u)(x) : interpolate(*reference_field, x);
    }
    return t;
}

std::pair<double, Eigen::VectorXd> evaluate(const Parameters& params, const TestSet& test,
                                            int threads) {
    if (test.points.cols() != test.reference.size())
        throw ConfigError("evaluate: reference values not aligned with test points");
    EngineOptions opt;
    opt.threads = threads;
    const Eigen::MatrixXd out = mscale_forward_batch(params, test.points, opt);
    KahanSum num, den;
    Eigen::VectorXd pointwise(test.reference.size());
    for (long long i = 0; i < test.reference.size(); ++i) {
        const double diff = out(0, i) - test.reference[i];
        pointwise[i] = std::abs(diff);
        num.add(diff * diff);
        den.add(test.reference[i] * test.reference[i]);
    }
    if (!(den.value() > 0.0))
        throw NumericError("evaluate: reference is identically zero, REL undefined");
    return {std::sqrt(num.value() / den.value()), std::move(pointwise)};
}

std::pair<Parameters, RunRecord> train(const ProblemDefinition& problem, const NetworkConfig& net_cfg,
                                       const TrainConfig& cfg, const TestSet& test,
                                       const TrainCallbacks& callbacks) {
    cfg.validate();
    net_cfg.validate();
    const double t0 = omp_get_wtime();

    Parameters params = init_parameters(net_cfg, cfg.seed);
    AdamState adam = AdamState::init(params.count());
    Rng batch_rng = Rng(cfg.seed).substream(1);

    RunRecord rec;
    rec.seed = cfg.seed;
    rec.problem = problem.name;
    rec.method = to_string(cfg.method);
    rec.lambda_min = problem.lambda_min;
    rec.lambda_max = problem.lambda_max;

    EngineOptions eopt;
    eopt.beta = cfg.beta;
    eopt.threads = cfg.deterministic ? 1 : cfg.threads;
    eopt.chunk = cfg.chunk;
    eopt.fast_trig = cfg.fast_trig;

    SampleBatch batch;
    bool have_batch = false;
    EngineScratch scratch;

    for (std::int64_t e = 0; e < cfg.epochs; ++e) {
        const double lr = lr_schedule(e, cfg.lr0, cfg.lr_decay);
        const double gamma = gamma_schedule(e, cfg.epochs, cfg.gamma0);
        if (callbacks.on_epoch) callbacks.on_epoch(e, lr, gamma);
        eopt.gamma = gamma;

        if (!have_batch || !cfg.fixed_batch) {
            batch = draw_batch(cfg.n_interior, cfg.n_boundary, problem.domain, batch_rng);
            have_batch = true;
        }

        EngineResult step;
        try {
            step = (cfg.method == Method::fmpinn)
                       ? fmpinn_loss_grad(params, batch, problem, eopt, &scratch)
                       : mpinn_loss_grad(params, batch, problem, eopt, &scratch);
            adam_step(adam, Eigen::Map<Eigen::VectorXd>(params.values.data(), params.count()),
                      step.grad, lr);
        } catch (const NumericError& err) {
            rec.epochs_run = e;
            rec.wall_seconds = omp_get_wtime() - t0;
            throw NumericError(std::string(err.what()) + " (epoch " + std::to_string(e) + ")", e);
        }

        if ((e + 1) % cfg.eval_every == 0 || e + 1 == cfg.epochs) {
            EvalRow row;
            row.epoch = e + 1;
            row.lr = lr;
            row.gamma = gamma;
            row.loss_pde = step.parts.interior_pde;
            row.loss_flux = step.parts.interior_flux;
            row.loss_boundary = step.parts.boundary;
            row.loss_total = step.parts.total;
            row.rel = evaluate(params, test, eopt.threads).first;
            rec.rows.push_back(row);
            if (callbacks.on_eval) callbacks.on_eval(row, params);
        }
    }

    rec.epochs_run = cfg.epochs;
    if (!rec.rows.empty()) rec.final_rel = rec.rows.back().rel;
    rec.wall_seconds = omp_get_wtime() - t0;
    return {std::move(params), std::move(rec)};
}

}  // namespace fmpinn
