#include "fmpinn/validate.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "fmpinn/batch_engine.hpp"
#include "fmpinn/fdm.hpp"
#include "fmpinn/format.hpp"
#include "fmpinn/loss.hpp"
#include "fmpinn/network.hpp"
#include "fmpinn/problems.hpp"
#include "fmpinn/sampling.hpp"
#include "fmpinn/tape.hpp"
#include "fmpinn/trainer.hpp"

namespace fmpinn {

namespace {

using Check = std::function<std::pair<bool, std::string>()>;

NetworkConfig small_net_config() {
    NetworkConfig cfg;
    cfg.dim_in = 1;
    cfg.dim_out = 2;
    cfg.scales = {1, 2, 4};
    cfg.hidden = {6, 6, 6};
    return cfg;
}

std::pair<bool, std::string> check_dual_fd() {
    Rng rng(11);
    double worst = 0.0;
    const double h = 1e-6;
    for (int trial = 0; trial < 200; ++trial) {
        const double x = rng.uniform_open(-2.0, 2.0);
        auto f = [](auto v) { return sin(3.0 * v) * exp(0.2 * v) + 1.0 / (2.0 + cos(v)); };
        const Dual1<double> r = f(Dual1<double>::variable(x));
        const double fd = (f(x + h) - f(x - h)) / (2.0 * h);
        worst = std::max(worst, std::abs(r.d - fd) / std::max(1.0, std::abs(fd)));
    }
    return {worst <= 1e-6, "max rel err " + format_short(worst)};
}

std::pair<bool, std::string> check_tape_forward_reverse() {
    // gradient of a random recorded scalar vs per-leaf forward mode
    Rng rng(17);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> vals(5);
        for (double& v : vals) v = rng.uniform_open(0.3, 2.0);
        auto f = []<class T>(std::span<const T> p) -> T {
            T y = p[0] * p[1] + sin(p[2]) * p[3];
            return y * y + exp(p[4] * 0.3) / (1.0 + p[0] * p[0]);
        };
        Tape tape;
        std::vector<TVar> leaves;
        for (double v : vals) leaves.push_back(tape.leaf(v));
        std::vector<double> g = tape.gradient(f(std::span<const TVar>(leaves)), leaves);
        for (std::size_t i = 0; i < vals.size(); ++i) {
            std::vector<Dual1<double>> dv(vals.begin(), vals.end());
            dv[i].d = 1.0;
            const double fwd = f(std::span<const Dual1<double>>(dv)).d;
            worst = std::max(worst, std::abs(g[i] - fwd) / std::max(1.0, std::abs(fwd)));
        }
    }
    return {worst <= 1e-10, "max rel err " + format_short(worst)};
}

std::pair<bool, std::string> check_tape_vs_batched() {
    const NetworkConfig cfg = small_net_config();
    Parameters params = init_parameters(cfg, 5);
    ProblemDefinition prob = example_1d_two_scale(0.5);
    Rng rng(23);
    SampleBatch batch = draw_batch(16, 6, prob.domain, rng);
    TapeLossResult ref = fmpinn_loss_tape_grad(params, batch, prob, 10.0, 10.0);
    EngineOptions opt;
    opt.beta = 10.0;
    opt.gamma = 10.0;
    opt.fast_trig = false;
    EngineResult fast = fmpinn_loss_grad(params, batch, prob, opt);
    double worst = std::abs(ref.parts.total - fast.parts.total) / std::max(1.0, std::abs(ref.parts.total));
    for (long long i = 0; i < fast.grad.size(); ++i)
        worst = std::max(worst, std::abs(fast.grad[i] - ref.gradient[static_cast<std::size_t>(i)]) /
                                    std::max(1.0, std::abs(ref.gradient[static_cast<std::size_t>(i)])));
    return {worst <= 1e-11, "max rel err " + format_short(worst)};
}

std::pair<bool, std::string> check_gamma_table(const ValidationHooks& hooks) {
    auto gamma = hooks.gamma_fn ? hooks.gamma_fn : gamma_schedule;
    const std::int64_t m = 50000;
    const double g0 = 10.0;
    const std::pair<std::int64_t, double> table[] = {
        {0, 10},      {4999, 10},    {5000, 100},   {9999, 100},
        {10000, 500}, {12499, 500},  {12500, 1000}, {24999, 1000},
        {25000, 2000}, {37499, 2000}, {37500, 5000}, {49999, 5000}};
    for (const auto& [e, want] : table)
        if (gamma(e, m, g0) != want)
            return {false, "epoch " + std::to_string(e) + ": got " + format_short(gamma(e, m, g0)) +
                               ", want " + format_short(want)};
    return {true, "12 breakpoints exact"};
}

std::pair<bool, std::string> check_lr_table(const ValidationHooks& hooks) {
    auto lr = hooks.lr_fn ? hooks.lr_fn : lr_schedule;
    if (lr(0, 0.01, 0.025) != 0.01) return {false, "epoch 0"};
    if (lr(100, 0.01, 0.025) != 0.00975) return {false, "epoch 100"};
    if (lr(250, 0.01, 0.025) != 0.01 * 0.975 * 0.975) return {false, "epoch 250"};
    return {true, "0.01 / 0.00975 / 0.00950625 exact"};
}

std::pair<bool, std::string> check_fourier_range() {
    NetworkConfig cfg = small_net_config();
    Parameters params = init_parameters(cfg, 9);
    Rng rng(31);
    double lo = 1.0, hi = -1.0;
    for (int trial = 0; trial < 500; ++trial) {
        const double x = rng.uniform_open(0.0, 1.0);
        for (int s = 0; s < cfg.num_subnets(); ++s) {
            const double a = cfg.scales[static_cast<std::size_t>(s)];
            std::vector<double> xh = {a * x};
            // first-layer slice of the subnet forward
            const auto& L0 = params.layout.subnet[static_cast<std::size_t>(s)][0];
            for (int r = 0; r < L0.rows; ++r) {
                const double z = params.values[static_cast<std::size_t>(L0.w_off + r)] * xh[0] +
                                 params.values[static_cast<std::size_t>(L0.b_off + r)];
                lo = std::min({lo, std::cos(z), std::sin(z)});
                hi = std::max({hi, std::cos(z), std::sin(z)});
            }
        }
    }
    const bool ok = lo >= -1.0 && hi <= 1.0;
    return {ok, "range [" + format_short(lo) + ", " + format_short(hi) + "]"};
}

std::pair<bool, std::string> check_aggregation_equivalence() {
    NetworkConfig cfg = small_net_config();
    Parameters mean_params = init_parameters(cfg, 13);

    NetworkConfig head_cfg = cfg;
    head_cfg.aggregation = Aggregation::linear_head;
    Parameters head_params = init_parameters(head_cfg, 13);
    std::copy(mean_params.values.begin(), mean_params.values.end(), head_params.values.begin());
    // head fixed to the 1/(Q a_i) block structure
    const auto& H = head_params.layout.head;
    const int m = cfg.dim_out, q = cfg.num_subnets();
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(H.rows) * H.cols; ++i)
        head_params.values[static_cast<std::size_t>(H.w_off + i)] = 0.0;
    for (int s = 0; s < q; ++s)
        for (int r = 0; r < m; ++r) {
            const std::int64_t col = static_cast<std::int64_t>(s) * m + r;
            head_params.values[static_cast<std::size_t>(H.w_off + col * H.rows + r)] =
                1.0 / (q * cfg.scales[static_cast<std::size_t>(s)]);
        }
    for (int r = 0; r < m; ++r) head_params.values[static_cast<std::size_t>(H.b_off + r)] = 0.0;

    Rng rng(37);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x = {rng.uniform_open(0.0, 1.0)};
        NetworkOutput a = mscale_forward(mean_params, x);
        NetworkOutput b = mscale_forward(head_params, x);
        worst = std::max(worst, std::abs(a.u - b.u));
        for (std::size_t k = 0; k < a.flux.size(); ++k)
            worst = std::max(worst, std::abs(a.flux[k] - b.flux[k]));
    }
    return {worst <= 1e-14, "max abs diff " + format_short(worst)};
}

std::pair<bool, std::string> check_exact_stub_ex1() {
    ProblemDefinition prob = example_1d_two_scale(0.1);
    ExactSolutionModel stub = ExactSolutionModel::for_problem(prob);
    Rng rng(41);
    SampleBatch batch = draw_batch(1000, 200, prob.domain, rng);
    LossBreakdown b = fmpinn_total_loss(stub, batch, prob, 10.0, 10.0);
    const bool ok = b.interior_pde <= 1e-8 && b.interior_flux <= 1e-8 && b.boundary <= 1e-12;
    return {ok, "pde " + format_short(b.interior_pde) + ", flux " + format_short(b.interior_flux) +
                    ", bd " + format_short(b.boundary)};
}

std::pair<bool, std::string> check_forcing_generator() {
    ProblemDefinition prob = example_1d_two_scale(0.1);
    ScalarField f = differentiate_forcing(prob.coefficient, *prob.exact_u, 1);
    Rng rng(43);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        std::vector<double> x = {rng.uniform_open(0.0, 1.0)};
        worst = std::max(worst, std::abs(f(x) - 1.0));
    }
    return {worst <= 1e-8, "max |f - 1| = " + format_short(worst)};
}

std::pair<bool, std::string> check_fdm_quadratic() {
    // A = 1, f = 2, g = 0 on [0,1]: u = x(1-x) reproduced to rounding
    ProblemDefinition p;
    p.name = "quadratic";
    p.dim = 1;
    p.domain = Box::cube(1, 0.0, 1.0);
    p.coefficient = ScalarField::from([]<class T>(std::span<const T> x) -> T { return x[0] * 0.0 + 1.0; });
    p.forcing = ScalarField::from([]<class T>(std::span<const T> x) -> T { return x[0] * 0.0 + 2.0; });
    p.boundary = ScalarField::from([]<class T>(std::span<const T> x) -> T { return x[0] * 0.0; });
    run_ellipticity_probe(p, 100);
    GridField f = fdm_solve(p, 1.0 / 128.0, {1e-13, 0, true});
    double worst = 0.0;
    for (int i = 0; i <= 128; ++i) {
        const double x = i / 128.0;
        worst = std::max(worst, std::abs(f.values[static_cast<std::size_t>(i)] - x * (1.0 - x)));
    }
    return {worst <= 1e-12, "max node err " + format_short(worst)};
}

std::pair<bool, std::string> check_fdm_symmetry() {
    ProblemDefinition prob = example_2d_two_scale(0.5);
    const double defect = fdm_symmetry_defect(prob, 1.0 / 16.0, 61);
    return {defect <= 1e-12, "max <Au,v>-<u,Av> defect " + format_short(defect)};
}

std::pair<bool, std::string> check_max_principle() {
    ProblemDefinition prob = example_2d_two_scale(0.5);
    GridField f = fdm_solve(prob, 1.0 / 32.0, {1e-11, 0, true});
    double mn = 0.0;
    for (double v : f.values) mn = std::min(mn, v);
    return {mn >= -1e-12, "min nodal value " + format_short(mn)};
}

std::pair<bool, std::string> check_sampling() {
    Box box = Box::cube(2, -1.0, 1.0);
    Rng rng(53);
    Eigen::MatrixXd a = sample_interior(500, box, rng);
    Rng rng2(53);
    Eigen::MatrixXd b = sample_interior(500, box, rng2);
    if ((a - b).cwiseAbs().maxCoeff() != 0.0) return {false, "same seed produced different batches"};
    for (int i = 0; i < a.cols(); ++i)
        for (int k = 0; k < 2; ++k)
            if (!(a(k, i) > -1.0 && a(k, i) < 1.0)) return {false, "interior point on the boundary"};
    Eigen::MatrixXd bd = sample_boundary(400, box, rng);
    for (int i = 0; i < bd.cols(); ++i) {
        int pinned = 0;
        for (int k = 0; k < 2; ++k)
            if (bd(k, i) == -1.0 || bd(k, i) == 1.0) ++pinned;
        if (pinned != 1) return {false, "boundary point not on exactly one face"};
    }
    return {true, "determinism, openness, single-face pinning"};
}

std::pair<bool, std::string> check_catalog_ellipticity() {
    std::ostringstream os;
    for (const char* name : {"ex1_eps0.1", "ex2", "ex3_eps0.1", "ex4", "ex5_eps0.5", "ex6"}) {
        ProblemDefinition p = problem_by_name(name);
        if (!(p.lambda_min > 0.0)) return {false, p.name + " min " + format_short(p.lambda_min)};
        os << p.name << ":" << format_short(p.lambda_min) << " ";
    }
    return {true, os.str()};
}

std::pair<bool, std::string> check_batch_permutation() {
    NetworkConfig cfg = small_net_config();
    Parameters params = init_parameters(cfg, 71);
    ProblemDefinition prob = example_1d_two_scale(0.5);
    Rng rng(73);
    SampleBatch batch = draw_batch(64, 8, prob.domain, rng);
    NetworkFluxModel model(params);
    LossBreakdown l1 = fmpinn_total_loss(model, batch, prob, 10.0, 10.0);
    SampleBatch perm = batch;
    perm.interior = batch.interior.rowwise().reverse();
    perm.boundary = batch.boundary.rowwise().reverse();
    LossBreakdown l2 = fmpinn_total_loss(model, perm, prob, 10.0, 10.0);
    const double diff = std::abs(l1.total - l2.total) / std::max(1.0, std::abs(l1.total));
    return {diff <= 1e-12, "rel diff " + format_short(diff)};
}

}  // namespace

std::vector<CheckResult> run_validation_suite(const ValidationHooks& hooks) {
    std::vector<std::pair<std::string, Check>> checks = {
        {"dual-derivatives-vs-finite-differences", check_dual_fd},
        {"tape-forward-reverse-consistency", check_tape_forward_reverse},
        {"tape-vs-batched-gradient", check_tape_vs_batched},
        {"gamma-schedule-table", [&] { return check_gamma_table(hooks); }},
        {"lr-schedule-table", [&] { return check_lr_table(hooks); }},
        {"fourier-layer-range", check_fourier_range},
        {"aggregation-equivalence", check_aggregation_equivalence},
        {"exact-solution-plug-in-ex1", check_exact_stub_ex1},
        {"derived-forcing-cross-check", check_forcing_generator},
        {"fdm-quadratic-exactness", check_fdm_quadratic},
        {"fdm-operator-symmetry", check_fdm_symmetry},
        {"fdm-maximum-principle", check_max_principle},
        {"sampling-invariants", check_sampling},
        {"catalog-ellipticity-probes", check_catalog_ellipticity},
        {"batch-permutation-invariance", check_batch_permutation},
    };

    std::vector<CheckResult> results;
    for (auto& [name, fn] : checks) {
        CheckResult r;
        r.name = name;
        try {
            auto [pass, detail] = fn();
            r.pass = pass;
            r.detail = detail;
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        results.push_back(std::move(r));
    }
    return results;
}

int report_checks(std::ostream& os, const std::vector<CheckResult>& results) {
    int failures = 0;
    for (const auto& r : results) {
        os << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << " — " << r.detail << "\n";
        if (!r.pass) ++failures;
    }
    os << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed")
       << " (" << results.size() << " total)\n";
    return failures;
}

}  // namespace fmpinn
