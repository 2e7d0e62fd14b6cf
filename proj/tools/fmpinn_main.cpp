// Command-line front end: train / sweep / validate / fdm / eval.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 numeric failure
// during a run, 3 validation-suite failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "fmpinn/batch_engine.hpp"
#include "fmpinn/checkpoint.hpp"
#include "fmpinn/config.hpp"
#include "fmpinn/fdm.hpp"
#include "fmpinn/format.hpp"
#include "fmpinn/loss.hpp"
#include "fmpinn/report.hpp"
#include "fmpinn/sampling.hpp"
#include "fmpinn/trainer.hpp"
#include "fmpinn/validate.hpp"

namespace fs = std::filesystem;
using namespace fmpinn;

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::string> problem;
    std::string out_dir;
    std::string reference_path;
    double ref_h = 0.0;  // 0: per-dimension default

    std::optional<std::string> method;
    std::optional<long long> epochs;
    std::optional<long long> eval_every;
    std::optional<int> n_interior, n_boundary;
    std::optional<double> beta, gamma0, lr0, lr_decay, soften;
    std::optional<std::uint64_t> seed;
    std::optional<std::vector<double>> scales;
    std::optional<std::vector<int>> hidden;
    std::optional<std::string> first_activation, hidden_activation, aggregation;
    bool no_resnet = false;
    bool fourier_frozen = false;
    bool deterministic = false;
    bool fixed_batch = false;
    bool dump_batch = false;
    bool no_fast_trig = false;
    int threads = 0;
    long long chunk = 0;
};

void add_common_options(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_path, "key = value configuration file");
    cmd->add_option("--problem", a.problem,
                    "problem name (ex1_eps<v>, ex2, ex3_eps<v>, ex4, ex5_eps<v>, ex6) or a problem file");
    cmd->add_option("--out", a.out_dir, "output directory (default $FMPINN_OUTDIR/<run name>)");
    cmd->add_option("--reference", a.reference_path, "grid-field file with the reference solution");
    cmd->add_option("--ref-h", a.ref_h, "mesh size for a computed reference (0: per-dimension default)");
    cmd->add_option("--method", a.method, "fmpinn or mpinn");
    cmd->add_option("--epochs", a.epochs, "training epochs");
    cmd->add_option("--eval-every", a.eval_every, "evaluation period in epochs");
    cmd->add_option("--n-interior", a.n_interior, "interior collocation points per epoch");
    cmd->add_option("--n-boundary", a.n_boundary, "boundary collocation points per epoch");
    cmd->add_option("--beta", a.beta, "flux-discrepancy weight");
    cmd->add_option("--gamma0", a.gamma0, "base boundary penalty");
    cmd->add_option("--lr0", a.lr0, "initial learning rate");
    cmd->add_option("--lr-decay", a.lr_decay, "fraction removed from the lr every 100 epochs");
    cmd->add_option("--seed", a.seed, "master RNG seed");
    cmd->add_option("--scales", a.scales, "subnetwork scale factors")->delimiter(',');
    cmd->add_option("--hidden", a.hidden, "hidden layer widths per subnetwork")->delimiter(',');
    cmd->add_option("--first-activation", a.first_activation, "fourier | sincos | tanh");
    cmd->add_option("--hidden-activation", a.hidden_activation, "sincos | tanh | requ");
    cmd->add_option("--soften", a.soften, "relaxation factor inside the first-layer cos/sin, (0,1]");
    cmd->add_option("--aggregation", a.aggregation, "inverse_scale_mean | linear_head");
    cmd->add_flag("--no-resnet", a.no_resnet, "disable skip connections");
    cmd->add_flag("--fourier-frozen", a.fourier_frozen, "freeze the first-layer weights");
    cmd->add_flag("--deterministic", a.deterministic, "single-threaded fixed-order run");
    cmd->add_flag("--fixed-batch", a.fixed_batch, "reuse the first collocation batch every epoch");
    cmd->add_flag("--dump-batch", a.dump_batch, "export the first batch to CSV");
    cmd->add_flag("--no-fast-trig", a.no_fast_trig, "use libm sin/cos in the batched engine");
    cmd->add_option("--threads", a.threads, "worker threads (0: all cores)");
    cmd->add_option("--chunk", a.chunk, "points per engine chunk (0: auto)");
}

ProblemDefinition load_problem(const std::string& name) {
    if (name.find('/') != std::string::npos || name.find(".ini") != std::string::npos ||
        fs::exists(name))
        return problem_from_file(name);
    return problem_by_name(name);
}

std::vector<int> default_hidden(int dim) {
    if (dim == 1) return {30, 40, 30, 30, 30};
    if (dim <= 3) return {40, 60, 40, 40, 40};
    return {60, 80, 60, 60, 60};
}

std::pair<int, int> default_counts(int dim) {
    if (dim == 1) return {3000, 500};
    if (dim == 2) return {5000, 2000};
    if (dim == 3) return {7500, 1000};
    return {20000, 5000};
}

struct ResolvedRun {
    ProblemDefinition problem;
    NetworkConfig net;
    TrainConfig train;
    KvMap echo;  // hashed configuration echo
    std::uint64_t hash = 0;
};

ResolvedRun resolve_run(const CommonArgs& a) {
    ResolvedRun r;
    KvMap file;
    if (!a.config_path.empty()) file = parse_kv_file(a.config_path);

    const std::string pname =
        a.problem ? *a.problem : kv_get_string(file, "problem.name", "ex1_eps0.1");
    r.problem = load_problem(pname);
    const int d = r.problem.dim;

    TrainConfig& t = r.train;
    t.method = method_from_string(a.method ? *a.method : kv_get_string(file, "train.method", "fmpinn"));
    t.epochs = a.epochs ? *a.epochs : kv_get_int(file, "train.epochs", 50000);
    t.eval_every = a.eval_every ? *a.eval_every : kv_get_int(file, "train.eval_every", 1000);
    const auto [def_ni, def_nb] = default_counts(d);
    t.n_interior = a.n_interior ? *a.n_interior
                                : static_cast<int>(kv_get_int(file, "train.n_interior", def_ni));
    t.n_boundary = a.n_boundary ? *a.n_boundary
                                : static_cast<int>(kv_get_int(file, "train.n_boundary", def_nb));
    t.beta = a.beta ? *a.beta : kv_get_double(file, "train.beta", 10.0);
    t.gamma0 = a.gamma0 ? *a.gamma0 : kv_get_double(file, "train.gamma0", 10.0);
    t.lr0 = a.lr0 ? *a.lr0 : kv_get_double(file, "train.lr0", 0.01);
    t.lr_decay = a.lr_decay ? *a.lr_decay : kv_get_double(file, "train.lr_decay", 0.025);
    t.seed = a.seed ? *a.seed : static_cast<std::uint64_t>(kv_get_int(file, "train.seed", 1));
    t.deterministic = a.deterministic || kv_get_bool(file, "train.deterministic", false);
    t.threads = a.threads > 0 ? a.threads : static_cast<int>(kv_get_int(file, "train.threads", 0));
    t.chunk = a.chunk > 0 ? a.chunk : kv_get_int(file, "train.chunk", 0);
    t.fixed_batch = a.fixed_batch || kv_get_bool(file, "train.fixed_batch", false);
    t.fast_trig = !a.no_fast_trig && kv_get_bool(file, "train.fast_trig", true);

    NetworkConfig& n = r.net;
    n.dim_in = d;
    n.dim_out = t.method == Method::fmpinn ? d + 1 : 1;
    if (a.scales)
        n.scales = *a.scales;
    else if (file.count("network.scales"))
        n.scales = kv_get_double_list(file, "network.scales");
    else
        n.scales = NetworkConfig::default_scales();
    if (a.hidden)
        n.hidden = *a.hidden;
    else if (file.count("network.hidden"))
        n.hidden = kv_get_int_list(file, "network.hidden");
    else
        n.hidden = default_hidden(d);
    n.first_activation = first_activation_from_string(
        a.first_activation ? *a.first_activation : kv_get_string(file, "network.first_activation", "fourier"));
    n.hidden_activation = hidden_activation_from_string(
        a.hidden_activation ? *a.hidden_activation : kv_get_string(file, "network.hidden_activation", "sincos"));
    n.soften = a.soften ? *a.soften : kv_get_double(file, "network.soften", 1.0);
    n.aggregation = aggregation_from_string(
        a.aggregation ? *a.aggregation : kv_get_string(file, "network.aggregation", "inverse_scale_mean"));
    n.resnet_skips = a.no_resnet ? false : kv_get_bool(file, "network.resnet", true);
    n.fourier_trainable = a.fourier_frozen ? false : kv_get_bool(file, "network.fourier_trainable", true);
    n.validate();
    t.validate();

    KvMap& e = r.echo;
    e["problem.name"] = r.problem.name;
    e["network.scales"] = join_doubles(n.scales);
    e["network.hidden"] = join_ints(n.hidden);
    e["network.first_activation"] = to_string(n.first_activation);
    e["network.hidden_activation"] = to_string(n.hidden_activation);
    e["network.soften"] = format_short(n.soften);
    e["network.aggregation"] = to_string(n.aggregation);
    e["network.resnet"] = n.resnet_skips ? "true" : "false";
    e["network.fourier_trainable"] = n.fourier_trainable ? "true" : "false";
    e["train.method"] = to_string(t.method);
    e["train.epochs"] = std::to_string(t.epochs);
    e["train.eval_every"] = std::to_string(t.eval_every);
    e["train.n_interior"] = std::to_string(t.n_interior);
    e["train.n_boundary"] = std::to_string(t.n_boundary);
    e["train.beta"] = format_short(t.beta);
    e["train.gamma0"] = format_short(t.gamma0);
    e["train.lr0"] = format_short(t.lr0);
    e["train.lr_decay"] = format_short(t.lr_decay);
    e["train.seed"] = std::to_string(t.seed);
    e["train.deterministic"] = t.deterministic ? "true" : "false";
    e["train.threads"] = std::to_string(t.threads);
    e["train.chunk"] = std::to_string(t.chunk);
    e["train.fixed_batch"] = t.fixed_batch ? "true" : "false";
    e["train.fast_trig"] = t.fast_trig ? "true" : "false";
    r.hash = kv_hash(e);
    return r;
}

fs::path resolve_out_dir(const CommonArgs& a, const ResolvedRun& r) {
    if (!a.out_dir.empty()) return a.out_dir;
    const char* env = std::getenv("FMPINN_OUTDIR");
    fs::path base = env ? env : "runs";
    return base / (r.problem.name + "_" + to_string(r.train.method) + "_s" + std::to_string(r.train.seed));
}

/// Reference field for problems without a closed-form solution.
std::optional<GridField> obtain_reference(const CommonArgs& a, const ResolvedRun& r,
                                          const fs::path& out) {
    if (r.problem.exact_u) return std::nullopt;
    if (!a.reference_path.empty()) return read_grid_field(a.reference_path);
    double h = a.ref_h;
    if (h <= 0.0) h = r.problem.dim == 3 ? 1.0 / 64.0 : 1.0 / 128.0;
    std::cout << "computing reference field (h = " << format_short(h) << ") ..." << std::endl;
    GridField f = fdm_solve(r.problem, h, {1e-10, 0, false});
    write_grid_field((out / "reference.bin").string(), f);
    return f;
}

int run_train(const CommonArgs& a) {
    ResolvedRun r = resolve_run(a);
    const fs::path out = resolve_out_dir(a, r);
    fs::create_directories(out);

    std::ofstream cfg_out(out / "resolved_config.ini");
    cfg_out << canonical_kv_text(r.echo);
    cfg_out.close();

    std::cout << "problem " << r.problem.name << " (dim " << r.problem.dim << "), coefficient range ["
              << format_short(r.problem.lambda_min) << ", " << format_short(r.problem.lambda_max)
              << "]\n";
    std::cout << "model parameters: " << r.net.param_count() << " (" << r.net.num_subnets()
              << " subnets)\n";
    std::cout << "config hash: " << r.hash << "\n";

    std::optional<GridField> ref = obtain_reference(a, r, out);
    TestSet test = make_test_set(r.problem, r.train.seed, ref ? &*ref : nullptr);

    if (a.dump_batch) {
        Rng rng = Rng(r.train.seed).substream(1);
        SampleBatch b = draw_batch(r.train.n_interior, r.train.n_boundary, r.problem.domain, rng);
        write_points_csv((out / "batch_interior.csv").string(), b.interior);
        write_points_csv((out / "batch_boundary.csv").string(), b.boundary);
    }

    RunCsvWriter csv((out / "run.csv").string());
    TrainCallbacks cb;
    cb.on_eval = [&](const EvalRow& row, const Parameters&) {
        csv.write_row(row);
        std::cout << "epoch " << row.epoch << "  loss " << format_short(row.loss_total) << "  rel "
                  << format_short(row.rel) << std::endl;
    };

    std::vector<ArtifactEntry> artifacts = {{"run_csv", (out / "run.csv").string()},
                                            {"resolved_config", (out / "resolved_config.ini").string()}};
    if (ref) artifacts.push_back({"reference_field", (out / "reference.bin").string()});

    RunRecord rec;
    try {
        auto [params, record] = train(r.problem, r.net, r.train, test, cb);
        rec = std::move(record);
        rec.config_hash = r.hash;

        write_checkpoint((out / "checkpoint.bin").string(), params, r.hash);
        artifacts.push_back({"checkpoint", (out / "checkpoint.bin").string()});
        artifacts.push_back({"checkpoint_shapes", (out / "checkpoint.bin.shapes.json").string()});

        auto [rel, pointwise] = evaluate(params, test, r.train.deterministic ? 1 : r.train.threads);
        Eigen::VectorXd pred(test.reference.size());
        const Eigen::MatrixXd outv = mscale_forward_batch(params, test.points);
        for (long long i = 0; i < pred.size(); ++i) pred[i] = outv(0, i);
        write_error_field_csv((out / "error_field.csv").string(), test.points, pred, test.reference);
        artifacts.push_back({"error_field", (out / "error_field.csv").string()});
        if (rec.rows.empty()) rec.final_rel = rel;

        write_summary((out / "summary.json").string(), rec, r.echo, artifacts, "ok");
        std::cout << "final rel " << format_short(rec.final_rel) << ", wall "
                  << format_short(rec.wall_seconds) << " s\nartifacts in " << out << std::endl;
        return 0;
    } catch (const NumericError& e) {
        rec.config_hash = r.hash;
        rec.problem = r.problem.name;
        rec.method = to_string(r.train.method);
        rec.seed = r.train.seed;
        write_summary((out / "summary.json").string(), rec, r.echo, artifacts,
                      std::string("numeric_abort: ") + e.what());
        std::cerr << "numeric failure: " << e.what() << std::endl;
        return 2;
    }
}

int run_sweep(CommonArgs a, const std::string& axis, const std::vector<std::string>& values) {
    if (values.size() < 2) throw ConfigError("sweep: need at least two values");
    ResolvedRun base = resolve_run(a);
    const fs::path out = a.out_dir.empty()
                             ? resolve_out_dir(a, base) += "_sweep_" + axis
                             : fs::path(a.out_dir);
    fs::create_directories(out);

    std::vector<SweepRow> rows;
    for (const std::string& v : values) {
        CommonArgs sub = a;
        sub.out_dir = (out / (axis + "_" + v)).string();
        if (axis == "epsilon") {
            const std::string pname = base.problem.name.substr(0, base.problem.name.find("_eps"));
            sub.problem = std::string(pname) + "_eps" + v;
        } else if (axis == "beta") {
            sub.beta = std::stod(v);
        } else if (axis == "method") {
            sub.method = v;
        } else {
            throw ConfigError("sweep: unknown axis " + axis + " (epsilon, beta, method)");
        }
        SweepRow row;
        row.value = v;
        std::cout << "=== sweep " << axis << " = " << v << " ===" << std::endl;
        try {
            const int rc = run_train(sub);
            row.status = rc == 0 ? "ok" : "numeric_failure";
            if (rc == 0) {
                std::ifstream sj(fs::path(sub.out_dir) / "summary.json");
                // final numbers are re-read from the sub-run summary
                std::string content((std::istreambuf_iterator<char>(sj)), {});
                const auto pos = content.find("\"final_rel\": ");
                if (pos != std::string::npos) row.final_rel = std::atof(content.c_str() + pos + 13);
                const auto wpos = content.find("\"wall_seconds\": ");
                if (wpos != std::string::npos) row.wall_seconds = std::atof(content.c_str() + wpos + 16);
            }
        } catch (const std::exception& e) {
            row.status = std::string("failed: ") + e.what();
        }
        rows.push_back(std::move(row));
    }
    write_sweep_csv((out / "sweep.csv").string(), axis, rows);
    std::cout << "sweep table written to " << (out / "sweep.csv") << std::endl;
    return 0;
}

int run_fdm(const std::string& problem_name, double h, const std::string& out_path,
            const std::string& csv_path, double tol) {
    ProblemDefinition p = load_problem(problem_name);
    GridField f = fdm_solve(p, h, {tol, 0, false});
    write_grid_field(out_path, f);
    std::cout << "grid field (" << f.total() << " nodes) written to " << out_path << std::endl;
    if (!csv_path.empty()) {
        Eigen::MatrixXd pts = eval_grid(p.domain, h);
        Eigen::VectorXd vals(pts.cols());
        for (long long i = 0; i < pts.cols(); ++i) {
            std::span<const double> x(pts.col(i).data(), static_cast<std::size_t>(p.dim));
            vals[i] = interpolate(f, x);
        }
        write_error_field_csv(csv_path, pts, vals, vals);
        std::cout << "grid CSV written to " << csv_path << std::endl;
    }
    if (p.exact_u) {
        std::cout << "rel error vs closed form: " << format_short(grid_rel_error(f, *p.exact_u))
                  << std::endl;
    }
    return 0;
}

int run_eval(const CommonArgs& a, const std::string& checkpoint_path) {
    ResolvedRun r = resolve_run(a);
    Parameters params = read_checkpoint(checkpoint_path, r.net, 0);
    const fs::path out = resolve_out_dir(a, r);
    fs::create_directories(out);
    std::optional<GridField> ref = obtain_reference(a, r, out);
    TestSet test = make_test_set(r.problem, r.train.seed, ref ? &*ref : nullptr);
    auto [rel, pointwise] = evaluate(params, test, a.threads);
    std::cout << "rel " << format_double(rel) << " over " << test.points.cols() << " test points"
              << std::endl;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed-formulation multi-scale elliptic PDE solver based on Fourier subnetworks"};
    app.require_subcommand(1);

    CommonArgs train_args, sweep_args, eval_args;
    std::string sweep_axis;
    std::vector<std::string> sweep_values;
    std::string fdm_problem = "ex1_eps0.1", fdm_out = "field.bin", fdm_csv;
    double fdm_h = 1.0 / 128.0, fdm_tol = 1e-10;
    std::string eval_checkpoint;

    CLI::App* c_train = app.add_subcommand("train", "train a model and export run artifacts");
    add_common_options(c_train, train_args);

    CLI::App* c_sweep = app.add_subcommand("sweep", "run a sweep over epsilon, beta or method");
    add_common_options(c_sweep, sweep_args);
    c_sweep->add_option("--axis", sweep_axis, "epsilon | beta | method")->required();
    c_sweep->add_option("--values", sweep_values, "comma-separated sweep values")
        ->required()
        ->delimiter(',');

    app.add_subcommand("validate", "run the fast invariant suite");

    CLI::App* c_fdm = app.add_subcommand("fdm", "solve a problem with the finite-difference oracle");
    c_fdm->add_option("--problem", fdm_problem, "problem name or file");
    c_fdm->add_option("--mesh-h", fdm_h, "mesh size");
    c_fdm->add_option("--out", fdm_out, "output grid-field file");
    c_fdm->add_option("--csv", fdm_csv, "also export nodal values as CSV");
    c_fdm->add_option("--tol", fdm_tol, "CG relative residual");

    CLI::App* c_eval = app.add_subcommand("eval", "REL of a checkpoint against a reference");
    add_common_options(c_eval, eval_args);
    c_eval->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (c_train->parsed()) return run_train(train_args);
        if (c_sweep->parsed()) return run_sweep(sweep_args, sweep_axis, sweep_values);
        if (app.get_subcommand("validate")->parsed()) {
            const auto results = run_validation_suite();
            const int failures = report_checks(std::cout, results);
            return failures == 0 ? 0 : 3;
        }
        if (c_fdm->parsed()) return run_fdm(fdm_problem, fdm_h, fdm_out, fdm_csv, fdm_tol);
        if (c_eval->parsed()) return run_eval(eval_args, eval_checkpoint);
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << std::endl;
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 1;
}
