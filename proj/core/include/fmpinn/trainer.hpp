#pragma once

#include <Eigen/Core>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fmpinn/batch_engine.hpp"
#include "fmpinn/fdm.hpp"
#include "fmpinn/network.hpp"
#include "fmpinn/problems.hpp"

namespace fmpinn {

enum class Method { fmpinn, mpinn };
std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct TrainConfig {
    std::int64_t epochs = 50000;
    double lr0 = 0.01;
    double lr_decay = 0.025;  // fraction removed every 100 epochs
    std::int64_t eval_every = 1000;
    int n_interior = 3000;
    int n_boundary = 500;
    double beta = 10.0;
    double gamma0 = 10.0;
    std::uint64_t seed = 1;
    Method method = Method::fmpinn;
    bool deterministic = false;  // single-threaded, fixed-order everything
    int threads = 0;
    bool fixed_batch = false;  // debugging aid: reuse the first batch
    long long chunk = 0;
    bool fast_trig = true;

    void validate() const;
};

/// lr0 * (1 - decay)^floor(epoch/100)
double lr_schedule(std::int64_t epoch, double lr0, double decay);

struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    std::int64_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState init(std::int64_t n);
};

/// One bias-corrected update; throws on non-finite gradients.
void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> theta,
               const Eigen::Ref<const Eigen::VectorXd>& grad, double lr);

struct EvalRow {
    std::int64_t epoch = 0;
    double lr = 0, gamma = 0;
    double loss_pde = 0, loss_flux = 0, loss_boundary = 0, loss_total = 0;
    double rel = 0;
};

struct RunRecord {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::string problem;
    std::string method;
    std::vector<EvalRow> rows;
    double final_rel = std::numeric_limits<double>::quiet_NaN();
    double wall_seconds = 0.0;
    std::int64_t epochs_run = 0;
    double lambda_min = 0.0, lambda_max = 0.0;
};

struct TestSet {
    Eigen::MatrixXd points;      // dim x N
    Eigen::VectorXd reference;   // exact or oracle values of u
};

/// Per-problem test set: 1000 equidistant points in 1d, the oracle grid in
/// 2d/3d (3d restricted to the z = 0.3125 slice), 1600 random points in
/// high dimension. `reference_field` supplies values where no closed form
/// exists.
TestSet make_test_set(const ProblemDefinition& problem, std::uint64_t seed,
                      const GridField* reference_field = nullptr);

/// REL = sqrt(sum |u_pred - u_ref|^2 / sum |u_ref|^2) plus the pointwise
/// absolute error field.
std::pair<double, Eigen::VectorXd> evaluate(const Parameters& params, const TestSet& test,
                                            int threads = 0);

struct TrainCallbacks {
    std::function<void(std::int64_t epoch, double lr, double gamma)> on_epoch;
    std::function<void(const EvalRow&, const Parameters&)> on_eval;
};

std::pair<Parameters, RunRecord> train(const ProblemDefinition& problem, const NetworkConfig& net_cfg,
                                       const TrainConfig& cfg, const TestSet& test,
                                       const TrainCallbacks& callbacks = {});

}  // namespace fmpinn
