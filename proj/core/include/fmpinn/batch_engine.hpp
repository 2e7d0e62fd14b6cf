#pragma once

#include <Eigen/Core>
#include <memory>

#include "fmpinn/loss.hpp"
#include "fmpinn/network.hpp"
#include "fmpinn/problems.hpp"
#include "fmpinn/sampling.hpp"

namespace fmpinn {

struct EngineOptions {
    double beta = 10.0;
    double gamma = 10.0;
    int threads = 0;                           // 0: OpenMP default
    long long chunk = 0;                       // points per chunk; 0: sized from memory_budget
    bool fast_trig = true;                     // vectorized sincos kernel
    std::size_t memory_budget = 1536ull << 20; // cap on per-chunk layer caches
};

struct EngineResult {
    LossBreakdown parts;
    Eigen::VectorXd grad;
};

/// Reusable layer buffers. Training loops keep one instance alive so the
/// per-epoch working set is allocated once instead of churning large
/// temporaries every step.
class EngineScratch {
public:
    EngineScratch();
    ~EngineScratch();
    EngineScratch(EngineScratch&&) noexcept;
    EngineScratch& operator=(EngineScratch&&) noexcept;

    struct Impl;
    Impl& impl() { return *impl_; }

private:
    std::unique_ptr<Impl> impl_;
};

/// Loss and full parameter gradient of the mixed-formulation objective,
/// computed by batched layer-level reverse mode over the forward
/// input-derivative chains. Exactly the same math as the scalar tape path,
/// organized as GEMMs; the two are cross-checked in the test suite.
EngineResult fmpinn_loss_grad(const Parameters& params, const SampleBatch& batch,
                              const ProblemDefinition& problem, const EngineOptions& opt,
                              EngineScratch* scratch = nullptr);

/// Same for the classical residual baseline (needs second-order chains).
EngineResult mpinn_loss_grad(const Parameters& params, const SampleBatch& batch,
                             const ProblemDefinition& problem, const EngineOptions& opt,
                             EngineScratch* scratch = nullptr);

/// Batched plain forward: outputs (dim_out x N).
Eigen::MatrixXd mscale_forward_batch(const Parameters& params, const Eigen::MatrixXd& pts,
                                     const EngineOptions& opt = {}, EngineScratch* scratch = nullptr);

}  // namespace fmpinn
