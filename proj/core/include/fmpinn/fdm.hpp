#pragma once

#include <string>
#include <vector>

#include "fmpinn/problems.hpp"

namespace fmpinn {

/// Nodal field on a tensor-product grid, row-major with the first
/// coordinate slowest (matching eval_grid ordering). Boundary nodes hold
/// the Dirichlet data exactly.
struct GridField {
    Box domain;
    double h = 0.0;
    std::vector<int> npts;  // nodes per axis
    std::vector<double> values;

    long long total() const {
        long long t = 1;
        for (int n : npts) t *= n;
        return t;
    }
    long long index(std::span<const int> idx) const {
        long long p = 0;
        for (std::size_t a = 0; a < npts.size(); ++a)
            p = p * npts[a] + idx[a];
        return p;
    }
    double node_coord(int axis, int i) const {
        return domain.lo[static_cast<std::size_t>(axis)] + i * h;
    }
};

struct FdmOptions {
    double tol = 1e-10;      // relative residual target for the CG solve
    long long max_iter = 0;  // 0: scaled with node count
    bool quiet = false;
    std::uint64_t start_seed = 0;  // nonzero: random CG initial guess (robustness testing)
};

/// Flux-conservative finite differences with harmonic-mean face
/// coefficients, Dirichlet rows eliminated, Jacobi-preconditioned CG.
/// Supports d = 1, 2, 3.
GridField fdm_solve(const ProblemDefinition& problem, double h, const FdmOptions& opt = {});

/// Multilinear interpolation from the 2^d surrounding nodes.
double interpolate(const GridField& field, std::span<const double> x);

struct ConvergenceResult {
    double order = 0.0;
    std::vector<double> errors;  // REL per mesh size
    bool reliable = true;
};

/// Observed order from a least-squares fit of log(error) against log(h);
/// requires a problem with an exact solution and at least three mesh sizes.
ConvergenceResult convergence_order(const ProblemDefinition& problem, const std::vector<double>& hs,
                                    const FdmOptions& opt = {});

void write_grid_field(const std::string& path, const GridField& field);
GridField read_grid_field(const std::string& path);

/// max |<Au,v> - <u,Av>| over a few random vector pairs, normalized by
/// |<Au,v>|; rounding-level for the symmetric stencil.
double fdm_symmetry_defect(const ProblemDefinition& problem, double h, std::uint64_t seed);

/// REL of the field against the exact solution on interior nodes.
double grid_rel_error(const GridField& field, const ScalarField& exact_u);

}  // namespace fmpinn
