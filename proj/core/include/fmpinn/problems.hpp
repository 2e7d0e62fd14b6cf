#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fmpinn/box.hpp"
#include "fmpinn/scalar_field.hpp"

namespace fmpinn {

/// One elliptic problem instance -div(A grad u) = f on a box with Dirichlet
/// data g. The coefficient is scalar-valued; exact solution and flux are
/// present only where a closed form exists.
struct ProblemDefinition {
    std::string name;
    int dim = 1;
    Box domain;
    ScalarField coefficient;  // A
    ScalarField forcing;      // f
    ScalarField boundary;     // g
    std::optional<ScalarField> exact_u;
    std::optional<std::vector<ScalarField>> exact_flux;  // A grad u, one field per coordinate
    std::vector<double> epsilons;

    // empirical ellipticity bounds from the construction-time random probe
    double lambda_min = 0.0;
    double lambda_max = 0.0;

    bool has_exact() const { return exact_u.has_value(); }
};

/// f = -div(A grad u), evaluated exactly with nested second-order duals.
/// The result supports value evaluation only.
ScalarField differentiate_forcing(const ScalarField& coefficient, const ScalarField& exact_u, int dim);

// The six benchmark instances.
ProblemDefinition example_1d_two_scale(double eps);
ProblemDefinition example_1d_three_scale(double eps1, double eps2);
ProblemDefinition example_2d_two_scale(double eps);
ProblemDefinition example_2d_multifreq();
ProblemDefinition example_3d(double eps);
ProblemDefinition example_8d();

/// Resolve a CLI problem name such as "ex1_eps0.01", "ex2", "ex3_eps0.05",
/// "ex4", "ex5_eps0.1", "ex6".
ProblemDefinition problem_by_name(const std::string& name);

/// Load a user-defined problem from a key=value file whose coefficient,
/// forcing and boundary entries are arithmetic expressions over x1..xd.
ProblemDefinition problem_from_file(const std::string& path);

/// Min/max of A over a uniform random probe; records the bounds on the
/// definition and rejects coefficients that fail strict positivity.
void run_ellipticity_probe(ProblemDefinition& p, int n_points = 10000);

}  // namespace fmpinn
