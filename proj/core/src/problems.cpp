#include "fmpinn/problems.hpp"

#include <cmath>
#include <numbers>

#include "fmpinn/format.hpp"
#include "fmpinn/sampling.hpp"

namespace fmpinn {

namespace {

constexpr double pi = std::numbers::pi;

void require_inverse_integer(double eps, const char* which) {
    if (!(eps > 0.0)) throw ConfigError(std::string(which) + ": scale parameter must be positive");
    const double inv = 1.0 / eps;
    if (std::abs(inv - std::round(inv)) > 1e-9 * inv)
        throw ConfigError(std::string(which) + ": 1/eps must be a positive integer");
}

/// Boundary and probe checks shared by every catalog entry.
void finalize(ProblemDefinition& p) {
    run_ellipticity_probe(p);
    if (p.exact_u) {
        Rng rng(0xb0DAull);
        Eigen::MatrixXd pts = sample_boundary(200, p.domain, rng);
        for (int i = 0; i < pts.cols(); ++i) {
            std::vector<double> x(pts.col(i).data(), pts.col(i).data() + p.dim);
            const double ue = (*p.exact_u)(x);
            const double g = p.boundary(x);
            if (std::abs(ue - g) > 1e-12)
                throw ConfigError(p.name + ": exact solution violates boundary data, |u-g|=" +
                                  std::to_string(std::abs(ue - g)));
        }
    }
}

}  // namespace

void run_ellipticity_probe(ProblemDefinition& p, int n_points) {
    Rng rng(0xe11Cull);
    Eigen::MatrixXd pts = sample_interior(n_points, p.domain, rng);
    double mn = std::numeric_limits<double>::infinity();
    double mx = -mn;
    for (int i = 0; i < pts.cols(); ++i) {
        std::vector<double> x(pts.col(i).data(), pts.col(i).data() + p.dim);
        const double a = p.coefficient(x);
        if (!std::isfinite(a)) throw NumericError(p.name + ": non-finite coefficient in probe");
        mn = std::min(mn, a);
        mx = std::max(mx, a);
    }
    p.lambda_min = mn;
    p.lambda_max = mx;
    if (!(mn > 0.0))
        throw ConfigError(p.name + ": coefficient fails the ellipticity probe (min " +
                          std::to_string(mn) + ")");
}

ScalarField differentiate_forcing(const ScalarField& coefficient, const ScalarField& exact_u, int dim) {
    if (!coefficient.differentiable() || !exact_u.differentiable())
        throw ConfigError("differentiate_forcing needs derivative-capable fields");
    return ScalarField::values_only([coefficient, exact_u, dim](std::span<const double> x) {
        double acc = 0.0;
        for (int k = 0; k < dim; ++k) {
            double a, da, d2a_unused, u, du, d2u;
            coefficient.partial2(x, k, a, da, d2a_unused);
            exact_u.partial2(x, k, u, du, d2u);
            acc += da * du + a * d2u;
        }
        if (!std::isfinite(acc)) throw NumericError("differentiate_forcing: non-finite derivative");
        return -acc;
    });
}

ProblemDefinition example_1d_two_scale(double eps) {
    require_inverse_integer(eps, "example_1d_two_scale");
    ProblemDefinition p;
    p.name = "ex1_eps" + format_short(eps);
    p.dim = 1;
    p.domain = Box::cube(1, 0.0, 1.0);
    p.epsilons = {eps};
    const double w = 2.0 * pi / eps;

    p.coefficient = ScalarField::from([w]<class T>(std::span<const T> x) -> T {
        return 1.0 / (2.0 + cos(x[0] * w));
    });
    p.forcing = ScalarField::from([]<class T>(std::span<const T> x) -> T { return x[0] * 0.0 + 1.0; });
    p.boundary = ScalarField::from([]<class T>(std::span<const T> x) -> T { return x[0] * 0.0; });
    p.exact_u = ScalarField::from([eps, w]<class T>(std::span<const T> x) -> T {
        const double c = eps / (4.0 * pi * pi);
        return x[0] - square(x[0]) +
               eps * ((1.0 / (4.0 * pi)) * sin(x[0] * w) - (1.0 / (2.0 * pi)) * (x[0] * sin(x[0] * w)) -
                      c * cos(x[0] * w) + c);
    });
    // flux = A u', with u' from the differentiated closed form
    p.exact_flux = std::vector<ScalarField>{ScalarField::from([w]<class T>(std::span<const T> x) -> T {
        T uprime = 1.0 - 2.0 * x[0] + (0.5 - x[0]) * cos(x[0] * w);
        return uprime / (2.0 + cos(x[0] * w));
    })};
    finalize(p);
    return p;
}

ProblemDefinition example_1d_three_scale(double eps1, double eps2) {
    require_inverse_integer(eps1, "example_1d_three_scale");
    require_inverse_integer(eps2, "example_1d_three_scale");
    ProblemDefinition p;
    p.name = "ex2";
    p.dim = 1;
    p.domain = Box::cube(1, 0.0, 1.0);
    p.epsilons = {eps1, eps2};
    const double w1 = 2.0 * pi / eps1, w2 = 2.0 * pi / eps2;

    p.coefficient = ScalarField::from([w1, w2]<class T>(std::span<const T> x) -> T {
        return (2.0 + cos(x[0] * w1)) * (2.0 + cos(x[0] * w2));
    });
    p.boundary = ScalarField::from([]<class T>(std::span<const T> x) -> T { return x[0] * 0.0; });
    p.exact_u = ScalarField::from([eps1, eps2, w1, w2]<class T>(std::span<const T> x) -> T {
        return x[0] - square(x[0]) + (eps1 / (4.0 * pi)) * sin(x[0] * w1) +
               (eps2 / (4.0 * pi)) * sin(x[0] * w2);
    });
    p.exact_flux = std::vector<ScalarField>{
        ScalarField::from([w1, w2]<class T>(std::span<const T> x) -> T {
            T uprime = 1.0 - 2.0 * x[0] + 0.5 * cos(x[0] * w1) + 0.5 * cos(x[0] * w2);
            return (2.0 + cos(x[0] * w1)) * (2.0 + cos(x[0] * w2)) * uprime;
        })};
    // the force side is not given in closed form; generate it exactly
    p.forcing = differentiate_forcing(p.coefficient, *p.exact_u, 1);
    finalize(p);
    return p;
}

ProblemDefinition example_2d_two_scale(double eps) {
    require_inverse_integer(eps, "example_2d_two_scale");
    ProblemDefinition p;
    p.name = "ex3_eps" + format_short(eps);
    p.dim = 2;
    p.domain = Box::cube(2, -1.0, 1.0);
    p.epsilons = {eps};
    const double w = 2.0 * pi / eps;

    p.coefficient = ScalarField::from([w]<class T>(std::span<const T> x) -> T {
        return (1.5 + sin(x[0] * w)) / (1.5 + sin(x[1] * w)) +
               (1.5 + sin(x[1] * w)) / (1.5 + cos(x[0] * w)) +
               sin(4.0 * (square(x[0]) * square(x[1]))) + 1.0;
    });
    p.forcing = ScalarField::from([]<class T>(std::span<const T> x) -> T { return x[0] * 0.0 + 5.0; });
    p.boundary = ScalarField::from([]<class T>(std::span<const T> x) -> T { return x[0] * 0.0; });
    finalize(p);
    return p;
}

ProblemDefinition example_2d_multifreq() {
    ProblemDefinition p;
    p.name = "ex4";
    p.dim = 2;
    p.domain = Box::cube(2, -1.0, 1.0);

    p.coefficient = ScalarField::from([]<class T>(std::span<const T> x) -> T {
        T prod = x[0] * 0.0 + 1.0;
        for (int i = 1; i <= 5; ++i) {
            const double f = std::pow(2.0, i) * pi;
            prod = prod * ((1.0 + 0.5 * cos(f * (x[0] + x[1]))) *
                           (1.0 + 0.5 * sin(f * (x[1] - 3.0 * x[0]))));
        }
        return prod;
    });
    p.forcing = ScalarField::from([]<class T>(std::span<const T> x) -> T { return x[0] * 0.0 + 1.0; });
    p.boundary = ScalarField::from([]<class T>(std::span<const T> x) -> T { return x[0] * 0.0; });
    finalize(p);
    return p;
}

ProblemDefinition example_3d(double eps) {
    require_inverse_integer(eps, "example_3d");
    ProblemDefinition p;
    p.name = "ex5_eps" + format_short(eps);
    p.dim = 3;
    p.domain = Box::cube(3, 0.0, 1.0);
    p.epsilons = {eps};
    const double w = 2.0 * pi / eps;

    p.coefficient = ScalarField::from([w]<class T>(std::span<const T> x) -> T {
        return 2.0 + sin(x[0] * w) * sin(x[1] * w) * sin(x[2] * w);
    });
    p.forcing = ScalarField::from([]<class T>(std::span<const T> x) -> T { return x[0] * 0.0 + 20.0; });
    p.boundary = ScalarField::from([]<class T>(std::span<const T> x) -> T { return x[0] * 0.0; });
    finalize(p);
    return p;
}

ProblemDefinition example_8d() {
    ProblemDefinition p;
    p.name = "ex6";
    p.dim = 8;
    p.domain = Box::cube(8, 0.0, 1.0);

    // frequency doubles towards the middle coordinates and mirrors back
    static constexpr double freq[8] = {2, 4, 8, 16, 16, 8, 4, 2};
    p.coefficient = ScalarField::from([]<class T>(std::span<const T> x) -> T {
        T acc = cos(pi * freq[0] * x[0]);
        for (int j = 1; j < 8; ++j) acc = acc + cos(pi * freq[j] * x[j]);
        return 1.0 + 0.125 * acc;
    });
    p.boundary = ScalarField::from([]<class T>(std::span<const T> x) -> T { return x[0] * 0.0; });
    p.exact_u = ScalarField::from([]<class T>(std::span<const T> x) -> T {
        T prod = sin(pi * x[0]);
        for (int j = 1; j < 8; ++j) prod = prod * sin(pi * x[j]);
        return prod;
    });
    std::vector<ScalarField> flux;
    for (int k = 0; k < 8; ++k) {
        flux.push_back(ScalarField::from([k]<class T>(std::span<const T> x) -> T {
            T acc = cos(pi * freq[0] * x[0]);
            for (int j = 1; j < 8; ++j) acc = acc + cos(pi * freq[j] * x[j]);
            T a = 1.0 + 0.125 * acc;
            T grad = pi * cos(pi * x[k]);
            for (int j = 0; j < 8; ++j)
                if (j != k) grad = grad * sin(pi * x[j]);
            return a * grad;
        }));
    }
    p.exact_flux = std::move(flux);
    p.forcing = differentiate_forcing(p.coefficient, *p.exact_u, 8);
    finalize(p);
    return p;
}

namespace {

bool starts_with(const std::string& s, const std::string& pre) {
    return s.rfind(pre, 0) == 0;
}

double parse_eps(const std::string& name, const std::string& prefix, double fallback) {
    if (name == prefix.substr(0, prefix.size() - 4))  // bare "exN"
        return fallback;
    if (!starts_with(name, prefix))
        throw ConfigError("unknown problem name: " + name);
    const std::string tail = name.substr(prefix.size());
    try {
        return std::stod(tail);
    } catch (...) {
        throw ConfigError("cannot parse scale parameter in problem name: " + name);
    }
}

}  // namespace

ProblemDefinition problem_by_name(const std::string& name) {
    if (starts_with(name, "ex1")) return example_1d_two_scale(parse_eps(name, "ex1_eps", 0.1));
    if (name == "ex2") return example_1d_three_scale(0.1, 0.01);
    if (starts_with(name, "ex2_eps")) {
        const std::string tail = name.substr(7);
        const auto us = tail.find('_');
        if (us == std::string::npos)
            throw ConfigError("ex2 takes two scale parameters, e.g. ex2_eps0.1_0.01");
        return example_1d_three_scale(std::stod(tail.substr(0, us)), std::stod(tail.substr(us + 1)));
    }
    if (starts_with(name, "ex3")) return example_2d_two_scale(parse_eps(name, "ex3_eps", 0.05));
    if (name == "ex4") return example_2d_multifreq();
    if (starts_with(name, "ex5")) return example_3d(parse_eps(name, "ex5_eps", 0.1));
    if (name == "ex6") return example_8d();
    throw ConfigError("unknown problem name: " + name +
                      " (expected ex1_eps<v>, ex2, ex3_eps<v>, ex4, ex5_eps<v>, ex6, or a file path)");
}

}  // namespace fmpinn
