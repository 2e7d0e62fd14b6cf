#pragma once

#include <Eigen/Core>
#include <map>
#include <string>

#include "fmpinn/box.hpp"
#include "fmpinn/rng.hpp"

namespace fmpinn {

/// Collocation batch: points are stored as columns (dim x count).
struct SampleBatch {
    Eigen::MatrixXd interior;
    Eigen::MatrixXd boundary;
    double domain_measure = 0.0;
    std::uint64_t rng_seed = 0;     // RNG snapshot taken before the draw
    std::uint64_t rng_counter = 0;
};

/// n i.i.d. uniform points strictly inside the box.
Eigen::MatrixXd sample_interior(int n, const Box& box, Rng& rng);

/// n points on the boundary: uniformly chosen face, uniform within the face.
/// In one dimension the two endpoints alternate deterministically.
Eigen::MatrixXd sample_boundary(int n, const Box& box, Rng& rng);

SampleBatch draw_batch(int n_interior, int n_boundary, const Box& box, Rng& rng);

/// Tensor-product equidistant grid with spacing h; h must divide every edge.
/// `slice` pins chosen coordinates to fixed values, removing them from the
/// tensor product. Ordering is row-major by coordinate (first axis slowest),
/// matching the finite-difference grid layout.
Eigen::MatrixXd eval_grid(const Box& box, double h, const std::map<int, double>& slice = {});

void write_points_csv(const std::string& path, const Eigen::MatrixXd& points);

}  // namespace fmpinn
