#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include <Eigen/Dense>

#include "sobscale/lattice.hpp"

namespace sobscale {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

Vector to_vector(const LatticeFunction& u);
LatticeFunction from_vector(const LatticeBox& box, const Vector& v);

/// diag(out) * a * diag(in)^{-1}
Matrix weight_conjugate(const Matrix& a, std::span<const double> out_weights, std::span<const double> in_weights);

/// Singular values in decreasing order (dense SVD).
Eigen::VectorXd singular_values(const Matrix& a);
double spectral_norm(const Matrix& a);

struct PowerIterationResult {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    double relative_change = 0.0;
};

/// Largest singular value by power iteration on A^H A from a seeded
/// deterministic start vector.
PowerIterationResult power_iteration_norm(const Matrix& a, std::uint64_t seed = 0x5eed, int max_iterations = 500,
                                          double tolerance = 1e-10);

/// Worker count: SOBSCALE_THREADS if set (>= 1), otherwise 1.
unsigned worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads. Each
/// index is processed exactly once; callers write results by index so the
/// outcome does not depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace sobscale
