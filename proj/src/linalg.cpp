#include "sobscale/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "sobscale/error.hpp"
#include "sobscale/random.hpp"

namespace sobscale {

Vector to_vector(const LatticeFunction& u) {
    Vector v(static_cast<Eigen::Index>(u.size()));
    for (std::size_t i = 0; i < u.size(); ++i) v(static_cast<Eigen::Index>(i)) = u[i];
    return v;
}

LatticeFunction from_vector(const LatticeBox& box, const Vector& v) {
    if (static_cast<std::size_t>(v.size()) != box.size()) throw ShapeError("from_vector: size does not match box");
    LatticeFunction u(box);
    for (std::size_t i = 0; i < box.size(); ++i) u[i] = v(static_cast<Eigen::Index>(i));
    return u;
}

Matrix weight_conjugate(const Matrix& a, std::span<const double> out_weights, std::span<const double> in_weights) {
    if (static_cast<std::size_t>(a.rows()) != out_weights.size() ||
        static_cast<std::size_t>(a.cols()) != in_weights.size()) {
        throw ShapeError("weight_conjugate: weight lengths do not match the matrix");
    }
    Matrix out = a;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            out(r, c) *= out_weights[static_cast<std::size_t>(r)] / in_weights[static_cast<std::size_t>(c)];
        }
    }
    return out;
}

Eigen::VectorXd singular_values(const Matrix& a) {
    Eigen::JacobiSVD<Matrix> svd(a);
    if (svd.info() != Eigen::Success) throw NumericError("singular_values: SVD did not converge");
    return svd.singularValues();
}

double spectral_norm(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    return singular_values(a)(0);
}

PowerIterationResult power_iteration_norm(const Matrix& a, std::uint64_t seed, int max_iterations, double tolerance) {
    PowerIterationResult r;
    if (a.cols() == 0) return r;
    const CounterRng rng(seed);
    Vector x(a.cols());
    for (Eigen::Index i = 0; i < a.cols(); ++i) x(i) = rng.complex_normal(static_cast<std::uint64_t>(i));
    x.normalize();
    double prev = 0.0;
    for (int it = 1; it <= max_iterations; ++it) {
        Vector y = a.adjoint() * (a * x);
        const double ny = y.norm();
        r.iterations = it;
        if (ny == 0.0) {
            r.value = 0.0;
            r.converged = true;
            return r;
        }
        const double estimate = std::sqrt(ny);
        x = y / ny;
        r.relative_change = std::abs(estimate - prev) / estimate;
        r.value = estimate;
        if (it > 1 && r.relative_change < tolerance) {
            r.converged = true;
            break;
        }
        prev = estimate;
    }
    // Rayleigh-quotient refinement of the converged direction.
    r.value = std::max(r.value, (a * x).norm());
    return r;
}

unsigned worker_count() {
    if (const char* env = std::getenv("SOBSCALE_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return 1;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next.store(count);
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace sobscale
