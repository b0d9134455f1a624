#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace sobscale {

using Complex = std::complex<double>;

/// Lattice point k in Z^n, also used for multi-indices alpha, beta.
using Point = std::vector<int>;
using MultiIndex = std::vector<int>;

/// Finite box {k in Z^n : |k_j| <= N} standing in for Z^n.
///
/// Points are enumerated lexicographically over (k_1, ..., k_n) with k_1 the
/// most significant coordinate, so index 0 is (-N, ..., -N) and the last
/// index is (N, ..., N). Every matrix in the library uses this order.
class LatticeBox {
public:
    LatticeBox(int dimension, int radius);

    int dimension() const { return dimension_; }
    int radius() const { return radius_; }
    int side() const { return 2 * radius_ + 1; }

    /// (2N+1)^n
    std::size_t size() const { return size_; }

    Point point(std::size_t index) const;
    bool contains(std::span<const int> k) const;
    std::optional<std::size_t> find(std::span<const int> k) const;
    std::size_t index(std::span<const int> k) const;

    /// Index of the origin.
    std::size_t origin() const;

    bool operator==(const LatticeBox&) const = default;

private:
    int dimension_;
    int radius_;
    std::size_t size_;
};

/// Complex-valued function on a LatticeBox; zero outside the box.
class LatticeFunction {
public:
    explicit LatticeFunction(LatticeBox box);
    LatticeFunction(LatticeBox box, std::vector<Complex> values);

    static LatticeFunction delta(const LatticeBox& box, std::span<const int> k,
                                 Complex value = 1.0);
    static LatticeFunction from(const LatticeBox& box,
                                const std::function<Complex(const Point&)>& f);

    const LatticeBox& box() const { return box_; }
    std::size_t size() const { return values_.size(); }

    std::span<const Complex> values() const { return values_; }
    std::span<Complex> values() { return values_; }

    Complex operator[](std::size_t i) const { return values_[i]; }
    Complex& operator[](std::size_t i) { return values_[i]; }

    /// Value at k, reading 0 for points outside the box.
    Complex at(std::span<const int> k) const;

    LatticeFunction& operator+=(const LatticeFunction& other);
    LatticeFunction& operator-=(const LatticeFunction& other);
    LatticeFunction& operator*=(Complex c);

    friend LatticeFunction operator+(LatticeFunction a, const LatticeFunction& b) { return a += b; }
    friend LatticeFunction operator-(LatticeFunction a, const LatticeFunction& b) { return a -= b; }
    friend LatticeFunction operator*(Complex c, LatticeFunction a) { return a *= c; }

private:
    LatticeBox box_;
    std::vector<Complex> values_;
};

/// Deterministic pairwise (cascade) summation with a fixed reduction tree.
double pairwise_sum(std::span<const double> terms);
Complex pairwise_sum(std::span<const Complex> terms);

/// <k> = (1 + |k|^2)^{1/2}
double japanese_bracket(std::span<const int> k);
double euclidean_norm(std::span<const int> k);

/// l^p norm over the box; p must be 1, 2 or infinity.
double lp_norm(const LatticeFunction& u, double p);

/// (u, v) = sum_k u(k) conj(v(k)); linear in u, conjugate-linear in v.
Complex l2_inner(const LatticeFunction& u, const LatticeFunction& v);

/// Delta^alpha u with Delta_j u(k) = u(k + e_j) - u(k), zero extension.
LatticeFunction forward_difference(const LatticeFunction& u, const MultiIndex& alpha);

/// sup_k |k^alpha (Delta^beta u)(k)| over the box.
double schwartz_seminorm(const LatticeFunction& u, const MultiIndex& alpha,
                         const MultiIndex& beta);

/// All multi-indices of the given dimension with |alpha| <= order, graded.
std::vector<MultiIndex> multi_indices_up_to(int dimension, int order);

// Serialization: {"n":..., "N":..., "values":[[re,im],...]} in enumeration order.
nlohmann::json to_json(const LatticeFunction& u);
LatticeFunction lattice_function_from_json(const nlohmann::json& j);

/// CSV rows "k_1,...,k_n,re,im".
void write_csv(std::ostream& out, const LatticeFunction& u);

}  // namespace sobscale
