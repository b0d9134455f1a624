#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "sobscale/lattice.hpp"

namespace sobscale {

/// Uniform grid on T^n = [0,1)^n with nodes x_j = m_j / M and weight 1/M^n.
///
/// Nodes are enumerated lexicographically in (m_1, ..., m_n), m_1 most
/// significant, matching the LatticeBox convention.
class TorusGrid {
public:
    TorusGrid(int dimension, int points_per_axis);

    /// Grid with 2(2N+1) points per axis rounded up to the next odd integer.
    static TorusGrid for_box(const LatticeBox& box);
    static int default_points(int radius);

    int dimension() const { return dimension_; }
    int points_per_axis() const { return points_; }
    std::size_t size() const { return size_; }
    double weight() const { return weight_; }

    /// Integer coordinates (m_1, ..., m_n) of node `index`.
    std::vector<int> node(std::size_t index) const;
    /// Real coordinates x = m / M.
    std::vector<double> coordinates(std::size_t index) const;

    /// Frequencies represented without ambiguity: q in [-(M-1)/2, (M-1)/2]
    /// for odd M, [-M/2 + 1, M/2] for even M.
    int min_frequency() const;
    int max_frequency() const;

    /// Throws ResolutionError unless M >= 2N+1.
    void require_resolves(const LatticeBox& box) const;

    /// e^{2 pi i j / M} for j mod M, from an exact table.
    Complex root(long long j) const;

    bool operator==(const TorusGrid&) const = default;

private:
    int dimension_;
    int points_;
    std::size_t size_;
    double weight_;
    std::vector<Complex> roots_;
};

/// Values of a function on the nodes of a TorusGrid.
class TorusSamples {
public:
    explicit TorusSamples(TorusGrid grid);
    TorusSamples(TorusGrid grid, std::vector<Complex> values);

    const TorusGrid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    std::span<const Complex> values() const { return values_; }
    std::span<Complex> values() { return values_; }
    Complex operator[](std::size_t i) const { return values_[i]; }
    Complex& operator[](std::size_t i) { return values_[i]; }

private:
    TorusGrid grid_;
    std::vector<Complex> values_;
};

/// u^(x_m) = sum_k e^{-2 pi i k.x_m} u(k)
TorusSamples dft(const LatticeFunction& u, const TorusGrid& grid);

/// u(k) = M^{-n} sum_m e^{2 pi i k.x_m} u^(x_m), for k in the box.
LatticeFunction idft(const TorusSamples& samples, const LatticeBox& box);

/// Fourier coefficients c_q with f(x) = sum_q c_q e^{2 pi i q.x}, q over the
/// grid's unambiguous frequency range (lexicographic, q_1 most significant).
std::vector<Complex> torus_coefficients(const TorusSamples& samples);
TorusSamples torus_synthesize(const TorusGrid& grid, std::span<const Complex> coefficients);

/// Frequency vector of coefficient `index` in torus_coefficients order.
std::vector<int> torus_frequency(const TorusGrid& grid, std::size_t index);

/// q (q-1) ... (q-l+1); 1 for l = 0.
double falling_factorial(int q, int l);

/// D^(beta)_x applied spectrally: the mode e^{2 pi i q.x} is multiplied by
/// prod_j q_j (q_j - 1) ... (q_j - beta_j + 1).
TorusSamples falling_factorial_derivative(const TorusSamples& samples, const MultiIndex& beta);

// JSON mirror of the lattice format with "M" in place of "N".
nlohmann::json to_json(const TorusSamples& s);
TorusSamples torus_samples_from_json(const nlohmann::json& j);

}  // namespace sobscale
