#include "sobscale/torus.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sobscale/error.hpp"

namespace sobscale {

namespace {

long long positive_mod(long long a, long long m) {
    const long long r = a % m;
    return r < 0 ? r + m : r;
}

}  // namespace

TorusGrid::TorusGrid(int dimension, int points_per_axis)
    : dimension_(dimension), points_(points_per_axis), size_(1) {
    if (dimension < 1) throw DimensionError("TorusGrid: dimension must be >= 1");
    if (points_per_axis < 1) throw ParameterError("TorusGrid: points per axis must be >= 1");
    for (int j = 0; j < dimension; ++j) size_ *= static_cast<std::size_t>(points_);
    weight_ = 1.0 / static_cast<double>(size_);
    roots_.resize(points_);
    // Symmetric evaluation keeps conjugate pairs exactly conjugate.
    for (int j = 0; j < points_; ++j) {
        const int jj = 2 * j > points_ ? j - points_ : j;
        const double angle = 2.0 * std::numbers::pi * jj / points_;
        roots_[j] = {std::cos(angle), std::sin(angle)};
    }
}

int TorusGrid::default_points(int radius) {
    const int m = 2 * (2 * radius + 1);
    return m % 2 == 0 ? m + 1 : m;
}

TorusGrid TorusGrid::for_box(const LatticeBox& box) {
    return TorusGrid(box.dimension(), default_points(box.radius()));
}

std::vector<int> TorusGrid::node(std::size_t index) const {
    std::vector<int> m(dimension_);
    for (int j = dimension_ - 1; j >= 0; --j) {
        m[j] = static_cast<int>(index % static_cast<std::size_t>(points_));
        index /= static_cast<std::size_t>(points_);
    }
    return m;
}

std::vector<double> TorusGrid::coordinates(std::size_t index) const {
    const auto m = node(index);
    std::vector<double> x(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) x[j] = static_cast<double>(m[j]) / points_;
    return x;
}

int TorusGrid::min_frequency() const { return points_ % 2 == 1 ? -(points_ - 1) / 2 : -points_ / 2 + 1; }
int TorusGrid::max_frequency() const { return points_ % 2 == 1 ? (points_ - 1) / 2 : points_ / 2; }

void TorusGrid::require_resolves(const LatticeBox& box) const {
    if (box.dimension() != dimension_) {
        throw ShapeError("torus grid dimension " + std::to_string(dimension_) +
                         " does not match box dimension " + std::to_string(box.dimension()));
    }
    if (points_ < box.side()) {
        throw ResolutionError("torus grid with M = " + std::to_string(points_) +
                              " points per axis undersamples a box of radius N = " +
                              std::to_string(box.radius()) + " (need M >= 2N+1 = " +
                              std::to_string(box.side()) + ")");
    }
}

Complex TorusGrid::root(long long j) const { return roots_[positive_mod(j, points_)]; }

TorusSamples::TorusSamples(TorusGrid grid) : grid_(std::move(grid)), values_(grid_.size(), Complex{}) {}

TorusSamples::TorusSamples(TorusGrid grid, std::vector<Complex> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw ShapeError("TorusSamples: value count does not match grid size");
    }
}

TorusSamples dft(const LatticeFunction& u, const TorusGrid& grid) {
    const LatticeBox& box = u.box();
    grid.require_resolves(box);
    std::vector<Point> points(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) points[i] = box.point(i);

    TorusSamples out(grid);
    std::vector<Complex> terms(box.size());
    for (std::size_t node = 0; node < grid.size(); ++node) {
        const auto m = grid.node(node);
        for (std::size_t i = 0; i < box.size(); ++i) {
            long long phase = 0;
            for (int j = 0; j < box.dimension(); ++j) phase += static_cast<long long>(points[i][j]) * m[j];
            terms[i] = grid.root(-phase) * u[i];
        }
        out[node] = pairwise_sum(terms);
    }
    return out;
}

LatticeFunction idft(const TorusSamples& samples, const LatticeBox& box) {
    const TorusGrid& grid = samples.grid();
    grid.require_resolves(box);
    std::vector<std::vector<int>> nodes(grid.size());
    for (std::size_t n = 0; n < grid.size(); ++n) nodes[n] = grid.node(n);

    LatticeFunction out(box);
    std::vector<Complex> terms(grid.size());
    for (std::size_t i = 0; i < box.size(); ++i) {
        const Point k = box.point(i);
        for (std::size_t n = 0; n < grid.size(); ++n) {
            long long phase = 0;
            for (int j = 0; j < box.dimension(); ++j) phase += static_cast<long long>(k[j]) * nodes[n][j];
            terms[n] = grid.root(phase) * samples[n];
        }
        out[i] = pairwise_sum(terms) * grid.weight();
    }
    return out;
}

std::vector<int> torus_frequency(const TorusGrid& grid, std::size_t index) {
    auto q = grid.node(index);
    for (auto& c : q) c += grid.min_frequency();
    return q;
}

std::vector<Complex> torus_coefficients(const TorusSamples& samples) {
    const TorusGrid& grid = samples.grid();
    std::vector<std::vector<int>> nodes(grid.size());
    for (std::size_t n = 0; n < grid.size(); ++n) nodes[n] = grid.node(n);

    std::vector<Complex> coeffs(grid.size());
    std::vector<Complex> terms(grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c) {
        const auto q = torus_frequency(grid, c);
        for (std::size_t n = 0; n < grid.size(); ++n) {
            long long phase = 0;
            for (int j = 0; j < grid.dimension(); ++j) phase += static_cast<long long>(q[j]) * nodes[n][j];
            terms[n] = grid.root(-phase) * samples[n];
        }
        coeffs[c] = pairwise_sum(terms) * grid.weight();
    }
    return coeffs;
}

TorusSamples torus_synthesize(const TorusGrid& grid, std::span<const Complex> coefficients) {
    if (coefficients.size() != grid.size()) throw ShapeError("torus_synthesize: coefficient count mismatch");
    std::vector<std::vector<int>> freqs(grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c) freqs[c] = torus_frequency(grid, c);

    TorusSamples out(grid);
    std::vector<Complex> terms(grid.size());
    for (std::size_t n = 0; n < grid.size(); ++n) {
        const auto m = grid.node(n);
        for (std::size_t c = 0; c < grid.size(); ++c) {
            long long phase = 0;
            for (int j = 0; j < grid.dimension(); ++j) phase += static_cast<long long>(freqs[c][j]) * m[j];
            terms[c] = grid.root(phase) * coefficients[c];
        }
        out[n] = pairwise_sum(terms);
    }
    return out;
}

double falling_factorial(int q, int l) {
    double r = 1.0;
    for (int i = 0; i < l; ++i) r *= static_cast<double>(q - i);
    return r;
}

TorusSamples falling_factorial_derivative(const TorusSamples& samples, const MultiIndex& beta) {
    const TorusGrid& grid = samples.grid();
    if (beta.size() != static_cast<std::size_t>(grid.dimension())) {
        throw DimensionError("falling_factorial_derivative: multi-index dimension mismatch");
    }
    bool identity = true;
    for (int b : beta) {
        if (b < 0) throw ParameterError("falling_factorial_derivative: negative multi-index entry");
        identity = identity && b == 0;
    }
    if (identity) return samples;

    auto coeffs = torus_coefficients(samples);
    for (std::size_t c = 0; c < coeffs.size(); ++c) {
        const auto q = torus_frequency(grid, c);
        double f = 1.0;
        for (std::size_t j = 0; j < q.size(); ++j) f *= falling_factorial(q[j], beta[j]);
        coeffs[c] *= f;
    }
    return torus_synthesize(grid, coeffs);
}

nlohmann::json to_json(const TorusSamples& s) {
    nlohmann::json values = nlohmann::json::array();
    for (const auto& v : s.values()) values.push_back({v.real(), v.imag()});
    return {{"n", s.grid().dimension()}, {"M", s.grid().points_per_axis()}, {"values", std::move(values)}};
}

TorusSamples torus_samples_from_json(const nlohmann::json& j) {
    try {
        TorusGrid grid(j.at("n").get<int>(), j.at("M").get<int>());
        std::vector<Complex> values;
        for (const auto& v : j.at("values")) values.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
        return TorusSamples(grid, std::move(values));
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("torus samples JSON: ") + e.what());
    }
}

}  // namespace sobscale
