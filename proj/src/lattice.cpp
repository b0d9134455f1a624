#include "sobscale/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "sobscale/error.hpp"

namespace sobscale {

namespace {

constexpr std::size_t kPairwiseBlock = 8;

template <typename T>
T pairwise_sum_impl(std::span<const T> terms) {
    if (terms.size() <= kPairwiseBlock) {
        T acc{};
        for (const T& t : terms) acc += t;
        return acc;
    }
    const std::size_t half = terms.size() / 2;
    return pairwise_sum_impl(terms.first(half)) + pairwise_sum_impl(terms.subspan(half));
}

void require_same_box(const LatticeFunction& u, const LatticeFunction& v, const char* what) {
    if (!(u.box() == v.box())) {
        throw ShapeError(std::string(what) + ": lattice functions live on different boxes");
    }
}

void require_dimension(const LatticeBox& box, std::size_t got, const char* what) {
    if (got != static_cast<std::size_t>(box.dimension())) {
        throw DimensionError(std::string(what) + ": expected dimension " +
                             std::to_string(box.dimension()) + ", got " + std::to_string(got));
    }
}

}  // namespace

LatticeBox::LatticeBox(int dimension, int radius) : dimension_(dimension), radius_(radius), size_(1) {
    if (dimension < 1) throw DimensionError("LatticeBox: dimension must be >= 1");
    if (radius < 0) throw ParameterError("LatticeBox: radius must be >= 0");
    for (int j = 0; j < dimension; ++j) size_ *= static_cast<std::size_t>(side());
}

Point LatticeBox::point(std::size_t index) const {
    Point k(dimension_);
    const auto s = static_cast<std::size_t>(side());
    for (int j = dimension_ - 1; j >= 0; --j) {
        k[j] = static_cast<int>(index % s) - radius_;
        index /= s;
    }
    return k;
}

bool LatticeBox::contains(std::span<const int> k) const {
    if (k.size() != static_cast<std::size_t>(dimension_)) return false;
    return std::all_of(k.begin(), k.end(), [this](int c) { return std::abs(c) <= radius_; });
}

std::optional<std::size_t> LatticeBox::find(std::span<const int> k) const {
    require_dimension(*this, k.size(), "LatticeBox::find");
    std::size_t idx = 0;
    const auto s = static_cast<std::size_t>(side());
    for (int c : k) {
        if (std::abs(c) > radius_) return std::nullopt;
        idx = idx * s + static_cast<std::size_t>(c + radius_);
    }
    return idx;
}

std::size_t LatticeBox::index(std::span<const int> k) const {
    auto idx = find(k);
    if (!idx) throw ShapeError("LatticeBox::index: point outside the box");
    return *idx;
}

std::size_t LatticeBox::origin() const {
    return (size_ - 1) / 2;
}

LatticeFunction::LatticeFunction(LatticeBox box) : box_(box), values_(box.size(), Complex{}) {}

LatticeFunction::LatticeFunction(LatticeBox box, std::vector<Complex> values)
    : box_(box), values_(std::move(values)) {
    if (values_.size() != box_.size()) {
        throw ShapeError("LatticeFunction: value count " + std::to_string(values_.size()) +
                         " does not match box cardinality " + std::to_string(box_.size()));
    }
}

LatticeFunction LatticeFunction::delta(const LatticeBox& box, std::span<const int> k, Complex value) {
    LatticeFunction u(box);
    u[box.index(k)] = value;
    return u;
}

LatticeFunction LatticeFunction::from(const LatticeBox& box,
                                      const std::function<Complex(const Point&)>& f) {
    LatticeFunction u(box);
    for (std::size_t i = 0; i < box.size(); ++i) u[i] = f(box.point(i));
    return u;
}

Complex LatticeFunction::at(std::span<const int> k) const {
    auto idx = box_.find(k);
    return idx ? values_[*idx] : Complex{};
}

LatticeFunction& LatticeFunction::operator+=(const LatticeFunction& other) {
    require_same_box(*this, other, "operator+=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

LatticeFunction& LatticeFunction::operator-=(const LatticeFunction& other) {
    require_same_box(*this, other, "operator-=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

LatticeFunction& LatticeFunction::operator*=(Complex c) {
    for (auto& v : values_) v *= c;
    return *this;
}

double pairwise_sum(std::span<const double> terms) { return pairwise_sum_impl(terms); }
Complex pairwise_sum(std::span<const Complex> terms) { return pairwise_sum_impl(terms); }

double euclidean_norm(std::span<const int> k) {
    double s = 0.0;
    for (int c : k) s += static_cast<double>(c) * c;
    return std::sqrt(s);
}

double japanese_bracket(std::span<const int> k) {
    if (k.empty()) throw DimensionError("japanese_bracket: empty lattice point");
    double s = 1.0;
    for (int c : k) s += static_cast<double>(c) * c;
    return std::sqrt(s);
}

double lp_norm(const LatticeFunction& u, double p) {
    const auto vals = u.values();
    if (p == 1.0 || p == 2.0) {
        std::vector<double> terms(vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i) {
            terms[i] = p == 1.0 ? std::abs(vals[i]) : std::norm(vals[i]);
        }
        const double s = pairwise_sum(terms);
        return p == 1.0 ? s : std::sqrt(s);
    }
    if (std::isinf(p) && p > 0) {
        double m = 0.0;
        for (const auto& v : vals) m = std::max(m, std::abs(v));
        return m;
    }
    throw ParameterError("lp_norm: unsupported exponent p = " + std::to_string(p) +
                         " (supported: 1, 2, inf)");
}

Complex l2_inner(const LatticeFunction& u, const LatticeFunction& v) {
    require_same_box(u, v, "l2_inner");
    std::vector<Complex> terms(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) terms[i] = u[i] * std::conj(v[i]);
    return pairwise_sum(terms);
}

LatticeFunction forward_difference(const LatticeFunction& u, const MultiIndex& alpha) {
    const LatticeBox& box = u.box();
    require_dimension(box, alpha.size(), "forward_difference");
    LatticeFunction cur = u;
    for (int j = 0; j < box.dimension(); ++j) {
        if (alpha[j] < 0) throw ParameterError("forward_difference: negative multi-index entry");
        for (int rep = 0; rep < alpha[j]; ++rep) {
            LatticeFunction next(box);
            for (std::size_t i = 0; i < box.size(); ++i) {
                Point k = box.point(i);
                k[j] += 1;
                next[i] = cur.at(k) - cur[i];
            }
            cur = std::move(next);
        }
    }
    return cur;
}

double schwartz_seminorm(const LatticeFunction& u, const MultiIndex& alpha, const MultiIndex& beta) {
    const LatticeBox& box = u.box();
    require_dimension(box, alpha.size(), "schwartz_seminorm");
    const LatticeFunction d = forward_difference(u, beta);
    double m = 0.0;
    for (std::size_t i = 0; i < box.size(); ++i) {
        const Point k = box.point(i);
        double mono = 1.0;
        for (int j = 0; j < box.dimension(); ++j) mono *= std::pow(static_cast<double>(k[j]), alpha[j]);
        m = std::max(m, std::abs(mono * d[i]));
    }
    return m;
}

std::vector<MultiIndex> multi_indices_up_to(int dimension, int order) {
    std::vector<MultiIndex> out;
    for (int total = 0; total <= order; ++total) {
        // All compositions of `total` into `dimension` non-negative parts, lexicographic.
        MultiIndex a(dimension, 0);
        std::function<void(int, int)> rec = [&](int pos, int remaining) {
            if (pos == dimension - 1) {
                a[pos] = remaining;
                out.push_back(a);
                return;
            }
            for (int v = remaining; v >= 0; --v) {
                a[pos] = v;
                rec(pos + 1, remaining - v);
            }
        };
        rec(0, total);
    }
    return out;
}

nlohmann::json to_json(const LatticeFunction& u) {
    nlohmann::json values = nlohmann::json::array();
    for (const auto& v : u.values()) values.push_back({v.real(), v.imag()});
    return {{"n", u.box().dimension()}, {"N", u.box().radius()}, {"values", std::move(values)}};
}

LatticeFunction lattice_function_from_json(const nlohmann::json& j) {
    try {
        LatticeBox box(j.at("n").get<int>(), j.at("N").get<int>());
        const auto& vals = j.at("values");
        std::vector<Complex> values;
        values.reserve(vals.size());
        for (const auto& v : vals) values.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
        return LatticeFunction(box, std::move(values));
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("lattice function JSON: ") + e.what());
    }
}

void write_csv(std::ostream& out, const LatticeFunction& u) {
    const LatticeBox& box = u.box();
    for (int j = 0; j < box.dimension(); ++j) out << "k" << (j + 1) << ',';
    out << "re,im\n";
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < box.size(); ++i) {
        for (int c : box.point(i)) out << c << ',';
        out << u[i].real() << ',' << u[i].imag() << '\n';
    }
    out.precision(old_precision);
}

}  // namespace sobscale
