#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "sobscale/lattice.hpp"
#include "sobscale/random.hpp"

namespace sobscale::testing {

inline double rel_err(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline double rel_err(Complex a, Complex b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline LatticeFunction random_function(const LatticeBox& box, std::uint64_t seed, std::uint64_t stream = 0) {
    return random_lattice_function(box, CounterRng(seed, stream));
}

/// max_k |u(k) - v(k)| / max_k |v(k)|
inline double max_rel_diff(const LatticeFunction& u, const LatticeFunction& v) {
    double d = 0.0, s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        d = std::max(d, std::abs(u[i] - v[i]));
        s = std::max(s, std::abs(v[i]));
    }
    return s == 0.0 ? d : d / s;
}

}  // namespace sobscale::testing
