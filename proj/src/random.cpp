#include "sobscale/random.hpp"

#include <cmath>
#include <numbers>

namespace sobscale {

namespace {

std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
    return mix(mix(mix(seed_) ^ stream_) + counter);
}

double CounterRng::uniform(std::uint64_t counter) const {
    // 53 random bits, shifted off zero.
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const {
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Complex CounterRng::complex_normal(std::uint64_t counter) const {
    return {normal(2 * counter), normal(2 * counter + 1)};
}

CounterRng CounterRng::substream(std::uint64_t stream) const {
    return CounterRng(seed_, mix(stream_ + 0x632be59bd9b4e019ULL) ^ stream);
}

LatticeFunction random_lattice_function(const LatticeBox& box, const CounterRng& rng) {
    LatticeFunction u(box);
    for (std::size_t i = 0; i < box.size(); ++i) u[i] = rng.complex_normal(i);
    return u;
}

}  // namespace sobscale
