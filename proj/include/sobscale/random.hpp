#pragma once

#include <cstdint>

#include "sobscale/lattice.hpp"

namespace sobscale {

/// Counter-based generator: value(i) = splitmix64(seed, stream, i).
///
/// Draws depend only on (seed, stream, counter), never on call order or the
/// platform's <random> distributions, so reports are reproducible everywhere.
class CounterRng {
public:
    static constexpr const char* kName = "splitmix64-counter";

    CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

    std::uint64_t bits(std::uint64_t counter) const;
    /// Uniform in (0, 1).
    double uniform(std::uint64_t counter) const;
    /// Standard normal via Box-Muller on counters 2c and 2c+1.
    double normal(std::uint64_t counter) const;
    /// Standard complex Gaussian (independent N(0,1) real and imaginary parts).
    Complex complex_normal(std::uint64_t counter) const;

    CounterRng substream(std::uint64_t stream) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

/// Lattice function with independent standard complex Gaussian entries,
/// entry i drawn from counter i of `rng`.
LatticeFunction random_lattice_function(const LatticeBox& box, const CounterRng& rng);

}  // namespace sobscale
