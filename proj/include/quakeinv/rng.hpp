#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>

namespace quakeinv {

/// Deterministic random stream with explicit state serialization.
///
/// Wraps mt19937_64 and hand-rolls the variate transforms so that the draw
/// sequence is pinned by this code alone (the std::*_distribution adaptors
/// are implementation-defined) and so that checkpoints can capture the full
/// state, including the cached Box-Muller spare.
class RngStream {
public:
    RngStream() : RngStream(0) {}
    explicit RngStream(std::uint64_t seed);

    /// Stream for one chain, decorrelated from the master seed via splitmix64.
    static RngStream for_chain(std::uint64_t seed, std::uint64_t chain_id);

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    /// Standard normal via Box-Muller; the pair's second value is cached.
    double normal();

    void save(std::ostream& os) const;
    void load(std::istream& is);

    bool operator==(const RngStream& other) const;

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// splitmix64 step; used for seed mixing.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace quakeinv
