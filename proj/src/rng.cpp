#include "quakeinv/rng.hpp"

#include <cmath>
#include <istream>
#include <ostream>

namespace quakeinv {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed) {
    std::uint64_t s = seed;
    std::seed_seq seq{splitmix64(s), splitmix64(s), splitmix64(s), splitmix64(s)};
    eng_.seed(seq);
}

RngStream RngStream::for_chain(std::uint64_t seed, std::uint64_t chain_id) {
    std::uint64_t s = seed;
    const std::uint64_t mixed = splitmix64(s) ^ (0x6C62272E07BB0142ULL * (chain_id + 1));
    return RngStream(mixed);
}

double RngStream::uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

void RngStream::save(std::ostream& os) const {
    os << eng_ << ' ' << (has_spare_ ? 1 : 0);
    if (has_spare_) {
        os.precision(17);
        os << ' ' << spare_;
    }
}

void RngStream::load(std::istream& is) {
    int flag = 0;
    is >> eng_ >> flag;
    has_spare_ = (flag != 0);
    spare_ = 0.0;
    if (has_spare_) is >> spare_;
}

bool RngStream::operator==(const RngStream& other) const {
    return eng_ == other.eng_ && has_spare_ == other.has_spare_ &&
           (!has_spare_ || spare_ == other.spare_);
}

}  // namespace quakeinv
