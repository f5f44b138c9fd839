#pragma once

#include <cstdint>

namespace cauchyreg {

/// Counter-based stream splitting: every consumer derives its own generator
/// from (master seed, stream tags), so draws are independent of execution order.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(seed ^ splitmix64(tag));
}

/// Small counter-based generator; state advances through splitmix64 outputs.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(splitmix64(seed)) {}

    std::uint64_t next_u64() {
        state_ = splitmix64(state_);
        return state_;
    }

    /// Uniform in [0,1); 53-bit mantissa, identical on every platform.
    double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [-1,1].
    double next_pm1() { return 2.0 * next_unit() - 1.0; }

private:
    std::uint64_t state_;
};

} // namespace rng
} // namespace cauchyreg
