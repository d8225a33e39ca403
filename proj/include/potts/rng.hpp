#pragma once

#include <cstdint>
#include <string_view>

namespace potts {

// Counter-based generator: every draw is a pure function of
// (seed, key string, counter). Realizations therefore do not depend on
// enumeration order or on how many draws other vertices consumed.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::string_view key) : state_(0x9e3779b97f4a7c15ull ^ seed) {
        for (unsigned char c : key) state_ = mix_(state_ ^ c);
        state_ = mix_(state_);
    }

    std::uint64_t next_u64() { return mix_(state_ + 0x9e3779b97f4a7c15ull * ++counter_); }

    /// Uniform double in [0, 1).
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    static std::uint64_t mix_(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    std::uint64_t counter_ = 0;
};

}  // namespace potts
