#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace drspcrl {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Independent seed for (master, index, stream); order of use never matters.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream = 0) {
    return splitmix64(splitmix64(splitmix64(master) ^ index) ^ (stream * 0xD1B54A32D192ED03ull));
}

// Named random streams so that noise sources never share draws.
enum Stream : std::uint64_t {
    kEnvStream = 1,
    kPolicyStream = 2,
    kPerturbStream = 3,
    kInitStream = 4,
    kSchedulerStream = 5,
    kMinibatchStream = 6,
};

inline std::string engine_state(const std::mt19937_64& rng) {
    std::ostringstream out;
    out << rng;
    return out.str();
}

inline void load_engine_state(std::mt19937_64& rng, const std::string& state) {
    std::istringstream in(state);
    in >> rng;
    if (!in) {
        throw std::invalid_argument("malformed random engine state");
    }
}

} // namespace drspcrl
