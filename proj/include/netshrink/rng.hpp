#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace netshrink {

// Stateless mixer used to derive independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Seeded generator with a contractually stable output sequence.
// std::mt19937_64 has its bit stream pinned by the standard, and the
// uniform/normal mappings below avoid the implementation-defined
// std::*_distribution classes, so identical seeds give identical draws
// on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Independent stream for a given sample index (or id hash).
    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        return Rng(splitmix64(seed ^ splitmix64(index + 1)));
    }

    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    // Box-Muller without state caching, two engine draws per call.
    double normal(double mean = 0.0, double sd = 1.0) {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double z = std::sqrt(-2.0 * std::log(u1)) *
                         std::cos(2.0 * 3.14159265358979323846 * u2);
        return mean + sd * z;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace netshrink
