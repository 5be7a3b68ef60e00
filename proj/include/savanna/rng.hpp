#pragma once

#include <cmath>
#include <cstdint>

namespace savanna {

// splitmix64 (Vigna, public domain). Used as the project-wide generator so
// that every result is bit-identical across platforms; the standard library
// distributions are not portable and are avoided on purpose.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on (0,1]; never 0 so log() is safe.
    double u01() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

    double exponential(double rate) { return -std::log(u01()) / rate; }

    // Uniform integer in [0,n), unbiased.
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t x, r;
        do {
            x = next();
            r = x % n;
        } while (x - r > std::uint64_t(0) - n);
        return r;
    }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

// Stateless 64-bit finalizer (same mixing as splitmix64's output stage).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed splitting. Replica and stream seeds are derived, never consumed
// sequentially, so results do not depend on scheduling or thread count:
//   derive_seed(master, a, b) = mix64(mix64(master ^ mix64(a + 1)) ^ mix64(b + 0x100000001))
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(mix64(master ^ mix64(a + 1)) ^ mix64(b + 0x100000001ULL));
}

}  // namespace savanna
