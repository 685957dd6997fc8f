#pragma once

#include <cstdint>
#include <random>

namespace aggecon {

// Deterministic random stream for a single run. All stochastic draws in the
// simulator come from one instance of this class, in a fixed documented order
// (see engine.hpp), so an identical seed reproduces an identical run on the
// same build. The integer and real mappings below are implemented by hand so
// the stream does not depend on the standard library's distribution objects.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform double in [0, 1) with 53 random bits.
    double u01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform double in [lo, hi).
    double uniform_real(double lo, double hi) { return lo + (hi - lo) * u01(); }

    // Uniform integer in [lo, hi], both ends inclusive. Unbiased via rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1u;
        if (span == 0u) return lo + static_cast<std::int64_t>(gen_());  // full 64-bit range
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t r;
        do {
            r = gen_();
        } while (r >= limit);
        return lo + static_cast<std::int64_t>(r % span);
    }

    // Normal via Box-Muller (single value; exactly two generator words per call).
    double normal(double mean, double sigma) {
        const double u1 = static_cast<double>((gen_() >> 11) + 1u) * 0x1.0p-53;  // (0, 1]
        const double u2 = u01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace aggecon
