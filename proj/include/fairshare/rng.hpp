#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>

namespace fairshare {

// Counter-free splitmix64 stream. We avoid <random> engines and distributions
// so that traces are bit-identical across standard libraries.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe as a log() argument.
    double next_unit_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // Standard normal via Box-Muller (one value per call, two uniforms).
    double normal() {
        const double u = next_unit_pos();
        const double v = next_unit();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925286766559 * v);
    }

    // Exact Binomial(n, p) draw. Counts successes by skipping over failures
    // with geometric jumps; expected cost O(n * min(p, 1-p)).
    std::uint64_t binomial(std::uint64_t n, double p) {
        if (n == 0 || p <= 0.0) return 0;
        if (p >= 1.0) return n;
        if (p > 0.5) return n - binomial(n, 1.0 - p);
        const double log_q = std::log1p(-p);
        std::uint64_t count = 0;
        double pos = 0.0;
        while (true) {
            pos += std::floor(std::log(next_unit_pos()) / log_q) + 1.0;
            if (pos > static_cast<double>(n)) return count;
            ++count;
        }
    }

private:
    std::uint64_t state_;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) { h ^= c; h *= 0x100000001b3ULL; }
    return h;
}
} // namespace detail

// Stream id = base seed folded with (run, agent, purpose label, round) through
// splitmix64 finalisers. Changing any label yields an unrelated stream, so
// paired simulations can share the environment draws they have in common.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t run,
                                 std::uint64_t agent, std::string_view purpose,
                                 std::uint64_t round = 0) {
    std::uint64_t h = detail::mix64(base_seed ^ 0x8af1d4e3c5a7b901ULL);
    h = detail::mix64(h ^ (run + 0x9e3779b97f4a7c15ULL));
    h = detail::mix64(h ^ (agent + 0x6a09e667f3bcc909ULL));
    h = detail::mix64(h ^ detail::fnv1a(purpose));
    h = detail::mix64(h ^ (round + 0xbb67ae8584caa73bULL));
    return h;
}

} // namespace fairshare
