#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace gwkit::detail {

// splitmix64 step (Steele, Lea & Flood 2014). Used both as a stream mixer
// and as the permutation generator so simulation results do not depend on
// the standard library's distribution implementations.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Counter-based substream: stream(seed, i) and stream(seed, j) are
// independent for i != j, so per-simulation draws are identical whether
// simulations run serially or in parallel.
class SubstreamRng {
public:
    SubstreamRng(std::uint64_t seed, std::uint64_t stream_index) {
        std::uint64_t s = seed;
        splitmix64(s);
        s ^= 0xD1B54A32D192ED03ULL * (stream_index + 1);
        splitmix64(s);
        state_ = s;
    }

    std::uint64_t next() { return splitmix64(state_); }

    // Unbiased draw from [0, bound) by rejection.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v = next();
        while (v >= limit) v = next();
        return v % bound;
    }

private:
    std::uint64_t state_;
};

// Fisher–Yates permutation of {0, ..., n-1}.
inline std::vector<int> random_permutation(int n, SubstreamRng& rng) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) {
        const auto j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    return perm;
}

}  // namespace gwkit::detail
