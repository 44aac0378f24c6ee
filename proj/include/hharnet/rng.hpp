#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace hharnet {

/// Deterministic 64-bit generator (splitmix64). Every randomized step in the
/// library draws from this so that results are bit-reproducible across
/// platforms and standard-library versions; std::shuffle and the std
/// distributions are implementation-defined and are deliberately not used.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be > 0.
    std::size_t next_below(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Uniform double in [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

private:
    std::uint64_t state_;
};

/// Fisher-Yates shuffle driven by Rng (stable across platforms).
template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[rng.next_below(i)]);
    }
}

/// Per-component seed derivation. All randomness in a run flows from one
/// master seed; each component draws its own seed as
/// derive_seed(master, component_tag).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t component) {
    Rng r(master ^ ((component + 1) * 0xD1B54A32D192ED03ULL));
    return r.next_u64();
}

/// Component tags for derive_seed. Documented here so runs can be replayed.
namespace seed_tag {
inline constexpr std::uint64_t kSplit = 1;
inline constexpr std::uint64_t kFlat = 2;
inline constexpr std::uint64_t kRoot = 3;
inline constexpr std::uint64_t kChildFirst = 4;  // child node i uses kChildFirst + i
inline constexpr std::uint64_t kMlp64 = 8;
inline constexpr std::uint64_t kForest = 9;
inline constexpr std::uint64_t kBootstrap = 10;
inline constexpr std::uint64_t kGridSearch = 16;  // run j uses kGridSearch + j
}  // namespace seed_tag

}  // namespace hharnet
