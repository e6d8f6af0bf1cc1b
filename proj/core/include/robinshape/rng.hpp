#pragma once

#include <cstdint>
#include <cstddef>
#include <utility>
#include <vector>

namespace robinshape {

/// Counter-based generator: the k-th draw of a stream is
/// splitmix64(key + k * golden). Streams are keyed by (seed, stream index),
/// so results do not depend on thread scheduling or draw interleaving.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_(mix(seed ^ mix(stream + 0x632BE59BD9B4E019ULL))) {}

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next() noexcept {
        ++counter_;
        return mix(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound). Uses rejection to stay unbiased.
    std::uint64_t below(std::uint64_t bound) noexcept {
        if (bound <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t x = next();
        while (x >= limit) x = next();
        return x % bound;
    }

    template <class T>
    void shuffle(std::vector<T>& v) noexcept {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace robinshape
