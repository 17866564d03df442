#ifndef MASKEM_RNG_HPP
#define MASKEM_RNG_HPP

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "maskem/errors.hpp"

namespace maskem {

// Deterministic random source. All library randomness flows through this type,
// so one seed fixes every output byte. mt19937_64 seeded with a single integer
// has a fully specified output sequence; the derived draws below avoid the
// standard distribution classes, whose algorithms are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform integer in [0, n). One word per draw, masked rejection, so the
    // result is unbiased for every n >= 1.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw InvariantError("Rng::below requires n >= 1");
        if (n == 1) return 0;
        const std::uint64_t mask = ~std::uint64_t{0} >> std::countl_zero(n - 1);
        for (;;) {
            const std::uint64_t v = next_u64() & mask;
            if (v < n) return v;
        }
    }

    // Uniform double in [0, 1) with 53 random bits.
    double real01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return real01() < p; }

    // Child stream i, deterministic in (seed, i). Streams with distinct
    // indices are independent for practical purposes (splitmix64 scrambling).
    Rng stream(std::uint64_t i) const {
        return Rng(splitmix64(seed_ ^ (0x9E3779B97F4A7C15ULL * (i + 1))));
    }

    std::uint64_t seed() const { return seed_; }

private:
    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

// Uniform sorted sample of count distinct values from [0, upper), by partial
// Fisher-Yates on the index pool.
inline std::vector<std::size_t> sample_distinct_sorted(std::size_t count,
                                                       std::size_t upper,
                                                       Rng& rng) {
    if (count > upper)
        throw InvariantError("sample_distinct_sorted: count exceeds range");
    std::vector<std::size_t> pool(upper);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(upper - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace maskem

#endif
