#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace peano {

// Philox4x32-10 (Salmon et al., SC'11). Counter-based: the output block is a
// pure function of (counter, key), which is what makes per-path streams
// independent of scheduling.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;
    static Counter apply(Counter ctr, Key key) noexcept;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Mix a tag into a seed; used to give every (experiment, epsilon) pair its
// own seed domain.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept { return next_u64(); }

    std::uint64_t next_u64() noexcept;
    std::uint32_t next_u32() noexcept;

    // Open interval (0,1) with 53 random bits.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    double exponential() noexcept;
    double normal() noexcept;
    bool coin() noexcept { return (next_u32() & 1u) != 0; }

    // Child stream with its own key; identical for identical (parent, tag).
    RandomStream split(std::uint64_t tag) const noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    Philox4x32::Counter buf_{};
    int used_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace peano
