#pragma once
#include <array>
#include <cstdint>

namespace cse {

/*
 * Philox4x32-10 block function (Salmon et al., SC'11).
 * Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits.
 */
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

/*
 * Counter-based random stream for one simulation index.
 *
 * Draw i of stream (seed, k) is a pure function of (seed, k, i):
 * the 64-bit seed is the Philox key, the counter holds the block
 * index i/2 in words 0-1 and k in words 2-3, and the two 64-bit halves
 * of the output block serve draws 2j and 2j+1. Nothing depends on which
 * worker consumes the stream or in what order streams are created.
 */
class RandomStream {
   public:
    RandomStream(std::uint64_t key, std::uint64_t index) : key_(key), index_(index) {}

    std::uint64_t key() const { return key_; }
    std::uint64_t index() const { return index_; }
    std::uint64_t position() const { return draw_; }

    // Raw 64 bits of draw `i`, independent of the stream position.
    std::uint64_t bits_at(std::uint64_t i) const;

    // Uniform in the open interval (0, 1), 53-bit resolution.
    double uniform_at(std::uint64_t i) const;

    double uniform();

    // Standard normal by inversion, so one normal consumes one uniform.
    double normal();

    void seek(std::uint64_t draw) { draw_ = draw; }

   private:
    std::uint64_t key_;
    std::uint64_t index_;
    std::uint64_t draw_ = 0;
    std::uint64_t cached_block_ = ~std::uint64_t{0};
    std::array<std::uint64_t, 2> cache_{};
};

// SplitMix64 finalizer; used to derive keys for auxiliary stream families.
std::uint64_t mix64(std::uint64_t x);

/*
 * Master seed for a run. Simulation k uses stream(k); auxiliary
 * consumers (bootstrap, etc.) get disjoint key spaces via a tag.
 */
struct SeedSpec {
    std::uint64_t master_seed = 0;

    RandomStream stream(std::uint64_t k) const { return {master_seed, k}; }

    RandomStream tagged_stream(std::uint64_t tag, std::uint64_t k) const {
        return {mix64(master_seed ^ mix64(tag)), k};
    }
};

// Tag for bootstrap resampling streams ("bootstrap" as ASCII bytes).
inline constexpr std::uint64_t kBootstrapTag = 0x626f6f7473747261ULL;

}  // namespace cse
