#include <cse/random.hpp>
#include <cse/special.hpp>

namespace cse {

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
    constexpr std::uint32_t m0 = 0xD2511F53u;
    constexpr std::uint32_t m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u;
    constexpr std::uint32_t w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{m0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{m1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += w0;
        key[1] += w1;
    }
    return ctr;
}

namespace {

std::array<std::uint64_t, 2> block(std::uint64_t key, std::uint64_t index, std::uint64_t block_index) {
    const PhiloxCounter ctr{static_cast<std::uint32_t>(block_index), static_cast<std::uint32_t>(block_index >> 32),
                            static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    const PhiloxKey k{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
    const auto out = philox4x32_10(ctr, k);
    return {(std::uint64_t{out[1]} << 32) | out[0], (std::uint64_t{out[3]} << 32) | out[2]};
}

double to_open_unit(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

}  // namespace

std::uint64_t RandomStream::bits_at(std::uint64_t i) const { return block(key_, index_, i >> 1)[i & 1]; }

double RandomStream::uniform_at(std::uint64_t i) const { return to_open_unit(bits_at(i)); }

double RandomStream::uniform() {
    const std::uint64_t i = draw_++;
    const std::uint64_t b = i >> 1;
    if (b != cached_block_) {
        cache_ = block(key_, index_, b);
        cached_block_ = b;
    }
    return to_open_unit(cache_[i & 1]);
}

double RandomStream::normal() { return normal_quantile(uniform()); }

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace cse
