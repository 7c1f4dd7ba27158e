#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace persistx {

// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// 64-bit FNV-1a of a tag, used to separate substream domains ("replicate", "resample", ...).
constexpr std::uint64_t stream_domain(std::string_view tag) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Counter-based random stream.  A (seed, domain, index) triple names an
/// independent substream; the draws depend on nothing else, so any schedule of
/// replicates over threads reproduces the same numbers.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t domain, std::uint64_t index) noexcept;
    RandomStream(std::uint64_t seed, std::string_view domain, std::uint64_t index) noexcept
        : RandomStream(seed, stream_domain(domain), index) {}

    std::uint64_t next_u64() noexcept;

    /// Uniform on the open interval (0, 1) with 53-bit resolution.
    double uniform() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t blocks_used() const noexcept { return block_; }

private:
    void refill() noexcept;

    std::array<std::uint32_t, 2> key_{};
    std::uint64_t index_ = 0;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int pos_ = 4;
};

} // namespace persistx
