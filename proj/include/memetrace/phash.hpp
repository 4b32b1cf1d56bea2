#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memetrace {

/// 64-bit DCT perceptual fingerprint. Bit 63 is the DC coefficient; the
/// remaining bits follow the 8x8 low-frequency block in row-major order.
struct PHash64 {
    std::uint64_t bits = 0;

    constexpr PHash64() = default;
    constexpr explicit PHash64(std::uint64_t b) : bits(b) {}

    friend constexpr auto operator<=>(PHash64, PHash64) = default;
};

/// Hamming score between two hashes, always in [0, 64].
using HammingScore = std::uint8_t;
inline constexpr int kMaxHamming = 64;

inline HammingScore hamming(PHash64 a, PHash64 b) noexcept {
    return static_cast<HammingScore>(std::popcount(a.bits ^ b.bits));
}

std::string format_phash_hex(PHash64 h);
std::optional<PHash64> try_parse_phash_hex(std::string_view text);
/// Throws InvalidInput("invalid phash hex") on anything but 16 hex digits.
PHash64 parse_phash_hex(std::string_view text);

/// Decoded 8-bit image: 1 (gray), 3 (RGB) or 4 (RGBA) interleaved channels.
struct Raster {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;

    Raster() = default;
    Raster(int w, int h, int c);

    std::uint8_t* row(int y) { return pixels.data() + static_cast<std::size_t>(y) * width * channels; }
    const std::uint8_t* row(int y) const {
        return pixels.data() + static_cast<std::size_t>(y) * width * channels;
    }
};

/// Luma (ITU-R 601), box-resampled to 32x32, 2-D DCT-II, 8x8 low block
/// thresholded strictly above its median (DC included).
PHash64 compute_phash(const Raster& image);

} // namespace memetrace

template <>
struct std::hash<memetrace::PHash64> {
    std::size_t operator()(memetrace::PHash64 h) const noexcept {
        return std::hash<std::uint64_t>{}(h.bits);
    }
};
