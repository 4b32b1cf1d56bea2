#include "memetrace/phash.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "memetrace/errors.hpp"

namespace memetrace {

namespace {

constexpr int kSide = 32;
constexpr int kBlock = 8;
// Coefficients below this magnitude are rounding residue on a 0..255 scale.
constexpr double kZeroSnap = 1e-7;

using Plane = std::array<double, kSide * kSide>;

Plane to_luma_32(const Raster& img) {
    // Luma of the full image first, then exact area averaging onto the grid.
    std::vector<double> luma(static_cast<std::size_t>(img.width) * img.height);
    for (int y = 0; y < img.height; ++y) {
        const std::uint8_t* src = img.row(y);
        for (int x = 0; x < img.width; ++x) {
            const std::uint8_t* px = src + x * img.channels;
            double v = img.channels >= 3 ? 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2] : px[0];
            luma[static_cast<std::size_t>(y) * img.width + x] = v;
        }
    }

    // Per-axis coverage weights of source pixel i on target cell t.
    auto weights = [](int src_len) {
        std::vector<std::vector<std::pair<int, double>>> w(kSide);
        const double scale = static_cast<double>(src_len) / kSide;
        for (int t = 0; t < kSide; ++t) {
            const double lo = t * scale;
            const double hi = (t + 1) * scale;
            for (int i = static_cast<int>(std::floor(lo)); i < src_len && i < hi; ++i) {
                const double cover = std::min<double>(hi, i + 1) - std::max<double>(lo, i);
                if (cover > 0) w[t].emplace_back(i, cover / scale);
            }
        }
        return w;
    };
    const auto wx = weights(img.width);
    const auto wy = weights(img.height);

    // Horizontal pass then vertical pass (separable box filter).
    std::vector<double> tmp(static_cast<std::size_t>(img.height) * kSide, 0.0);
    for (int y = 0; y < img.height; ++y) {
        for (int tx = 0; tx < kSide; ++tx) {
            double acc = 0.0;
            for (auto [i, w] : wx[tx]) acc += w * luma[static_cast<std::size_t>(y) * img.width + i];
            tmp[static_cast<std::size_t>(y) * kSide + tx] = acc;
        }
    }
    Plane out{};
    for (int ty = 0; ty < kSide; ++ty) {
        for (int tx = 0; tx < kSide; ++tx) {
            double acc = 0.0;
            for (auto [j, w] : wy[ty]) acc += w * tmp[static_cast<std::size_t>(j) * kSide + tx];
            out[ty * kSide + tx] = acc;
        }
    }
    return out;
}

const std::array<double, kSide * kSide>& dct_matrix() {
    static const auto m = [] {
        std::array<double, kSide * kSide> c{};
        for (int k = 0; k < kSide; ++k) {
            const double norm = k == 0 ? std::sqrt(1.0 / kSide) : std::sqrt(2.0 / kSide);
            for (int i = 0; i < kSide; ++i)
                c[k * kSide + i] = norm * std::cos(std::numbers::pi / (2.0 * kSide) * k * (2 * i + 1));
        }
        return c;
    }();
    return m;
}

} // namespace

Raster::Raster(int w, int h, int c)
    : width(w), height(h), channels(c),
      pixels(static_cast<std::size_t>(std::max(w, 0)) * std::max(h, 0) * std::max(c, 0), 0) {}

std::string format_phash_hex(PHash64 h) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = kDigits[(h.bits >> ((15 - i) * 4)) & 0xf];
    }
    return s;
}

std::optional<PHash64> try_parse_phash_hex(std::string_view text) {
    if (text.size() != 16) return std::nullopt;
    std::uint64_t v = 0;
    for (char c : text) {
        if (!std::isxdigit(static_cast<unsigned char>(c))) return std::nullopt;
    }
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v, 16);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return PHash64{v};
}

PHash64 parse_phash_hex(std::string_view text) {
    if (auto h = try_parse_phash_hex(text)) return *h;
    throw InvalidInput("invalid phash hex");
}

PHash64 compute_phash(const Raster& image) {
    if (image.width < 1 || image.height < 1)
        throw InvalidInput("compute_phash: zero-dimension raster");
    if (image.channels != 1 && image.channels != 3 && image.channels != 4)
        throw InvalidInput("compute_phash: unsupported channel count");
    if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * image.channels)
        throw InvalidInput("compute_phash: pixel buffer size mismatch");

    const Plane plane = to_luma_32(image);
    const auto& c = dct_matrix();

    // Only the low 8x8 block is needed: rows pass for 8 frequencies, then columns.
    std::array<double, kSide * kBlock> rows{};  // [y][u]
    for (int y = 0; y < kSide; ++y)
        for (int u = 0; u < kBlock; ++u) {
            double acc = 0.0;
            for (int x = 0; x < kSide; ++x) acc += c[u * kSide + x] * plane[y * kSide + x];
            rows[y * kBlock + u] = acc;
        }
    std::array<double, kBlock * kBlock> block{};  // [v][u]
    for (int v = 0; v < kBlock; ++v)
        for (int u = 0; u < kBlock; ++u) {
            double acc = 0.0;
            for (int y = 0; y < kSide; ++y) acc += c[v * kSide + y] * rows[y * kBlock + u];
            block[v * kBlock + u] = std::abs(acc) < kZeroSnap ? 0.0 : acc;
        }

    std::array<double, kBlock * kBlock> sorted = block;
    std::nth_element(sorted.begin(), sorted.begin() + 31, sorted.end());
    const double lo = sorted[31];
    const double hi = *std::min_element(sorted.begin() + 32, sorted.end());
    const double median = 0.5 * (lo + hi);

    std::uint64_t bits = 0;
    for (int i = 0; i < kBlock * kBlock; ++i) {
        bits <<= 1;
        if (block[i] > median) bits |= 1;
    }
    return PHash64{bits};
}

} // namespace memetrace
