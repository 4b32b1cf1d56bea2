#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "memetrace/phash.hpp"

namespace memetrace {

// Format chosen by extension: .png, .jpg/.jpeg, .ppm/.pgm (binary P6/P5).
Raster read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Raster& image, int jpeg_quality = 90);

std::vector<std::uint8_t> encode_png(const Raster& image);
Raster decode_png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_jpeg(const Raster& image, int quality);
Raster decode_jpeg(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pnm(const Raster& image);
Raster decode_pnm(std::span<const std::uint8_t> bytes);

} // namespace memetrace
