#include "memetrace/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "memetrace/errors.hpp"

namespace memetrace {

namespace {

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open image " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spill(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write image " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::string lower_ext(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

Raster to_rgb(const Raster& img) {
    if (img.channels == 3) return img;
    Raster out(img.width, img.height, 3);
    for (std::size_t i = 0, n = static_cast<std::size_t>(img.width) * img.height; i < n; ++i) {
        for (int c = 0; c < 3; ++c)
            out.pixels[i * 3 + c] = img.channels == 1 ? img.pixels[i] : img.pixels[i * img.channels + c];
    }
    return out;
}

struct JpegErrorMgr {
    jpeg_error_mgr base;
    char message[JMSG_LENGTH_MAX];
};

[[noreturn]] void jpeg_throw(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    throw InvalidInput(std::string("jpeg: ") + err->message);
}

} // namespace

std::vector<std::uint8_t> encode_png(const Raster& image) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width);
    png.height = static_cast<png_uint_32>(image.height);
    png.format = image.channels == 1 ? PNG_FORMAT_GRAY : image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_RGBA;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&png, nullptr, &size, 0, image.pixels.data(), 0, nullptr))
        throw InvalidInput(std::string("png encode: ") + png.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&png, out.data(), &size, 0, image.pixels.data(), 0, nullptr))
        throw InvalidInput(std::string("png encode: ") + png.message);
    out.resize(size);
    return out;
}

Raster decode_png(std::span<const std::uint8_t> bytes) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()))
        throw InvalidInput(std::string("png decode: ") + png.message);
    const bool gray = (png.format & PNG_FORMAT_FLAG_COLOR) == 0;
    png.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    Raster out(static_cast<int>(png.width), static_cast<int>(png.height), gray ? 1 : 3);
    if (!png_image_finish_read(&png, nullptr, out.pixels.data(), 0, nullptr)) {
        png_image_free(&png);
        throw InvalidInput(std::string("png decode: ") + png.message);
    }
    return out;
}

std::vector<std::uint8_t> encode_jpeg(const Raster& image, int quality) {
    const Raster rgb = image.channels == 1 ? image : to_rgb(image);
    jpeg_compress_struct cinfo{};
    JpegErrorMgr err{};
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_throw;
    unsigned char* buffer = nullptr;
    unsigned long size = 0;
    try {
        jpeg_create_compress(&cinfo);
        jpeg_mem_dest(&cinfo, &buffer, &size);
        cinfo.image_width = static_cast<JDIMENSION>(rgb.width);
        cinfo.image_height = static_cast<JDIMENSION>(rgb.height);
        cinfo.input_components = rgb.channels;
        cinfo.in_color_space = rgb.channels == 1 ? JCS_GRAYSCALE : JCS_RGB;
        jpeg_set_defaults(&cinfo);
        jpeg_set_quality(&cinfo, quality, TRUE);
        jpeg_start_compress(&cinfo, TRUE);
        while (cinfo.next_scanline < cinfo.image_height) {
            JSAMPROW row = const_cast<JSAMPROW>(rgb.row(static_cast<int>(cinfo.next_scanline)));
            jpeg_write_scanlines(&cinfo, &row, 1);
        }
        jpeg_finish_compress(&cinfo);
    } catch (...) {
        jpeg_destroy_compress(&cinfo);
        std::free(buffer);
        throw;
    }
    jpeg_destroy_compress(&cinfo);
    std::vector<std::uint8_t> out(buffer, buffer + size);
    std::free(buffer);
    return out;
}

Raster decode_jpeg(std::span<const std::uint8_t> bytes) {
    jpeg_decompress_struct cinfo{};
    JpegErrorMgr err{};
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_throw;
    Raster out;
    try {
        jpeg_create_decompress(&cinfo);
        jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
        jpeg_read_header(&cinfo, TRUE);
        if (cinfo.num_components != 1) cinfo.out_color_space = JCS_RGB;
        jpeg_start_decompress(&cinfo);
        out = Raster(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height),
                     cinfo.output_components);
        while (cinfo.output_scanline < cinfo.output_height) {
            JSAMPROW row = out.row(static_cast<int>(cinfo.output_scanline));
            jpeg_read_scanlines(&cinfo, &row, 1);
        }
        jpeg_finish_decompress(&cinfo);
    } catch (...) {
        jpeg_destroy_decompress(&cinfo);
        throw;
    }
    jpeg_destroy_decompress(&cinfo);
    return out;
}

std::vector<std::uint8_t> encode_pnm(const Raster& image) {
    const Raster img = image.channels == 4 ? to_rgb(image) : image;
    const std::string header = (img.channels == 1 ? "P5\n" : "P6\n") + std::to_string(img.width) + " " +
                               std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

Raster decode_pnm(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&] {
        skip_ws();
        int v = 0;
        bool any = false;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos++] - '0');
            any = true;
        }
        if (!any) throw InvalidInput("pnm: malformed header");
        return v;
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
        throw InvalidInput("pnm: only binary P5/P6 supported");
    const int channels = bytes[1] == '5' ? 1 : 3;
    pos = 2;
    const int w = read_int();
    const int h = read_int();
    const int maxval = read_int();
    if (maxval != 255) throw InvalidInput("pnm: only 8-bit maxval supported");
    ++pos;  // single whitespace after maxval
    Raster out(w, h, channels);
    if (bytes.size() - std::min(pos, bytes.size()) < out.pixels.size()) throw InvalidInput("pnm: truncated");
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), out.pixels.size(), out.pixels.begin());
    return out;
}

Raster read_image(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    const std::string ext = lower_ext(path);
    if (ext == ".png") return decode_png(bytes);
    if (ext == ".jpg" || ext == ".jpeg") return decode_jpeg(bytes);
    if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return decode_pnm(bytes);
    throw InvalidInput("unsupported image format: " + path.string());
}

void write_image(const std::filesystem::path& path, const Raster& image, int jpeg_quality) {
    const std::string ext = lower_ext(path);
    if (ext == ".png") return spill(path, encode_png(image));
    if (ext == ".jpg" || ext == ".jpeg") return spill(path, encode_jpeg(image, jpeg_quality));
    if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return spill(path, encode_pnm(image));
    throw InvalidInput("unsupported image format: " + path.string());
}

} // namespace memetrace
