#include "aquaperc/image_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace aquaperc::io {

void write_pfm(const ImageF& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write image: " + path);
    out << "PF\n" << img.width << " " << img.height << "\n-1.0\n";
    // Bottom row first per the format.
    for (int y = img.height - 1; y >= 0; --y) {
        const float* row = &img.data[static_cast<size_t>(y) * img.width * 3];
        out.write(reinterpret_cast<const char*>(row), static_cast<std::streamsize>(img.width) * 3 * sizeof(float));
    }
    if (!out) throw std::runtime_error("short write: " + path);
}

ImageF read_pfm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open image: " + path);
    std::string magic;
    in >> magic;
    if (magic != "PF") throw std::runtime_error("not a color PFM file: " + path);
    int w = 0, h = 0;
    double scale = 0.0;
    in >> w >> h >> scale;
    in.get();  // single whitespace after the header
    if (w <= 0 || h <= 0) throw std::runtime_error("bad PFM dimensions: " + path);
    if (scale >= 0.0) throw std::runtime_error("big-endian PFM unsupported: " + path);
    ImageF img(w, h);
    for (int y = h - 1; y >= 0; --y) {
        float* row = &img.data[static_cast<size_t>(y) * w * 3];
        in.read(reinterpret_cast<char*>(row), static_cast<std::streamsize>(w) * 3 * sizeof(float));
    }
    if (!in) throw std::runtime_error("truncated PFM file: " + path);
    return img;
}

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_chunk(std::ofstream& out, const char type[4], const std::vector<uint8_t>& payload) {
    std::vector<uint8_t> buf;
    put_u32(buf, static_cast<uint32_t>(payload.size()));
    buf.insert(buf.end(), type, type + 4);
    buf.insert(buf.end(), payload.begin(), payload.end());
    uint32_t crc = crc32(0, buf.data() + 4, static_cast<uInt>(buf.size() - 4));
    put_u32(buf, crc);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

uint8_t encode_gamma(float v) {
    double x = std::min(std::max(static_cast<double>(v), 0.0), 1.0);
    return static_cast<uint8_t>(std::lround(std::pow(x, 1.0 / 2.2) * 255.0));
}

}  // namespace

void write_png(const ImageF& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write image: " + path);
    static const uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    out.write(reinterpret_cast<const char*>(sig), 8);

    std::vector<uint8_t> ihdr;
    put_u32(ihdr, static_cast<uint32_t>(img.width));
    put_u32(ihdr, static_cast<uint32_t>(img.height));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(2);   // color type: RGB
    ihdr.push_back(0);   // compression
    ihdr.push_back(0);   // filter
    ihdr.push_back(0);   // interlace
    put_chunk(out, "IHDR", ihdr);

    std::vector<uint8_t> raw;
    raw.reserve(static_cast<size_t>(img.height) * (1 + static_cast<size_t>(img.width) * 3));
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);  // filter: none
        const float* row = &img.data[static_cast<size_t>(y) * img.width * 3];
        for (int x = 0; x < img.width * 3; ++x) raw.push_back(encode_gamma(row[x]));
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<uint8_t> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw std::runtime_error("PNG deflate failed: " + path);
    compressed.resize(bound);
    put_chunk(out, "IDAT", compressed);
    put_chunk(out, "IEND", {});
    if (!out) throw std::runtime_error("short write: " + path);
}

}  // namespace aquaperc::io
