#pragma once

#include <string>

#include "aquaperc/image.hpp"

namespace aquaperc::io {

// Portable float map, 'PF' color variant, little-endian, rows bottom-up.
void write_pfm(const ImageF& img, const std::string& path);
ImageF read_pfm(const std::string& path);

// 8-bit RGB PNG with gamma 2.2 encoding, values clamped to [0, 1].
void write_png(const ImageF& img, const std::string& path);

}  // namespace aquaperc::io
