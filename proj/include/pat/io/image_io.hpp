#pragma once

#include <filesystem>

#include "pat/image.hpp"

namespace pat::io {

// 8-bit grayscale rasters. PGM (binary P5, ASCII P2 accepted on read) is
// always available; PNG support depends on libpng at build time.
bool png_supported();

void write_pgm(const std::filesystem::path& path, const std::vector<std::uint8_t>& gray,
               int width, int height);

// Dispatches on extension: .pgm always, .png when built with libpng.
void write_gray_image(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& gray, int width, int height);

// Reads a PGM or PNG raster; nonzero pixels become mask value 1.
BinaryMask read_mask(const std::filesystem::path& path);

// [0, 1] data mapped linearly onto [0, 255].
std::vector<std::uint8_t> quantize_unit(const PressureImage& img);

// Signed data mapped linearly from [-max|v|, +max|v|] onto [0, 255], so
// zero lands mid-gray.
std::vector<std::uint8_t> quantize_signed(const PressureImage& img);

}  // namespace pat::io
