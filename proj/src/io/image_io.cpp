#include "pat/io/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#ifdef PAT_HAS_LIBPNG
#include <png.h>
#endif

namespace pat::io {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

int next_pnm_token(std::istream& in) {
  // Skips whitespace and '#' comments per the netpbm grammar.
  while (in) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value = -1;
  in >> value;
  return value;
}

BinaryMask read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_mask: cannot open " + path.string());
  std::string format;
  in >> format;
  if (format != "P5" && format != "P2")
    throw std::runtime_error("read_mask: " + path.string() + " is not a P5/P2 PGM");
  const int width = next_pnm_token(in);
  const int height = next_pnm_token(in);
  const int maxval = next_pnm_token(in);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255)
    throw std::runtime_error("read_mask: unsupported PGM header in " + path.string());

  BinaryMask mask(width, height);
  if (format == "P5") {
    in.get();  // single whitespace after maxval
    std::vector<std::uint8_t> row(static_cast<size_t>(width));
    for (int y = 0; y < height; ++y) {
      in.read(reinterpret_cast<char*>(row.data()), width);
      if (!in) throw std::runtime_error("read_mask: truncated PGM " + path.string());
      for (int x = 0; x < width; ++x) mask.at(y, x) = row[static_cast<size_t>(x)] ? 1 : 0;
    }
  } else {
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const int v = next_pnm_token(in);
        if (v < 0) throw std::runtime_error("read_mask: truncated PGM " + path.string());
        mask.at(y, x) = v ? 1 : 0;
      }
  }
  return mask;
}

#ifdef PAT_HAS_LIBPNG

BinaryMask read_png(const std::filesystem::path& path) {
  std::FILE* fp = std::fopen(path.string().c_str(), "rb");
  if (!fp) throw std::runtime_error("read_mask: cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    std::fclose(fp);
    throw std::runtime_error("read_mask: PNG decode failed for " + path.string());
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  // Normalize anything to 8-bit grayscale.
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  if (png_get_color_type(png, info) & PNG_COLOR_MASK_PALETTE) png_set_palette_to_rgb(png);
  if (png_get_color_type(png, info) & PNG_COLOR_MASK_COLOR)
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  BinaryMask mask(width, height);
  std::vector<std::uint8_t> row(png_get_rowbytes(png, info));
  for (int y = 0; y < height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < width; ++x) mask.at(y, x) = row[static_cast<size_t>(x)] ? 1 : 0;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return mask;
}

void write_png(const std::filesystem::path& path, const std::vector<std::uint8_t>& gray,
               int width, int height) {
  std::FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw std::runtime_error("write_gray_image: cannot open " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(fp);
    throw std::runtime_error("write_gray_image: PNG encode failed for " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y)
    png_write_row(png, const_cast<png_bytep>(gray.data() + static_cast<size_t>(y) * width));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

#endif  // PAT_HAS_LIBPNG

}  // namespace

bool png_supported() {
#ifdef PAT_HAS_LIBPNG
  return true;
#else
  return false;
#endif
}

void write_pgm(const std::filesystem::path& path, const std::vector<std::uint8_t>& gray,
               int width, int height) {
  if (gray.size() != static_cast<size_t>(width) * height)
    throw std::invalid_argument("write_pgm: buffer size does not match dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pgm: cannot open " + path.string());
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(gray.data()),
            static_cast<std::streamsize>(gray.size()));
  if (!out) throw std::runtime_error("write_pgm: write failed for " + path.string());
}

void write_gray_image(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& gray, int width, int height) {
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") {
    write_pgm(path, gray, width, height);
    return;
  }
  if (ext == ".png") {
#ifdef PAT_HAS_LIBPNG
    write_png(path, gray, width, height);
    return;
#else
    throw std::runtime_error("write_gray_image: built without PNG support");
#endif
  }
  throw std::invalid_argument("write_gray_image: unsupported extension " + ext);
}

BinaryMask read_mask(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".png") {
#ifdef PAT_HAS_LIBPNG
    return read_png(path);
#else
    throw std::runtime_error("read_mask: built without PNG support");
#endif
  }
  throw std::invalid_argument("read_mask: unsupported extension " + ext);
}

std::vector<std::uint8_t> quantize_unit(const PressureImage& img) {
  std::vector<std::uint8_t> out(img.values.size());
  for (size_t i = 0; i < out.size(); ++i) {
    const double v = std::clamp(img.values[i], 0.0, 1.0);
    out[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return out;
}

std::vector<std::uint8_t> quantize_signed(const PressureImage& img) {
  double peak = 0.0;
  for (double v : img.values) peak = std::max(peak, std::abs(v));
  std::vector<std::uint8_t> out(img.values.size());
  for (size_t i = 0; i < out.size(); ++i) {
    const double v = peak > 0.0 ? img.values[i] / peak : 0.0;  // [-1, 1]
    out[i] = static_cast<std::uint8_t>(std::lround((v + 1.0) * 0.5 * 255.0));
  }
  return out;
}

}  // namespace pat::io
