#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pat/geometry.hpp"

namespace pat {

// Initial-pressure map or a beamformed image. Ground truth lives in [0, 1];
// beamformed images keep their signed values.
struct PressureImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major, values[y * width + x]

  PressureImage() = default;
  PressureImage(int w, int h) : width(w), height(h), values(static_cast<size_t>(w) * h, 0.0) {}

  double& at(int y, int x) { return values[static_cast<size_t>(y) * width + x]; }
  double at(int y, int x) const { return values[static_cast<size_t>(y) * width + x]; }
  size_t size() const { return values.size(); }
};

// Time-by-channel sensor record, values[t * sensor_count + j].
struct Sinogram {
  int sample_count = 0;
  int sensor_count = 0;
  std::vector<double> values;

  Sinogram() = default;
  Sinogram(int samples, int sensors)
      : sample_count(samples),
        sensor_count(sensors),
        values(static_cast<size_t>(samples) * sensors, 0.0) {}

  double& at(int t, int j) { return values[static_cast<size_t>(t) * sensor_count + j]; }
  double at(int t, int j) const { return values[static_cast<size_t>(t) * sensor_count + j]; }
  size_t size() const { return values.size(); }

  bool matches(const ImagingGeometry& g) const {
    return sample_count == g.sample_count && sensor_count == g.sensor_count;
  }
};

// Binary raster; nonzero means vessel.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  BinaryMask() = default;
  BinaryMask(int w, int h) : width(w), height(h), values(static_cast<size_t>(w) * h, 0) {}

  std::uint8_t& at(int y, int x) { return values[static_cast<size_t>(y) * width + x]; }
  std::uint8_t at(int y, int x) const { return values[static_cast<size_t>(y) * width + x]; }
};

inline void require_image_matches(const PressureImage& img, const ImagingGeometry& g,
                                  const char* who) {
  if (img.width != g.grid_nx || img.height != g.grid_ny)
    throw std::invalid_argument(std::string(who) + ": image dimensions do not match geometry");
}

inline void require_sinogram_matches(const Sinogram& s, const ImagingGeometry& g,
                                     const char* who) {
  if (!s.matches(g))
    throw std::invalid_argument(std::string(who) + ": sinogram dimensions do not match geometry");
}

}  // namespace pat
