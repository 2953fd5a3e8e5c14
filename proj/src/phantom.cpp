#include "pat/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pat/rng.hpp"

namespace pat {

namespace {

constexpr int kQuadrantSize = 128;

struct Quadrant {
  int size = kQuadrantSize;
  std::vector<std::uint8_t> values;
  std::uint8_t at(int y, int x) const { return values[static_cast<size_t>(y) * size + x]; }
  std::uint8_t& at(int y, int x) { return values[static_cast<size_t>(y) * size + x]; }
};

// Cut quadrant q (row-major numbering) and resample to 128x128 with
// nearest-neighbor if it is larger.
Quadrant extract_quadrant(const BinaryMask& mask, int q) {
  const int qh = mask.height / 2;
  const int qw = mask.width / 2;
  const int y0 = (q / 2) * qh;
  const int x0 = (q % 2) * qw;

  Quadrant out;
  out.values.assign(static_cast<size_t>(kQuadrantSize) * kQuadrantSize, 0);
  for (int y = 0; y < kQuadrantSize; ++y) {
    const int sy = qh == kQuadrantSize ? y : (y * qh) / kQuadrantSize;
    for (int x = 0; x < kQuadrantSize; ++x) {
      const int sx = qw == kQuadrantSize ? x : (x * qw) / kQuadrantSize;
      out.at(y, x) = mask.at(y0 + sy, x0 + sx) ? 1 : 0;
    }
  }
  return out;
}

// k counter-clockwise quarter turns.
Quadrant rotate_quadrant(const Quadrant& in, int k) {
  const int n = in.size;
  Quadrant out = in;
  switch (k & 3) {
    case 0:
      return out;
    case 1:
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) out.at(y, x) = in.at(x, n - 1 - y);
      return out;
    case 2:
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) out.at(y, x) = in.at(n - 1 - y, n - 1 - x);
      return out;
    default:
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) out.at(y, x) = in.at(n - 1 - x, y);
      return out;
  }
}

// Stamps the nearest pixel plus, for radius > 0, the disk around the sample
// point. Thickness 1 therefore marks exactly the rasterized curve.
void stamp_brush(BinaryMask& mask, double cx, double cy, double radius,
                 std::vector<std::pair<int, int>>* skeleton) {
  const int px = static_cast<int>(std::lround(cx));
  const int py = static_cast<int>(std::lround(cy));
  if (px < 0 || px >= mask.width || py < 0 || py >= mask.height) return;
  mask.at(py, px) = 1;
  if (skeleton) skeleton->emplace_back(px, py);
  if (radius <= 0.0) return;

  const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
  const int x1 = std::min(mask.width - 1, static_cast<int>(std::ceil(cx + radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
  const int y1 = std::min(mask.height - 1, static_cast<int>(std::ceil(cy + radius)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      if (dx * dx + dy * dy <= radius * radius) mask.at(y, x) = 1;
    }
  }
}

}  // namespace

BinaryMask procedural_vessel_mask(std::uint64_t seed, const VesselParams& params) {
  if (params.branch_count <= 0)
    throw std::invalid_argument("procedural_vessel_mask: branch_count must be positive");
  if (params.steps <= 0 || params.step_length <= 0.0)
    throw std::invalid_argument("procedural_vessel_mask: steps and step_length must be positive");
  if (params.thickness <= 0)
    throw std::invalid_argument("procedural_vessel_mask: thickness must be positive");
  if (params.size < 16)
    throw std::invalid_argument("procedural_vessel_mask: size must be at least 16");

  Rng rng(seed);
  BinaryMask mask(params.size, params.size);
  std::vector<std::pair<int, int>> skeleton;
  const double n = params.size;
  // Branch extent in Chebyshev distance, so a branch of `steps` unit steps
  // always rasterizes to at least steps + 1 pixels.
  const double extent = params.steps * params.step_length;
  const double radius = params.thickness >= 2 ? params.thickness * 0.5 : 0.0;

  for (int b = 0; b < params.branch_count; ++b) {
    double sx, sy;
    if (b == 0 || skeleton.empty()) {
      sx = rng.uniform(0.2 * n, 0.8 * n);
      sy = rng.uniform(0.2 * n, 0.8 * n);
    } else {
      const auto& p = skeleton[static_cast<size_t>(rng.uniform_int(skeleton.size()))];
      sx = p.first;
      sy = p.second;
    }
    const double heading = rng.uniform(0.0, 6.283185307179586);
    const double dirx = std::cos(heading);
    const double diry = std::sin(heading);
    const double cheb = std::max(std::abs(dirx), std::abs(diry));
    const double ex = std::clamp(sx + extent * dirx / cheb, 1.0, n - 2.0);
    const double ey = std::clamp(sy + extent * diry / cheb, 1.0, n - 2.0);
    // Control point near the chord midpoint; the bounded perpendicular
    // offset keeps the arc close enough to the chord that the stamped
    // pixel count stays within [chord_cheb + 1, ~2.5 * chord_cheb].
    const double bend = rng.uniform(-0.2, 0.2);
    const double mx = 0.5 * (sx + ex) + bend * (ey - sy);
    const double my = 0.5 * (sy + ey) - bend * (ex - sx);

    const double chord = std::hypot(ex - sx, ey - sy);
    const int samples = std::max(8, static_cast<int>(std::ceil(4.0 * std::max(chord, 1.0))));
    for (int i = 0; i <= samples; ++i) {
      const double t = static_cast<double>(i) / samples;
      const double omt = 1.0 - t;
      const double cx = omt * omt * sx + 2.0 * omt * t * mx + t * t * ex;
      const double cy = omt * omt * sy + 2.0 * omt * t * my + t * t * ey;
      stamp_brush(mask, cx, cy, radius, &skeleton);
    }
  }
  return mask;
}

PressureImage compose_vessel_phantom(const BinaryMask& mask, std::uint64_t seed) {
  if (mask.width <= 0 || mask.height <= 0 ||
      mask.values.size() != static_cast<size_t>(mask.width) * mask.height)
    throw std::invalid_argument("compose_vessel_phantom: mask is not a 2D raster");
  if (std::all_of(mask.values.begin(), mask.values.end(),
                  [](std::uint8_t v) { return v == 0; }))
    throw std::invalid_argument("compose_vessel_phantom: mask is empty (all zeros)");
  if (mask.width / 2 < kQuadrantSize || mask.height / 2 < kQuadrantSize)
    throw std::invalid_argument(
        "compose_vessel_phantom: quadrants smaller than 128x128; supply a mask of at least 256x256");

  Rng rng(seed);
  PressureImage out(kQuadrantSize, kQuadrantSize);
  for (int draw = 0; draw < 2; ++draw) {
    const int q = static_cast<int>(rng.uniform_int(4));
    const int rot = static_cast<int>(rng.uniform_int(4));
    const Quadrant rotated = rotate_quadrant(extract_quadrant(mask, q), rot);
    for (int y = 0; y < kQuadrantSize; ++y)
      for (int x = 0; x < kQuadrantSize; ++x)
        out.at(y, x) = std::max(out.at(y, x), static_cast<double>(rotated.at(y, x)));
  }

  const double peak = *std::max_element(out.values.begin(), out.values.end());
  if (peak > 1.0)
    for (double& v : out.values) v /= peak;
  return out;
}

PressureImage point_phantom(const std::vector<std::pair<int, int>>& centers,
                            int radius, int width, int height) {
  if (radius < 0) throw std::invalid_argument("point_phantom: radius must be >= 0");
  PressureImage img(width, height);
  for (const auto& [cx, cy] : centers) {
    if (cx < 0 || cx >= width || cy < 0 || cy >= height)
      throw std::invalid_argument("point_phantom: center outside the grid");
    for (int y = std::max(0, cy - radius); y <= std::min(height - 1, cy + radius); ++y) {
      for (int x = std::max(0, cx - radius); x <= std::min(width - 1, cx + radius); ++x) {
        const int dx = x - cx;
        const int dy = y - cy;
        if (dx * dx + dy * dy <= radius * radius) img.at(y, x) = 1.0;
      }
    }
  }
  return img;
}

std::vector<std::pair<int, int>> default_nine_point_centers(int width, int height) {
  std::vector<std::pair<int, int>> centers;
  const int y1 = height / 3;
  const int y2 = (2 * height) / 3;
  for (int i = 1; i <= 5; ++i) centers.emplace_back(i * width / 6, y1);
  for (int i = 1; i <= 4; ++i) centers.emplace_back(i * width / 6 + width / 12, y2);
  return centers;
}

}  // namespace pat
