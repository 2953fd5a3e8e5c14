#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pat/image.hpp"

namespace pat {

// Controls for the procedural vessel generator. Branches are smooth
// quadratic arcs stamped with a round brush; later branches sprout from
// points on the already drawn skeleton.
struct VesselParams {
  int branch_count = 12;
  int steps = 80;          // lateral extent of one branch, in pixels
  double step_length = 1.0;
  int thickness = 3;       // brush diameter, in pixels
  int size = 256;          // output mask is size x size
};

// Seeded 256x256 (by default) binary vessel mask. Deterministic for a fixed
// seed and parameter set; rejects degenerate parameters.
BinaryMask procedural_vessel_mask(std::uint64_t seed, const VesselParams& params);

// Ground-truth phantom composition. The mask is cut into four equal
// quadrants; two quadrants are drawn with replacement; each gets an
// independent rotation from {0, 90, 180, 270} degrees; the rotated
// quadrants are superposed by pixelwise maximum and scaled to [0, 1].
//
// Draw order from Rng(seed), fixed contract for oracles:
//   quadrant index 1, rotation index 1, quadrant index 2, rotation index 2,
// each a uniform_int(4). Quadrants are numbered row-major (top-left 0,
// top-right 1, bottom-left 2, bottom-right 3). Rotation index k applies k
// counter-clockwise quarter turns: out(y, x) = in(x, n-1-y).
//
// Quadrants must be at least 128x128; larger quadrants are resampled to
// 128x128 with nearest-neighbor so binarity is preserved.
PressureImage compose_vessel_phantom(const BinaryMask& mask, std::uint64_t seed);

// Disks of value 1 with the given radius at each (x, y) pixel center.
PressureImage point_phantom(const std::vector<std::pair<int, int>>& centers,
                            int radius, int width = 128, int height = 128);

// Fig-6-style default scene: two rows of point targets at depths ny/3 and
// 2*ny/3; five columns at i/6 of the width on the first row, four staggered
// columns on the second.
std::vector<std::pair<int, int>> default_nine_point_centers(int width = 128,
                                                            int height = 128);

}  // namespace pat
