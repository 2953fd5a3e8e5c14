#pragma once

#include "pat/image.hpp"

namespace pat {

enum class BeamformMethod { das, ubp };

struct BeamformConfig {
  BeamformMethod method = BeamformMethod::das;
};

// Cosine of the incidence angle between the array normal (straight down
// into the tissue) and the sensor-to-pixel direction.
double incidence_cosine(const ImagingGeometry& geom, int sensor, int ix, int iy);

// Plain time-of-flight summation; no normalization. Exposed separately so
// linearity can be tested ahead of the final scaling.
PressureImage das_sum_image(const Sinogram& s, const ImagingGeometry& geom);

// Delay-and-sum image divided by its maximum absolute value (signed values
// retained); a zero sinogram maps to a zero image.
PressureImage das_reconstruct(const Sinogram& s, const ImagingGeometry& geom);

// Back-projection of the derivative-filtered data term with the
// cos(theta)/r^2 weight, normalized by the accumulated per-pixel angle;
// pre-normalization variant first.
PressureImage ubp_sum_image(const Sinogram& s, const ImagingGeometry& geom);
PressureImage ubp_reconstruct(const Sinogram& s, const ImagingGeometry& geom);

// Divides by max |value| in place; leaves an all-zero image untouched.
void normalize_max_abs(PressureImage& img);

}  // namespace pat
