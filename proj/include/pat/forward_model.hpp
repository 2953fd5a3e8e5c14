#pragma once

#include <cstdint>

#include "pat/image.hpp"

namespace pat {

// Per (sensor, pixel) projection coefficients: time of flight in fractional
// samples and the 1/distance amplitude surrogate of the solid-angle element.
struct ForwardWeight {
  double delay_samples = 0.0;
  double amplitude = 0.0;
};

ForwardWeight forward_weight(const ImagingGeometry& geom, int sensor, int ix, int iy);

// Discrete spherical-spreading projector: every pixel deposits
// amplitude * p0 at its fractional delay via two-tap linear interpolation,
// then a centered first difference in time (scaled by the sample rate)
// models the time derivative of the detected pressure. Linear in p0.
Sinogram forward_project(const PressureImage& p0, const ImagingGeometry& geom);

// Exact transpose of forward_project as a linear map: the difference stencil
// and the interpolation/accumulation are transposed term by term.
PressureImage adjoint_project(const Sinogram& s, const ImagingGeometry& geom);

// Zero-phase band-pass over [fc(1 - B/2), fc(1 + B/2)]: a symmetric
// windowed-sinc FIR applied in a forward and a backward pass per channel.
Sinogram apply_bandpass(const Sinogram& s, const ImagingGeometry& geom);

// Seeded white Gaussian noise scaled so the whole-record power ratio equals
// target_snr_db. Rejects an identically zero input.
Sinogram add_noise(const Sinogram& s, double target_snr_db, std::uint64_t seed);

}  // namespace pat
