#pragma once

#include <cmath>
#include <vector>

namespace pat {

// Imaging geometry shared by the forward model and every beamformer.
//
// Coordinate frame: x runs laterally along the transducer array, y runs into
// the tissue (depth). The grid footprint is [0, nx*pitch] x [0, ny*pitch]
// with pixel centers at ((ix+0.5)*pitch, (iy+0.5)*pitch). Sensors sit on the
// top boundary (y = 0), so the closest pixel row is half a pitch away and
// every sensor-pixel distance is strictly positive.
struct ImagingGeometry {
  int grid_nx = 128;
  int grid_ny = 128;
  double pixel_pitch = 3.0e-4;        // m; 38.4 mm / 128
  double sound_speed = 1500.0;        // m/s
  int sensor_count = 128;
  std::vector<double> sensor_x;       // m, along the top edge; y = 0
  double sample_rate = 4.0e7;         // Hz
  int sample_count = 2560;
  double center_frequency = 7.0e6;    // Hz
  double fractional_bandwidth = 0.8;

  double pixel_x(int ix) const { return (ix + 0.5) * pixel_pitch; }
  double pixel_y(int iy) const { return (iy + 0.5) * pixel_pitch; }
  double sensor_y() const { return 0.0; }

  double distance(int sensor, int ix, int iy) const {
    const double dx = pixel_x(ix) - sensor_x[static_cast<size_t>(sensor)];
    const double dy = pixel_y(iy);
    return std::sqrt(dx * dx + dy * dy);
  }

  // Time of flight expressed in fractional samples.
  double delay_samples(double distance_m) const {
    return distance_m * sample_rate / sound_speed;
  }

  double grid_width() const { return grid_nx * pixel_pitch; }
  double grid_height() const { return grid_ny * pixel_pitch; }

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

// Paper-scale default: 128x128 grid over 38.4x38.4 mm, 128 elements evenly
// spaced across the aperture, 40 MHz sampling, 2560 samples per channel.
ImagingGeometry default_geometry();

}  // namespace pat
