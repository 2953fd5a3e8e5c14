#include "pat/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pat/forward_model.hpp"
#include "pat/parallel.hpp"

namespace pat {

namespace {

// Linear interpolation into one channel at a fractional sample position;
// zero outside the record.
inline double sample_channel(const Sinogram& s, int j, double tau) {
  if (tau < 0.0 || tau > static_cast<double>(s.sample_count - 1)) return 0.0;
  const auto k = static_cast<int>(tau);
  const double frac = tau - static_cast<double>(k);
  const double a = s.at(k, j);
  const double b = k + 1 < s.sample_count ? s.at(k + 1, j) : 0.0;
  return a * (1.0 - frac) + b * frac;
}

// Per-element aperture length: half the gap to each neighbor.
double element_spacing(const ImagingGeometry& geom, int j) {
  const auto& xs = geom.sensor_x;
  if (xs.size() == 1) return geom.pixel_pitch;
  if (j == 0) return xs[1] - xs[0];
  if (j + 1 == static_cast<int>(xs.size())) return xs[xs.size() - 1] - xs[xs.size() - 2];
  return 0.5 * (xs[static_cast<size_t>(j + 1)] - xs[static_cast<size_t>(j - 1)]);
}

}  // namespace

double incidence_cosine(const ImagingGeometry& geom, int sensor, int ix, int iy) {
  return geom.pixel_y(iy) / geom.distance(sensor, ix, iy);
}

void normalize_max_abs(PressureImage& img) {
  double peak = 0.0;
  for (double v : img.values) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : img.values) v /= peak;
}

PressureImage das_sum_image(const Sinogram& s, const ImagingGeometry& geom) {
  require_sinogram_matches(s, geom, "das_reconstruct");
  PressureImage img(geom.grid_nx, geom.grid_ny);
  parallel_for(geom.grid_ny, [&](std::int64_t iy) {
    for (int ix = 0; ix < geom.grid_nx; ++ix) {
      double acc = 0.0;
      for (int j = 0; j < geom.sensor_count; ++j) {
        const double tau = geom.delay_samples(geom.distance(j, ix, static_cast<int>(iy)));
        acc += sample_channel(s, j, tau);
      }
      img.at(static_cast<int>(iy), ix) = acc;
    }
  });
  return img;
}

PressureImage das_reconstruct(const Sinogram& s, const ImagingGeometry& geom) {
  PressureImage img = das_sum_image(s, geom);
  normalize_max_abs(img);
  return img;
}

PressureImage ubp_sum_image(const Sinogram& s, const ImagingGeometry& geom) {
  require_sinogram_matches(s, geom, "ubp_reconstruct");

  // Filtered data term 2 p - 2 t dp/dt. With t measured in seconds and the
  // derivative as a centered difference, the sample rate cancels:
  // q[t] = 2 s[t] - t_idx * (s[t+1] - s[t-1]).
  Sinogram filtered(s.sample_count, s.sensor_count);
  for (int j = 0; j < s.sensor_count; ++j) {
    for (int t = 0; t < s.sample_count; ++t) {
      const double before = t > 0 ? s.at(t - 1, j) : 0.0;
      const double after = t + 1 < s.sample_count ? s.at(t + 1, j) : 0.0;
      filtered.at(t, j) = 2.0 * s.at(t, j) - static_cast<double>(t) * (after - before);
    }
  }

  PressureImage img(geom.grid_nx, geom.grid_ny);
  parallel_for(geom.grid_ny, [&](std::int64_t iy) {
    for (int ix = 0; ix < geom.grid_nx; ++ix) {
      double acc = 0.0;
      double omega = 0.0;
      for (int j = 0; j < geom.sensor_count; ++j) {
        const double d = geom.distance(j, ix, static_cast<int>(iy));
        const double cos_theta = geom.pixel_y(static_cast<int>(iy)) / d;
        const double tau = geom.delay_samples(d);
        // Subtended angle of the element as seen from the pixel.
        const double solid_angle = element_spacing(geom, j) * cos_theta / d;
        acc += sample_channel(filtered, j, tau) * solid_angle / d;
        omega += solid_angle;
      }
      img.at(static_cast<int>(iy), ix) = omega > 0.0 ? acc / omega : 0.0;
    }
  });
  return img;
}

PressureImage ubp_reconstruct(const Sinogram& s, const ImagingGeometry& geom) {
  PressureImage img = ubp_sum_image(s, geom);
  normalize_max_abs(img);
  return img;
}

}  // namespace pat
