#include "pat/forward_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pat/parallel.hpp"
#include "pat/rng.hpp"

namespace pat {

namespace {

// Symmetric windowed-sinc band-pass taps (difference of two Hamming-windowed
// low-passes), 2 * kBandpassHalf + 1 of them.
constexpr int kBandpassHalf = 40;

std::vector<double> bandpass_taps(const ImagingGeometry& geom) {
  const double f_lo = geom.center_frequency * (1.0 - geom.fractional_bandwidth / 2.0);
  const double f_hi = geom.center_frequency * (1.0 + geom.fractional_bandwidth / 2.0);
  if (!(geom.sample_rate > 2.0 * f_hi))
    throw std::invalid_argument("apply_bandpass: passband violates Nyquist");
  const double pi = 3.14159265358979323846;
  auto lowpass = [&](double fc, int k) {
    const double x = 2.0 * fc / geom.sample_rate;
    if (k == 0) return x;
    return std::sin(pi * x * k) / (pi * k);
  };
  std::vector<double> taps(2 * kBandpassHalf + 1);
  for (int k = -kBandpassHalf; k <= kBandpassHalf; ++k) {
    const double window = 0.54 + 0.46 * std::cos(pi * k / kBandpassHalf);
    taps[static_cast<size_t>(k + kBandpassHalf)] =
        (lowpass(f_hi, k) - lowpass(f_lo, k)) * window;
  }
  return taps;
}

}  // namespace

ForwardWeight forward_weight(const ImagingGeometry& geom, int sensor, int ix, int iy) {
  const double d = geom.distance(sensor, ix, iy);
  return {geom.delay_samples(d), 1.0 / d};
}

Sinogram forward_project(const PressureImage& p0, const ImagingGeometry& geom) {
  require_image_matches(p0, geom, "forward_project");
  for (double v : p0.values)
    if (!std::isfinite(v))
      throw std::invalid_argument("forward_project: non-finite pixel value");

  Sinogram out(geom.sample_count, geom.sensor_count);
  const double half_rate = 0.5 * geom.sample_rate;

  parallel_for(geom.sensor_count, [&](std::int64_t j) {
    std::vector<double> trace(static_cast<size_t>(geom.sample_count), 0.0);
    for (int iy = 0; iy < geom.grid_ny; ++iy) {
      for (int ix = 0; ix < geom.grid_nx; ++ix) {
        const double v = p0.at(iy, ix);
        if (v == 0.0) continue;
        const auto w = forward_weight(geom, static_cast<int>(j), ix, iy);
        const auto k = static_cast<std::int64_t>(w.delay_samples);
        const double frac = w.delay_samples - static_cast<double>(k);
        trace[static_cast<size_t>(k)] += w.amplitude * v * (1.0 - frac);
        trace[static_cast<size_t>(k + 1)] += w.amplitude * v * frac;
      }
    }
    // d/dt as centered difference, zero outside the record.
    for (int t = 0; t < geom.sample_count; ++t) {
      const double next = t + 1 < geom.sample_count ? trace[static_cast<size_t>(t + 1)] : 0.0;
      const double prev = t > 0 ? trace[static_cast<size_t>(t - 1)] : 0.0;
      out.at(t, static_cast<int>(j)) = (next - prev) * half_rate;
    }
  });
  return out;
}

PressureImage adjoint_project(const Sinogram& s, const ImagingGeometry& geom) {
  require_sinogram_matches(s, geom, "adjoint_project");

  // Transpose of the difference stencil, per channel.
  std::vector<double> traces(s.values.size(), 0.0);
  const double half_rate = 0.5 * geom.sample_rate;
  for (int j = 0; j < geom.sensor_count; ++j) {
    double* trace = traces.data() + static_cast<size_t>(j) * geom.sample_count;
    for (int t = 0; t < geom.sample_count; ++t) {
      const double before = t > 0 ? s.at(t - 1, j) : 0.0;
      const double after = t + 1 < geom.sample_count ? s.at(t + 1, j) : 0.0;
      trace[t] = (before - after) * half_rate;
    }
  }

  // Transpose of the interpolation/accumulation, gathered per pixel.
  PressureImage img(geom.grid_nx, geom.grid_ny);
  parallel_for(geom.grid_ny, [&](std::int64_t iy) {
    for (int ix = 0; ix < geom.grid_nx; ++ix) {
      double acc = 0.0;
      for (int j = 0; j < geom.sensor_count; ++j) {
        const auto w = forward_weight(geom, j, ix, static_cast<int>(iy));
        const auto k = static_cast<std::int64_t>(w.delay_samples);
        const double frac = w.delay_samples - static_cast<double>(k);
        const double* trace = traces.data() + static_cast<size_t>(j) * geom.sample_count;
        acc += w.amplitude * ((1.0 - frac) * trace[k] + frac * trace[k + 1]);
      }
      img.at(static_cast<int>(iy), ix) = acc;
    }
  });
  return img;
}

Sinogram apply_bandpass(const Sinogram& s, const ImagingGeometry& geom) {
  require_sinogram_matches(s, geom, "apply_bandpass");
  const std::vector<double> taps = bandpass_taps(geom);
  const int samples = geom.sample_count;

  Sinogram out(samples, geom.sensor_count);
  parallel_for(geom.sensor_count, [&](std::int64_t j) {
    std::vector<double> channel(static_cast<size_t>(samples));
    std::vector<double> filtered(static_cast<size_t>(samples));
    for (int t = 0; t < samples; ++t) channel[static_cast<size_t>(t)] = s.at(t, static_cast<int>(j));

    auto run = [&](const std::vector<double>& in, std::vector<double>& result, bool reverse) {
      for (int t = 0; t < samples; ++t) {
        double acc = 0.0;
        for (int k = -kBandpassHalf; k <= kBandpassHalf; ++k) {
          const int src = reverse ? t - k : t + k;
          if (src < 0 || src >= samples) continue;
          acc += taps[static_cast<size_t>(k + kBandpassHalf)] * in[static_cast<size_t>(src)];
        }
        result[static_cast<size_t>(t)] = acc;
      }
    };
    run(channel, filtered, false);
    run(filtered, channel, true);
    for (int t = 0; t < samples; ++t) out.at(t, static_cast<int>(j)) = channel[static_cast<size_t>(t)];
  });
  return out;
}

Sinogram add_noise(const Sinogram& s, double target_snr_db, std::uint64_t seed) {
  double power = 0.0;
  for (double v : s.values) power += v * v;
  power /= static_cast<double>(s.values.size());
  if (power <= 0.0)
    throw std::invalid_argument("add_noise: zero-power sinogram, SNR undefined");

  const double noise_power = power / std::pow(10.0, target_snr_db / 10.0);
  const double sigma = std::sqrt(noise_power);
  Rng rng(seed);
  Sinogram out = s;
  for (double& v : out.values) v += rng.normal(0.0, sigma);
  return out;
}

}  // namespace pat
