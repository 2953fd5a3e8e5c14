#include "pat/geometry.hpp"

#include <stdexcept>
#include <string>

namespace pat {

ImagingGeometry default_geometry() {
  ImagingGeometry g;
  g.sensor_x.resize(static_cast<size_t>(g.sensor_count));
  const double sensor_pitch = g.grid_width() / g.sensor_count;
  for (int j = 0; j < g.sensor_count; ++j)
    g.sensor_x[static_cast<size_t>(j)] = (j + 0.5) * sensor_pitch;
  return g;
}

void ImagingGeometry::validate() const {
  if (grid_nx <= 0 || grid_ny <= 0)
    throw std::invalid_argument("geometry: grid dimensions must be positive");
  if (pixel_pitch <= 0.0)
    throw std::invalid_argument("geometry: pixel_pitch must be positive");
  if (sound_speed <= 0.0 || sample_rate <= 0.0)
    throw std::invalid_argument("geometry: sound_speed and sample_rate must be positive");
  if (sensor_count <= 0 ||
      sensor_x.size() != static_cast<size_t>(sensor_count))
    throw std::invalid_argument("geometry: sensor_x size must equal sensor_count");
  for (size_t j = 1; j < sensor_x.size(); ++j) {
    if (!(sensor_x[j] > sensor_x[j - 1]))
      throw std::invalid_argument("geometry: sensor positions must be strictly increasing");
  }
  if (sensor_x.front() < 0.0 || sensor_x.back() > grid_width())
    throw std::invalid_argument("geometry: sensors must lie on the top edge of the grid footprint");
  if (sample_count <= 1)
    throw std::invalid_argument("geometry: sample_count must exceed 1");

  // Every pixel's echo must fit in the record.
  const double diagonal =
      std::sqrt(grid_width() * grid_width() + grid_height() * grid_height());
  const double record_length = sample_count * (sound_speed / sample_rate);
  if (record_length < diagonal)
    throw std::invalid_argument(
        "geometry: record too short, sample_count * (sound_speed / sample_rate) = " +
        std::to_string(record_length) + " m < grid diagonal " +
        std::to_string(diagonal) + " m");

  // Strict form used by the projector: the interpolation stencil of the most
  // distant pixel must stay inside the record.
  double max_delay = 0.0;
  for (int j : {0, sensor_count - 1}) {
    for (int iy : {0, grid_ny - 1}) {
      for (int ix : {0, grid_nx - 1}) {
        max_delay = std::max(max_delay, delay_samples(distance(j, ix, iy)));
      }
    }
  }
  if (!(max_delay < sample_count - 1))
    throw std::invalid_argument("geometry: farthest pixel delay exceeds the record");
}

}  // namespace pat
