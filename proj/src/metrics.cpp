#include "pat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pat {

namespace {

constexpr int kWindow = 11;
constexpr int kHalf = kWindow / 2;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;
constexpr double kRange = 1.0;

const std::vector<double>& gaussian_window() {
  static const std::vector<double> window = [] {
    std::vector<double> w(kWindow * kWindow);
    double total = 0.0;
    for (int dy = -kHalf; dy <= kHalf; ++dy)
      for (int dx = -kHalf; dx <= kHalf; ++dx) {
        const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * kSigma * kSigma));
        w[static_cast<size_t>((dy + kHalf) * kWindow + dx + kHalf)] = v;
        total += v;
      }
    for (double& v : w) v /= total;
    return w;
  }();
  return window;
}

void require_same_shape(const PressureImage& a, const PressureImage& b, const char* who) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument(std::string(who) + ": shape mismatch");
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

double ssim(const PressureImage& f, const PressureImage& gt) {
  require_same_shape(f, gt, "ssim");
  if (f.width < kWindow || f.height < kWindow)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");

  const auto& w = gaussian_window();
  const double c1 = (kK1 * kRange) * (kK1 * kRange);
  const double c2 = (kK2 * kRange) * (kK2 * kRange);

  double total = 0.0;
  std::int64_t count = 0;
  for (int cy = kHalf; cy < f.height - kHalf; ++cy) {
    for (int cx = kHalf; cx < f.width - kHalf; ++cx) {
      double mu_f = 0.0, mu_g = 0.0, ff = 0.0, gg = 0.0, fg = 0.0;
      for (int dy = -kHalf; dy <= kHalf; ++dy) {
        for (int dx = -kHalf; dx <= kHalf; ++dx) {
          const double weight = w[static_cast<size_t>((dy + kHalf) * kWindow + dx + kHalf)];
          const double a = clamp01(f.at(cy + dy, cx + dx));
          const double b = clamp01(gt.at(cy + dy, cx + dx));
          mu_f += weight * a;
          mu_g += weight * b;
          ff += weight * a * a;
          gg += weight * b * b;
          fg += weight * a * b;
        }
      }
      const double var_f = ff - mu_f * mu_f;
      const double var_g = gg - mu_g * mu_g;
      const double cov = fg - mu_f * mu_g;
      total += ((2.0 * mu_f * mu_g + c1) * (2.0 * cov + c2)) /
               ((mu_f * mu_f + mu_g * mu_g + c1) * (var_f + var_g + c2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

double psnr(const PressureImage& f, const PressureImage& gt, double i_max) {
  require_same_shape(f, gt, "psnr");
  double mse = 0.0;
  for (size_t i = 0; i < f.values.size(); ++i) {
    const double d = f.values[i] - gt.values[i];
    mse += d * d;
  }
  mse /= static_cast<double>(f.values.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(i_max * i_max / mse);
}

double snr(const PressureImage& f, const BinaryMask& background) {
  if (background.width != f.width || background.height != f.height)
    throw std::invalid_argument("snr: mask shape mismatch");

  double peak = -std::numeric_limits<double>::infinity();
  for (double v : f.values) peak = std::max(peak, v);

  double sum = 0.0, sq = 0.0;
  std::int64_t count = 0;
  for (size_t i = 0; i < f.values.size(); ++i) {
    if (!background.values[i]) continue;
    sum += f.values[i];
    sq += f.values[i] * f.values[i];
    ++count;
  }
  if (count == 0) throw std::invalid_argument("snr: empty background mask");
  if (count == static_cast<std::int64_t>(f.values.size()))
    throw std::invalid_argument("snr: background mask covers the whole image");
  const double mean = sum / static_cast<double>(count);
  const double var = std::max(0.0, sq / static_cast<double>(count) - mean * mean);
  const double sigma = std::sqrt(var);
  if (sigma <= 0.0)
    throw std::invalid_argument("snr: background standard deviation is zero");
  const double ratio = peak / sigma;
  return 10.0 * std::log10(ratio * ratio);
}

BinaryMask background_from_ground_truth(const PressureImage& gt, double threshold) {
  BinaryMask mask(gt.width, gt.height);
  for (size_t i = 0; i < gt.values.size(); ++i)
    mask.values[i] = gt.values[i] < threshold ? 1 : 0;
  return mask;
}

std::vector<double> line_profile(const PressureImage& img, ProfileAxis axis, int index) {
  if (axis == ProfileAxis::row) {
    if (index < 0 || index >= img.height)
      throw std::invalid_argument("line_profile: row index out of range");
    std::vector<double> out(static_cast<size_t>(img.width));
    for (int x = 0; x < img.width; ++x) out[static_cast<size_t>(x)] = img.at(index, x);
    return out;
  }
  if (index < 0 || index >= img.width)
    throw std::invalid_argument("line_profile: column index out of range");
  std::vector<double> out(static_cast<size_t>(img.height));
  for (int y = 0; y < img.height; ++y) out[static_cast<size_t>(y)] = img.at(y, index);
  return out;
}

}  // namespace pat
