#pragma once

#include <vector>

#include "pat/image.hpp"

namespace pat {

// Mean structural similarity with the reference 11x11 Gaussian (sigma 1.5)
// window, K1 = 0.01, K2 = 0.03, dynamic range 1. Inputs are clamped to
// [0, 1] before evaluation; only fully interior windows are scored.
double ssim(const PressureImage& f, const PressureImage& gt);

// 10 log10(i_max^2 / MSE) where MSE is the plain mean of squared
// differences; identical images report +infinity.
double psnr(const PressureImage& f, const PressureImage& gt, double i_max = 1.0);

// 10 log10((peak / sigma_b)^2) with the peak over the whole image and the
// population standard deviation over the masked background pixels.
double snr(const PressureImage& f, const BinaryMask& background);

// Background = pixels where the ground truth is below the threshold.
BinaryMask background_from_ground_truth(const PressureImage& gt, double threshold = 0.05);

enum class ProfileAxis { row, column };

// Pixel sequence along one row or column, for CSV export.
std::vector<double> line_profile(const PressureImage& img, ProfileAxis axis, int index);

}  // namespace pat
