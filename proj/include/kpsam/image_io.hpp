#pragma once

#include <filesystem>

#include <opencv2/core.hpp>

#include "kpsam/mask.hpp"

namespace kpsam {

RgbImage from_bgr_mat(const cv::Mat& bgr);
cv::Mat to_bgr_mat(const RgbImage& image);

RgbImage load_rgb(const std::filesystem::path& path);
void save_rgb_png(const RgbImage& image, const std::filesystem::path& path);

/// Ground truth PNG: pixels above 128 are foreground.
Mask load_ground_truth(const std::filesystem::path& path);
/// Prediction PNG: 8-bit value / 255.
Mask load_prediction(const std::filesystem::path& path);
/// Writes an 8-bit grayscale PNG (value * 255, rounded).
void save_mask_png(const Mask& mask, const std::filesystem::path& path);

/// Bilinear resize.
RgbImage resize_rgb(const RgbImage& image, int width, int height);

/// Width and height of an image file, without keeping the pixels.
cv::Size image_size(const std::filesystem::path& path);

}  // namespace kpsam
