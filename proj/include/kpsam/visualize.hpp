#pragma once

#include <filesystem>

#include <opencv2/core.hpp>

#include "kpsam/kps.hpp"
#include "kpsam/mask.hpp"

namespace kpsam {

struct GlyphStyle {
    cv::Scalar positive{0, 255, 255};  // BGR yellow
    cv::Scalar negative{0, 0, 255};    // BGR red
    int radius = 0;                    // outer star radius in pixels; 0 picks one from the image size
};

/// Pixel position of a selection coordinate on an image of the given size.
cv::Point glyph_center(const CandidatePoint& p, const PromptSelection& selection, int width,
                       int height);

/// BGR copy of `image` with a star at every prompt: negatives first, positives on top.
cv::Mat render_overlay(const RgbImage& image, const PromptSelection& selection,
                       const GlyphStyle& style = {});

/// render_overlay written as PNG. Throws std::runtime_error if the file cannot be written.
void visualize(const RgbImage& image, const PromptSelection& selection,
               const std::filesystem::path& out_path, const GlyphStyle& style = {});

}  // namespace kpsam
