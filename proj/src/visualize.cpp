#include "kpsam/visualize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "kpsam/image_io.hpp"

namespace kpsam {

namespace {

void draw_star(cv::Mat& canvas, cv::Point center, int radius, const cv::Scalar& color) {
    std::vector<cv::Point> pts;
    const double inner = radius * 0.45;
    for (int k = 0; k < 10; ++k) {
        const double r = k % 2 == 0 ? radius : inner;
        const double a = -std::numbers::pi / 2 + k * std::numbers::pi / 5;
        pts.emplace_back(center.x + static_cast<int>(std::lround(r * std::cos(a))),
                         center.y + static_cast<int>(std::lround(r * std::sin(a))));
    }
    cv::polylines(canvas, pts, true, cv::Scalar(0, 0, 0), 1, cv::LINE_8);
    cv::fillPoly(canvas, std::vector<std::vector<cv::Point>>{pts}, color, cv::LINE_8);
}

}  // namespace

cv::Point glyph_center(const CandidatePoint& p, const PromptSelection& selection, int width,
                       int height) {
    const double sx = selection.width > 0 ? static_cast<double>(width) / selection.width : 1.0;
    const double sy = selection.height > 0 ? static_cast<double>(height) / selection.height : 1.0;
    return {to_pixel(p.x * sx, width), to_pixel(p.y * sy, height)};
}

cv::Mat render_overlay(const RgbImage& image, const PromptSelection& selection,
                       const GlyphStyle& style) {
    cv::Mat canvas = to_bgr_mat(image);
    const int radius = style.radius > 0 ? style.radius
                                        : std::max(4, std::min(image.width, image.height) / 40);
    for (const auto& t : selection.triples)
        for (const auto& np : t.nps)
            draw_star(canvas, glyph_center(np.point, selection, image.width, image.height), radius,
                      style.negative);
    for (const auto& t : selection.triples)
        draw_star(canvas, glyph_center(t.pp.point, selection, image.width, image.height), radius,
                  style.positive);
    return canvas;
}

void visualize(const RgbImage& image, const PromptSelection& selection,
               const std::filesystem::path& out_path, const GlyphStyle& style) {
    const cv::Mat canvas = render_overlay(image, selection, style);
    bool ok = false;
    try {
        ok = cv::imwrite(out_path.string(), canvas);
    } catch (const cv::Exception&) {
        ok = false;
    }
    if (!ok) throw std::runtime_error("cannot write overlay " + out_path.string());
}

}  // namespace kpsam
