#include "kpsam/mask.hpp"

#include <string>

namespace kpsam {

Mask::Mask(int width, int height, float fill) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw std::invalid_argument("Mask: negative dimensions");
    values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

Mask::Mask(int width, int height, std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)) {
    if (width < 0 || height < 0) throw std::invalid_argument("Mask: negative dimensions");
    if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw std::invalid_argument("Mask: value count does not match width*height");
}

Mask Mask::resized_nearest(int width, int height) const {
    if (width == width_ && height == height_) return *this;
    if (empty()) throw std::invalid_argument("Mask::resized_nearest: empty mask");
    Mask out(width, height);
    for (int y = 0; y < height; ++y) {
        // Pixel-center mapping, same convention as cv::INTER_NEAREST_EXACT.
        int sy = static_cast<int>((y + 0.5) * height_ / height);
        if (sy >= height_) sy = height_ - 1;
        for (int x = 0; x < width; ++x) {
            int sx = static_cast<int>((x + 0.5) * width_ / width);
            if (sx >= width_) sx = width_ - 1;
            out.at(x, y) = at(sx, sy);
        }
    }
    return out;
}

void require_same_shape(const Mask& a, const Mask& b, const char* what) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(what) + ": mask dimensions differ (" +
                                    std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                    " vs " + std::to_string(b.width()) + "x" +
                                    std::to_string(b.height()) + ")");
    }
}

}  // namespace kpsam
