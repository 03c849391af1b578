#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace kpsam {

/// Single-channel map with values in [0, 1], stored row-major.
///
/// Used for ground truth (exactly {0, 1}) and for predictions (continuous).
class Mask {
public:
    Mask() = default;
    Mask(int width, int height, float fill = 0.0f);
    Mask(int width, int height, std::vector<float> values);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    float at(int x, int y) const { return values_[index(x, y)]; }
    float& at(int x, int y) { return values_[index(x, y)]; }

    std::span<const float> values() const { return values_; }
    std::span<float> values() { return values_; }

    bool same_shape(const Mask& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    /// Foreground test used for binary decisions (value >= 0.5).
    bool is_foreground(int x, int y) const { return at(x, y) >= 0.5f; }

    /// Nearest-neighbour resample; keeps binary masks binary.
    Mask resized_nearest(int width, int height) const;

    friend bool operator==(const Mask&, const Mask&) = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<float> values_;
};

/// Throws std::invalid_argument if the two masks differ in size.
void require_same_shape(const Mask& a, const Mask& b, const char* what);

/// RGB image as planar float channels (CHW), values nominally in [0, 1].
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<float> data;  // 3 * height * width

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(3) * w * h, 0.0f) {}

    float& at(int c, int x, int y) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    float at(int c, int x, int y) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    bool empty() const { return data.empty(); }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

}  // namespace kpsam
