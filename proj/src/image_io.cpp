#include "kpsam/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace kpsam {

namespace {

cv::Mat read_or_throw(const std::filesystem::path& path, int flags) {
    cv::Mat m = cv::imread(path.string(), flags);
    if (m.empty()) throw std::runtime_error("cannot read image " + path.string());
    return m;
}

void write_or_throw(const std::filesystem::path& path, const cv::Mat& m) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    bool ok = false;
    try {
        ok = cv::imwrite(path.string(), m);
    } catch (const cv::Exception&) {
        ok = false;
    }
    if (!ok) throw std::runtime_error("cannot write image " + path.string());
}

}  // namespace

RgbImage from_bgr_mat(const cv::Mat& bgr) {
    if (bgr.empty()) throw std::invalid_argument("from_bgr_mat: empty image");
    cv::Mat src = bgr;
    if (src.channels() == 1) cv::cvtColor(src, src, cv::COLOR_GRAY2BGR);
    if (src.channels() == 4) cv::cvtColor(src, src, cv::COLOR_BGRA2BGR);
    if (src.channels() != 3) throw std::invalid_argument("from_bgr_mat: expected a 3-channel image");
    cv::Mat f;
    src.convertTo(f, CV_32FC3, src.depth() == CV_8U ? 1.0 / 255.0 : 1.0);

    RgbImage out(f.cols, f.rows);
    for (int y = 0; y < f.rows; ++y) {
        const auto* row = f.ptr<cv::Vec3f>(y);
        for (int x = 0; x < f.cols; ++x) {
            out.at(0, x, y) = row[x][2];
            out.at(1, x, y) = row[x][1];
            out.at(2, x, y) = row[x][0];
        }
    }
    return out;
}

cv::Mat to_bgr_mat(const RgbImage& image) {
    cv::Mat out(image.height, image.width, CV_8UC3);
    auto to_u8 = [](float v) {
        return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
    };
    for (int y = 0; y < image.height; ++y) {
        auto* row = out.ptr<cv::Vec3b>(y);
        for (int x = 0; x < image.width; ++x)
            row[x] = {to_u8(image.at(2, x, y)), to_u8(image.at(1, x, y)), to_u8(image.at(0, x, y))};
    }
    return out;
}

RgbImage load_rgb(const std::filesystem::path& path) {
    return from_bgr_mat(read_or_throw(path, cv::IMREAD_COLOR));
}

void save_rgb_png(const RgbImage& image, const std::filesystem::path& path) {
    write_or_throw(path, to_bgr_mat(image));
}

Mask load_ground_truth(const std::filesystem::path& path) {
    const cv::Mat g = read_or_throw(path, cv::IMREAD_GRAYSCALE);
    Mask out(g.cols, g.rows);
    for (int y = 0; y < g.rows; ++y) {
        const auto* row = g.ptr<unsigned char>(y);
        for (int x = 0; x < g.cols; ++x) out.at(x, y) = row[x] > 128 ? 1.0f : 0.0f;
    }
    return out;
}

Mask load_prediction(const std::filesystem::path& path) {
    const cv::Mat g = read_or_throw(path, cv::IMREAD_GRAYSCALE);
    Mask out(g.cols, g.rows);
    for (int y = 0; y < g.rows; ++y) {
        const auto* row = g.ptr<unsigned char>(y);
        for (int x = 0; x < g.cols; ++x) out.at(x, y) = row[x] / 255.0f;
    }
    return out;
}

void save_mask_png(const Mask& mask, const std::filesystem::path& path) {
    cv::Mat out(mask.height(), mask.width(), CV_8UC1);
    for (int y = 0; y < mask.height(); ++y) {
        auto* row = out.ptr<unsigned char>(y);
        for (int x = 0; x < mask.width(); ++x)
            row[x] = static_cast<unsigned char>(
                std::lround(std::clamp(mask.at(x, y), 0.0f, 1.0f) * 255.0f));
    }
    write_or_throw(path, out);
}

RgbImage resize_rgb(const RgbImage& image, int width, int height) {
    if (image.width == width && image.height == height) return image;
    if (image.empty()) throw std::invalid_argument("resize_rgb: empty image");
    RgbImage out(width, height);
    for (int c = 0; c < 3; ++c) {
        const cv::Mat plane(image.height, image.width, CV_32FC1,
                            const_cast<float*>(image.data.data()) +
                                static_cast<std::size_t>(c) * image.width * image.height);
        cv::Mat dst(height, width, CV_32FC1,
                    out.data.data() + static_cast<std::size_t>(c) * width * height);
        cv::resize(plane, dst, cv::Size(width, height), 0, 0, cv::INTER_LINEAR);
    }
    return out;
}

cv::Size image_size(const std::filesystem::path& path) {
    const cv::Mat m = read_or_throw(path, cv::IMREAD_UNCHANGED);
    return m.size();
}

}  // namespace kpsam
