#include "kpsam/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "kpsam/image_io.hpp"

namespace kpsam {

namespace {

struct Ellipse {
    double cx, cy, rx, ry, angle;

    bool contains(double x, double y) const {
        const double dx = x - cx, dy = y - cy;
        const double c = std::cos(angle), s = std::sin(angle);
        const double u = (c * dx + s * dy) / rx;
        const double v = (-s * dx + c * dy) / ry;
        return u * u + v * v <= 1.0;
    }
};

// Smooth value noise: random lattice values, bilinearly interpolated.
std::vector<float> value_noise(int size, int cell, std::mt19937_64& rng) {
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    const int n = size / cell + 2;
    std::vector<float> lattice(static_cast<std::size_t>(n) * n);
    for (auto& v : lattice) v = u(rng);
    std::vector<float> out(static_cast<std::size_t>(size) * size);
    for (int y = 0; y < size; ++y) {
        const float fy = static_cast<float>(y) / cell;
        const int y0 = static_cast<int>(fy);
        const float ty = fy - y0;
        for (int x = 0; x < size; ++x) {
            const float fx = static_cast<float>(x) / cell;
            const int x0 = static_cast<int>(fx);
            const float tx = fx - x0;
            auto L = [&](int i, int j) { return lattice[static_cast<std::size_t>(j) * n + i]; };
            const float top = L(x0, y0) * (1 - tx) + L(x0 + 1, y0) * tx;
            const float bot = L(x0, y0 + 1) * (1 - tx) + L(x0 + 1, y0 + 1) * tx;
            out[static_cast<std::size_t>(y) * size + x] = top * (1 - ty) + bot * ty;
        }
    }
    return out;
}

}  // namespace

std::vector<SyntheticSample> make_synthetic_set(int count, int size, std::uint64_t seed) {
    if (count < 1 || size < 16) throw std::invalid_argument("make_synthetic_set: count >= 1, size >= 16");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<SyntheticSample> out;
    out.reserve(count);

    for (int i = 0; i < count; ++i) {
        SyntheticSample s;
        char id[32];
        std::snprintf(id, sizeof id, "synth_%03d", i);
        s.id = id;
        s.image = RgbImage(size, size);
        s.mask = Mask(size, size);

        // Main ellipse plus, on some images, a second overlapping blob.
        std::vector<Ellipse> parts;
        const double r = size * (0.18 + 0.12 * U(rng));
        parts.push_back({size * (0.3 + 0.4 * U(rng)), size * (0.3 + 0.4 * U(rng)), r,
                         r * (0.6 + 0.4 * U(rng)), std::numbers::pi * U(rng)});
        if (U(rng) < 0.5) {
            const Ellipse& e = parts.front();
            parts.push_back({e.cx + (U(rng) - 0.5) * e.rx, e.cy + (U(rng) - 0.5) * e.ry,
                             e.rx * 0.6, e.ry * 0.6, std::numbers::pi * U(rng)});
        }

        std::array<float, 3> base{}, offset{};
        for (int c = 0; c < 3; ++c) base[c] = static_cast<float>(0.3 + 0.3 * U(rng));
        // Same offset direction on every image so the cue is shared across the set.
        const float strength = static_cast<float>(0.8 + 0.4 * U(rng));
        offset = {-0.06f * strength, 0.2f * strength, -0.04f * strength};

        const auto bg_tex = value_noise(size, 8, rng);
        const auto fg_tex = value_noise(size, 3, rng);
        std::uniform_real_distribution<float> grain(-0.04f, 0.04f);

        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                const bool fg = std::any_of(parts.begin(), parts.end(), [&](const Ellipse& e) {
                    return e.contains(x + 0.5, y + 0.5);
                });
                s.mask.at(x, y) = fg ? 1.0f : 0.0f;
                const std::size_t k = static_cast<std::size_t>(y) * size + x;
                for (int c = 0; c < 3; ++c) {
                    float v = base[c] + 0.12f * bg_tex[k] + grain(rng);
                    if (fg) v += offset[c] + 0.08f * fg_tex[k];
                    s.image.at(c, x, y) = std::clamp(v, 0.0f, 1.0f);
                }
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

void write_synthetic_dataset(const std::filesystem::path& root,
                             const std::vector<SyntheticSample>& samples) {
    for (const auto& s : samples) {
        save_rgb_png(s.image, root / "Image" / (s.id + ".png"));
        save_mask_png(s.mask, root / "GT" / (s.id + ".png"));
    }
}

}  // namespace kpsam
