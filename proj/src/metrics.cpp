#include "kpsam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace kpsam {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<bool> binarize(const Mask& gt) {
    std::vector<bool> out(gt.size());
    const auto v = gt.values();
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] >= 0.5f;
    return out;
}

// 8-bit quantization level of a prediction value (truncating, like uint8 casts).
int level_of(float p) {
    const double q = std::floor(static_cast<double>(p) * 255.0 + 1e-6);
    return static_cast<int>(std::clamp(q, 0.0, 255.0));
}

// Counts of predicted-foreground pixels inside gt foreground / background, per level.
struct LevelCounts {
    std::vector<long long> fg_fg;  // pred >= level and gt fg
    std::vector<long long> fg_bg;  // pred >= level and gt bg
    long long gt_fg = 0;
    long long total = 0;
};

LevelCounts cumulative_counts(const Mask& pred, const std::vector<bool>& gt) {
    std::vector<long long> hist_fg(256, 0), hist_bg(256, 0);
    const auto pv = pred.values();
    LevelCounts c;
    c.total = static_cast<long long>(pv.size());
    for (std::size_t i = 0; i < pv.size(); ++i) {
        const int q = level_of(pv[i]);
        if (gt[i]) {
            ++hist_fg[q];
            ++c.gt_fg;
        } else {
            ++hist_bg[q];
        }
    }
    c.fg_fg.assign(257, 0);
    c.fg_bg.assign(257, 0);
    for (int t = 255; t >= 0; --t) {
        c.fg_fg[t] = c.fg_fg[t + 1] + hist_fg[t];
        c.fg_bg[t] = c.fg_bg[t + 1] + hist_bg[t];
    }
    return c;
}

void check_thresholds(const MetricsConfig& cfg) {
    if (cfg.thresholds < 1 || cfg.thresholds > 255)
        throw std::invalid_argument("MetricsConfig: thresholds must be in [1, 255]");
}

// Structural similarity of one quadrant.
double region_ssim(const Mask& pred, const std::vector<bool>& gt, int x0, int x1, int y0, int y1) {
    const int w = pred.width();
    const double n = static_cast<double>(x1 - x0) * (y1 - y0);
    if (n <= 0) return 0.0;
    double sx = 0.0, sy = 0.0;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            sx += pred.at(x, y);
            sy += gt[static_cast<std::size_t>(y) * w + x] ? 1.0 : 0.0;
        }
    const double mx = sx / n, my = sy / n;
    double vx = 0.0, vy = 0.0, cxy = 0.0;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            const double dx = pred.at(x, y) - mx;
            const double dy = (gt[static_cast<std::size_t>(y) * w + x] ? 1.0 : 0.0) - my;
            vx += dx * dx;
            vy += dy * dy;
            cxy += dx * dy;
        }
    vx /= (n - 1 + kEps);
    vy /= (n - 1 + kEps);
    cxy /= (n - 1 + kEps);

    const double alpha = 4 * mx * my * cxy;
    const double beta = (mx * mx + my * my) * (vx + vy);
    if (alpha != 0) return alpha / (beta + kEps);
    if (beta == 0) return 1.0;
    return 0.0;
}

double object_similarity(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double sd = 0.0;
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double v : xs) ss += (v - mean) * (v - mean);
        sd = std::sqrt(ss / (n - 1));
    }
    return 2 * mean / (mean * mean + 1 + sd + kEps);
}

// Python-style round half to even, used for the foreground centroid.
double round_half_even(double v) { return std::nearbyint(v); }

// Lower-envelope 1D squared distance transform (Felzenszwalb & Huttenlocher).
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& arg) {
    const int n = static_cast<int>(f.size());
    std::vector<int> v(n);
    std::vector<double> z(n + 1);
    auto intersection = [&](int p, int q) {
        return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
    };
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] == kInf) continue;
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -kInf;
            z[1] = kInf;
            continue;
        }
        double s = intersection(v[k], q);
        while (s <= z[k]) {
            --k;
            s = intersection(v[k], q);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    d.assign(n, kInf);
    arg.assign(n, -1);
    if (k < 0) return;
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[j + 1] < q) ++j;
        const int p = v[j];
        d[q] = double(q - p) * (q - p) + f[p];
        arg[q] = p;
    }
}

std::vector<double> gaussian_kernel(int side, double sigma) {
    const double m = (side - 1) / 2.0;
    std::vector<double> h(static_cast<std::size_t>(side) * side);
    double hmax = 0.0;
    for (int i = 0; i < side; ++i)
        for (int j = 0; j < side; ++j) {
            const double y = i - m, x = j - m;
            h[i * side + j] = std::exp(-(x * x + y * y) / (2 * sigma * sigma));
            hmax = std::max(hmax, h[i * side + j]);
        }
    for (double& v : h)
        if (v < kEps * hmax) v = 0.0;
    const double sum = std::accumulate(h.begin(), h.end(), 0.0);
    if (sum != 0.0)
        for (double& v : h) v /= sum;
    return h;
}

}  // namespace

double mae(const Mask& pred, const Mask& gt) {
    require_same_shape(pred, gt, "mae");
    if (pred.empty()) throw std::invalid_argument("mae: empty mask");
    const auto p = pred.values();
    const auto g = gt.values();
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(double(p[i]) - double(g[i]));
    return sum / static_cast<double>(p.size());
}

double s_measure(const Mask& pred, const Mask& gt, const MetricsConfig& cfg) {
    require_same_shape(pred, gt, "s_measure");
    if (pred.empty()) throw std::invalid_argument("s_measure: empty mask");
    const std::vector<bool> g = binarize(gt);
    const auto pv = pred.values();
    const double n = static_cast<double>(pv.size());
    const double gt_mean = static_cast<double>(std::count(g.begin(), g.end(), true)) / n;
    const double pred_mean = std::accumulate(pv.begin(), pv.end(), 0.0) / n;

    if (gt_mean == 0.0) return 1.0 - pred_mean;
    if (gt_mean == 1.0) return pred_mean;

    // object-aware term
    std::vector<double> fg, bg;
    for (std::size_t i = 0; i < pv.size(); ++i) {
        if (g[i])
            fg.push_back(pv[i]);
        else
            bg.push_back(1.0 - pv[i]);
    }
    const double object =
        gt_mean * object_similarity(fg) + (1.0 - gt_mean) * object_similarity(bg);

    // region-aware term, quadrants split at the foreground centroid
    const int w = gt.width(), h = gt.height();
    double sx = 0.0, sy = 0.0, count = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (g[static_cast<std::size_t>(y) * w + x]) {
                sx += x;
                sy += y;
                count += 1.0;
            }
    const int cx = static_cast<int>(round_half_even(sx / count)) + 1;
    const int cy = static_cast<int>(round_half_even(sy / count)) + 1;
    const double area = static_cast<double>(w) * h;
    const double w_lt = double(cx) * cy / area;
    const double w_rt = double(cy) * (w - cx) / area;
    const double w_lb = double(h - cy) * cx / area;
    const double w_rb = 1.0 - w_lt - w_rt - w_lb;
    const double region = w_lt * region_ssim(pred, g, 0, cx, 0, cy) +
                          w_rt * region_ssim(pred, g, cx, w, 0, cy) +
                          w_lb * region_ssim(pred, g, 0, cx, cy, h) +
                          w_rb * region_ssim(pred, g, cx, w, cy, h);

    return std::max(0.0, cfg.s_alpha * object + (1.0 - cfg.s_alpha) * region);
}

std::vector<double> f_measure_curve(const Mask& pred, const Mask& gt, const MetricsConfig& cfg) {
    require_same_shape(pred, gt, "f_measures");
    if (pred.empty()) throw std::invalid_argument("f_measures: empty mask");
    check_thresholds(cfg);
    const LevelCounts c = cumulative_counts(pred, binarize(gt));
    const double positives = static_cast<double>(std::max<long long>(c.gt_fg, 1));
    std::vector<double> curve;
    curve.reserve(cfg.thresholds);
    for (int t = 1; t <= cfg.thresholds; ++t) {
        const double tp = static_cast<double>(c.fg_fg[t]);
        const double predicted = static_cast<double>(c.fg_fg[t] + c.fg_bg[t]);
        const double precision = predicted > 0 ? tp / predicted : 0.0;
        const double recall = tp / positives;
        const double num = (1 + cfg.f_beta2) * precision * recall;
        curve.push_back(num == 0.0 ? 0.0 : num / (cfg.f_beta2 * precision + recall));
    }
    return curve;
}

DistanceField euclidean_distance_transform(const std::vector<bool>& is_site, int width, int height) {
    if (is_site.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("euclidean_distance_transform: size mismatch");
    const std::size_t n = is_site.size();
    // column pass
    std::vector<double> col_d(n);
    std::vector<int> col_arg(n);
    std::vector<double> f(height), d;
    std::vector<int> arg;
    for (int x = 0; x < width; ++x) {
        for (int y = 0; y < height; ++y) f[y] = is_site[static_cast<std::size_t>(y) * width + x] ? 0.0 : kInf;
        edt_1d(f, d, arg);
        for (int y = 0; y < height; ++y) {
            col_d[static_cast<std::size_t>(y) * width + x] = d[y];
            col_arg[static_cast<std::size_t>(y) * width + x] = arg[y];
        }
    }
    // row pass
    DistanceField out;
    out.distance.assign(n, kInf);
    out.nearest.assign(n, -1);
    std::vector<double> g(width);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) g[x] = col_d[static_cast<std::size_t>(y) * width + x];
        edt_1d(g, d, arg);
        for (int x = 0; x < width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * width + x;
            if (arg[x] < 0) continue;
            const int sx = arg[x];
            const int sy = col_arg[static_cast<std::size_t>(y) * width + sx];
            out.distance[i] = std::sqrt(d[x]);
            out.nearest[i] = sy * width + sx;
        }
    }
    return out;
}

double weighted_f_measure(const Mask& pred, const Mask& gt, const MetricsConfig& cfg) {
    require_same_shape(pred, gt, "weighted_f_measure");
    if (pred.empty()) throw std::invalid_argument("weighted_f_measure: empty mask");
    const std::vector<bool> g = binarize(gt);
    if (std::none_of(g.begin(), g.end(), [](bool b) { return b; })) return 0.0;

    const int w = gt.width(), h = gt.height();
    const std::size_t n = g.size();
    const DistanceField field = euclidean_distance_transform(g, w, h);

    const auto pv = pred.values();
    std::vector<double> err(n), err_t(n);
    for (std::size_t i = 0; i < n; ++i) err[i] = std::abs(double(pv[i]) - (g[i] ? 1.0 : 0.0));
    // background pixels inherit the error of their nearest foreground pixel
    for (std::size_t i = 0; i < n; ++i) err_t[i] = g[i] ? err[i] : err[field.nearest[i]];

    const int side = cfg.fw_window;
    const int half = side / 2;
    const std::vector<double> kernel = gaussian_kernel(side, cfg.fw_sigma);
    std::vector<double> smoothed(n, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int ky = 0; ky < side; ++ky) {
                const int yy = y + ky - half;
                if (yy < 0 || yy >= h) continue;
                for (int kx = 0; kx < side; ++kx) {
                    const int xx = x + kx - half;
                    if (xx < 0 || xx >= w) continue;
                    acc += kernel[ky * side + kx] * err_t[static_cast<std::size_t>(yy) * w + xx];
                }
            }
            smoothed[static_cast<std::size_t>(y) * w + x] = acc;
        }

    double tp_w = 0.0, fp_w = 0.0, fg_err = 0.0, fg_count = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = err[i];
        if (g[i] && smoothed[i] < e) e = smoothed[i];
        if (g[i]) {
            fg_err += e;
            fg_count += 1.0;
        } else {
            const double importance = 2.0 - std::exp(std::log(0.5) / 5.0 * field.distance[i]);
            fp_w += e * importance;
        }
    }
    tp_w = fg_count - fg_err;
    const double recall = 1.0 - fg_err / fg_count;
    const double precision = tp_w / (tp_w + fp_w + kEps);
    const double b2 = cfg.fw_beta2;
    return (1 + b2) * recall * precision / (recall + b2 * precision + kEps);
}

FMeasures f_measures(const Mask& pred, const Mask& gt, const MetricsConfig& cfg) {
    const std::vector<double> curve = f_measure_curve(pred, gt, cfg);
    FMeasures out;
    out.mean = std::accumulate(curve.begin(), curve.end(), 0.0) / static_cast<double>(curve.size());
    out.weighted = weighted_f_measure(pred, gt, cfg);
    return out;
}

std::vector<double> e_measure_curve(const Mask& pred, const Mask& gt, const MetricsConfig& cfg) {
    require_same_shape(pred, gt, "e_measures");
    if (pred.empty()) throw std::invalid_argument("e_measures: empty mask");
    check_thresholds(cfg);
    const LevelCounts c = cumulative_counts(pred, binarize(gt));
    const double total = static_cast<double>(c.total);
    const double gt_fg = static_cast<double>(c.gt_fg);

    std::vector<double> curve;
    curve.reserve(cfg.thresholds);
    for (int t = 1; t <= cfg.thresholds; ++t) {
        const double fg_fg = static_cast<double>(c.fg_fg[t]);
        const double fg_bg = static_cast<double>(c.fg_bg[t]);
        const double pred_fg = fg_fg + fg_bg;
        const double pred_bg = total - pred_fg;
        double enhanced_sum;
        if (c.gt_fg == 0) {
            enhanced_sum = pred_bg;
        } else if (c.gt_fg == c.total) {
            enhanced_sum = pred_fg;
        } else {
            const double bg_fg = gt_fg - fg_fg;
            const double bg_bg = pred_bg - bg_fg;
            const double mean_pred = pred_fg / total;
            const double mean_gt = gt_fg / total;
            const double parts[4] = {fg_fg, fg_bg, bg_fg, bg_bg};
            const double pred_dm[4] = {1 - mean_pred, 1 - mean_pred, -mean_pred, -mean_pred};
            const double gt_dm[4] = {1 - mean_gt, -mean_gt, 1 - mean_gt, -mean_gt};
            enhanced_sum = 0.0;
            for (int i = 0; i < 4; ++i) {
                const double align =
                    2 * pred_dm[i] * gt_dm[i] / (pred_dm[i] * pred_dm[i] + gt_dm[i] * gt_dm[i] + kEps);
                enhanced_sum += (align + 1) * (align + 1) / 4 * parts[i];
            }
        }
        curve.push_back(enhanced_sum / total);
    }
    return curve;
}

EMeasures e_measures(const Mask& pred, const Mask& gt, const MetricsConfig& cfg) {
    const std::vector<double> curve = e_measure_curve(pred, gt, cfg);
    EMeasures out;
    out.mean = std::accumulate(curve.begin(), curve.end(), 0.0) / static_cast<double>(curve.size());
    out.max = *std::max_element(curve.begin(), curve.end());
    return out;
}

MetricsReport evaluate(const Mask& pred, const Mask& gt, const MetricsConfig& cfg) {
    MetricsReport r;
    r.s_measure = s_measure(pred, gt, cfg);
    const FMeasures f = f_measures(pred, gt, cfg);
    r.f_weighted = f.weighted;
    r.f_mean = f.mean;
    const EMeasures e = e_measures(pred, gt, cfg);
    r.e_mean = e.mean;
    r.e_max = e.max;
    r.mae = mae(pred, gt);
    r.n_images = 1;
    return r;
}

void MetricsAccumulator::add(const MetricsReport& r) {
    sum_.s_measure += r.s_measure;
    sum_.f_weighted += r.f_weighted;
    sum_.f_mean += r.f_mean;
    sum_.e_mean += r.e_mean;
    sum_.e_max += r.e_max;
    sum_.mae += r.mae;
    ++n_;
}

void MetricsAccumulator::merge(const MetricsAccumulator& other) {
    sum_.s_measure += other.sum_.s_measure;
    sum_.f_weighted += other.sum_.f_weighted;
    sum_.f_mean += other.sum_.f_mean;
    sum_.e_mean += other.sum_.e_mean;
    sum_.e_max += other.sum_.e_max;
    sum_.mae += other.sum_.mae;
    n_ += other.n_;
}

MetricsReport MetricsAccumulator::mean() const {
    MetricsReport r;
    r.n_images = n_;
    if (n_ == 0) return r;
    const double n = n_;
    r.s_measure = sum_.s_measure / n;
    r.f_weighted = sum_.f_weighted / n;
    r.f_mean = sum_.f_mean / n;
    r.e_mean = sum_.e_mean / n;
    r.e_max = sum_.e_max / n;
    r.mae = sum_.mae / n;
    return r;
}

MetricsReport average(const std::vector<MetricsReport>& per_image) {
    MetricsAccumulator acc;
    for (const auto& r : per_image) acc.add(r);
    return acc.mean();
}

void to_json(nlohmann::json& j, const MetricsReport& r) {
    j = nlohmann::json{{"Sm", r.s_measure}, {"Fw", r.f_weighted}, {"Fm", r.f_mean},
                       {"Em", r.e_mean},    {"Ex", r.e_max},      {"MAE", r.mae},
                       {"n", r.n_images}};
}

void from_json(const nlohmann::json& j, MetricsReport& r) {
    j.at("Sm").get_to(r.s_measure);
    j.at("Fw").get_to(r.f_weighted);
    j.at("Fm").get_to(r.f_mean);
    j.at("Em").get_to(r.e_mean);
    j.at("Ex").get_to(r.e_max);
    j.at("MAE").get_to(r.mae);
    j.at("n").get_to(r.n_images);
}

}  // namespace kpsam
