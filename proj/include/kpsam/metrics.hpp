#pragma once

#include <vector>

#include <json.hpp>

#include "kpsam/mask.hpp"

namespace kpsam {

/// Constants of record for the six COD metrics.
struct MetricsConfig {
    double s_alpha = 0.5;           // object/region balance in S-measure
    double f_beta2 = 0.3;           // beta^2 for the threshold-swept F-measure
    double fw_beta2 = 1.0;          // beta^2 for the weighted F-measure
    int thresholds = 255;           // binarization levels 1..255 on the 8-bit scale
    double fw_sigma = 5.0;          // Gaussian sigma for weighted-F error smoothing
    int fw_window = 7;              // Gaussian window side
};

/// Per-image or dataset-averaged metric values.
struct MetricsReport {
    double s_measure = 0.0;
    double f_weighted = 0.0;
    double f_mean = 0.0;
    double e_mean = 0.0;
    double e_max = 0.0;
    double mae = 0.0;
    int n_images = 0;
};

struct FMeasures {
    double weighted = 0.0;
    double mean = 0.0;
};

struct EMeasures {
    double mean = 0.0;
    double max = 0.0;
};

double mae(const Mask& pred, const Mask& gt);
double s_measure(const Mask& pred, const Mask& gt, const MetricsConfig& cfg = {});
FMeasures f_measures(const Mask& pred, const Mask& gt, const MetricsConfig& cfg = {});
EMeasures e_measures(const Mask& pred, const Mask& gt, const MetricsConfig& cfg = {});

double weighted_f_measure(const Mask& pred, const Mask& gt, const MetricsConfig& cfg = {});

/// F_beta at each binarization level 1..cfg.thresholds (index 0 is level 1).
std::vector<double> f_measure_curve(const Mask& pred, const Mask& gt, const MetricsConfig& cfg = {});

/// Enhanced-alignment score at each binarization level 1..cfg.thresholds.
std::vector<double> e_measure_curve(const Mask& pred, const Mask& gt, const MetricsConfig& cfg = {});

/// All six metrics for one prediction.
MetricsReport evaluate(const Mask& pred, const Mask& gt, const MetricsConfig& cfg = {});

/// Running sum of per-image reports. merge() is associative, so partial
/// accumulators from different workers can be combined in any grouping.
class MetricsAccumulator {
public:
    void add(const MetricsReport& per_image);
    void merge(const MetricsAccumulator& other);
    MetricsReport mean() const;
    int count() const { return n_; }

private:
    MetricsReport sum_{};
    int n_ = 0;
};

MetricsReport average(const std::vector<MetricsReport>& per_image);

/// Exact Euclidean distance transform: for each pixel, distance to the nearest pixel
/// where `is_site` is true, plus that site's flat index. Without sites distances are +inf
/// and indices -1.
struct DistanceField {
    std::vector<double> distance;
    std::vector<int> nearest;
};
DistanceField euclidean_distance_transform(const std::vector<bool>& is_site, int width, int height);

void to_json(nlohmann::json& j, const MetricsReport& r);
void from_json(const nlohmann::json& j, MetricsReport& r);

}  // namespace kpsam
