#pragma once

#include <vector>

#include <json.hpp>

#include "kpsam/mask.hpp"

namespace kpsam {

/// Center of one grid cell. `index` is the row-major position and the
/// canonical tie-break key for everything downstream.
struct CandidatePoint {
    int index = 0;
    int row = 0;
    int col = 0;
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const CandidatePoint&, const CandidatePoint&) = default;
};

/// The N = M*M unlabeled candidate points of an image, row-major.
struct CandidateGrid {
    int M = 0;
    int width = 0;
    int height = 0;
    std::vector<CandidatePoint> points;

    int size() const { return static_cast<int>(points.size()); }
};

/// Per-cell supervision targets (average of the mask over each cell).
struct TargetGrid {
    int M = 0;
    int width = 0;
    int height = 0;
    std::vector<double> values;
};

/// Per-candidate object-presence probabilities, row-major, each in (0, 1).
struct ScoreGrid {
    std::vector<double> values;

    int size() const { return static_cast<int>(values.size()); }
};

/// Lays an M x M grid over a width x height image and returns the cell centers.
/// Throws std::invalid_argument unless 1 <= M <= min(width, height).
CandidateGrid generate_candidates(int width, int height, int M);

/// Pixel range [begin, end) of cell `k` along an axis of length `dim`.
/// Boundaries sit at round(k * dim / M), so every pixel belongs to exactly one cell.
struct CellSpan {
    int begin = 0;
    int end = 0;
};
CellSpan cell_span(int k, int dim, int M);

/// Average-pools `mask` over the M x M grid partition.
TargetGrid pool_mask_targets(const Mask& mask, int M);

void to_json(nlohmann::json& j, const CandidateGrid& grid);
void to_json(nlohmann::json& j, const TargetGrid& targets);
void from_json(const nlohmann::json& j, TargetGrid& targets);
void to_json(nlohmann::json& j, const ScoreGrid& scores);
void from_json(const nlohmann::json& j, ScoreGrid& scores);

}  // namespace kpsam
