#include "kpsam/grid.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace kpsam {

CandidateGrid generate_candidates(int width, int height, int M) {
    if (M <= 0) throw std::invalid_argument("generate_candidates: M must be positive");
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("generate_candidates: image dimensions must be positive");
    if (M > std::min(width, height)) {
        throw std::invalid_argument("generate_candidates: M=" + std::to_string(M) +
                                    " exceeds min(width, height)=" +
                                    std::to_string(std::min(width, height)));
    }

    CandidateGrid grid;
    grid.M = M;
    grid.width = width;
    grid.height = height;
    grid.points.reserve(static_cast<std::size_t>(M) * M);
    const double cell_w = static_cast<double>(width) / M;
    const double cell_h = static_cast<double>(height) / M;
    for (int r = 0; r < M; ++r) {
        for (int c = 0; c < M; ++c) {
            grid.points.push_back({r * M + c, r, c, (c + 0.5) * cell_w, (r + 0.5) * cell_h});
        }
    }
    return grid;
}

CellSpan cell_span(int k, int dim, int M) {
    // round-half-up of k * dim / M in integer arithmetic
    auto boundary = [dim, M](long long i) {
        return static_cast<int>((2 * i * dim + M) / (2LL * M));
    };
    return {boundary(k), boundary(k + 1)};
}

TargetGrid pool_mask_targets(const Mask& mask, int M) {
    if (mask.empty()) throw std::invalid_argument("pool_mask_targets: empty mask");
    if (M <= 0 || M > std::min(mask.width(), mask.height()))
        throw std::invalid_argument("pool_mask_targets: M out of range for mask size");

    TargetGrid out;
    out.M = M;
    out.width = mask.width();
    out.height = mask.height();
    out.values.resize(static_cast<std::size_t>(M) * M);
    for (int r = 0; r < M; ++r) {
        const CellSpan ys = cell_span(r, mask.height(), M);
        for (int c = 0; c < M; ++c) {
            const CellSpan xs = cell_span(c, mask.width(), M);
            double sum = 0.0;
            for (int y = ys.begin; y < ys.end; ++y)
                for (int x = xs.begin; x < xs.end; ++x) sum += mask.at(x, y);
            const double count = static_cast<double>(ys.end - ys.begin) * (xs.end - xs.begin);
            out.values[static_cast<std::size_t>(r) * M + c] = sum / count;
        }
    }
    return out;
}

void to_json(nlohmann::json& j, const CandidateGrid& grid) {
    auto points = nlohmann::json::array();
    for (const auto& p : grid.points) points.push_back({p.x, p.y});
    j = nlohmann::json{{"points", std::move(points)}};
}

void to_json(nlohmann::json& j, const TargetGrid& targets) {
    j = nlohmann::json{{"M", targets.M},
                       {"width", targets.width},
                       {"height", targets.height},
                       {"values", targets.values}};
}

void from_json(const nlohmann::json& j, TargetGrid& targets) {
    j.at("M").get_to(targets.M);
    j.at("width").get_to(targets.width);
    j.at("height").get_to(targets.height);
    j.at("values").get_to(targets.values);
    if (targets.values.size() != static_cast<std::size_t>(targets.M) * targets.M)
        throw std::invalid_argument("TargetGrid JSON: expected M*M values");
}

void to_json(nlohmann::json& j, const ScoreGrid& scores) {
    j = nlohmann::json{{"values", scores.values}};
}

void from_json(const nlohmann::json& j, ScoreGrid& scores) {
    j.at("values").get_to(scores.values);
}

}  // namespace kpsam
