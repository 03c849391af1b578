#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "kpsam/grid.hpp"

namespace kpsam {

/// Score cut points separating the four confidence levels.
///
///   L1: p >  high
///   L2: mid <= p <= high
///   L3: low <= p <  mid
///   L4: p <  low
struct LevelThresholds {
    double high = 0.9;
    double mid = 0.75;
    double low = 0.5;
};

enum class Level { L1 = 0, L2 = 1, L3 = 2, L4 = 3 };

Level classify(double score, const LevelThresholds& t = {});

struct ScoredCandidate {
    CandidatePoint point;
    double score = 0.0;

    friend bool operator==(const ScoredCandidate&, const ScoredCandidate&) = default;
};

/// Disjoint cover of all candidates by confidence level; each level keeps row-major order.
struct LevelPartition {
    int width = 0;
    int height = 0;
    std::array<std::vector<ScoredCandidate>, 4> levels;

    const std::vector<ScoredCandidate>& operator[](Level l) const {
        return levels[static_cast<int>(l)];
    }
    std::vector<ScoredCandidate>& operator[](Level l) { return levels[static_cast<int>(l)]; }
    std::size_t total() const;
};

/// One positive point with up to two paired negative points.
struct PromptTriple {
    ScoredCandidate pp;
    std::vector<ScoredCandidate> nps;
};

struct PromptSelection {
    int K = 0;
    int width = 0;
    int height = 0;
    std::vector<PromptTriple> triples;

    std::size_t negative_count() const;
};

LevelPartition stratify(const ScoreGrid& scores, const CandidateGrid& grid,
                        const LevelThresholds& thresholds = {});

/// Euclidean distance between candidate pixel centers.
double distance(const CandidatePoint& a, const CandidatePoint& b);

/// Relative tolerance under which two distance sums (or two distances) count as tied.
/// Relative, so decisions do not change when all coordinates are scaled.
inline constexpr double kTieRelTol = 1e-9;

/// Greedy farthest-sum selection of up to K positive points from L1, then L2.
/// Falls back to the single best-scored candidate when both levels are empty.
std::vector<ScoredCandidate> select_positive(const LevelPartition& levels, int K);

/// Pairs each positive point, in order, with its two nearest remaining L4 points.
/// Paired points are removed from the pool; late triples may get fewer than two.
PromptSelection pair_negatives(const std::vector<ScoredCandidate>& pps,
                               const LevelPartition& levels);

/// stratify -> select_positive -> pair_negatives.
PromptSelection select_prompts(const ScoreGrid& scores, const CandidateGrid& grid, int K,
                               const LevelThresholds& thresholds = {});

/// Rounds a continuous coordinate to a pixel index inside [0, dim).
int to_pixel(double v, int dim);

/// One JSON-lines record: {"image_id", "triples": [{"pp": [x, y], "nps": [[x, y], ...]}]}.
nlohmann::json selection_to_json(const std::string& image_id, const PromptSelection& selection);

}  // namespace kpsam
