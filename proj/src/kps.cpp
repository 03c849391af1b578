#include "kpsam/kps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kpsam {

namespace {

// Higher score wins, then lower row-major index.
bool preferred(const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.point.index < b.point.index;
}

std::size_t best_scored(const std::vector<ScoredCandidate>& pool) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i)
        if (preferred(pool[i], pool[best])) best = i;
    return best;
}

// Picks the element whose key is extreme (max when `maximize`), treating keys within
// kTieRelTol of the extreme as tied and resolving those ties with `preferred`.
std::size_t pick_extreme(const std::vector<ScoredCandidate>& pool, const std::vector<double>& key,
                         bool maximize) {
    double extreme = key[0];
    for (double k : key) extreme = maximize ? std::max(extreme, k) : std::min(extreme, k);
    const double slack = std::abs(extreme) * kTieRelTol;

    std::size_t best = pool.size();
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const bool tied = maximize ? key[i] >= extreme - slack : key[i] <= extreme + slack;
        if (!tied) continue;
        if (best == pool.size() || preferred(pool[i], pool[best])) best = i;
    }
    return best;
}

}  // namespace

Level classify(double score, const LevelThresholds& t) {
    if (score > t.high) return Level::L1;
    if (score >= t.mid) return Level::L2;
    if (score >= t.low) return Level::L3;
    return Level::L4;
}

std::size_t LevelPartition::total() const {
    std::size_t n = 0;
    for (const auto& l : levels) n += l.size();
    return n;
}

std::size_t PromptSelection::negative_count() const {
    std::size_t n = 0;
    for (const auto& t : triples) n += t.nps.size();
    return n;
}

LevelPartition stratify(const ScoreGrid& scores, const CandidateGrid& grid,
                        const LevelThresholds& thresholds) {
    if (scores.values.size() != grid.points.size()) {
        throw std::invalid_argument("stratify: " + std::to_string(scores.values.size()) +
                                    " scores for " + std::to_string(grid.points.size()) +
                                    " candidates");
    }
    LevelPartition out;
    out.width = grid.width;
    out.height = grid.height;
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        const double p = scores.values[i];
        out[classify(p, thresholds)].push_back({grid.points[i], p});
    }
    return out;
}

double distance(const CandidatePoint& a, const CandidatePoint& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

std::vector<ScoredCandidate> select_positive(const LevelPartition& levels, int K) {
    if (K < 1) throw std::invalid_argument("select_positive: K must be >= 1");
    if (levels.total() == 0) throw std::invalid_argument("select_positive: no candidates");

    std::vector<ScoredCandidate> selected;
    for (Level level : {Level::L1, Level::L2}) {
        std::vector<ScoredCandidate> pool = levels[level];
        while (!pool.empty() && static_cast<int>(selected.size()) < K) {
            std::size_t k;
            if (selected.empty()) {
                k = best_scored(pool);
            } else {
                std::vector<double> sums(pool.size(), 0.0);
                for (std::size_t i = 0; i < pool.size(); ++i)
                    for (const auto& p : selected) sums[i] += distance(pool[i].point, p.point);
                k = pick_extreme(pool, sums, /*maximize=*/true);
            }
            selected.push_back(pool[k]);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
        }
    }

    if (selected.empty()) {
        std::vector<ScoredCandidate> all;
        for (const auto& l : levels.levels) all.insert(all.end(), l.begin(), l.end());
        selected.push_back(all[best_scored(all)]);
    }
    return selected;
}

PromptSelection pair_negatives(const std::vector<ScoredCandidate>& pps,
                               const LevelPartition& levels) {
    if (pps.empty()) throw std::invalid_argument("pair_negatives: no positive points");

    std::vector<ScoredCandidate> pool = levels[Level::L4];
    // A fallback PP may itself come from L4.
    std::erase_if(pool, [&](const ScoredCandidate& c) {
        return std::any_of(pps.begin(), pps.end(),
                           [&](const ScoredCandidate& p) { return p.point.index == c.point.index; });
    });

    PromptSelection out;
    out.K = static_cast<int>(pps.size());
    out.width = levels.width;
    out.height = levels.height;
    for (const auto& pp : pps) {
        PromptTriple triple{pp, {}};
        for (int n = 0; n < 2 && !pool.empty(); ++n) {
            std::vector<double> dist(pool.size());
            for (std::size_t i = 0; i < pool.size(); ++i) dist[i] = distance(pool[i].point, pp.point);
            const std::size_t k = pick_extreme(pool, dist, /*maximize=*/false);
            triple.nps.push_back(pool[k]);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
        }
        out.triples.push_back(std::move(triple));
    }
    return out;
}

PromptSelection select_prompts(const ScoreGrid& scores, const CandidateGrid& grid, int K,
                               const LevelThresholds& thresholds) {
    const LevelPartition levels = stratify(scores, grid, thresholds);
    PromptSelection out = pair_negatives(select_positive(levels, K), levels);
    out.K = K;
    return out;
}

int to_pixel(double v, int dim) {
    const long r = std::lround(v);
    if (dim <= 0) return static_cast<int>(r);
    return static_cast<int>(std::clamp<long>(r, 0, dim - 1));
}

nlohmann::json selection_to_json(const std::string& image_id, const PromptSelection& selection) {
    auto xy = [&](const ScoredCandidate& c) {
        return nlohmann::json::array(
            {to_pixel(c.point.x, selection.width), to_pixel(c.point.y, selection.height)});
    };
    auto triples = nlohmann::json::array();
    for (const auto& t : selection.triples) {
        auto nps = nlohmann::json::array();
        for (const auto& np : t.nps) nps.push_back(xy(np));
        triples.push_back({{"pp", xy(t.pp)}, {"nps", std::move(nps)}});
    }
    return {{"image_id", image_id}, {"triples", std::move(triples)}};
}

}  // namespace kpsam
