#pragma once
// Exhaustive step-wise greedy reference for key point selection. Written against the
// textual rules only: it shares no code with the library beyond the input types.

#include <cmath>
#include <cstddef>
#include <vector>

#include "kpsam/grid.hpp"

namespace kpsam::oracle {

struct Pick {
    std::vector<int> pps;                 // candidate indices, selection order
    std::vector<std::vector<int>> nps;    // per pp, nearest first
};

struct Candidate {
    int index;
    long double x, y;
    double score;
};

inline int level_of(double p) {
    if (p > 0.9) return 1;
    if (0.75 <= p && p <= 0.9) return 2;
    if (0.5 <= p && p < 0.75) return 3;
    return 4;
}

inline long double dist(const Candidate& a, const Candidate& b) {
    const long double dx = a.x - b.x, dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

// Among `pool`, every element whose key is within the relative tolerance of the extreme
// key; the survivor with the highest score, then lowest index, wins.
template <class Key>
std::size_t choose(const std::vector<Candidate>& pool, Key key, bool maximize) {
    std::vector<long double> k(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) k[i] = key(pool[i]);
    long double ext = k[0];
    for (auto v : k) ext = maximize ? (v > ext ? v : ext) : (v < ext ? v : ext);
    const long double tol = std::fabs(ext) * 1e-9L;
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (std::fabs(k[i] - ext) <= tol) tied.push_back(i);
    std::size_t best = tied[0];
    for (std::size_t i : tied) {
        const auto& a = pool[i];
        const auto& b = pool[best];
        if (a.score > b.score || (a.score == b.score && a.index < b.index)) best = i;
    }
    return best;
}

inline Pick select(const std::vector<Candidate>& all, int K) {
    std::vector<Candidate> lv[5];
    for (const auto& c : all) lv[level_of(c.score)].push_back(c);

    Pick out;
    std::vector<Candidate> chosen;
    for (int l : {1, 2}) {
        std::vector<Candidate> pool = lv[l];
        while (!pool.empty() && static_cast<int>(chosen.size()) < K) {
            std::size_t i;
            if (chosen.empty()) {
                i = choose(pool, [](const Candidate& c) { return static_cast<long double>(c.score); }, true);
            } else {
                i = choose(pool, [&](const Candidate& c) {
                    long double s = 0;
                    for (auto it = chosen.rbegin(); it != chosen.rend(); ++it) s += dist(c, *it);
                    return s;
                }, true);
            }
            chosen.push_back(pool[i]);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(i));
        }
    }
    if (chosen.empty()) {
        std::size_t i = choose(all, [](const Candidate& c) { return static_cast<long double>(c.score); }, true);
        chosen.push_back(all[i]);
    }

    std::vector<Candidate> pool;
    for (const auto& c : lv[4]) {
        bool is_pp = false;
        for (const auto& p : chosen) is_pp = is_pp || p.index == c.index;
        if (!is_pp) pool.push_back(c);
    }
    for (const auto& p : chosen) {
        out.pps.push_back(p.index);
        std::vector<int> nps;
        for (int n = 0; n < 2 && !pool.empty(); ++n) {
            std::size_t i = choose(pool, [&](const Candidate& c) { return dist(c, p); }, false);
            nps.push_back(pool[i].index);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(i));
        }
        out.nps.push_back(nps);
    }
    return out;
}

inline Pick select(const CandidateGrid& grid, const std::vector<double>& scores, int K) {
    std::vector<Candidate> all;
    for (std::size_t i = 0; i < grid.points.size(); ++i)
        all.push_back({grid.points[i].index, grid.points[i].x, grid.points[i].y, scores[i]});
    return select(all, K);
}

}  // namespace kpsam::oracle
