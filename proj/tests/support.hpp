#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "kpsam/grid.hpp"
#include "kpsam/kps.hpp"
#include "oracles/kps_oracle.hpp"

namespace kpsam::fixtures {

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("kpsam_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

struct KpsInstance {
    CandidateGrid grid;
    ScoreGrid scores;
    int K = 1;
};

/// Random grid (N <= 64) with scores that often sit on level boundaries or repeat,
/// so ties in score and in distance sums are common.
inline KpsInstance random_kps_instance(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> m_dist(1, 8), k_dist(1, 4), dim_dist(8, 400), pick(0, 9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    static const double boundary[] = {0.9, 0.75, 0.5, 0.95, 0.3, 0.6};
    KpsInstance inst;
    const int M = m_dist(rng);
    const int w = std::max(M, dim_dist(rng));
    const int h = std::max(M, dim_dist(rng));
    inst.grid = generate_candidates(w, h, M);
    inst.K = k_dist(rng);
    for (int i = 0; i < inst.grid.size(); ++i) {
        const int r = pick(rng);
        inst.scores.values.push_back(r < 3 ? boundary[pick(rng) % 6] : u(rng));
    }
    return inst;
}

/// Candidate indices of a selection in the oracle's shape.
inline oracle::Pick as_pick(const PromptSelection& s) {
    oracle::Pick p;
    for (const auto& t : s.triples) {
        p.pps.push_back(t.pp.point.index);
        std::vector<int> nps;
        for (const auto& n : t.nps) nps.push_back(n.point.index);
        p.nps.push_back(nps);
    }
    return p;
}

inline bool same_pick(const oracle::Pick& a, const oracle::Pick& b) {
    return a.pps == b.pps && a.nps == b.nps;
}

inline CandidateGrid scaled(const CandidateGrid& g, double lambda) {
    CandidateGrid out = g;
    for (auto& p : out.points) {
        p.x *= lambda;
        p.y *= lambda;
    }
    return out;
}

}  // namespace kpsam::fixtures
