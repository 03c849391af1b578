#include <random>
#include <set>

#include <gtest/gtest.h>

#include "kpsam/kps.hpp"
#include "support.hpp"

using namespace kpsam;

namespace {

ScoredCandidate at(int index, double x, double y, double score) {
    CandidatePoint p;
    p.index = index;
    p.x = x;
    p.y = y;
    return {p, score};
}

LevelPartition partition(std::vector<ScoredCandidate> all) {
    LevelPartition lp;
    for (auto& c : all) lp[classify(c.score)].push_back(c);
    return lp;
}

}  // namespace

TEST(Stratify, BoundaryValues) {
    EXPECT_EQ(classify(0.95), Level::L1);
    EXPECT_EQ(classify(0.90), Level::L2);
    EXPECT_EQ(classify(0.75), Level::L2);
    EXPECT_EQ(classify(0.50), Level::L3);
    EXPECT_EQ(classify(0.49), Level::L4);
}

TEST(Stratify, MixedScores) {
    CandidateGrid g5;
    for (int i = 0; i < 5; ++i) g5.points.push_back({i, 0, i, i + 0.5, 0.5});
    const auto lp = stratify(ScoreGrid{{0.91, 0.9, 0.749999, 0.5, 0.0}}, g5);
    ASSERT_EQ(lp[Level::L1].size(), 1u);
    ASSERT_EQ(lp[Level::L2].size(), 1u);
    ASSERT_EQ(lp[Level::L3].size(), 2u);
    ASSERT_EQ(lp[Level::L4].size(), 1u);
    EXPECT_EQ(lp[Level::L1][0].point.index, 0);
    EXPECT_EQ(lp[Level::L2][0].point.index, 1);
    EXPECT_EQ(lp[Level::L3][0].point.index, 2);
    EXPECT_EQ(lp[Level::L3][1].point.index, 3);
    EXPECT_EQ(lp[Level::L4][0].point.index, 4);
}

TEST(Stratify, AllLowGoesToL4) {
    const auto g = generate_candidates(64, 64, 8);
    const auto lp = stratify(ScoreGrid{std::vector<double>(64, 0.3)}, g);
    EXPECT_EQ(lp[Level::L4].size(), 64u);
    EXPECT_TRUE(lp[Level::L1].empty() && lp[Level::L2].empty() && lp[Level::L3].empty());
}

TEST(Stratify, LengthMismatchThrows) {
    EXPECT_THROW(stratify(ScoreGrid{{0.1}}, generate_candidates(4, 4, 2)), std::invalid_argument);
}

TEST(Stratify, DisjointCover) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 100; ++t) {
        auto inst = fixtures::random_kps_instance(rng);
        const auto lp = stratify(inst.scores, inst.grid);
        EXPECT_EQ(lp.total(), inst.grid.points.size());
        std::set<int> seen;
        for (const auto& l : lp.levels)
            for (const auto& c : l) EXPECT_TRUE(seen.insert(c.point.index).second);
    }
}

TEST(Distance, Basics) {
    CandidatePoint a{0, 0, 0, 0.0, 0.0}, b{1, 0, 1, 3.0, 4.0};
    EXPECT_EQ(distance(a, a), 0.0);
    EXPECT_DOUBLE_EQ(distance(a, b), 5.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 100; ++i) {
        CandidatePoint p{0, 0, 0, u(rng), u(rng)}, q{1, 0, 0, u(rng), u(rng)};
        EXPECT_EQ(distance(p, q), distance(q, p));
    }
}

TEST(SelectPositive, SinglePoint) {
    const auto pps = select_positive(partition({at(3, 10, 10, 0.95)}), 5);
    ASSERT_EQ(pps.size(), 1u);
    EXPECT_EQ(pps[0].point.index, 3);
}

TEST(SelectPositive, FarthestSumWithEqualScores) {
    const auto lp = partition({at(0, 0, 0, 0.95), at(1, 100, 0, 0.95), at(2, 200, 0, 0.95)});
    const auto pps = select_positive(lp, 2);
    ASSERT_EQ(pps.size(), 2u);
    EXPECT_EQ(pps[0].point.x, 0.0);
    EXPECT_EQ(pps[1].point.x, 200.0);
}

TEST(SelectPositive, FallbackTakesBestScore) {
    const auto lp = partition({at(0, 0, 0, 0.55), at(1, 5, 5, 0.6), at(2, 9, 9, 0.2)});
    const auto pps = select_positive(lp, 5);
    ASSERT_EQ(pps.size(), 1u);
    EXPECT_EQ(pps[0].point.index, 1);
}

TEST(SelectPositive, L1BeforeL2) {
    const auto lp = partition({at(0, 0, 0, 0.8), at(1, 1000, 0, 0.8), at(2, 1, 0, 0.95)});
    const auto pps = select_positive(lp, 2);
    ASSERT_EQ(pps.size(), 2u);
    EXPECT_EQ(pps[0].point.index, 2);
    EXPECT_EQ(pps[1].point.index, 1);
}

TEST(SelectPositive, Errors) {
    EXPECT_THROW(select_positive(partition({at(0, 0, 0, 0.95)}), 0), std::invalid_argument);
    EXPECT_THROW(select_positive(LevelPartition{}, 1), std::invalid_argument);
}

TEST(PairNegatives, NearestTwo) {
    const auto lp = partition({at(0, 50, 50, 0.95), at(1, 10, 50, 0.1), at(2, 90, 50, 0.1),
                               at(3, 50, 200, 0.1)});
    const auto s = pair_negatives({lp[Level::L1][0]}, lp);
    ASSERT_EQ(s.triples.size(), 1u);
    ASSERT_EQ(s.triples[0].nps.size(), 2u);
    EXPECT_EQ(s.triples[0].nps[0].point.index, 1);
    EXPECT_EQ(s.triples[0].nps[1].point.index, 2);
}

TEST(PairNegatives, ExactlyTwoAvailable) {
    const auto lp = partition({at(0, 0, 0, 0.95), at(1, 500, 0, 0.1), at(2, 900, 0, 0.1)});
    const auto s = pair_negatives({lp[Level::L1][0]}, lp);
    ASSERT_EQ(s.triples[0].nps.size(), 2u);
}

TEST(PairNegatives, RemovalAcrossTriples) {
    // PP a at x=0, PP b at x=10; L4 at 1, 2, 3, 20. a takes 1 and 2; b gets 3 and 20.
    const auto lp = partition({at(0, 0, 0, 0.95), at(1, 10, 0, 0.95), at(2, 1, 0, 0.1),
                               at(3, 2, 0, 0.1), at(4, 3, 0, 0.1), at(5, 20, 0, 0.1)});
    const auto s = pair_negatives({lp[Level::L1][0], lp[Level::L1][1]}, lp);
    ASSERT_EQ(s.triples.size(), 2u);
    EXPECT_EQ(s.triples[0].nps[0].point.index, 2);
    EXPECT_EQ(s.triples[0].nps[1].point.index, 3);
    EXPECT_EQ(s.triples[1].nps[0].point.index, 4);
    EXPECT_EQ(s.triples[1].nps[1].point.index, 5);
}

TEST(PairNegatives, DegeneratePool) {
    const auto lp = partition({at(0, 0, 0, 0.95), at(1, 10, 0, 0.95), at(2, 1, 0, 0.1)});
    const auto s = pair_negatives({lp[Level::L1][0], lp[Level::L1][1]}, lp);
    ASSERT_EQ(s.triples.size(), 2u);
    EXPECT_EQ(s.triples[0].nps.size(), 1u);
    EXPECT_TRUE(s.triples[1].nps.empty());
}

TEST(SelectPrompts, CornersAsNegatives) {
    const auto g = generate_candidates(512, 512, 16);
    std::vector<double> scores(256, 0.95);
    for (int i : {0, 15, 240, 255}) scores[i] = 0.1;
    const auto s = select_prompts(ScoreGrid{scores}, g, 1);
    ASSERT_EQ(s.triples.size(), 1u);
    EXPECT_EQ(s.triples[0].pp.point.index, 1);
    ASSERT_EQ(s.triples[0].nps.size(), 2u);
    EXPECT_EQ(s.triples[0].nps[0].point.index, 0);
    EXPECT_EQ(s.triples[0].nps[1].point.index, 15);
}

TEST(SelectPrompts, UniformLowScoresFallBack) {
    const auto g = generate_candidates(64, 64, 4);
    const auto s = select_prompts(ScoreGrid{std::vector<double>(16, 0.3)}, g, 5);
    ASSERT_EQ(s.triples.size(), 1u);
    EXPECT_EQ(s.triples[0].pp.point.index, 0);
    ASSERT_EQ(s.triples[0].nps.size(), 2u);
    EXPECT_EQ(s.triples[0].nps[0].point.index, 1);
    EXPECT_EQ(s.triples[0].nps[1].point.index, 4);
}

TEST(SelectPrompts, AtMostFiveTriplesTenNegatives) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto g = generate_candidates(512, 512, 16);
    for (int t = 0; t < 50; ++t) {
        ScoreGrid s;
        for (int i = 0; i < 256; ++i) s.values.push_back(u(rng));
        const auto sel = select_prompts(s, g, 5);
        EXPECT_GE(sel.triples.size(), 1u);
        EXPECT_LE(sel.triples.size(), 5u);
        EXPECT_LE(sel.negative_count(), 10u);
    }
}

TEST(SelectPrompts, MembershipAndUniqueness) {
    std::mt19937_64 rng(19);
    for (int t = 0; t < 300; ++t) {
        auto inst = fixtures::random_kps_instance(rng);
        const auto lp = stratify(inst.scores, inst.grid);
        const auto sel = select_prompts(inst.scores, inst.grid, inst.K);
        const bool fallback = lp[Level::L1].empty() && lp[Level::L2].empty();
        std::set<int> used;
        for (const auto& tr : sel.triples) {
            if (!fallback) EXPECT_TRUE(classify(tr.pp.score) == Level::L1 || classify(tr.pp.score) == Level::L2);
            EXPECT_TRUE(used.insert(tr.pp.point.index).second);
            for (const auto& np : tr.nps) {
                EXPECT_EQ(classify(np.score), Level::L4);
                EXPECT_TRUE(used.insert(np.point.index).second);
            }
        }
    }
}

TEST(SelectPrompts, MatchesExhaustiveOracle) {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 300; ++t) {
        auto inst = fixtures::random_kps_instance(rng);
        const auto sel = select_prompts(inst.scores, inst.grid, inst.K);
        EXPECT_TRUE(fixtures::same_pick(fixtures::as_pick(sel),
                                       oracle::select(inst.grid, inst.scores.values, inst.K)))
            << "instance " << t;
    }
}

TEST(SelectPrompts, ScaleInvariant) {
    std::mt19937_64 rng(29);
    for (int t = 0; t < 100; ++t) {
        auto inst = fixtures::random_kps_instance(rng);
        const auto base = fixtures::as_pick(select_prompts(inst.scores, inst.grid, inst.K));
        for (double lambda : {0.1, 3.0, 1000.0}) {
            const auto s = select_prompts(inst.scores, fixtures::scaled(inst.grid, lambda), inst.K);
            EXPECT_TRUE(fixtures::same_pick(base, fixtures::as_pick(s)));
        }
    }
}

TEST(SelectPrompts, Deterministic) {
    std::mt19937_64 rng(31);
    auto inst = fixtures::random_kps_instance(rng);
    const auto a = select_prompts(inst.scores, inst.grid, inst.K);
    const auto b = select_prompts(inst.scores, inst.grid, inst.K);
    EXPECT_EQ(selection_to_json("x", a), selection_to_json("x", b));
}

TEST(SelectionJson, RoundsOnlyAtSerialization) {
    const auto g = generate_candidates(15, 15, 2);  // centers at 3.75 and 11.25
    const auto sel = select_prompts(ScoreGrid{{0.95, 0.1, 0.1, 0.1}}, g, 1);
    EXPECT_DOUBLE_EQ(sel.triples[0].pp.point.x, 3.75);
    const auto j = selection_to_json("img", sel);
    EXPECT_EQ(j["image_id"], "img");
    EXPECT_EQ(j["triples"][0]["pp"], nlohmann::json::array({4, 4}));
    EXPECT_EQ(j["triples"][0]["nps"].size(), 2u);
}

TEST(ToPixel, ClampsToImage) {
    EXPECT_EQ(to_pixel(-0.4, 10), 0);
    EXPECT_EQ(to_pixel(9.7, 10), 9);
    EXPECT_EQ(to_pixel(4.5, 10), 5);
}
