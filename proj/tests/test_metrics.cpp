#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "kpsam/metrics.hpp"

using namespace kpsam;

namespace {

Mask random_binary(std::mt19937_64& rng, int w, int h, double p = 0.4) {
    Mask m(w, h);
    std::bernoulli_distribution b(p);
    for (auto& v : m.values()) v = b(rng) ? 1.0f : 0.0f;
    return m;
}

Mask half_gt(int w, int h) {
    Mask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w / 2; ++x) m.at(x, y) = 1.0f;
    return m;
}

Mask inverted(const Mask& m) {
    Mask out = m;
    for (auto& v : out.values()) v = 1.0f - v;
    return out;
}

struct ReferenceCase {
    std::string name;
    Mask pred, gt;
    double s, fw, mae;
    std::vector<double> f_curve, e_curve;
};

std::vector<ReferenceCase> load_reference_cases() {
    std::ifstream in(std::string(KPSAM_TEST_DATA_DIR) + "/metric_fixtures.json");
    if (!in) throw std::runtime_error("missing metric_fixtures.json");
    const auto j = nlohmann::json::parse(in);
    std::vector<ReferenceCase> out;
    for (const auto& c : j.at("cases")) {
        ReferenceCase rc;
        rc.name = c.at("name");
        const int w = c.at("width"), h = c.at("height");
        std::vector<float> p, g;
        for (int v : c.at("pred_levels")) p.push_back(static_cast<float>(v / 255.0));
        for (int v : c.at("gt")) g.push_back(static_cast<float>(v));
        rc.pred = Mask(w, h, p);
        rc.gt = Mask(w, h, g);
        rc.s = c.at("s_measure");
        rc.fw = c.at("f_weighted");
        rc.mae = c.at("mae");
        rc.f_curve = c.at("f_curve").get<std::vector<double>>();
        rc.e_curve = c.at("e_curve").get<std::vector<double>>();
        out.push_back(std::move(rc));
    }
    return out;
}

}  // namespace

TEST(Mae, Basics) {
    std::mt19937_64 rng(1);
    const Mask gt = random_binary(rng, 20, 15);
    EXPECT_EQ(mae(gt, gt), 0.0);
    EXPECT_EQ(mae(inverted(gt), gt), 1.0);
}

TEST(Mae, MatchesBruteForce) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (int t = 0; t < 50; ++t) {
        Mask pred(4, 4);
        for (auto& v : pred.values()) v = u(rng);
        const Mask gt = random_binary(rng, 4, 4);
        double sum = 0.0;
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x)
                sum += std::abs(static_cast<double>(pred.at(x, y)) - gt.at(x, y));
        EXPECT_NEAR(mae(pred, gt), sum / 16.0, 1e-12);
    }
}

TEST(Mae, ShapeMismatchThrows) {
    EXPECT_THROW(mae(Mask(3, 3), Mask(3, 4)), std::invalid_argument);
}

TEST(SMeasure, EdgeConventions) {
    std::mt19937_64 rng(3);
    const Mask gt = random_binary(rng, 30, 20);
    EXPECT_NEAR(s_measure(gt, gt), 1.0, 1e-6);
    const Mask empty(16, 16, 0.0f);
    EXPECT_NEAR(s_measure(Mask(16, 16, 0.0f), empty), 1.0, 1e-12);
    EXPECT_NEAR(s_measure(Mask(16, 16, 1.0f), empty), 0.0, 1e-12);
    EXPECT_NEAR(s_measure(Mask(16, 16, 1.0f), Mask(16, 16, 1.0f)), 1.0, 1e-12);
}

TEST(FMeasures, PerfectPrediction) {
    std::mt19937_64 rng(4);
    const Mask gt = random_binary(rng, 25, 25);
    const auto f = f_measures(gt, gt);
    EXPECT_NEAR(f.weighted, 1.0, 1e-6);
    EXPECT_NEAR(f.mean, 1.0, 1e-6);
}

TEST(FMeasures, HalfCoverageClosedForm) {
    const auto f = f_measures(Mask(20, 10, 1.0f), half_gt(20, 10));
    EXPECT_NEAR(f.mean, 1.3 * 0.5 / (0.3 * 0.5 + 1.0), 1e-4);
    EXPECT_NEAR(f.mean, 0.5652, 1e-4);
}

TEST(FMeasures, AllZeroPrediction) {
    Mask gt(64, 64);
    for (int y = 20; y < 40; ++y)
        for (int x = 20; x < 40; ++x) gt.at(x, y) = 1.0f;
    const auto f = f_measures(Mask(64, 64, 0.0f), gt);
    EXPECT_NEAR(f.weighted, 0.0, 1e-12);
    EXPECT_NEAR(f.mean, 0.0, 1e-12);
}

TEST(FMeasures, AllZeroPredictionObjectOnBorder) {
    // Zero padding in the error smoothing lowers the weighted error of foreground pixels
    // at the image edge, so the score is positive. Value from the reference implementation.
    const auto f = f_measures(Mask(20, 10, 0.0f), half_gt(20, 10));
    EXPECT_NEAR(f.weighted, 0.378487768563692, 1e-6);
    EXPECT_NEAR(f.mean, 0.0, 1e-12);
}

TEST(FMeasures, CurveLength) {
    EXPECT_EQ(f_measure_curve(Mask(8, 8, 0.3f), half_gt(8, 8)).size(), 255u);
    MetricsConfig cfg;
    cfg.thresholds = 17;
    EXPECT_EQ(f_measure_curve(Mask(8, 8, 0.3f), half_gt(8, 8), cfg).size(), 17u);
}

TEST(EMeasures, PerfectPrediction) {
    std::mt19937_64 rng(5);
    const Mask gt = random_binary(rng, 17, 23);
    const auto e = e_measures(gt, gt);
    EXPECT_NEAR(e.mean, 1.0, 1e-6);
    EXPECT_NEAR(e.max, 1.0, 1e-6);
}

TEST(EMeasures, MaxDominatesMean) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (int t = 0; t < 30; ++t) {
        Mask pred(12, 9);
        for (auto& v : pred.values()) v = u(rng);
        const auto e = e_measures(pred, random_binary(rng, 12, 9));
        EXPECT_GE(e.max, e.mean);
    }
}

TEST(EMeasures, InverseFourByFour) {
    const Mask gt = half_gt(4, 4);
    const auto e = e_measures(inverted(gt), gt);
    EXPECT_NEAR(e.mean, 0.0, 1e-12);
    EXPECT_NEAR(e.max, 0.0, 1e-12);
}

TEST(Evaluate, PerfectOnRandomFixtures) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 50; ++t) {
        const int w = std::uniform_int_distribution<int>(8, 48)(rng);
        const int h = std::uniform_int_distribution<int>(8, 48)(rng);
        Mask gt = random_binary(rng, w, h, 0.3);
        gt.at(0, 0) = 1.0f;
        gt.at(w - 1, h - 1) = 0.0f;
        const auto r = evaluate(gt, gt);
        EXPECT_NEAR(r.s_measure, 1.0, 1e-6);
        EXPECT_NEAR(r.f_weighted, 1.0, 1e-6);
        EXPECT_NEAR(r.f_mean, 1.0, 1e-6);
        EXPECT_NEAR(r.e_mean, 1.0, 1e-6);
        EXPECT_NEAR(r.e_max, 1.0, 1e-6);
        EXPECT_NEAR(r.mae, 0.0, 1e-6);
    }
}

TEST(Reference, MatchesFrozenValues) {
    for (const auto& c : load_reference_cases()) {
        SCOPED_TRACE(c.name);
        EXPECT_NEAR(s_measure(c.pred, c.gt), c.s, 1e-6);
        EXPECT_NEAR(mae(c.pred, c.gt), c.mae, 1e-6);
        EXPECT_NEAR(weighted_f_measure(c.pred, c.gt), c.fw, 1e-6);
        const auto f = f_measure_curve(c.pred, c.gt);
        const auto e = e_measure_curve(c.pred, c.gt);
        ASSERT_EQ(f.size(), c.f_curve.size());
        ASSERT_EQ(e.size(), c.e_curve.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            EXPECT_NEAR(f[i], c.f_curve[i], 1e-9) << "level " << i + 1;
            EXPECT_NEAR(e[i], c.e_curve[i], 1e-9) << "level " << i + 1;
        }
    }
}

TEST(DistanceTransform, MatchesBruteForce) {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 40; ++t) {
        const int w = std::uniform_int_distribution<int>(1, 30)(rng);
        const int h = std::uniform_int_distribution<int>(1, 30)(rng);
        std::vector<bool> site(static_cast<std::size_t>(w) * h);
        std::bernoulli_distribution b(t % 4 == 0 ? 0.02 : 0.2);
        for (std::size_t i = 0; i < site.size(); ++i) site[i] = b(rng);
        const auto d = euclidean_distance_transform(site, w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double best = std::numeric_limits<double>::infinity();
                for (int sy = 0; sy < h; ++sy)
                    for (int sx = 0; sx < w; ++sx)
                        if (site[sy * w + sx]) best = std::min(best, std::hypot(x - sx, y - sy));
                const int i = y * w + x;
                EXPECT_DOUBLE_EQ(d.distance[i], best);
                if (std::isinf(best)) {
                    EXPECT_EQ(d.nearest[i], -1);
                } else {
                    const int n = d.nearest[i];
                    ASSERT_TRUE(n >= 0 && site[n]);
                    EXPECT_DOUBLE_EQ(std::hypot(x - n % w, y - n / w), best);
                }
            }
    }
}

TEST(Accumulator, MergeMatchesSequential) {
    std::vector<MetricsReport> reports;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 9; ++i)
        reports.push_back({u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), 1});
    MetricsAccumulator all, a, b;
    for (int i = 0; i < 9; ++i) {
        all.add(reports[i]);
        (i < 4 ? a : b).add(reports[i]);
    }
    a.merge(b);
    EXPECT_EQ(a.count(), 9);
    EXPECT_NEAR(a.mean().mae, all.mean().mae, 1e-15);
    EXPECT_NEAR(a.mean().s_measure, average(reports).s_measure, 1e-15);
}

TEST(MetricsJson, RoundTrip) {
    MetricsReport r{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 7};
    nlohmann::json j = r;
    const auto back = j.get<MetricsReport>();
    EXPECT_EQ(back.e_max, 0.5);
    EXPECT_EQ(back.n_images, 7);
}
