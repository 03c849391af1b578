#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "kpsam/backend.hpp"
#include "kpsam/image_io.hpp"
#include "kpsam/sam_service.hpp"
#include "support.hpp"

using namespace kpsam;

namespace {

Mask square_gt(int size, int x0, int y0, int x1, int y1) {
    Mask m(size, size);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) m.at(x, y) = 1.0f;
    return m;
}

SegmentationRequest request(int size, std::vector<PointPrompt> pts) {
    SegmentationRequest r;
    r.image.width = size;
    r.image.height = size;
    r.points = std::move(pts);
    return r;
}

PromptSelection one_triple(int size) {
    const auto g = generate_candidates(size, size, 4);
    std::vector<double> s(16, 0.1);
    s[5] = 0.95;
    return select_prompts(ScoreGrid{s}, g, 1);
}

}  // namespace

TEST(ConstantBackend, ReturnsConfiguredMask) {
    const Mask m = square_gt(16, 2, 2, 9, 9);
    ConstantBackend b(m);
    EXPECT_EQ(b.segment(request(16, {{1, 1, Polarity::Positive}})), m);
    EXPECT_EQ(b.segment(request(16, {{12, 3, Polarity::Negative}, {0, 0, Polarity::Positive}})), m);
    EXPECT_THROW(b.segment(request(8, {{1, 1}})), std::invalid_argument);
    ConstantBackend fill(0.0f);
    EXPECT_EQ(fill.segment(request(9, {{1, 1}})), Mask(9, 9, 0.0f));
}

TEST(OracleBackend, Rules) {
    const Mask gt = square_gt(32, 8, 8, 24, 24);
    OracleBackend b(gt);
    EXPECT_EQ(b.segment(request(32, {{16, 16, Polarity::Positive}, {2, 2, Polarity::Negative}})), gt);
    EXPECT_EQ(b.segment(request(32, {{2, 2, Polarity::Positive}, {30, 30, Polarity::Positive}})),
              Mask(32, 32));
    EXPECT_EQ(b.segment(request(32, {{16, 16, Polarity::Positive}, {10, 10, Polarity::Negative}})),
              Mask(32, 32));
    EXPECT_EQ(b.segment(request(32, {{2, 2, Polarity::Positive}, {16, 16, Polarity::Positive}})), gt);
}

TEST(ValidateRequest, RejectsBadPrompts) {
    EXPECT_THROW(validate_request(request(16, {})), std::invalid_argument);
    EXPECT_THROW(validate_request(request(16, {{16, 0}})), std::invalid_argument);
    EXPECT_THROW(validate_request(request(16, {{-1, 3}})), std::invalid_argument);
    auto r = request(16, {{1, 1}});
    r.mask_prompt = Mask(8, 8);
    EXPECT_THROW(validate_request(r), std::invalid_argument);
    r.mask_prompt = Mask(16, 16);
    EXPECT_NO_THROW(validate_request(r));
}

TEST(PointPrompts, PositiveThenNegatives) {
    const auto sel = one_triple(64);
    const auto pts = to_point_prompts(sel);
    ASSERT_EQ(pts.size(), 3u);
    EXPECT_EQ(pts[0].polarity, Polarity::Positive);
    EXPECT_EQ(pts[1].polarity, Polarity::Negative);
    EXPECT_EQ(pts[2].polarity, Polarity::Negative);
    EXPECT_EQ(pts[0].x, to_pixel(sel.triples[0].pp.point.x, 64));
}

TEST(TwoPass, SingleIterationHasNoMaskPrompt) {
    auto rec = RecordingBackend(std::make_shared<ConstantBackend>(0.25f));
    ImageRef img{64, 64, nullptr, {}};
    two_pass_segment(img, one_triple(64), rec, 1);
    ASSERT_EQ(rec.calls().size(), 1u);
    EXPECT_FALSE(rec.calls()[0].request.mask_prompt.has_value());
}

TEST(TwoPass, SecondCallCarriesFirstResponse) {
    const Mask gt = square_gt(64, 10, 10, 40, 40);
    RecordingBackend rec(std::make_shared<OracleBackend>(gt));
    ImageRef img{64, 64, nullptr, {}};
    const Mask out = two_pass_segment(img, one_triple(64), rec, 2);
    ASSERT_EQ(rec.calls().size(), 2u);
    EXPECT_FALSE(rec.calls()[0].request.mask_prompt.has_value());
    ASSERT_TRUE(rec.calls()[1].request.mask_prompt.has_value());
    EXPECT_EQ(*rec.calls()[1].request.mask_prompt, rec.calls()[0].response);
    EXPECT_EQ(rec.calls()[1].request.points, rec.calls()[0].request.points);
    EXPECT_EQ(out, rec.calls()[1].response);
}

TEST(TwoPass, ConstantBackendSameForOneAndTwo) {
    ConstantBackend b(square_gt(64, 3, 3, 30, 50));
    ImageRef img{64, 64, nullptr, {}};
    const auto sel = one_triple(64);
    const auto before = b.state_checksum();
    EXPECT_EQ(two_pass_segment(img, sel, b, 1), two_pass_segment(img, sel, b, 2));
    EXPECT_EQ(b.state_checksum(), before);
    EXPECT_THROW(two_pass_segment(img, sel, b, 3), std::invalid_argument);
}

TEST(SamWire, UrlParsing) {
    const auto c = parse_sam_url("http://10.0.0.2:9000/predict");
    EXPECT_EQ(c.host, "10.0.0.2");
    EXPECT_EQ(c.port, 9000);
    EXPECT_EQ(c.endpoint, "/predict");
    const auto d = parse_sam_url("localhost");
    EXPECT_EQ(d.port, 8765);
    EXPECT_EQ(d.endpoint, "/segment");
}

TEST(SamWire, RequestAndResponseSchema) {
    const auto j = request_to_json({{3, 4, Polarity::Positive}, {5, 6, Polarity::Negative}}, "/a.png", "/m.png");
    EXPECT_EQ(j["image_path"], "/a.png");
    EXPECT_EQ(j["mask_path"], "/m.png");
    EXPECT_EQ(j["points"][0], (nlohmann::json{{"x", 3}, {"y", 4}, {"label", 1}}));
    EXPECT_EQ(j["points"][1]["label"], 0);
    EXPECT_FALSE(request_to_json({}, "/a.png").contains("mask_path"));
    EXPECT_EQ(parse_response({{"mask_path", "/o.png"}, {"score", 0.7}}).score, 0.7);
    EXPECT_THROW(parse_response({{"score", 0.7}}), BackendError);
}

TEST(SamService, RoundTripOverHttp) {
    const auto dir = fixtures::scratch_dir("sam");
    httplib::Server server;
    std::vector<nlohmann::json> seen;
    server.Post("/segment", [&](const httplib::Request& req, httplib::Response& res) {
        auto j = nlohmann::json::parse(req.body);
        seen.push_back(j);
        Mask out(8, 8);
        for (const auto& p : j["points"])
            if (p["label"] == 1) out.at(p["x"].get<int>() / 4, p["y"].get<int>() / 4) = 1.0f;
        const auto path = dir / ("out_" + std::to_string(seen.size()) + ".png");
        save_mask_png(out, path);
        res.set_content(nlohmann::json{{"mask_path", path.string()}, {"score", 0.9}}.dump(),
                        "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    SamServiceConfig cfg;
    cfg.port = port;
    cfg.work_dir = dir / "io";
    SamServiceBackend backend(cfg);
    RgbImage img(32, 32);
    SegmentationRequest r;
    r.image = {32, 32, &img, {}};
    r.points = {{8, 12, Polarity::Positive}, {30, 30, Polarity::Negative}};
    const Mask first = backend.segment(r);
    r.mask_prompt = first;
    const Mask second = backend.segment(r);
    server.stop();
    t.join();

    ASSERT_EQ(seen.size(), 2u);
    EXPECT_FALSE(seen[0].contains("mask_path"));
    ASSERT_TRUE(seen[1].contains("mask_path"));
    EXPECT_EQ(load_prediction(seen[1]["mask_path"].get<std::string>()), first);
    EXPECT_TRUE(std::filesystem::exists(seen[0]["image_path"].get<std::string>()));
    EXPECT_EQ(first.width(), 32);
    EXPECT_EQ(first.at(8, 12), 1.0f);
    EXPECT_EQ(first.at(30, 30), 0.0f);
    EXPECT_EQ(first, second);
}

TEST(SamService, UnreachableIsBackendError) {
    SamServiceConfig cfg;
    cfg.port = 1;
    cfg.timeout_seconds = 2;
    cfg.work_dir = fixtures::scratch_dir("sam_down");
    SamServiceBackend backend(cfg);
    RgbImage img(8, 8);
    SegmentationRequest r;
    r.image = {8, 8, &img, {}};
    r.points = {{1, 1}};
    EXPECT_THROW(backend.segment(r), BackendError);
}
