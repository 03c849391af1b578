#include "kpsam/sam_service.hpp"

#include <regex>

#include <httplib.h>

#include "kpsam/image_io.hpp"

namespace kpsam {

SamServiceConfig parse_sam_url(const std::string& url, SamServiceConfig cfg) {
    static const std::regex re(R"(^(?:http://)?([^:/]+)(?::(\d+))?(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw std::invalid_argument("bad service url: " + url);
    cfg.host = m[1].str();
    if (m[2].matched) cfg.port = std::stoi(m[2].str());
    if (m[3].matched && m[3].str() != "/") cfg.endpoint = m[3].str();
    return cfg;
}

nlohmann::json request_to_json(const std::vector<PointPrompt>& points,
                               const std::string& image_path, const std::string& mask_path) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points)
        pts.push_back({{"x", p.x}, {"y", p.y}, {"label", p.polarity == Polarity::Positive ? 1 : 0}});
    nlohmann::json j = {{"image_path", image_path}, {"points", pts}};
    if (!mask_path.empty()) j["mask_path"] = mask_path;
    return j;
}

SamResponse parse_response(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("mask_path") || !j["mask_path"].is_string())
        throw BackendError("service response lacks a mask_path string: " + j.dump());
    SamResponse r;
    r.mask_path = j["mask_path"].get<std::string>();
    if (j.contains("score") && j["score"].is_number()) r.score = j["score"].get<double>();
    return r;
}

SamServiceBackend::SamServiceBackend(SamServiceConfig cfg) : cfg_(std::move(cfg)) {}

Mask SamServiceBackend::segment(const SegmentationRequest& request) {
    validate_request(request);
    const std::uint64_t id = counter_++;
    std::filesystem::create_directories(cfg_.work_dir);

    std::string image_path = request.image.path;
    if (image_path.empty()) {
        if (!request.image.pixels) throw BackendError("request carries neither pixels nor a path");
        const auto p = cfg_.work_dir / ("image_" + std::to_string(id) + ".png");
        save_rgb_png(*request.image.pixels, p);
        image_path = std::filesystem::absolute(p).string();
    }
    std::string mask_path;
    if (request.mask_prompt) {
        const auto p = cfg_.work_dir / ("prompt_" + std::to_string(id) + ".png");
        save_mask_png(*request.mask_prompt, p);
        mask_path = std::filesystem::absolute(p).string();
    }

    httplib::Client client(cfg_.host, cfg_.port);
    client.set_connection_timeout(cfg_.timeout_seconds, 0);
    client.set_read_timeout(cfg_.timeout_seconds, 0);
    const std::string body = request_to_json(request.points, image_path, mask_path).dump();
    auto res = client.Post(cfg_.endpoint, body, "application/json");
    if (!res)
        throw BackendError("segmentation service unreachable at " + cfg_.host + ":" +
                           std::to_string(cfg_.port) + " (" + httplib::to_string(res.error()) + ")");
    if (res->status != 200)
        throw BackendError("segmentation service returned HTTP " + std::to_string(res->status) +
                           ": " + res->body);

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("unparseable service response: ") + e.what());
    }
    const SamResponse r = parse_response(j);
    Mask mask;
    try {
        mask = load_prediction(r.mask_path);
    } catch (const std::exception& e) {
        throw BackendError(e.what());
    }
    return mask.resized_nearest(request.image.width, request.image.height);
}

std::uint64_t SamServiceBackend::state_checksum() const {
    return std::hash<std::string>{}(cfg_.host + ":" + std::to_string(cfg_.port) + cfg_.endpoint);
}

}  // namespace kpsam
