#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "kpsam/backend.hpp"

namespace kpsam {

struct SamServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8765;
    std::string endpoint = "/segment";
    std::filesystem::path work_dir = "sam_io";  // shared with the service process
    int timeout_seconds = 120;
};

/// Parses "http://host:port[/endpoint]" into the connection fields of `cfg`.
SamServiceConfig parse_sam_url(const std::string& url, SamServiceConfig cfg = {});

/// Wire request: {"image_path", "points": [{"x", "y", "label"}], "mask_path"?}.
nlohmann::json request_to_json(const std::vector<PointPrompt>& points,
                               const std::string& image_path,
                               const std::string& mask_path = {});

struct SamResponse {
    std::string mask_path;
    double score = 0.0;
};
/// Throws BackendError on a malformed response.
SamResponse parse_response(const nlohmann::json& j);

/// Talks to an external segmentation service over HTTP. Images and mask prompts are
/// exchanged as PNG files under `work_dir`; the returned mask is resampled (nearest)
/// to the request's image size. The model itself lives in the other process.
class SamServiceBackend final : public SegmentationBackend {
public:
    explicit SamServiceBackend(SamServiceConfig cfg);

    Mask segment(const SegmentationRequest& request) override;
    /// The remote weights are not observable; this hashes the connection settings.
    std::uint64_t state_checksum() const override;
    std::string name() const override { return "sam"; }

private:
    SamServiceConfig cfg_;
    std::atomic<std::uint64_t> counter_{0};
};

}  // namespace kpsam
