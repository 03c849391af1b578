#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "kpsam/dataset.hpp"
#include "kpsam/kps.hpp"
#include "kpsam/metrics.hpp"
#include "kpsam/ppt_config.hpp"
#include "kpsam/sam_service.hpp"

namespace kpsam {

/// Everything one CLI invocation needs. Loaded from a JSON file, then overridden by flags.
struct RunConfig {
    int M = 16;
    int K = 5;
    int iterations = 2;
    LevelThresholds thresholds;
    int resize = 512;                     // square working resolution for prompts and segmentation
    std::string backend = "sam";          // sam | oracle | constant
    float constant_fill = 0.0f;           // value returned by the constant backend
    std::string sam_url = "http://127.0.0.1:8765/segment";
    std::filesystem::path sam_work_dir;   // empty: <out>/sam_io
    std::uint64_t seed = 0;
    std::filesystem::path out = "out";

    std::string dataset = "synthetic";
    std::filesystem::path root;
    DatasetLayout layout;

    std::filesystem::path checkpoint;     // trained network (read by score/prompt/e2e, written by train)
    std::filesystem::path pretrained;     // optional encoder state dict for train

    PptNetConfig net;
    TrainConfig train;
    MetricsConfig metrics;

    int workers = 1;
    bool eval_original_resolution = true;

    /// Copies the shared fields (M, seed) into the nested network/train configs.
    void sync();
};

/// Throws std::invalid_argument on inconsistent or out-of-range values.
void validate(const RunConfig& cfg);

RunConfig load_run_config(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const RunConfig& cfg);
void from_json(const nlohmann::json& j, RunConfig& cfg);

}  // namespace kpsam
