#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "kpsam/backend.hpp"
#include "kpsam/config.hpp"
#include "kpsam/dataset.hpp"
#include "kpsam/grid.hpp"
#include "kpsam/kps.hpp"
#include "kpsam/metrics.hpp"
#include "kpsam/scorer.hpp"

namespace kpsam {

/// One dataset image loaded at original size and at the working resolution.
struct PreparedImage {
    std::string id;
    RgbImage original;
    RgbImage working;      // resize x resize, bilinear
    Mask gt;               // original size, empty when no mask is available
    Mask gt_working;       // nearest resample of gt to the working size
};

PreparedImage prepare_image(const DatasetEntry& entry, int resize);

/// Images at the network input size with masks at `mask_size` (the prompting frame), so
/// cell targets do not depend on how far the network input is downsampled.
std::vector<TrainingSample> load_training_set(const DatasetIndex& index, int input_size,
                                              int mask_size);

/// Network scores for an image of any size (resampled to the network input first).
ScoreGrid score_image(const PptScorer& scorer, const RgbImage& image);

/// Scores -> KPS on the working-resolution grid.
PromptSelection prompt_image(const PptScorer& scorer, const RgbImage& working, const RunConfig& cfg);

/// Called once per image; receives the ground truth at working size (for the oracle).
/// May return the same shared instance every time.
using BackendFactory =
    std::function<std::shared_ptr<SegmentationBackend>(const PreparedImage& image)>;

/// Factory for cfg.backend: a fresh oracle per image, one shared constant or service backend.
BackendFactory make_backend_factory(const RunConfig& cfg);

struct ImageOutcome {
    std::string id;
    bool ok = true;
    std::string error;             // backend failure message when !ok
    PromptSelection selection;
    Mask prediction;               // at evaluation resolution
    MetricsReport metrics;
};

struct E2eResult {
    MetricsReport report;          // mean over every image; failed ones count as all-zero predictions
    std::vector<ImageOutcome> images;  // dataset order
    int failures = 0;
};

struct E2eOptions {
    bool write_outputs = true;     // prompts.jsonl, masks/<id>.png, report.json under cfg.out
};

/// For each image: resize, score, select prompts, segment twice, resample back, evaluate.
/// A backend exception marks that image failed and the run continues.
E2eResult run_e2e(const DatasetIndex& index, const RunConfig& cfg, const PptScorer& scorer,
                  const BackendFactory& backends, const E2eOptions& options = {});

/// Evaluates existing prediction PNGs (<pred_dir>/<id>.png) against the index.
E2eResult evaluate_directory(const DatasetIndex& index, const std::filesystem::path& pred_dir,
                             const MetricsConfig& metrics);

nlohmann::json report_json(const E2eResult& result);

}  // namespace kpsam
