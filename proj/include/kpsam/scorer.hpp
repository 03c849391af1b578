#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "kpsam/grid.hpp"
#include "kpsam/mask.hpp"
#include "kpsam/ppt_config.hpp"

namespace kpsam {

/// Mean of squared element-wise differences. Throws on length mismatch.
double mse_loss(const ScoreGrid& pred, const TargetGrid& target);

/// Owns a point-probability network behind a libtorch-free interface.
///
/// Prediction is read-only and may be called concurrently. train() mutates the
/// weights and must not overlap with any other call.
class PptScorer {
public:
    PptScorer() = default;

    /// Fresh network with parameters seeded from cfg.seed.
    static PptScorer create(const PptNetConfig& cfg);
    static PptScorer load(const std::filesystem::path& checkpoint);

    bool initialized() const { return static_cast<bool>(impl_); }
    const PptNetConfig& config() const;

    /// Scores for an image already resized to config().input_size.
    ScoreGrid predict(const RgbImage& image) const;

    TrainResult train(const std::vector<TrainingSample>& data, const TrainConfig& cfg);

    void save(const std::filesystem::path& checkpoint) const;

    /// Loads backbone/encoder weights from a pickled PyTorch state dict.
    std::size_t load_encoder_weights(const std::filesystem::path& state_dict);

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

}  // namespace kpsam
