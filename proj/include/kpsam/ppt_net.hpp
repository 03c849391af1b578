#pragma once

// Point-probability network: multi-scale encoder plus a per-candidate predictor.
// This header exposes the libtorch modules; most callers want kpsam/scorer.hpp.

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "kpsam/grid.hpp"
#include "kpsam/mask.hpp"
#include "kpsam/ppt_config.hpp"

namespace kpsam::ppt {

/// Backbone outputs, low level (f1) to high level (f4).
struct FeaturePyramid {
    torch::Tensor f1, f2, f3, f4;
};

/// Pluggable feature extractor. Implementations must produce four maps with
/// non-increasing spatial size.
class Backbone : public torch::nn::Module {
public:
    virtual FeaturePyramid extract(const torch::Tensor& x) = 0;
    virtual std::array<std::int64_t, 4> channels() const = 0;
    virtual std::string kind() const = 0;
};

/// Four strided 3x3 conv stages, strides (4, 8, 16, 32). Small enough for CPU tests.
class ToyBackbone final : public Backbone {
public:
    ToyBackbone();
    FeaturePyramid extract(const torch::Tensor& x) override;
    std::array<std::int64_t, 4> channels() const override { return {16, 32, 48, 64}; }
    std::string kind() const override { return "toy"; }

private:
    torch::nn::Conv2d stem1_{nullptr}, stem2_{nullptr}, stage2_{nullptr}, stage3_{nullptr},
        stage4_{nullptr};
};

/// Res2Net-50 v1b (26w x 4s). Parameter names follow the reference PyTorch layout so
/// state dicts exported from it load by name.
class Res2NetBackbone final : public Backbone {
public:
    Res2NetBackbone();
    FeaturePyramid extract(const torch::Tensor& x) override;
    std::array<std::int64_t, 4> channels() const override { return {256, 512, 1024, 2048}; }
    std::string kind() const override { return "res2net50"; }

private:
    torch::nn::Sequential conv1_{nullptr};
    torch::nn::BatchNorm2d bn1_{nullptr};
    torch::nn::Sequential layer1_{nullptr}, layer2_{nullptr}, layer3_{nullptr}, layer4_{nullptr};
};

/// conv (+ BatchNorm when enabled), no activation.
class BasicConvImpl : public torch::nn::Module {
public:
    BasicConvImpl(std::int64_t in, std::int64_t out, std::array<std::int64_t, 2> kernel,
                  std::array<std::int64_t, 2> padding = {0, 0}, std::int64_t dilation = 1,
                  bool batch_norm = false);
    torch::Tensor forward(const torch::Tensor& x);

private:
    torch::nn::Conv2d conv_{nullptr};
    torch::nn::BatchNorm2d bn_{nullptr};
};
TORCH_MODULE(BasicConv);

/// Receptive-field block: four branches (1x1; then 1xk, kx1 and 3x3 dilated by k for
/// k = 3, 5, 7), fused by a 3x3 conv and added to a 1x1 shortcut.
class ReceptiveFieldBlockImpl : public torch::nn::Module {
public:
    ReceptiveFieldBlockImpl(std::int64_t in, std::int64_t out, bool batch_norm);
    torch::Tensor forward(const torch::Tensor& x);

private:
    torch::nn::Sequential branch0_{nullptr}, branch1_{nullptr}, branch2_{nullptr},
        branch3_{nullptr};
    BasicConv conv_cat_{nullptr}, conv_res_{nullptr};
};
TORCH_MODULE(ReceptiveFieldBlock);

struct MultiScaleFeatures {
    torch::Tensor f1, f2, f3, f4;  // backbone outputs
    torch::Tensor rf2, rf3, rf4;   // after receptive-field blocks
    torch::Tensor all;             // Conv(f1) ++ Conv(RF(f2)) ++ Conv(RF(f3)) ++ RF(f4) at f1 size
};

/// Per-candidate max-pooled vectors, each laid out as [B, C, M, M].
struct LocalFeatures {
    torch::Tensor from_f1, from_rf2, from_rf3;
};

/// Channel-wise max over each cell of an M x M grid scaled onto `map` ([B, C, H, W]).
/// Cell (r, c) covers rows [floor(r*H/M), ceil((r+1)*H/M)) and likewise for columns.
torch::Tensor block_max(const torch::Tensor& map, int M);

LocalFeatures local_features(const MultiScaleFeatures& feats, int M);

class EncoderImpl : public torch::nn::Module {
public:
    explicit EncoderImpl(const PptNetConfig& cfg);
    MultiScaleFeatures forward(const torch::Tensor& x);

    std::shared_ptr<Backbone> backbone() const { return backbone_; }
    std::int64_t aggregate_channels() const { return 4 * branch_channels_; }
    std::int64_t f1_channels() const { return backbone_->channels()[0]; }
    std::int64_t branch_channels() const { return branch_channels_; }

private:
    std::int64_t branch_channels_;
    std::shared_ptr<Backbone> backbone_;
    ReceptiveFieldBlock rf2_{nullptr}, rf3_{nullptr}, rf4_{nullptr};
    BasicConv conv1_{nullptr}, conv2_{nullptr}, conv3_{nullptr};
};
TORCH_MODULE(Encoder);

/// Three valid 3x3 conv layers evaluated once per candidate on a 7x7-cell window of the
/// aggregated feature (average-pooled to the grid, zero beyond the border) centred on
/// that candidate. The candidate's local vectors from f1, RF(f2) and RF(f3) are
/// broadcast and concatenated before layers 1, 2 and 3 respectively.
class PredictorImpl : public torch::nn::Module {
public:
    PredictorImpl(std::int64_t global_channels, std::array<std::int64_t, 3> local_channels,
                  std::int64_t hidden);

    /// Batched evaluation of all candidates; returns logits [B, M*M], row-major.
    torch::Tensor forward(const torch::Tensor& f_all, const LocalFeatures& local);

    /// Candidate-by-candidate evaluation with literal concatenation. Same function as
    /// forward(), kept as the reference for it.
    torch::Tensor forward_sequential(const torch::Tensor& f_all, const LocalFeatures& local);

    torch::nn::Conv2d output_layer() const { return conv3_; }

    static constexpr int kWindowRadius = 3;

private:
    std::int64_t global_channels_;
    std::array<std::int64_t, 3> local_channels_;
    std::int64_t hidden_;
    torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr}, conv3_{nullptr};
};
TORCH_MODULE(Predictor);

class PptNetImpl : public torch::nn::Module {
public:
    explicit PptNetImpl(const PptNetConfig& cfg);

    /// Logits [B, M*M] for a normalized input batch [B, 3, H, W].
    torch::Tensor forward(const torch::Tensor& x);
    /// Probabilities in (0, 1), [B, M*M].
    torch::Tensor probabilities(const torch::Tensor& x);

    const PptNetConfig& config() const { return cfg_; }
    Encoder encoder() const { return encoder_; }
    Predictor predictor() const { return predictor_; }

private:
    PptNetConfig cfg_;
    Encoder encoder_{nullptr};
    Predictor predictor_{nullptr};
};
TORCH_MODULE(PptNet);

/// Builds a network with deterministically seeded parameters.
PptNet make_network(const PptNetConfig& cfg);

/// RGB [0,1] image to a normalized [1, 3, H, W] float tensor.
torch::Tensor to_input_tensor(const RgbImage& image);
torch::Tensor to_target_tensor(const TargetGrid& targets);

/// Mean squared error between predicted probabilities and targets.
torch::Tensor mse_loss(const torch::Tensor& pred, const torch::Tensor& target);

/// Scores for one image already at the network's input size.
ScoreGrid predict_scores(PptNet& net, const RgbImage& image);

/// Adam with step learning-rate decay; deterministic for a fixed seed.
TrainResult train(PptNet& net, const std::vector<TrainingSample>& data, const TrainConfig& cfg);

/// Single archive holding every parameter and buffer plus a JSON manifest.
void save_checkpoint(PptNet& net, const std::filesystem::path& path);
PptNet load_checkpoint(const std::filesystem::path& path);
nlohmann::json read_manifest(const std::filesystem::path& path);

/// Copies tensors from a pickled state dict (torch.save of a dict of tensors) into
/// parameters/buffers with matching name and shape, after rewriting key prefixes
/// via `prefix_map` (source prefix -> destination prefix). Returns the number copied.
std::size_t load_pretrained(torch::nn::Module& module, const std::filesystem::path& path,
                            const std::map<std::string, std::string>& prefix_map = {});

}  // namespace kpsam::ppt
