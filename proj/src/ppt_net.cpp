#include "kpsam/ppt_net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <random>

namespace kpsam::ppt {

namespace nn = torch::nn;
namespace F = torch::nn::functional;

namespace {

nn::Conv2d conv(std::int64_t in, std::int64_t out, std::int64_t k, std::int64_t stride = 1,
                std::int64_t pad = 0, bool bias = true) {
    return nn::Conv2d(nn::Conv2dOptions(in, out, k).stride(stride).padding(pad).bias(bias));
}

// Res2Net bottleneck: the 3x3 stage is split into `scale` channel groups processed
// hierarchically. `stage` marks the first block of a layer (no cross-group sums,
// avg-pooled last group).
class Bottle2neckImpl : public nn::Module {
public:
    static constexpr std::int64_t kExpansion = 4;

    Bottle2neckImpl(std::int64_t inplanes, std::int64_t planes, std::int64_t stride, bool stage,
                    std::int64_t base_width = 26, std::int64_t scale = 4)
        : stage_(stage), scale_(scale) {
        width_ = planes * base_width / 64;
        conv1_ = register_module("conv1", conv(inplanes, width_ * scale, 1, 1, 0, false));
        bn1_ = register_module("bn1", nn::BatchNorm2d(width_ * scale));
        nums_ = scale == 1 ? 1 : scale - 1;
        convs_ = register_module("convs", nn::ModuleList());
        bns_ = register_module("bns", nn::ModuleList());
        for (std::int64_t i = 0; i < nums_; ++i) {
            convs_->push_back(conv(width_, width_, 3, stride, 1, false));
            bns_->push_back(nn::BatchNorm2d(width_));
        }
        conv3_ = register_module("conv3", conv(width_ * scale, planes * kExpansion, 1, 1, 0, false));
        bn3_ = register_module("bn3", nn::BatchNorm2d(planes * kExpansion));
        if (stage) {
            pool_ = register_module(
                "pool", nn::AvgPool2d(nn::AvgPool2dOptions(3).stride(stride).padding(1)));
        }
        if (stride != 1 || inplanes != planes * kExpansion) {
            downsample_ = register_module(
                "downsample",
                nn::Sequential(nn::AvgPool2d(nn::AvgPool2dOptions(stride)
                                                 .stride(stride)
                                                 .ceil_mode(true)
                                                 .count_include_pad(false)),
                               conv(inplanes, planes * kExpansion, 1, 1, 0, false),
                               nn::BatchNorm2d(planes * kExpansion)));
        }
    }

    torch::Tensor forward(torch::Tensor x) {
        torch::Tensor out = torch::relu(bn1_->forward(conv1_->forward(x)));
        const std::vector<torch::Tensor> spx = torch::split(out, width_, 1);
        std::vector<torch::Tensor> parts;
        torch::Tensor sp;
        for (std::int64_t i = 0; i < nums_; ++i) {
            sp = (i == 0 || stage_) ? spx[i] : sp + spx[i];
            sp = convs_[i]->as<nn::Conv2d>()->forward(sp);
            sp = torch::relu(bns_[i]->as<nn::BatchNorm2d>()->forward(sp));
            parts.push_back(sp);
        }
        if (scale_ != 1) parts.push_back(stage_ ? pool_->forward(spx[nums_]) : spx[nums_]);
        out = bn3_->forward(conv3_->forward(torch::cat(parts, 1)));
        torch::Tensor residual = downsample_ ? downsample_->forward(x) : x;
        return torch::relu(out + residual);
    }

private:
    bool stage_;
    std::int64_t scale_, width_ = 0, nums_ = 0;
    nn::Conv2d conv1_{nullptr}, conv3_{nullptr};
    nn::BatchNorm2d bn1_{nullptr}, bn3_{nullptr};
    nn::ModuleList convs_{nullptr}, bns_{nullptr};
    nn::AvgPool2d pool_{nullptr};
    nn::Sequential downsample_{nullptr};
};
TORCH_MODULE(Bottle2neck);

nn::Sequential res2net_layer(std::int64_t& inplanes, std::int64_t planes, int blocks,
                             std::int64_t stride) {
    nn::Sequential layer;
    layer->push_back(Bottle2neck(inplanes, planes, stride, /*stage=*/true));
    inplanes = planes * Bottle2neckImpl::kExpansion;
    for (int i = 1; i < blocks; ++i) layer->push_back(Bottle2neck(inplanes, planes, 1, false));
    return layer;
}

std::int64_t feature_channels(const PptNetConfig& cfg) {
    return cfg.backbone == "res2net50" ? 256 : 16;
}

}  // namespace

// ---------------------------------------------------------------------------
// Backbones

ToyBackbone::ToyBackbone() {
    stem1_ = register_module("stem1", conv(3, 8, 3, 2, 1));
    stem2_ = register_module("stem2", conv(8, 16, 3, 2, 1));
    stage2_ = register_module("stage2", conv(16, 32, 3, 2, 1));
    stage3_ = register_module("stage3", conv(32, 48, 3, 2, 1));
    stage4_ = register_module("stage4", conv(48, 64, 3, 2, 1));
}

FeaturePyramid ToyBackbone::extract(const torch::Tensor& x) {
    FeaturePyramid p;
    p.f1 = torch::relu(stem2_->forward(torch::relu(stem1_->forward(x))));
    p.f2 = torch::relu(stage2_->forward(p.f1));
    p.f3 = torch::relu(stage3_->forward(p.f2));
    p.f4 = torch::relu(stage4_->forward(p.f3));
    return p;
}

Res2NetBackbone::Res2NetBackbone() {
    conv1_ = register_module(
        "conv1", nn::Sequential(conv(3, 32, 3, 2, 1, false), nn::BatchNorm2d(32),
                                nn::ReLU(nn::ReLUOptions(true)), conv(32, 32, 3, 1, 1, false),
                                nn::BatchNorm2d(32), nn::ReLU(nn::ReLUOptions(true)),
                                conv(32, 64, 3, 1, 1, false)));
    bn1_ = register_module("bn1", nn::BatchNorm2d(64));
    std::int64_t inplanes = 64;
    layer1_ = register_module("layer1", res2net_layer(inplanes, 64, 3, 1));
    layer2_ = register_module("layer2", res2net_layer(inplanes, 128, 4, 2));
    layer3_ = register_module("layer3", res2net_layer(inplanes, 256, 6, 2));
    layer4_ = register_module("layer4", res2net_layer(inplanes, 512, 3, 2));
}

FeaturePyramid Res2NetBackbone::extract(const torch::Tensor& x) {
    torch::Tensor h = torch::relu(bn1_->forward(conv1_->forward(x)));
    h = F::max_pool2d(h, F::MaxPool2dFuncOptions(3).stride(2).padding(1));
    FeaturePyramid p;
    p.f1 = layer1_->forward(h);
    p.f2 = layer2_->forward(p.f1);
    p.f3 = layer3_->forward(p.f2);
    p.f4 = layer4_->forward(p.f3);
    return p;
}

// ---------------------------------------------------------------------------
// Encoder

BasicConvImpl::BasicConvImpl(std::int64_t in, std::int64_t out, std::array<std::int64_t, 2> kernel,
                             std::array<std::int64_t, 2> padding, std::int64_t dilation,
                             bool batch_norm) {
    conv_ = register_module(
        "conv", nn::Conv2d(nn::Conv2dOptions(in, out, {kernel[0], kernel[1]})
                               .padding({padding[0], padding[1]})
                               .dilation(dilation)
                               .bias(!batch_norm)));
    if (batch_norm) bn_ = register_module("bn", nn::BatchNorm2d(out));
}

torch::Tensor BasicConvImpl::forward(const torch::Tensor& x) {
    torch::Tensor y = conv_->forward(x);
    return bn_ ? bn_->forward(y) : y;
}

namespace {
using Pair = std::array<std::int64_t, 2>;
BasicConv make_conv(std::int64_t in, std::int64_t out, Pair kernel, Pair padding,
                    std::int64_t dilation, bool bn) {
    return BasicConv(in, out, kernel, padding, dilation, bn);
}
}  // namespace

ReceptiveFieldBlockImpl::ReceptiveFieldBlockImpl(std::int64_t in, std::int64_t out, bool bn) {
    auto dilated_branch = [&](std::int64_t k) {
        const std::int64_t p = k / 2;
        return nn::Sequential(make_conv(in, out, {1, 1}, {0, 0}, 1, bn),
                              make_conv(out, out, {1, k}, {0, p}, 1, bn),
                              make_conv(out, out, {k, 1}, {p, 0}, 1, bn),
                              make_conv(out, out, {3, 3}, {k, k}, k, bn));
    };
    branch0_ = register_module("branch0", nn::Sequential(make_conv(in, out, {1, 1}, {0, 0}, 1, bn)));
    branch1_ = register_module("branch1", dilated_branch(3));
    branch2_ = register_module("branch2", dilated_branch(5));
    branch3_ = register_module("branch3", dilated_branch(7));
    conv_cat_ = register_module("conv_cat", make_conv(4 * out, out, {3, 3}, {1, 1}, 1, bn));
    conv_res_ = register_module("conv_res", make_conv(in, out, {1, 1}, {0, 0}, 1, bn));
}

torch::Tensor ReceptiveFieldBlockImpl::forward(const torch::Tensor& x) {
    torch::Tensor cat = torch::cat({branch0_->forward(x), branch1_->forward(x),
                                    branch2_->forward(x), branch3_->forward(x)},
                                   1);
    return torch::relu(conv_cat_->forward(cat) + conv_res_->forward(x));
}

EncoderImpl::EncoderImpl(const PptNetConfig& cfg) : branch_channels_(cfg.branch_channels) {
    if (cfg.backbone == "res2net50")
        backbone_ = register_module("resnet", std::make_shared<Res2NetBackbone>());
    else
        backbone_ = register_module("resnet", std::make_shared<ToyBackbone>());

    const auto ch = backbone_->channels();
    const std::int64_t cb = cfg.branch_channels;
    const bool bn = cfg.batch_norm;
    rf2_ = register_module("rfb2_1", ReceptiveFieldBlock(ch[1], cb, bn));
    rf3_ = register_module("rfb3_1", ReceptiveFieldBlock(ch[2], cb, bn));
    rf4_ = register_module("rfb4_1", ReceptiveFieldBlock(ch[3], cb, bn));
    conv1_ = register_module("conv_f1", make_conv(ch[0], cb, {3, 3}, {1, 1}, 1, bn));
    conv2_ = register_module("conv_f2", make_conv(cb, cb, {3, 3}, {1, 1}, 1, bn));
    conv3_ = register_module("conv_f3", make_conv(cb, cb, {3, 3}, {1, 1}, 1, bn));
}

MultiScaleFeatures EncoderImpl::forward(const torch::Tensor& x) {
    if (x.dim() != 4 || x.size(1) != 3)
        throw std::invalid_argument("encoder: expected a [B, 3, H, W] input");

    const FeaturePyramid p = backbone_->extract(x);
    MultiScaleFeatures out;
    out.f1 = p.f1;
    out.f2 = p.f2;
    out.f3 = p.f3;
    out.f4 = p.f4;
    out.rf2 = rf2_->forward(p.f2);
    out.rf3 = rf3_->forward(p.f3);
    out.rf4 = rf4_->forward(p.f4);

    const std::vector<std::int64_t> size{p.f1.size(2), p.f1.size(3)};
    auto to_f1_size = [&](const torch::Tensor& t) {
        if (t.size(2) == size[0] && t.size(3) == size[1]) return t;
        return F::interpolate(
            t, F::InterpolateFuncOptions().size(size).mode(torch::kBilinear).align_corners(false));
    };
    // f1 skips the receptive-field block; f4 skips the conv unit.
    out.all = torch::cat({torch::relu(conv1_->forward(p.f1)),
                          to_f1_size(torch::relu(conv2_->forward(out.rf2))),
                          to_f1_size(torch::relu(conv3_->forward(out.rf3))),
                          to_f1_size(out.rf4)},
                         1);
    return out;
}

// ---------------------------------------------------------------------------
// Local features

torch::Tensor block_max(const torch::Tensor& map, int M) {
    if (map.dim() != 4) throw std::invalid_argument("block_max: expected [B, C, H, W]");
    if (M < 1) throw std::invalid_argument("block_max: M must be >= 1");
    // adaptive max pooling bins are exactly [floor(r*H/M), ceil((r+1)*H/M))
    return F::adaptive_max_pool2d(map, F::AdaptiveMaxPool2dFuncOptions({M, M}));
}

LocalFeatures local_features(const MultiScaleFeatures& feats, int M) {
    return {block_max(feats.f1, M), block_max(feats.rf2, M), block_max(feats.rf3, M)};
}

// ---------------------------------------------------------------------------
// Predictor

PredictorImpl::PredictorImpl(std::int64_t global_channels, std::array<std::int64_t, 3> local,
                             std::int64_t hidden)
    : global_channels_(global_channels), local_channels_(local), hidden_(hidden) {
    conv1_ = register_module("conv1", conv(global_channels + local[0], hidden, 3));
    conv2_ = register_module("conv2", conv(hidden + local[1], hidden, 3));
    conv3_ = register_module("conv3", conv(hidden + local[2], 1, 3));
}

namespace {

// [B, C, M, M] -> [B*M*M, C], row-major candidates.
torch::Tensor per_candidate(const torch::Tensor& grid) {
    return grid.permute({0, 2, 3, 1}).reshape({-1, grid.size(1)});
}

// A valid conv over a spatially constant input reduces to the tap-summed kernel.
torch::Tensor constant_input_response(const torch::Tensor& weight_slice, const torch::Tensor& v) {
    return v.matmul(weight_slice.sum({2, 3}).t()).unsqueeze(-1).unsqueeze(-1);
}

}  // namespace

torch::Tensor PredictorImpl::forward(const torch::Tensor& f_all, const LocalFeatures& local) {
    const std::int64_t M = local.from_f1.size(2);
    const std::int64_t B = f_all.size(0);
    if (f_all.size(1) != global_channels_)
        throw std::invalid_argument("predictor: aggregated feature channel mismatch");
    const int r = kWindowRadius;

    torch::Tensor grid = F::adaptive_avg_pool2d(f_all, F::AdaptiveAvgPool2dFuncOptions({M, M}));
    torch::Tensor padded = F::pad(grid, F::PadFuncOptions({r, r, r, r}));

    // Layer 1: the global part is shared by all windows, so convolve the padded grid
    // once and cut each candidate's 5x5 output window from it.
    const torch::Tensor w1 = conv1_->weight;
    torch::Tensor shared = F::conv2d(padded, w1.narrow(1, 0, global_channels_),
                                     F::Conv2dFuncOptions().bias(conv1_->bias));
    const std::int64_t win = 2 * r - 1;
    torch::Tensor windows = shared.unfold(2, win, 1).unfold(3, win, 1);  // [B, H, M, M, 5, 5]
    windows = windows.permute({0, 2, 3, 1, 4, 5}).reshape({B * M * M, hidden_, win, win});
    torch::Tensor h = torch::relu(
        windows + constant_input_response(w1.narrow(1, global_channels_, local_channels_[0]),
                                          per_candidate(local.from_f1)));

    const torch::Tensor w2 = conv2_->weight;
    h = F::conv2d(h, w2.narrow(1, 0, hidden_), F::Conv2dFuncOptions().bias(conv2_->bias));
    h = torch::relu(h + constant_input_response(w2.narrow(1, hidden_, local_channels_[1]),
                                                per_candidate(local.from_rf2)));

    const torch::Tensor w3 = conv3_->weight;
    h = F::conv2d(h, w3.narrow(1, 0, hidden_), F::Conv2dFuncOptions().bias(conv3_->bias));
    h = h + constant_input_response(w3.narrow(1, hidden_, local_channels_[2]),
                                    per_candidate(local.from_rf3));
    return h.reshape({B, M * M});
}

torch::Tensor PredictorImpl::forward_sequential(const torch::Tensor& f_all,
                                                const LocalFeatures& local) {
    const std::int64_t M = local.from_f1.size(2);
    const int r = kWindowRadius;
    torch::Tensor grid = F::adaptive_avg_pool2d(f_all, F::AdaptiveAvgPool2dFuncOptions({M, M}));
    torch::Tensor padded = F::pad(grid, F::PadFuncOptions({r, r, r, r}));

    auto with_local = [](const torch::Tensor& x, const torch::Tensor& grid_vec, std::int64_t row,
                         std::int64_t col) {
        torch::Tensor v = grid_vec.index({torch::indexing::Slice(), torch::indexing::Slice(), row, col});
        v = v.unsqueeze(-1).unsqueeze(-1).expand({-1, -1, x.size(2), x.size(3)});
        return torch::cat({x, v}, 1);
    };

    std::vector<torch::Tensor> logits;
    for (std::int64_t row = 0; row < M; ++row) {
        for (std::int64_t col = 0; col < M; ++col) {
            torch::Tensor window = padded.narrow(2, row, 2 * r + 1).narrow(3, col, 2 * r + 1);
            torch::Tensor h = torch::relu(conv1_->forward(with_local(window, local.from_f1, row, col)));
            h = torch::relu(conv2_->forward(with_local(h, local.from_rf2, row, col)));
            h = conv3_->forward(with_local(h, local.from_rf3, row, col));
            logits.push_back(h.reshape({-1, 1}));
        }
    }
    return torch::cat(logits, 1);
}

// ---------------------------------------------------------------------------
// Full network

PptNetImpl::PptNetImpl(const PptNetConfig& cfg) : cfg_(cfg) {
    validate(cfg);
    encoder_ = register_module("encoder", Encoder(cfg));
    const std::int64_t cb = cfg.branch_channels;
    predictor_ = register_module(
        "predictor", Predictor(encoder_->aggregate_channels(),
                               std::array<std::int64_t, 3>{feature_channels(cfg), cb, cb},
                               cfg.predictor_hidden));
}

torch::Tensor PptNetImpl::forward(const torch::Tensor& x) {
    const MultiScaleFeatures feats = encoder_->forward(x);
    return predictor_->forward(feats.all, local_features(feats, cfg_.M));
}

torch::Tensor PptNetImpl::probabilities(const torch::Tensor& x) { return torch::sigmoid(forward(x)); }

PptNet make_network(const PptNetConfig& cfg) {
    validate(cfg);
    torch::manual_seed(cfg.seed);
    return PptNet(cfg);
}

torch::Tensor to_input_tensor(const RgbImage& image) {
    if (image.empty()) throw std::invalid_argument("to_input_tensor: empty image");
    if (image.data.size() != static_cast<std::size_t>(3) * image.width * image.height)
        throw std::invalid_argument("to_input_tensor: expected 3 channels");
    torch::Tensor t = torch::from_blob(const_cast<float*>(image.data.data()),
                                       {1, 3, image.height, image.width}, torch::kFloat32)
                          .clone();
    const torch::Tensor mean = torch::tensor({0.485f, 0.456f, 0.406f}).view({1, 3, 1, 1});
    const torch::Tensor stdev = torch::tensor({0.229f, 0.224f, 0.225f}).view({1, 3, 1, 1});
    return (t - mean) / stdev;
}

torch::Tensor to_target_tensor(const TargetGrid& targets) {
    std::vector<float> v(targets.values.begin(), targets.values.end());
    return torch::tensor(v).view({1, static_cast<std::int64_t>(v.size())});
}

torch::Tensor mse_loss(const torch::Tensor& pred, const torch::Tensor& target) {
    if (pred.sizes() != target.sizes())
        throw std::invalid_argument("mse_loss: prediction and target shapes differ");
    return (pred - target).pow(2).mean();
}

ScoreGrid predict_scores(PptNet& net, const RgbImage& image) {
    const int size = net->config().input_size;
    if (image.width != size || image.height != size) {
        throw std::invalid_argument("predict_scores: image is " + std::to_string(image.width) +
                                    "x" + std::to_string(image.height) + ", network expects " +
                                    std::to_string(size) + "x" + std::to_string(size));
    }
    torch::NoGradGuard no_grad;
    if (net->is_training()) net->eval();
    const torch::Tensor probs =
        net->probabilities(to_input_tensor(image)).to(torch::kDouble).contiguous();
    ScoreGrid out;
    out.values.assign(probs.data_ptr<double>(), probs.data_ptr<double>() + probs.numel());
    // saturated sigmoids are pulled back into the open interval
    constexpr double lo = std::numeric_limits<float>::min();
    const double hi = std::nextafter(1.0, 0.0);
    for (double& p : out.values) p = std::clamp(p, lo, hi);
    return out;
}

// ---------------------------------------------------------------------------
// Training

TrainResult train(PptNet& net, const std::vector<TrainingSample>& data, const TrainConfig& cfg) {
    validate(cfg);
    if (data.empty()) throw TrainingError("train: empty dataset");
    const PptNetConfig& ncfg = net->config();

    std::vector<torch::Tensor> inputs, targets;
    inputs.reserve(data.size());
    targets.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& s = data[i];
        if (s.image.width != ncfg.input_size || s.image.height != ncfg.input_size)
            throw TrainingError("train: sample " + std::to_string(i) + " is not at the input size");
        if (s.mask.width() < ncfg.M || s.mask.height() < ncfg.M)
            throw TrainingError("train: sample " + std::to_string(i) + " mask is smaller than the grid");
        inputs.push_back(to_input_tensor(s.image));
        targets.push_back(to_target_tensor(pool_mask_targets(s.mask, ncfg.M)));
    }

    std::vector<torch::Tensor> params;
    const auto backbone = net->encoder()->backbone();
    for (auto& p : backbone->parameters()) p.set_requires_grad(!ncfg.freeze_backbone);
    for (auto& p : net->parameters())
        if (p.requires_grad()) params.push_back(p);

    torch::optim::Adam optimizer(params, torch::optim::AdamOptions(cfg.learning_rate));
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    net->train();
    TrainResult result;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr =
            cfg.learning_rate * std::pow(cfg.lr_decay_factor, epoch / cfg.lr_decay_every);
        for (auto& group : optimizer.param_groups())
            static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);

        std::shuffle(order.begin(), order.end(), rng);
        double epoch_sum = 0.0;
        int batches = 0;
        bool capped = false;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<torch::Tensor> xs, ys;
            for (std::size_t k = start; k < end; ++k) {
                xs.push_back(inputs[order[k]]);
                ys.push_back(targets[order[k]]);
            }
            optimizer.zero_grad();
            torch::Tensor loss = ppt::mse_loss(net->probabilities(torch::cat(xs)), torch::cat(ys));
            const double value = loss.item<double>();
            if (!std::isfinite(value)) {
                throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                    ", step " + std::to_string(result.steps) +
                                    " (learning rate " + std::to_string(lr) + ")");
            }
            loss.backward();
            optimizer.step();
            result.step_loss.push_back(value);
            ++result.steps;
            epoch_sum += value;
            ++batches;
            if (cfg.max_steps > 0 && result.steps >= cfg.max_steps) {
                capped = true;
                break;
            }
        }
        result.epoch_loss.push_back(epoch_sum / batches);
        if (cfg.on_epoch) cfg.on_epoch(epoch, result.epoch_loss.back());
        if (cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0) {
            std::filesystem::create_directories(cfg.checkpoint_dir);
            save_checkpoint(net, cfg.checkpoint_dir / ("epoch_" + std::to_string(epoch + 1) + ".pt"));
        }
        if (capped) break;
    }
    net->eval();
    return result;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {
constexpr const char* kManifestKey = "__manifest__";
}

void save_checkpoint(PptNet& net, const std::filesystem::path& path) {
    torch::serialize::OutputArchive archive;
    for (const auto& p : net->named_parameters()) archive.write(p.key(), p.value());
    for (const auto& b : net->named_buffers()) archive.write(b.key(), b.value(), /*is_buffer=*/true);
    const nlohmann::json manifest = net->config();
    archive.write(kManifestKey, c10::IValue(manifest.dump()));
    archive.save_to(path.string());
}

nlohmann::json read_manifest(const std::filesystem::path& path) {
    torch::serialize::InputArchive archive;
    archive.load_from(path.string());
    c10::IValue value;
    if (!archive.try_read(kManifestKey, value) || !value.isString())
        throw std::runtime_error("checkpoint " + path.string() + " has no manifest");
    return nlohmann::json::parse(value.toStringRef());
}

PptNet load_checkpoint(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        throw std::runtime_error("checkpoint not found: " + path.string());
    const PptNetConfig cfg = read_manifest(path).get<PptNetConfig>();
    PptNet net = make_network(cfg);
    torch::serialize::InputArchive archive;
    archive.load_from(path.string());
    torch::NoGradGuard no_grad;
    for (auto& p : net->named_parameters()) archive.read(p.key(), p.value());
    for (auto& b : net->named_buffers()) archive.read(b.key(), b.value(), /*is_buffer=*/true);
    net->eval();
    return net;
}

std::size_t load_pretrained(torch::nn::Module& module, const std::filesystem::path& path,
                            const std::map<std::string, std::string>& prefix_map) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open weights file " + path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const c10::IValue root = torch::pickle_load(bytes);
    if (!root.isGenericDict()) throw std::runtime_error(path.string() + " is not a state dict");

    std::map<std::string, torch::Tensor> targets;
    for (const auto& p : module.named_parameters()) targets[p.key()] = p.value();
    for (const auto& b : module.named_buffers()) targets[b.key()] = b.value();

    torch::NoGradGuard no_grad;
    std::size_t copied = 0;
    for (const auto& entry : root.toGenericDict()) {
        if (!entry.key().isString() || !entry.value().isTensor()) continue;
        std::string key = entry.key().toStringRef();
        for (const auto& [from, to] : prefix_map) {
            if (key.rfind(from, 0) == 0) {
                key = to + key.substr(from.size());
                break;
            }
        }
        const auto it = targets.find(key);
        if (it == targets.end()) continue;
        const torch::Tensor src = entry.value().toTensor();
        if (src.sizes() != it->second.sizes()) continue;
        it->second.copy_(src);
        ++copied;
    }
    return copied;
}

}  // namespace kpsam::ppt
