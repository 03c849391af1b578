#include "kpsam/scorer.hpp"

#include <stdexcept>

#include "kpsam/ppt_net.hpp"

namespace kpsam {

double mse_loss(const ScoreGrid& pred, const TargetGrid& target) {
    if (pred.values.size() != target.values.size()) {
        throw std::invalid_argument("mse_loss: " + std::to_string(pred.values.size()) +
                                    " predictions vs " + std::to_string(target.values.size()) +
                                    " targets");
    }
    if (pred.values.empty()) throw std::invalid_argument("mse_loss: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.values.size(); ++i) {
        const double d = pred.values[i] - target.values[i];
        sum += d * d;
    }
    return sum / static_cast<double>(pred.values.size());
}

struct PptScorer::Impl {
    ppt::PptNet net{nullptr};
};

namespace {
[[noreturn]] void uninitialized() {
    throw std::logic_error("PptScorer: network weights are not initialized");
}
}  // namespace

PptScorer PptScorer::create(const PptNetConfig& cfg) {
    PptScorer s;
    s.impl_ = std::make_shared<Impl>();
    s.impl_->net = ppt::make_network(cfg);
    s.impl_->net->eval();
    return s;
}

PptScorer PptScorer::load(const std::filesystem::path& checkpoint) {
    PptScorer s;
    s.impl_ = std::make_shared<Impl>();
    s.impl_->net = ppt::load_checkpoint(checkpoint);
    return s;
}

const PptNetConfig& PptScorer::config() const {
    if (!impl_) uninitialized();
    return impl_->net->config();
}

ScoreGrid PptScorer::predict(const RgbImage& image) const {
    if (!impl_) uninitialized();
    return ppt::predict_scores(impl_->net, image);
}

TrainResult PptScorer::train(const std::vector<TrainingSample>& data, const TrainConfig& cfg) {
    if (!impl_) uninitialized();
    return ppt::train(impl_->net, data, cfg);
}

void PptScorer::save(const std::filesystem::path& checkpoint) const {
    if (!impl_) uninitialized();
    ppt::save_checkpoint(impl_->net, checkpoint);
}

std::size_t PptScorer::load_encoder_weights(const std::filesystem::path& state_dict) {
    if (!impl_) uninitialized();
    // keys as exported from the reference camouflage network: resnet.*, rfb2_1.*, ...
    auto encoder = impl_->net->encoder();
    const std::size_t n = ppt::load_pretrained(*encoder, state_dict, {{"module.", ""}});
    impl_->net->eval();
    return n;
}

}  // namespace kpsam
