#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kpsam/mask.hpp"

namespace kpsam {

/// Architecture of the point-probability network.
struct PptNetConfig {
    int M = 16;                     // grid side; N = M * M candidates
    int branch_channels = 32;       // per-branch width before concatenation (4 branches)
    int predictor_hidden = 32;      // width of the two hidden predictor layers
    int input_size = 512;           // square network input side
    std::string backbone = "toy";   // "toy" or "res2net50"
    bool batch_norm = true;         // BatchNorm inside the encoder's conv units
    bool freeze_backbone = false;   // exclude backbone parameters from training
    std::uint64_t seed = 0;         // parameter initialisation seed
};

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 32;
    int epochs = 300;
    int lr_decay_every = 100;       // epochs between step decays
    double lr_decay_factor = 0.1;
    std::uint64_t seed = 0;         // batch shuffling
    int max_steps = 0;              // stop after this many optimizer steps (0 = no cap)
    int checkpoint_every = 0;       // epochs between checkpoints (0 = never)
    std::filesystem::path checkpoint_dir;
    std::function<void(int epoch, double mean_loss)> on_epoch;  // progress hook, optional
};

struct TrainingSample {
    RgbImage image;  // at the network input size
    Mask mask;       // any size; targets are its per-cell averages
};

struct TrainResult {
    std::vector<double> epoch_loss;  // mean batch loss per epoch
    std::vector<double> step_loss;   // loss of every optimizer step, before the update
    int steps = 0;
};

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void validate(const PptNetConfig& cfg);
void validate(const TrainConfig& cfg);

void to_json(nlohmann::json& j, const PptNetConfig& cfg);
void from_json(const nlohmann::json& j, PptNetConfig& cfg);
void to_json(nlohmann::json& j, const TrainConfig& cfg);
void from_json(const nlohmann::json& j, TrainConfig& cfg);

}  // namespace kpsam
