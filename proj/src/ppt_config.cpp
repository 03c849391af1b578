#include "kpsam/ppt_config.hpp"

#include <stdexcept>

namespace kpsam {

void validate(const PptNetConfig& cfg) {
    if (cfg.M < 1) throw std::invalid_argument("PptNetConfig: M must be >= 1");
    if (cfg.branch_channels < 1) throw std::invalid_argument("PptNetConfig: branch_channels must be >= 1");
    if (cfg.predictor_hidden < 1) throw std::invalid_argument("PptNetConfig: predictor_hidden must be >= 1");
    if (cfg.input_size < cfg.M) throw std::invalid_argument("PptNetConfig: input_size must be >= M");
    if (cfg.backbone != "toy" && cfg.backbone != "res2net50")
        throw std::invalid_argument("PptNetConfig: unknown backbone '" + cfg.backbone + "'");
}

void validate(const TrainConfig& cfg) {
    if (!(cfg.learning_rate >= 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be >= 0");
    if (cfg.batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (cfg.epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (cfg.lr_decay_every < 1) throw std::invalid_argument("TrainConfig: lr_decay_every must be >= 1");
    if (cfg.max_steps < 0) throw std::invalid_argument("TrainConfig: max_steps must be >= 0");
}

void to_json(nlohmann::json& j, const PptNetConfig& cfg) {
    j = nlohmann::json{{"M", cfg.M},
                       {"C_b", cfg.branch_channels},
                       {"hidden", cfg.predictor_hidden},
                       {"input_size", cfg.input_size},
                       {"backbone", cfg.backbone},
                       {"batch_norm", cfg.batch_norm},
                       {"freeze_backbone", cfg.freeze_backbone},
                       {"seed", cfg.seed}};
}

void from_json(const nlohmann::json& j, PptNetConfig& cfg) {
    cfg.M = j.value("M", cfg.M);
    cfg.branch_channels = j.value("C_b", cfg.branch_channels);
    cfg.predictor_hidden = j.value("hidden", cfg.predictor_hidden);
    cfg.input_size = j.value("input_size", cfg.input_size);
    cfg.backbone = j.value("backbone", cfg.backbone);
    cfg.batch_norm = j.value("batch_norm", cfg.batch_norm);
    cfg.freeze_backbone = j.value("freeze_backbone", cfg.freeze_backbone);
    cfg.seed = j.value("seed", cfg.seed);
}

void to_json(nlohmann::json& j, const TrainConfig& cfg) {
    j = nlohmann::json{{"learning_rate", cfg.learning_rate},
                       {"batch_size", cfg.batch_size},
                       {"epochs", cfg.epochs},
                       {"lr_decay_every", cfg.lr_decay_every},
                       {"lr_decay_factor", cfg.lr_decay_factor},
                       {"seed", cfg.seed},
                       {"max_steps", cfg.max_steps},
                       {"checkpoint_every", cfg.checkpoint_every},
                       {"checkpoint_dir", cfg.checkpoint_dir.string()}};
}

void from_json(const nlohmann::json& j, TrainConfig& cfg) {
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.lr_decay_every = j.value("lr_decay_every", cfg.lr_decay_every);
    cfg.lr_decay_factor = j.value("lr_decay_factor", cfg.lr_decay_factor);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.max_steps = j.value("max_steps", cfg.max_steps);
    cfg.checkpoint_every = j.value("checkpoint_every", cfg.checkpoint_every);
    cfg.checkpoint_dir = j.value("checkpoint_dir", cfg.checkpoint_dir.string());
}

}  // namespace kpsam
