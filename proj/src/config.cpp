#include "kpsam/config.hpp"

#include <fstream>
#include <stdexcept>

namespace kpsam {

void RunConfig::sync() {
    net.M = M;
    net.seed = seed;
    train.seed = seed;
}

void validate(const RunConfig& cfg) {
    if (cfg.M < 1) throw std::invalid_argument("M must be >= 1");
    if (cfg.K < 1) throw std::invalid_argument("K must be >= 1");
    if (cfg.iterations != 1 && cfg.iterations != 2)
        throw std::invalid_argument("iterations must be 1 or 2");
    if (cfg.resize < cfg.M) throw std::invalid_argument("resize must be >= M");
    const auto& t = cfg.thresholds;
    if (!(t.low <= t.mid && t.mid <= t.high))
        throw std::invalid_argument("thresholds must satisfy low <= mid <= high");
    if (cfg.backend != "sam" && cfg.backend != "oracle" && cfg.backend != "constant")
        throw std::invalid_argument("backend must be sam, oracle or constant");
    if (cfg.workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (cfg.net.M != cfg.M) throw std::invalid_argument("network M disagrees with the run's M");
    validate(cfg.net);
    validate(cfg.train);
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("config " + path.string() + ": " + e.what());
    }
    return j.get<RunConfig>();
}

void to_json(nlohmann::json& j, const RunConfig& cfg) {
    j = nlohmann::json{
        {"M", cfg.M},
        {"K", cfg.K},
        {"iterations", cfg.iterations},
        {"thresholds", {{"high", cfg.thresholds.high}, {"mid", cfg.thresholds.mid}, {"low", cfg.thresholds.low}}},
        {"resize", cfg.resize},
        {"backend", cfg.backend},
        {"constant_fill", cfg.constant_fill},
        {"sam_url", cfg.sam_url},
        {"sam_work_dir", cfg.sam_work_dir.string()},
        {"seed", cfg.seed},
        {"out", cfg.out.string()},
        {"dataset", cfg.dataset},
        {"root", cfg.root.string()},
        {"image_dir", cfg.layout.image_dir},
        {"mask_dir", cfg.layout.mask_dir},
        {"file_list", cfg.layout.file_list ? cfg.layout.file_list->string() : std::string()},
        {"checkpoint", cfg.checkpoint.string()},
        {"pretrained", cfg.pretrained.string()},
        {"net", cfg.net},
        {"train", cfg.train},
        {"workers", cfg.workers},
        {"eval_original_resolution", cfg.eval_original_resolution},
    };
}

void from_json(const nlohmann::json& j, RunConfig& cfg) {
    cfg.M = j.value("M", cfg.M);
    cfg.K = j.value("K", cfg.K);
    cfg.iterations = j.value("iterations", cfg.iterations);
    if (j.contains("thresholds")) {
        const auto& t = j.at("thresholds");
        cfg.thresholds.high = t.value("high", cfg.thresholds.high);
        cfg.thresholds.mid = t.value("mid", cfg.thresholds.mid);
        cfg.thresholds.low = t.value("low", cfg.thresholds.low);
    }
    cfg.resize = j.value("resize", cfg.resize);
    cfg.backend = j.value("backend", cfg.backend);
    cfg.constant_fill = j.value("constant_fill", cfg.constant_fill);
    cfg.sam_url = j.value("sam_url", cfg.sam_url);
    cfg.sam_work_dir = j.value("sam_work_dir", cfg.sam_work_dir.string());
    cfg.seed = j.value("seed", cfg.seed);
    cfg.out = j.value("out", cfg.out.string());
    cfg.dataset = j.value("dataset", cfg.dataset);
    cfg.root = j.value("root", cfg.root.string());
    cfg.layout.image_dir = j.value("image_dir", cfg.layout.image_dir);
    cfg.layout.mask_dir = j.value("mask_dir", cfg.layout.mask_dir);
    const std::string list = j.value("file_list", std::string());
    if (!list.empty()) cfg.layout.file_list = list;
    cfg.checkpoint = j.value("checkpoint", cfg.checkpoint.string());
    cfg.pretrained = j.value("pretrained", cfg.pretrained.string());
    cfg.sync();
    if (j.contains("net")) {
        j.at("net").get_to(cfg.net);
        cfg.net.M = cfg.M;  // the run-level value wins
    }
    if (j.contains("train")) j.at("train").get_to(cfg.train);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.eval_original_resolution = j.value("eval_original_resolution", cfg.eval_original_resolution);
}

}  // namespace kpsam
