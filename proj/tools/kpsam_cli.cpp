#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "kpsam/config.hpp"
#include "kpsam/dataset.hpp"
#include "kpsam/image_io.hpp"
#include "kpsam/pipeline.hpp"
#include "kpsam/scorer.hpp"
#include "kpsam/synthetic.hpp"
#include "kpsam/visualize.hpp"

namespace fs = std::filesystem;
using namespace kpsam;

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> dataset, root, backend, out, checkpoint, sam_url, image_dir,
        mask_dir, file_list, pretrained, backbone;
    std::optional<int> M, K, input_size, iterations, resize, workers, epochs, batch_size, max_steps;
    std::optional<std::uint64_t> seed;
    std::optional<double> lr;
    bool eval_working = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "JSON run configuration");
    cmd->add_option("--dataset", o.dataset, "dataset name (COD10K, NC4K, CAMO, synthetic, ...)");
    cmd->add_option("--root", o.root, "dataset root holding the image and mask directories");
    cmd->add_option("--backend", o.backend, "segmentation backend")
        ->check(CLI::IsMember({"sam", "oracle", "constant"}));
    cmd->add_option("--M", o.M, "grid side");
    cmd->add_option("--K", o.K, "number of positive points");
    cmd->add_option("--iterations", o.iterations, "segmentation passes (1 or 2)");
    cmd->add_option("--seed", o.seed, "seed for initialisation and shuffling");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--checkpoint", o.checkpoint, "network checkpoint");
    cmd->add_option("--resize", o.resize, "working resolution");
    cmd->add_option("--workers", o.workers, "parallel images");
    cmd->add_option("--sam-url", o.sam_url, "segmentation service url");
    cmd->add_option("--image-dir", o.image_dir, "image directory name under the root");
    cmd->add_option("--mask-dir", o.mask_dir, "mask directory name under the root");
    cmd->add_option("--file-list", o.file_list, "restrict the dataset to the listed ids");
}

RunConfig resolve(const Overrides& o) {
    RunConfig cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
    if (o.config.empty()) cfg.sync();
    if (o.dataset) cfg.dataset = *o.dataset;
    if (o.root) cfg.root = *o.root;
    if (o.backend) cfg.backend = *o.backend;
    if (o.out) cfg.out = *o.out;
    if (o.checkpoint) cfg.checkpoint = *o.checkpoint;
    if (o.sam_url) cfg.sam_url = *o.sam_url;
    if (o.image_dir) cfg.layout.image_dir = *o.image_dir;
    if (o.mask_dir) cfg.layout.mask_dir = *o.mask_dir;
    if (o.file_list) cfg.layout.file_list = *o.file_list;
    if (o.pretrained) cfg.pretrained = *o.pretrained;
    if (o.backbone) cfg.net.backbone = *o.backbone;
    if (o.M) cfg.M = *o.M;
    if (o.K) cfg.K = *o.K;
    if (o.iterations) cfg.iterations = *o.iterations;
    if (o.resize) cfg.resize = *o.resize;
    if (o.input_size) cfg.net.input_size = *o.input_size;
    if (o.workers) cfg.workers = *o.workers;
    if (o.epochs) cfg.train.epochs = *o.epochs;
    if (o.batch_size) cfg.train.batch_size = *o.batch_size;
    if (o.max_steps) cfg.train.max_steps = *o.max_steps;
    if (o.lr) cfg.train.learning_rate = *o.lr;
    if (o.seed) {
        cfg.seed = *o.seed;
        cfg.net.seed = cfg.train.seed = *o.seed;
    }
    if (o.eval_working) cfg.eval_original_resolution = false;
    cfg.net.M = cfg.M;
    validate(cfg);
    return cfg;
}

DatasetIndex load_index(const RunConfig& cfg) {
    if (cfg.root.empty()) throw std::invalid_argument("no dataset root given (--root)");
    DatasetIndex index = ingest(cfg.root, cfg.dataset, cfg.layout);
    if (auto n = expected_size(cfg.dataset); n && *n != index.size() && !cfg.layout.file_list)
        std::cerr << "note: " << cfg.dataset << " usually has " << *n << " test images, found "
                  << index.size() << "\n";
    return index;
}

/// A single --image becomes a one-entry index without ground truth.
DatasetIndex index_or_image(const RunConfig& cfg, const std::optional<std::string>& image) {
    if (!image) return load_index(cfg);
    DatasetIndex idx;
    idx.name = "single";
    idx.entries.push_back({fs::path(*image).stem().string(), *image, {}});
    return idx;
}

PptScorer load_scorer(const RunConfig& cfg) {
    if (cfg.checkpoint.empty()) throw std::invalid_argument("no checkpoint given (--checkpoint)");
    PptScorer scorer = PptScorer::load(cfg.checkpoint);
    if (scorer.config().M != cfg.M)
        throw std::invalid_argument("checkpoint was trained with M=" + std::to_string(scorer.config().M) +
                                    "; pass a matching --M");
    return scorer;
}

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
}

void print_report(const MetricsReport& r, int failures) {
    std::cout << "Sm " << r.s_measure << "  Fw " << r.f_weighted << "  Fm " << r.f_mean << "  Em "
              << r.e_mean << "  Ex " << r.e_max << "  MAE " << r.mae << "  (n=" << r.n_images
              << ", failures=" << failures << ")\n";
}

int cmd_train(const RunConfig& cfg) {
    const DatasetIndex index = load_index(cfg);
    std::cout << "loading " << index.size() << " training images at " << cfg.net.input_size << "px\n";
    const auto data = load_training_set(index, cfg.net.input_size, cfg.resize);
    PptScorer scorer = PptScorer::create(cfg.net);
    if (!cfg.pretrained.empty())
        std::cout << "loaded " << scorer.load_encoder_weights(cfg.pretrained)
                  << " encoder tensors from " << cfg.pretrained << "\n";
    TrainConfig tc = cfg.train;
    if (tc.checkpoint_every > 0 && tc.checkpoint_dir.empty()) tc.checkpoint_dir = cfg.out / "checkpoints";
    tc.on_epoch = [](int epoch, double loss) {
        std::cout << "epoch " << epoch + 1 << "  loss " << loss << "\n";
    };
    const TrainResult r = scorer.train(data, tc);
    const fs::path ckpt = cfg.checkpoint.empty() ? cfg.out / "ppt_net.pt" : cfg.checkpoint;
    if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
    scorer.save(ckpt);
    open_out(cfg.out / "train_log.json")
        << nlohmann::json{{"epoch_loss", r.epoch_loss}, {"step_loss", r.step_loss}, {"steps", r.steps}}.dump(2)
        << "\n";
    std::cout << "saved " << ckpt << " after " << r.steps << " steps\n";
    return 0;
}

int cmd_score(const RunConfig& cfg, const std::optional<std::string>& image) {
    const DatasetIndex index = index_or_image(cfg, image);
    const PptScorer scorer = load_scorer(cfg);
    auto out = open_out(cfg.out / "scores.jsonl");
    for (const auto& e : index.entries) {
        nlohmann::json j = score_image(scorer, resize_rgb(load_rgb(e.image), cfg.resize, cfg.resize));
        j["image_id"] = e.id;
        j["M"] = cfg.M;
        out << j.dump() << "\n";
    }
    std::cout << "wrote " << (cfg.out / "scores.jsonl") << "\n";
    return 0;
}

int cmd_prompt(const RunConfig& cfg, const std::optional<std::string>& image) {
    const DatasetIndex index = index_or_image(cfg, image);
    const PptScorer scorer = load_scorer(cfg);
    auto out = open_out(cfg.out / "prompts.jsonl");
    for (const auto& e : index.entries) {
        const RgbImage working = resize_rgb(load_rgb(e.image), cfg.resize, cfg.resize);
        out << selection_to_json(e.id, prompt_image(scorer, working, cfg)).dump() << "\n";
    }
    std::cout << "wrote " << (cfg.out / "prompts.jsonl") << "\n";
    return 0;
}

int cmd_segment(const RunConfig& cfg, const std::optional<std::string>& image) {
    const DatasetIndex index = index_or_image(cfg, image);
    const PptScorer scorer = load_scorer(cfg);
    const BackendFactory backends = make_backend_factory(cfg);
    auto prompts = open_out(cfg.out / "prompts.jsonl");
    int failures = 0;
    for (const auto& e : index.entries) {
        const PreparedImage img = prepare_image(e, cfg.resize);
        const PromptSelection sel = prompt_image(scorer, img.working, cfg);
        prompts << selection_to_json(e.id, sel).dump() << "\n";
        try {
            auto backend = backends(img);
            const ImageRef ref{img.working.width, img.working.height, &img.working, {}};
            const Mask mask = two_pass_segment(ref, sel, *backend, cfg.iterations);
            save_mask_png(mask.resized_nearest(img.original.width, img.original.height),
                          cfg.out / "masks" / (e.id + ".png"));
        } catch (const BackendError& ex) {
            ++failures;
            std::cerr << e.id << ": " << ex.what() << "\n";
        }
    }
    std::cout << "segmented " << index.size() - failures << "/" << index.size() << " images into "
              << (cfg.out / "masks") << "\n";
    return failures == 0 ? 0 : 2;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& pred_dir) {
    const DatasetIndex index = load_index(cfg);
    const E2eResult r = evaluate_directory(index, pred_dir, cfg.metrics);
    open_out(cfg.out / "report.json") << report_json(r).dump(2) << "\n";
    print_report(r.report, r.failures);
    return 0;
}

int cmd_visualize(const RunConfig& cfg, const std::optional<std::string>& image) {
    const DatasetIndex index = index_or_image(cfg, image);
    const PptScorer scorer = load_scorer(cfg);
    fs::create_directories(cfg.out / "overlays");
    for (const auto& e : index.entries) {
        const RgbImage original = load_rgb(e.image);
        const RgbImage working = resize_rgb(original, cfg.resize, cfg.resize);
        visualize(original, prompt_image(scorer, working, cfg), cfg.out / "overlays" / (e.id + ".png"));
    }
    std::cout << "wrote " << index.size() << " overlays to " << (cfg.out / "overlays") << "\n";
    return 0;
}

int cmd_e2e(const RunConfig& cfg) {
    const DatasetIndex index = load_index(cfg);
    const PptScorer scorer = load_scorer(cfg);
    const E2eResult r = run_e2e(index, cfg, scorer, make_backend_factory(cfg));
    print_report(r.report, r.failures);
    std::cout << "outputs in " << cfg.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Point-prompt generation and evaluation for camouflaged object segmentation"};
    app.require_subcommand(1);
    Overrides o;
    std::optional<std::string> image;
    std::string pred_dir;
    int synth_count = 8, synth_size = 512;

    auto* train = app.add_subcommand("train", "train the point-probability network");
    add_common(train, o);
    train->add_option("--epochs", o.epochs);
    train->add_option("--batch-size", o.batch_size);
    train->add_option("--max-steps", o.max_steps);
    train->add_option("--lr", o.lr);
    train->add_option("--pretrained", o.pretrained, "encoder weights (pickled state dict)");
    train->add_option("--input-size", o.input_size, "network input side");
    train->add_option("--backbone", o.backbone)->check(CLI::IsMember({"toy", "res2net50"}));

    auto* score = app.add_subcommand("score", "write per-candidate probabilities");
    auto* prompt = app.add_subcommand("prompt", "write selected point prompts");
    auto* segment = app.add_subcommand("segment", "prompt the backend and write masks");
    auto* visual = app.add_subcommand("visualize", "draw prompt stars over the images");
    for (auto* c : {score, prompt, segment, visual}) {
        add_common(c, o);
        c->add_option("--image", image, "single image instead of a dataset");
    }

    auto* evaluate_cmd = app.add_subcommand("evaluate", "score prediction PNGs against ground truth");
    add_common(evaluate_cmd, o);
    evaluate_cmd->add_option("--pred", pred_dir, "directory of <id>.png predictions")->required();

    auto* e2e = app.add_subcommand("e2e", "score, prompt, segment and evaluate a dataset");
    add_common(e2e, o);
    e2e->add_flag("--eval-working-resolution", o.eval_working,
                  "evaluate at the working resolution instead of the original");

    auto* synth = app.add_subcommand("synth", "write the synthetic fixture dataset");
    synth->add_option("--out", o.out, "output root")->required();
    synth->add_option("--count", synth_count);
    synth->add_option("--size", synth_size);
    synth->add_option("--seed", o.seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            write_synthetic_dataset(*o.out, make_synthetic_set(synth_count, synth_size, o.seed.value_or(0)));
            std::cout << "wrote " << synth_count << " images to " << *o.out << "\n";
            return 0;
        }
        const RunConfig cfg = resolve(o);
        if (train->parsed()) return cmd_train(cfg);
        if (score->parsed()) return cmd_score(cfg, image);
        if (prompt->parsed()) return cmd_prompt(cfg, image);
        if (segment->parsed()) return cmd_segment(cfg, image);
        if (evaluate_cmd->parsed()) return cmd_evaluate(cfg, pred_dir);
        if (visual->parsed()) return cmd_visualize(cfg, image);
        if (e2e->parsed()) return cmd_e2e(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
