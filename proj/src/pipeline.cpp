#include "kpsam/pipeline.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include "kpsam/image_io.hpp"

namespace fs = std::filesystem;

namespace kpsam {

PreparedImage prepare_image(const DatasetEntry& entry, int resize) {
    PreparedImage p;
    p.id = entry.id;
    p.original = load_rgb(entry.image);
    p.working = resize_rgb(p.original, resize, resize);
    if (!entry.mask.empty()) {
        p.gt = load_ground_truth(entry.mask);
        if (p.gt.width() != p.original.width || p.gt.height() != p.original.height)
            throw DatasetError("size mismatch between " + entry.image.string() + " and " +
                               entry.mask.string());
        p.gt_working = p.gt.resized_nearest(resize, resize);
    }
    return p;
}

std::vector<TrainingSample> load_training_set(const DatasetIndex& index, int input_size,
                                              int mask_size) {
    std::vector<TrainingSample> out;
    out.reserve(index.size());
    for (const auto& e : index.entries) {
        PreparedImage p = prepare_image(e, mask_size);
        out.push_back({resize_rgb(p.working, input_size, input_size), std::move(p.gt_working)});
    }
    return out;
}

ScoreGrid score_image(const PptScorer& scorer, const RgbImage& image) {
    const int n = scorer.config().input_size;
    if (image.width == n && image.height == n) return scorer.predict(image);
    return scorer.predict(resize_rgb(image, n, n));
}

PromptSelection prompt_image(const PptScorer& scorer, const RgbImage& working, const RunConfig& cfg) {
    const ScoreGrid scores = score_image(scorer, working);
    const CandidateGrid grid = generate_candidates(working.width, working.height, cfg.M);
    return select_prompts(scores, grid, cfg.K, cfg.thresholds);
}

BackendFactory make_backend_factory(const RunConfig& cfg) {
    if (cfg.backend == "oracle") {
        return [](const PreparedImage& img) -> std::shared_ptr<SegmentationBackend> {
            if (img.gt_working.empty())
                throw std::invalid_argument("oracle backend needs a ground-truth mask for " + img.id);
            return std::make_shared<OracleBackend>(img.gt_working);
        };
    }
    std::shared_ptr<SegmentationBackend> shared;
    if (cfg.backend == "constant") {
        shared = std::make_shared<ConstantBackend>(cfg.constant_fill);
    } else if (cfg.backend == "sam") {
        SamServiceConfig sc = parse_sam_url(cfg.sam_url);
        sc.work_dir = cfg.sam_work_dir.empty() ? cfg.out / "sam_io" : cfg.sam_work_dir;
        shared = std::make_shared<SamServiceBackend>(sc);
    } else {
        throw std::invalid_argument("unknown backend '" + cfg.backend + "'");
    }
    return [shared](const PreparedImage&) { return shared; };
}

namespace {

ImageOutcome process_one(const DatasetEntry& entry, const RunConfig& cfg, const PptScorer& scorer,
                         const BackendFactory& backends, std::mutex& backend_mutex) {
    ImageOutcome o;
    o.id = entry.id;
    PreparedImage img = prepare_image(entry, cfg.resize);
    o.selection = prompt_image(scorer, img.working, cfg);

    Mask mask;
    try {
        auto backend = backends(img);
        const ImageRef ref{img.working.width, img.working.height, &img.working, {}};
        if (backend->supports_concurrent_requests()) {
            mask = two_pass_segment(ref, o.selection, *backend, cfg.iterations);
        } else {
            std::lock_guard lock(backend_mutex);
            mask = two_pass_segment(ref, o.selection, *backend, cfg.iterations);
        }
    } catch (const std::exception& e) {
        o.ok = false;
        o.error = e.what();
        mask = Mask(img.working.width, img.working.height, 0.0f);
    }

    if (cfg.eval_original_resolution) {
        o.prediction = mask.resized_nearest(img.original.width, img.original.height);
        o.metrics = evaluate(o.prediction, img.gt, cfg.metrics);
    } else {
        o.prediction = std::move(mask);
        o.metrics = evaluate(o.prediction, img.gt_working, cfg.metrics);
    }
    return o;
}

template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    const int w = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (w == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        for (int t = 0; t < w; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                        next = n;
                    }
                }
            });
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

void write_outputs(const E2eResult& result, const fs::path& out) {
    fs::create_directories(out / "masks");
    std::ofstream prompts(out / "prompts.jsonl", std::ios::binary);
    if (!prompts) throw std::runtime_error("cannot write " + (out / "prompts.jsonl").string());
    for (const auto& o : result.images) {
        prompts << selection_to_json(o.id, o.selection).dump() << '\n';
        save_mask_png(o.prediction, out / "masks" / (o.id + ".png"));
    }
    std::ofstream report(out / "report.json", std::ios::binary);
    if (!report) throw std::runtime_error("cannot write " + (out / "report.json").string());
    report << report_json(result).dump(2) << '\n';
}

E2eResult summarize(std::vector<ImageOutcome> outcomes) {
    E2eResult r;
    MetricsAccumulator acc;
    for (const auto& o : outcomes) {
        acc.add(o.metrics);
        if (!o.ok) ++r.failures;
    }
    r.report = acc.mean();
    r.images = std::move(outcomes);
    return r;
}

}  // namespace

E2eResult run_e2e(const DatasetIndex& index, const RunConfig& cfg, const PptScorer& scorer,
                  const BackendFactory& backends, const E2eOptions& options) {
    validate(cfg);
    if (scorer.config().M != cfg.M)
        throw std::invalid_argument("network was built for M=" + std::to_string(scorer.config().M) +
                                    " but the run asks for M=" + std::to_string(cfg.M));

    std::vector<ImageOutcome> outcomes(index.size());
    std::mutex backend_mutex;
    parallel_for(index.size(), cfg.workers, [&](std::size_t i) {
        outcomes[i] = process_one(index.entries[i], cfg, scorer, backends, backend_mutex);
    });
    E2eResult result = summarize(std::move(outcomes));
    if (options.write_outputs) write_outputs(result, cfg.out);
    return result;
}

E2eResult evaluate_directory(const DatasetIndex& index, const fs::path& pred_dir,
                             const MetricsConfig& metrics) {
    std::vector<ImageOutcome> outcomes;
    outcomes.reserve(index.size());
    for (const auto& e : index.entries) {
        ImageOutcome o;
        o.id = e.id;
        const Mask gt = load_ground_truth(e.mask);
        const fs::path p = pred_dir / (e.id + ".png");
        try {
            o.prediction = load_prediction(p);
            if (!o.prediction.same_shape(gt))
                o.prediction = o.prediction.resized_nearest(gt.width(), gt.height());
        } catch (const std::exception& ex) {
            o.ok = false;
            o.error = ex.what();
            o.prediction = Mask(gt.width(), gt.height(), 0.0f);
        }
        o.metrics = evaluate(o.prediction, gt, metrics);
        outcomes.push_back(std::move(o));
    }
    return summarize(std::move(outcomes));
}

nlohmann::json report_json(const E2eResult& result) {
    nlohmann::json j;
    j["metrics"] = result.report;
    j["failures"] = result.failures;
    nlohmann::json failed = nlohmann::json::array();
    nlohmann::json per_image = nlohmann::json::array();
    for (const auto& o : result.images) {
        if (!o.ok) failed.push_back({{"id", o.id}, {"error", o.error}});
        nlohmann::json m = o.metrics;
        m["id"] = o.id;
        per_image.push_back(std::move(m));
    }
    j["failed"] = std::move(failed);
    j["per_image"] = std::move(per_image);
    return j;
}

}  // namespace kpsam
