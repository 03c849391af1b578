#include "kpsam/backend.hpp"

#include <cstring>

namespace kpsam {

void validate_request(const SegmentationRequest& request) {
    const ImageRef& img = request.image;
    if (img.width <= 0 || img.height <= 0)
        throw std::invalid_argument("segment: request image has no size");
    if (request.points.empty() && !request.mask_prompt)
        throw std::invalid_argument("segment: request needs a point prompt or a mask prompt");
    for (const auto& p : request.points) {
        if (p.x < 0 || p.y < 0 || p.x >= img.width || p.y >= img.height) {
            throw std::invalid_argument("segment: prompt (" + std::to_string(p.x) + ", " +
                                        std::to_string(p.y) + ") outside " +
                                        std::to_string(img.width) + "x" +
                                        std::to_string(img.height) + " image");
        }
    }
    if (request.mask_prompt &&
        (request.mask_prompt->width() != img.width || request.mask_prompt->height() != img.height))
        throw std::invalid_argument("segment: mask prompt size does not match image");
}

std::uint64_t checksum(const Mask& mask) {
    // FNV-1a over dimensions and raw values
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* data, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    const int dims[2] = {mask.width(), mask.height()};
    mix(dims, sizeof dims);
    mix(mask.values().data(), mask.values().size_bytes());
    return h;
}

ConstantBackend::ConstantBackend(Mask mask) : mask_(std::move(mask)) {}

ConstantBackend::ConstantBackend(float fill) : fill_(fill) {}

Mask ConstantBackend::segment(const SegmentationRequest& request) {
    validate_request(request);
    if (!mask_) return Mask(request.image.width, request.image.height, fill_);
    if (mask_->width() != request.image.width || mask_->height() != request.image.height)
        throw std::invalid_argument("ConstantBackend: configured mask size differs from image");
    return *mask_;
}

std::uint64_t ConstantBackend::state_checksum() const {
    if (mask_) return checksum(*mask_);
    std::uint64_t bits = 0;
    std::memcpy(&bits, &fill_, sizeof fill_);
    return bits;
}

Mask oracle_segment(const SegmentationRequest& request, const Mask& ground_truth) {
    validate_request(request);
    if (ground_truth.width() != request.image.width || ground_truth.height() != request.image.height)
        throw std::invalid_argument("oracle_segment: ground truth size differs from image");

    bool positive_hit = false;
    bool negative_hit = false;
    for (const auto& p : request.points) {
        if (!ground_truth.is_foreground(p.x, p.y)) continue;
        if (p.polarity == Polarity::Positive)
            positive_hit = true;
        else
            negative_hit = true;
    }
    if (positive_hit && !negative_hit) return ground_truth;
    return Mask(ground_truth.width(), ground_truth.height(), 0.0f);
}

OracleBackend::OracleBackend(Mask ground_truth) : ground_truth_(std::move(ground_truth)) {}

Mask OracleBackend::segment(const SegmentationRequest& request) {
    return oracle_segment(request, ground_truth_);
}

std::uint64_t OracleBackend::state_checksum() const { return checksum(ground_truth_); }

RecordingBackend::RecordingBackend(std::shared_ptr<SegmentationBackend> inner)
    : inner_(std::move(inner)) {
    if (!inner_) throw std::invalid_argument("RecordingBackend: null inner backend");
}

Mask RecordingBackend::segment(const SegmentationRequest& request) {
    Mask response = inner_->segment(request);
    calls_.push_back({request, response});
    return response;
}

std::vector<PointPrompt> to_point_prompts(const PromptSelection& selection) {
    std::vector<PointPrompt> out;
    auto add = [&](const ScoredCandidate& c, Polarity polarity) {
        out.push_back({to_pixel(c.point.x, selection.width), to_pixel(c.point.y, selection.height),
                       polarity});
    };
    for (const auto& t : selection.triples) {
        add(t.pp, Polarity::Positive);
        for (const auto& np : t.nps) add(np, Polarity::Negative);
    }
    return out;
}

Mask two_pass_segment(const ImageRef& image, const PromptSelection& selection,
                      SegmentationBackend& backend, int iterations) {
    if (iterations != 1 && iterations != 2)
        throw std::invalid_argument("two_pass_segment: iterations must be 1 or 2");

    SegmentationRequest request;
    request.image = image;
    request.points = to_point_prompts(selection);
    Mask mask = backend.segment(request);
    if (mask.width() != image.width || mask.height() != image.height)
        throw BackendError("backend '" + backend.name() + "' returned a mask of the wrong size");

    if (iterations == 2) {
        request.mask_prompt = std::move(mask);
        mask = backend.segment(request);
        if (mask.width() != image.width || mask.height() != image.height)
            throw BackendError("backend '" + backend.name() + "' returned a mask of the wrong size");
    }
    return mask;
}

}  // namespace kpsam
