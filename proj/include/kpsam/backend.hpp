#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kpsam/kps.hpp"
#include "kpsam/mask.hpp"

namespace kpsam {

enum class Polarity { Negative = 0, Positive = 1 };

/// Integer pixel prompt. Wire label: 1 = positive, 0 = negative.
struct PointPrompt {
    int x = 0;
    int y = 0;
    Polarity polarity = Polarity::Positive;

    friend bool operator==(const PointPrompt&, const PointPrompt&) = default;
};

/// Which image a request refers to. `pixels` may be null for backends that only need
/// the geometry (mocks); `path` is filled in when the image already exists on disk.
struct ImageRef {
    int width = 0;
    int height = 0;
    const RgbImage* pixels = nullptr;
    std::string path;
};

struct SegmentationRequest {
    ImageRef image;
    std::vector<PointPrompt> points;
    std::optional<Mask> mask_prompt;
};

/// Raised when a backend cannot serve a request (service down, bad response).
class BackendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Checks prompt coordinates and mask-prompt geometry. Throws std::invalid_argument.
void validate_request(const SegmentationRequest& request);

/// A frozen promptable segmenter.
///
/// segment() must return a mask with the request image's dimensions and must not
/// change the backend's parameters; state_checksum() lets callers verify the latter.
class SegmentationBackend {
public:
    virtual ~SegmentationBackend() = default;

    virtual Mask segment(const SegmentationRequest& request) = 0;
    virtual std::uint64_t state_checksum() const = 0;
    virtual std::string name() const = 0;
    virtual bool supports_concurrent_requests() const { return false; }
};

/// Returns the same mask for every request (or a constant fill at the request's size).
class ConstantBackend final : public SegmentationBackend {
public:
    explicit ConstantBackend(Mask mask);
    explicit ConstantBackend(float fill);

    Mask segment(const SegmentationRequest& request) override;
    std::uint64_t state_checksum() const override;
    std::string name() const override { return "constant"; }
    bool supports_concurrent_requests() const override { return true; }

private:
    std::optional<Mask> mask_;
    float fill_ = 0.0f;
};

/// Ground truth if some positive prompt hits foreground and no negative prompt does,
/// otherwise the all-zero mask. Stands in for a real segmenter in tests.
Mask oracle_segment(const SegmentationRequest& request, const Mask& ground_truth);

class OracleBackend final : public SegmentationBackend {
public:
    explicit OracleBackend(Mask ground_truth);

    Mask segment(const SegmentationRequest& request) override;
    std::uint64_t state_checksum() const override;
    std::string name() const override { return "oracle"; }
    bool supports_concurrent_requests() const override { return true; }

private:
    Mask ground_truth_;
};

/// Forwards to an inner backend and keeps a copy of every request and response.
class RecordingBackend final : public SegmentationBackend {
public:
    explicit RecordingBackend(std::shared_ptr<SegmentationBackend> inner);

    Mask segment(const SegmentationRequest& request) override;
    std::uint64_t state_checksum() const override { return inner_->state_checksum(); }
    std::string name() const override { return "recording(" + inner_->name() + ")"; }

    struct Call {
        SegmentationRequest request;
        Mask response;
    };
    const std::vector<Call>& calls() const { return calls_; }

private:
    std::shared_ptr<SegmentationBackend> inner_;
    std::vector<Call> calls_;
};

std::uint64_t checksum(const Mask& mask);

/// Converts selected triples into integer point prompts (PP then its NPs, per triple).
std::vector<PointPrompt> to_point_prompts(const PromptSelection& selection);

/// Pass 1: points only. Pass 2 (iterations == 2): the same points plus the pass-1
/// mask, unmodified, as mask prompt. Returns the last mask.
Mask two_pass_segment(const ImageRef& image, const PromptSelection& selection,
                      SegmentationBackend& backend, int iterations = 2);

}  // namespace kpsam
