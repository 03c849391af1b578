#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kpsam/mask.hpp"

namespace kpsam {

struct SyntheticSample {
    std::string id;
    RgbImage image;
    Mask mask;  // binary
};

/// Ellipses and blobs on textured noise. The object carries a small colour and texture
/// offset from its background, so it is faint but learnable. Deterministic in `seed`.
std::vector<SyntheticSample> make_synthetic_set(int count, int size, std::uint64_t seed);

/// Writes the set as <root>/Image/<id>.png and <root>/GT/<id>.png.
void write_synthetic_dataset(const std::filesystem::path& root,
                             const std::vector<SyntheticSample>& samples);

}  // namespace kpsam
