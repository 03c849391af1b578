#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpsam {

struct DatasetEntry {
    std::string id;
    std::filesystem::path image;
    std::filesystem::path mask;
};

struct DatasetIndex {
    std::string name;
    std::filesystem::path root;
    std::vector<DatasetEntry> entries;

    std::size_t size() const { return entries.size(); }
};

struct DatasetLayout {
    std::string image_dir = "Image";
    std::string mask_dir = "GT";
    /// Optional list of image ids (one per line, extension optional). When set, only
    /// these are indexed, in list order; a listed id without an image is an error.
    std::optional<std::filesystem::path> file_list;
    /// Compare each image's size with its mask's (decodes both files).
    bool check_dimensions = true;
};

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Indexes <root>/<image_dir> against <root>/<mask_dir>. Masks are matched by stem and
/// must be PNG. Entries are sorted by id unless a file list fixes the order.
/// Throws DatasetError naming the offending path on a missing mask, a size mismatch,
/// a duplicate id or an empty result.
DatasetIndex ingest(const std::filesystem::path& root, const std::string& name,
                    const DatasetLayout& layout = {});

/// Size of the standard evaluation split: COD10K 2026, NC4K 4121, CAMO 250; else nullopt.
std::optional<std::size_t> expected_size(const std::string& name);

}  // namespace kpsam
