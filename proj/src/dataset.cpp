#include "kpsam/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "kpsam/image_io.hpp"

namespace fs = std::filesystem;

namespace kpsam {

namespace {

bool is_image_file(const fs::path& p) {
    static const std::set<std::string> exts{".jpg", ".jpeg", ".png", ".bmp", ".tif", ".tiff"};
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    return exts.count(e) > 0;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

DatasetIndex ingest(const fs::path& root, const std::string& name, const DatasetLayout& layout) {
    const fs::path image_dir = root / layout.image_dir;
    const fs::path mask_dir = root / layout.mask_dir;
    if (!fs::is_directory(image_dir)) throw DatasetError("image directory not found: " + image_dir.string());
    if (!fs::is_directory(mask_dir)) throw DatasetError("mask directory not found: " + mask_dir.string());

    std::map<std::string, fs::path> images;
    for (const auto& de : fs::directory_iterator(image_dir)) {
        if (!de.is_regular_file() || !is_image_file(de.path())) continue;
        const std::string id = de.path().stem().string();
        auto [it, inserted] = images.emplace(id, de.path());
        if (!inserted) throw DatasetError("duplicate image id '" + id + "': " + de.path().string());
    }

    std::vector<std::string> ids;
    if (layout.file_list) {
        std::ifstream in(*layout.file_list);
        if (!in) throw DatasetError("cannot read file list: " + layout.file_list->string());
        std::set<std::string> seen;
        for (std::string line; std::getline(in, line);) {
            line = trim(line);
            if (line.empty() || line[0] == '#') continue;
            const std::string id = fs::path(line).stem().string();
            if (!images.count(id))
                throw DatasetError("listed image not found: " + (image_dir / line).string());
            if (!seen.insert(id).second)
                throw DatasetError("duplicate id in file list: " + id);
            ids.push_back(id);
        }
    } else {
        for (const auto& [id, path] : images) ids.push_back(id);
    }

    DatasetIndex index{name, root, {}};
    index.entries.reserve(ids.size());
    for (const auto& id : ids) {
        const fs::path& image = images.at(id);
        const fs::path mask = mask_dir / (id + ".png");
        if (!fs::is_regular_file(mask))
            throw DatasetError("missing mask for " + image.string() + " (expected " + mask.string() + ")");
        if (layout.check_dimensions) {
            cv::Size si, sm;
            try {
                si = image_size(image);
                sm = image_size(mask);
            } catch (const std::exception& e) {
                throw DatasetError(e.what());
            }
            if (si != sm)
                throw DatasetError("size mismatch: " + image.string() + " is " +
                                   std::to_string(si.width) + "x" + std::to_string(si.height) +
                                   " but " + mask.string() + " is " + std::to_string(sm.width) +
                                   "x" + std::to_string(sm.height));
        }
        index.entries.push_back({id, image, mask});
    }
    if (index.entries.empty()) throw DatasetError("no images found under " + image_dir.string());
    return index;
}

std::optional<std::size_t> expected_size(const std::string& name) {
    if (name == "COD10K") return 2026;
    if (name == "NC4K") return 4121;
    if (name == "CAMO") return 250;
    return std::nullopt;
}

}  // namespace kpsam
