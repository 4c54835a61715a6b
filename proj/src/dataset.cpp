#include "pigan/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "pigan/pgm.hpp"

namespace pigan {

std::size_t LabeledDataset::class_count() const {
    std::int32_t max_label = -1;
    for (std::int32_t l : labels) max_label = std::max(max_label, l);
    return static_cast<std::size_t>(max_label + 1);
}

void LabeledDataset::validate() const {
    const std::size_t n = count();
    if (labels.size() != n) throw ConsistencyError("label count does not match sample count");
    if (!groups.empty() && groups.size() != n)
        throw ConsistencyError("group count does not match sample count");
    for (std::int32_t l : labels)
        if (l < 0) throw ConsistencyError("labels must be non-negative");
    if (samples.rank() != 2 && samples.rank() != 4 && n > 0)
        throw DimensionError("dataset samples must be rank 2 or rank 4");
    if (samples.rank() == 4) {
        for (double v : samples.data)
            if (!(v >= 0.0 && v <= 1.0))
                throw ConsistencyError("image pixel values must lie in [0,1]");
    }
}

void quantize_samples_f32(Tensor& samples) {
    for (double& v : samples.data) v = static_cast<double>(static_cast<float>(v));
}

namespace {

constexpr char kMagic[] = "PIGANDS1";  // 8 bytes

template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, std::size_t& offset) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (static_cast<std::size_t>(in.gcount()) != sizeof(T))
        throw FormatError("truncated dataset file at byte offset " + std::to_string(offset));
    offset += sizeof(T);
    return v;
}

}  // namespace

void save_dataset(const LabeledDataset& ds, const std::string& path) {
    ds.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    out.write(kMagic, 8);
    put<std::uint32_t>(out, kDatasetVersion);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(ds.split));
    put<std::uint64_t>(out, ds.count());
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.samples.rank()));
    for (std::size_t d : ds.samples.shape) put<std::uint64_t>(out, d);
    for (double v : ds.samples.data) put<float>(out, static_cast<float>(v));
    for (std::int32_t l : ds.labels) put<std::int32_t>(out, l);
    put<std::uint8_t>(out, ds.groups.empty() ? 0 : 1);
    for (std::int32_t g : ds.groups) put<std::int32_t>(out, g);
    out.flush();
    if (!out) throw FormatError("dataset write failed for " + path);
}

LabeledDataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    std::size_t offset = 0;
    char magic[8];
    in.read(magic, 8);
    if (in.gcount() != 8 || std::memcmp(magic, kMagic, 8) != 0)
        throw FormatError(path + " is not a PIGANDS1 dataset (bad magic)");
    offset += 8;
    const auto version = get<std::uint32_t>(in, offset);
    if (version != kDatasetVersion)
        throw FormatError("unsupported dataset version " + std::to_string(version));
    LabeledDataset ds;
    ds.split = static_cast<Split>(get<std::uint8_t>(in, offset));
    const auto count = get<std::uint64_t>(in, offset);
    const auto rank = get<std::uint32_t>(in, offset);
    if (rank != 2 && rank != 4)
        throw FormatError("dataset rank must be 2 or 4, got " + std::to_string(rank));
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = get<std::uint64_t>(in, offset);
    if (shape[0] != count) throw FormatError("dataset count does not match sample shape");
    if (Tensor::numel_of(shape) > (1ULL << 34))
        throw FormatError("implausible dataset size at byte offset " + std::to_string(offset));
    ds.samples = Tensor(shape);
    if (count == 0) ds.samples.data.clear();
    for (double& v : ds.samples.data) v = static_cast<double>(get<float>(in, offset));
    ds.labels.resize(count);
    for (auto& l : ds.labels) l = get<std::int32_t>(in, offset);
    if (get<std::uint8_t>(in, offset)) {
        ds.groups.resize(count);
        for (auto& g : ds.groups) g = get<std::int32_t>(in, offset);
    }
    ds.validate();
    return ds;
}

LabeledDataset ingest_pgm_directory(const std::string& dir, std::size_t size) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ArgumentError(dir + " is not a directory");
    std::vector<std::string> class_dirs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory()) class_dirs.push_back(entry.path().filename().string());
    std::sort(class_dirs.begin(), class_dirs.end());
    if (class_dirs.empty()) throw ArgumentError(dir + " contains no class subdirectories");

    std::vector<std::vector<double>> images;
    std::vector<std::int32_t> labels;
    for (std::size_t cls = 0; cls < class_dirs.size(); ++cls) {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(fs::path(dir) / class_dirs[cls]))
            if (entry.is_regular_file()) files.push_back(entry.path().string());
        std::sort(files.begin(), files.end());
        for (const std::string& file : files) {
            GrayImage img;
            try {
                img = read_pgm(file);
            } catch (const FormatError& e) {
                std::cerr << "warning: skipping " << file << ": " << e.what() << "\n";
                continue;
            }
            if (img.width != size || img.height != size) img = resize_bilinear(img, size, size);
            images.push_back(std::move(img.pixels));
            labels.push_back(static_cast<std::int32_t>(cls));
        }
    }
    if (images.empty()) throw ArgumentError(dir + " contains no readable PGM files");

    LabeledDataset ds;
    ds.samples = Tensor({images.size(), 1, size, size});
    for (std::size_t i = 0; i < images.size(); ++i)
        std::copy(images[i].begin(), images[i].end(), ds.samples.data.begin() + i * size * size);
    quantize_samples_f32(ds.samples);
    ds.labels = std::move(labels);
    ds.validate();
    return ds;
}

}  // namespace pigan
