#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pigan/tensor.hpp"

namespace pigan {

enum class Split : std::uint8_t { Background = 0, Evaluation = 1, Unsplit = 2 };

/// Samples plus integer class labels and optional group (alphabet) ids.
/// Sample values are kept exactly representable in 32-bit floats so the
/// on-disk round trip is bit-exact.
struct LabeledDataset {
    Tensor samples;                // (count, dims) or (count, 1, h, w)
    std::vector<std::int32_t> labels;
    std::vector<std::int32_t> groups;  // empty, or one id per sample
    Split split = Split::Unsplit;

    std::size_t count() const { return samples.rank() ? samples.dim(0) : 0; }
    std::size_t class_count() const;
    void validate() const;
};

/// Rounds every sample value to the nearest float32.
void quantize_samples_f32(Tensor& samples);

// PIGANDS1 binary container; layout documented in docs/formats.md.
inline constexpr std::uint32_t kDatasetVersion = 1;
void save_dataset(const LabeledDataset& ds, const std::string& path);
LabeledDataset load_dataset(const std::string& path);

/// Reads a directory of binary (P5) PGM files, one subdirectory per class in
/// lexicographic order, resamples to size x size and normalizes to [0,1].
/// Non-PGM files are skipped with a warning on stderr.
LabeledDataset ingest_pgm_directory(const std::string& dir, std::size_t size);

}  // namespace pigan
