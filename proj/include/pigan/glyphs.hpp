#pragma once

#include "pigan/dataset.hpp"

namespace pigan {

/// Synthetic stroke-glyph generator: each class is a fixed set of random
/// polyline strokes; examples within a class are jittered renderings
/// (control-point noise plus a small affine perturbation).
struct GlyphSpec {
    std::size_t background_classes = 40;
    std::size_t evaluation_classes = 20;
    std::size_t examples_per_class = 20;
    std::size_t image_size = 16;
    std::size_t min_strokes = 2, max_strokes = 4;
    double stroke_thickness = 1.6;  // pixels
    double jitter = 1.0;            // 0 disables all intra-class variation
    std::uint64_t seed = 7;

    void validate() const;
};

struct GlyphDatasets {
    LabeledDataset background;  // labels 0..background_classes-1
    LabeledDataset evaluation;  // labels 0..evaluation_classes-1, disjoint glyphs
};

GlyphDatasets generate_glyph_dataset(const GlyphSpec& spec);

}  // namespace pigan
