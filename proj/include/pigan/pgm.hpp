#pragma once

#include <string>
#include <vector>

#include "pigan/tensor.hpp"

namespace pigan {

struct GrayImage {
    std::size_t width = 0, height = 0;
    std::vector<double> pixels;  // row-major, values in [0,1]
};

/// Binary (P5) PGM reader; supports comments and 8/16-bit depths, normalizes
/// by maxval.
GrayImage read_pgm(const std::string& path);

/// Writes values in [0,1] as an 8-bit binary PGM (values are clamped).
void write_pgm(const std::string& path, const GrayImage& image);

/// Corner-aligned bilinear resampling to an arbitrary size.
GrayImage resize_bilinear(const GrayImage& src, std::size_t width, std::size_t height);

/// Tiles rank-4 single-channel images (n,1,h,w) into a rows x cols mosaic
/// with 2-pixel mid-gray separators; unused cells stay at the separator value.
GrayImage make_mosaic(const Tensor& images, std::size_t cols);

}  // namespace pigan
