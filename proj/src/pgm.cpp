#include "pigan/pgm.hpp"

#include <cmath>
#include <fstream>

namespace pigan {

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) continue;
        tok.push_back(static_cast<char>(c));
        while ((c = in.get()) != EOF && !std::isspace(c) && c != '#')
            tok.push_back(static_cast<char>(c));
        if (c == '#')
            while ((c = in.get()) != EOF && c != '\n') {
            }
        break;
    }
    return tok;
}

std::size_t parse_size(const std::string& tok, const char* what) {
    if (tok.empty()) throw FormatError(std::string("PGM header missing ") + what);
    std::size_t v = 0;
    for (char ch : tok) {
        if (ch < '0' || ch > '9') throw FormatError(std::string("bad PGM ") + what + ": " + tok);
        v = v * 10 + static_cast<std::size_t>(ch - '0');
    }
    return v;
}

}  // namespace

GrayImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    std::string magic = next_token(in);
    if (magic != "P5") throw FormatError(path + " is not a binary (P5) PGM");
    const std::size_t width = parse_size(next_token(in), "width");
    const std::size_t height = parse_size(next_token(in), "height");
    const std::size_t maxval = parse_size(next_token(in), "maxval");
    if (width == 0 || height == 0 || maxval == 0 || maxval > 65535)
        throw FormatError(path + " has an invalid PGM header");
    // exactly one whitespace byte separates header and raster; next_token has
    // already consumed it
    GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(width * height);
    const std::size_t bytes_per = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(width * height * bytes_per);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw FormatError(path + " raster is truncated");
    for (std::size_t i = 0; i < width * height; ++i) {
        std::size_t v;
        if (bytes_per == 1)
            v = raw[i];
        else
            v = (static_cast<std::size_t>(raw[2 * i]) << 8) | raw[2 * i + 1];  // big-endian
        img.pixels[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
    return img;
}

void write_pgm(const std::string& path, const GrayImage& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    out << "P5\n" << image.width << " " << image.height << "\n255\n";
    std::vector<unsigned char> raw(image.pixels.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double v = std::min(1.0, std::max(0.0, image.pixels[i]));
        raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw FormatError("PGM write failed for " + path);
}

GrayImage resize_bilinear(const GrayImage& src, std::size_t width, std::size_t height) {
    if (src.width == 0 || src.height == 0) throw ArgumentError("cannot resize an empty image");
    GrayImage dst;
    dst.width = width;
    dst.height = height;
    dst.pixels.resize(width * height);
    for (std::size_t y = 0; y < height; ++y) {
        const double sy = height == 1 ? 0.0
                                      : static_cast<double>(y) *
                                            static_cast<double>(src.height - 1) /
                                            static_cast<double>(height - 1);
        const std::size_t y0 = static_cast<std::size_t>(sy);
        const std::size_t y1 = std::min(y0 + 1, src.height - 1);
        const double fy = sy - static_cast<double>(y0);
        for (std::size_t x = 0; x < width; ++x) {
            const double sx = width == 1 ? 0.0
                                         : static_cast<double>(x) *
                                               static_cast<double>(src.width - 1) /
                                               static_cast<double>(width - 1);
            const std::size_t x0 = static_cast<std::size_t>(sx);
            const std::size_t x1 = std::min(x0 + 1, src.width - 1);
            const double fx = sx - static_cast<double>(x0);
            const double top = src.pixels[y0 * src.width + x0] * (1.0 - fx) +
                               src.pixels[y0 * src.width + x1] * fx;
            const double bot = src.pixels[y1 * src.width + x0] * (1.0 - fx) +
                               src.pixels[y1 * src.width + x1] * fx;
            dst.pixels[y * width + x] = top * (1.0 - fy) + bot * fy;
        }
    }
    return dst;
}

GrayImage make_mosaic(const Tensor& images, std::size_t cols) {
    if (images.rank() != 4 || images.dim(1) != 1)
        throw DimensionError("mosaic expects (n,1,h,w) images, got " + shape_string(images.shape));
    if (cols == 0) throw ArgumentError("mosaic needs at least one column");
    const std::size_t n = images.dim(0), h = images.dim(2), w = images.dim(3);
    const std::size_t rows = (n + cols - 1) / cols;
    const std::size_t sep = 2;
    const double sep_value = 0.5;
    GrayImage out;
    out.width = cols * w + (cols + 1) * sep;
    out.height = rows * h + (rows + 1) * sep;
    out.pixels.assign(out.width * out.height, sep_value);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = i / cols, c = i % cols;
        const std::size_t oy = sep + r * (h + sep);
        const std::size_t ox = sep + c * (w + sep);
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x)
                out.pixels[(oy + y) * out.width + ox + x] = images.at4(i, 0, y, x);
    }
    return out;
}

}  // namespace pigan
