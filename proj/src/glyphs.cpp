#include "pigan/glyphs.hpp"

#include <cmath>

namespace pigan {

void GlyphSpec::validate() const {
    if (background_classes == 0 || evaluation_classes == 0)
        throw ArgumentError("glyph class counts must be positive");
    if (examples_per_class == 0) throw ArgumentError("examples per class must be positive");
    if (image_size == 0) throw ArgumentError("image size must be positive");
    if (min_strokes == 0 || max_strokes < min_strokes)
        throw ArgumentError("stroke range must satisfy 1 <= min <= max");
    if (!(stroke_thickness > 0.0)) throw ArgumentError("stroke thickness must be positive");
    if (jitter < 0.0) throw ArgumentError("jitter must be non-negative");
}

namespace {

struct Point {
    double x, y;
};

// Each stroke is a 3-point polyline in normalized [0,1]^2 coordinates.
struct Stroke {
    Point p[3];
};

double segment_distance(Point a, Point b, Point q) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = 0.0;
    if (len2 > 0.0) t = ((q.x - a.x) * vx + (q.y - a.y) * vy) / len2;
    t = std::min(1.0, std::max(0.0, t));
    const double dx = q.x - (a.x + t * vx), dy = q.y - (a.y + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

void render_glyph(const std::vector<Stroke>& strokes, std::size_t size, double thickness_px,
                  double* out) {
    for (std::size_t py = 0; py < size; ++py) {
        for (std::size_t px = 0; px < size; ++px) {
            const Point q{(static_cast<double>(px) + 0.5) / static_cast<double>(size),
                          (static_cast<double>(py) + 0.5) / static_cast<double>(size)};
            double d = 1e9;
            for (const Stroke& s : strokes) {
                d = std::min(d, segment_distance(s.p[0], s.p[1], q));
                d = std::min(d, segment_distance(s.p[1], s.p[2], q));
            }
            const double d_px = d * static_cast<double>(size);
            // one-pixel antialiased falloff around the stroke core
            const double v = thickness_px / 2.0 + 0.5 - d_px;
            out[py * size + px] = std::min(1.0, std::max(0.0, v));
        }
    }
}

std::vector<Stroke> draw_class_shape(const GlyphSpec& spec, RandomStream& rng) {
    const std::size_t count =
        spec.min_strokes + rng.uniform_index(spec.max_strokes - spec.min_strokes + 1);
    std::vector<Stroke> strokes(count);
    for (Stroke& s : strokes)
        for (Point& p : s.p) {
            p.x = 0.15 + 0.7 * rng.uniform01();
            p.y = 0.15 + 0.7 * rng.uniform01();
        }
    return strokes;
}

std::vector<Stroke> jittered_copy(const std::vector<Stroke>& base, double jitter,
                                  RandomStream& rng) {
    // Control point noise, then a small affine perturbation about the center.
    // The draws always happen so that jitter=0 yields bitwise identical
    // renderings without desynchronizing the stream.
    std::vector<Stroke> out = base;
    for (Stroke& s : out)
        for (Point& p : s.p) {
            p.x += 0.02 * jitter * rng.normal();
            p.y += 0.02 * jitter * rng.normal();
        }
    const double angle = 0.08 * jitter * rng.normal();
    const double scale = 1.0 + 0.05 * jitter * rng.normal();
    const double tx = 0.03 * jitter * rng.normal();
    const double ty = 0.03 * jitter * rng.normal();
    const double ca = std::cos(angle), sa = std::sin(angle);
    for (Stroke& s : out)
        for (Point& p : s.p) {
            const double cx = p.x - 0.5, cy = p.y - 0.5;
            p.x = 0.5 + scale * (ca * cx - sa * cy) + tx;
            p.y = 0.5 + scale * (sa * cx + ca * cy) + ty;
        }
    return out;
}

LabeledDataset build_split(const GlyphSpec& spec, std::size_t classes, Split split,
                           RandomStream& rng) {
    const std::size_t s = spec.image_size;
    LabeledDataset ds;
    ds.split = split;
    ds.samples = Tensor({classes * spec.examples_per_class, 1, s, s});
    ds.labels.resize(ds.count());
    ds.groups.resize(ds.count());
    std::size_t row = 0;
    for (std::size_t cls = 0; cls < classes; ++cls) {
        const std::vector<Stroke> shape = draw_class_shape(spec, rng);
        for (std::size_t ex = 0; ex < spec.examples_per_class; ++ex, ++row) {
            const std::vector<Stroke> jittered = jittered_copy(shape, spec.jitter, rng);
            render_glyph(jittered, s, spec.stroke_thickness, ds.samples.data.data() + row * s * s);
            ds.labels[row] = static_cast<std::int32_t>(cls);
            ds.groups[row] = static_cast<std::int32_t>(cls / 10);  // pseudo-alphabets of 10
        }
    }
    quantize_samples_f32(ds.samples);
    ds.validate();
    return ds;
}

}  // namespace

GlyphDatasets generate_glyph_dataset(const GlyphSpec& spec) {
    spec.validate();
    RandomStream rng(spec.seed);
    GlyphDatasets out;
    out.background = build_split(spec, spec.background_classes, Split::Background, rng);
    out.evaluation = build_split(spec, spec.evaluation_classes, Split::Evaluation, rng);
    return out;
}

}  // namespace pigan
