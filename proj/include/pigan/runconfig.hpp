#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pigan/gan.hpp"
#include "pigan/glyphs.hpp"
#include "pigan/mixture.hpp"

namespace pigan {

inline constexpr int kConfigFormatVersion = 1;

/// Throws FormatError when obj is not an object, misses a required key, or
/// carries a key outside `allowed`.
void check_keys(const nlohmann::json& obj, const std::string& context,
                const std::vector<std::string>& allowed,
                const std::vector<std::string>& required);

GanConfig parse_gan_config(const nlohmann::json& j);
nlohmann::json gan_config_to_json(const GanConfig& cfg);

MixtureSpec parse_mixture_spec(const nlohmann::json& j);
nlohmann::json mixture_spec_to_json(const MixtureSpec& spec);

GlyphSpec parse_glyph_spec(const nlohmann::json& j);
nlohmann::json glyph_spec_to_json(const GlyphSpec& spec);

struct ModelConfig {
    enum class Preset { Mlp2d, Conv16 };
    Preset preset = Preset::Mlp2d;
    std::size_t hidden = 64;  // mlp2d width
};

struct DataConfig {
    enum class Kind { Mixture, Glyphs, DatasetPath };
    Kind kind = Kind::Mixture;
    MixtureSpec mixture;
    GlyphSpec glyphs;
    std::string path;
};

struct TrainRunConfig {
    GanConfig gan;
    ModelConfig model;
    DataConfig data;
    std::string out_dir;
    std::size_t checkpoint_every = 500;
    std::size_t grid_every = 500;

    static TrainRunConfig from_json(const nlohmann::json& j);
    static TrainRunConfig from_file(const std::string& path);
    nlohmann::json to_json() const;
};

struct DivergenceJob {
    enum class Mode { Exact, Samples };
    Mode mode = Mode::Exact;
    std::vector<double> p, q;     // exact mode masses
    std::string p_path, q_path;   // samples mode dataset paths
    Bounds bounds;
    std::size_t resolution = 32;

    static DivergenceJob from_file(const std::string& path);
};

nlohmann::json load_json_file(const std::string& path);

}  // namespace pigan
