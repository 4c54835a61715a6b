#include "pigan/runconfig.hpp"

#include <algorithm>
#include <fstream>

namespace pigan {

using nlohmann::json;

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
    return j;
}

void check_keys(const json& obj, const std::string& context,
                const std::vector<std::string>& allowed,
                const std::vector<std::string>& required) {
    if (!obj.is_object()) throw FormatError(context + " must be a JSON object");
    for (const auto& item : obj.items())
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
            throw FormatError(context + ": unknown key \"" + item.key() + "\"");
    for (const std::string& key : required)
        if (!obj.contains(key)) throw FormatError(context + ": missing required key \"" + key + "\"");
}

namespace {

double get_number(const json& obj, const std::string& context, const std::string& key,
                  double fallback, bool required = false) {
    if (!obj.contains(key)) {
        if (required) throw FormatError(context + ": missing required key \"" + key + "\"");
        return fallback;
    }
    if (!obj[key].is_number()) throw FormatError(context + "." + key + " must be a number");
    return obj[key].get<double>();
}

std::size_t get_count(const json& obj, const std::string& context, const std::string& key,
                      std::size_t fallback) {
    const double v = get_number(obj, context, key, static_cast<double>(fallback));
    if (v < 0 || v != std::floor(v))
        throw FormatError(context + "." + key + " must be a non-negative integer");
    return static_cast<std::size_t>(v);
}

}  // namespace

GanConfig parse_gan_config(const json& j) {
    check_keys(j, "gan",
               {"pi", "k", "batch_size", "latent_dim", "iterations", "learning_rate", "init_std",
                "seed", "prior"},
               {"pi"});
    GanConfig cfg;
    cfg.pi = get_number(j, "gan", "pi", 0.5, true);
    cfg.k = get_count(j, "gan", "k", 0);
    cfg.batch_size = get_count(j, "gan", "batch_size", 128);
    cfg.latent_dim = get_count(j, "gan", "latent_dim", 100);
    cfg.iterations = get_count(j, "gan", "iterations", 2000);
    cfg.learning_rate = get_number(j, "gan", "learning_rate", 0.002);
    cfg.init_std = get_number(j, "gan", "init_std", 0.02);
    cfg.seed = static_cast<std::uint64_t>(get_count(j, "gan", "seed", 1));
    if (j.contains("prior")) {
        if (j["prior"] != "uniform01")
            throw FormatError("gan.prior: only \"uniform01\" is supported");
    }
    cfg.validate();
    return cfg;
}

json gan_config_to_json(const GanConfig& cfg) {
    return json{{"pi", cfg.pi},
                {"k", cfg.k},
                {"batch_size", cfg.batch_size},
                {"latent_dim", cfg.latent_dim},
                {"iterations", cfg.iterations},
                {"learning_rate", cfg.learning_rate},
                {"init_std", cfg.init_std},
                {"seed", cfg.seed},
                {"prior", "uniform01"}};
}

MixtureSpec parse_mixture_spec(const json& j) {
    check_keys(j, "mixture", {"kind", "components", "modes", "radius", "sigma"}, {});
    if (j.contains("kind") && j["kind"] == "ring") {
        return MixtureSpec::ring(get_count(j, "mixture", "modes", 8),
                                 get_number(j, "mixture", "radius", 5.0),
                                 get_number(j, "mixture", "sigma", 0.25));
    }
    if (!j.contains("components"))
        throw FormatError("mixture: needs either kind=\"ring\" or a components array");
    if (!j["components"].is_array()) throw FormatError("mixture.components must be an array");
    MixtureSpec spec;
    for (const auto& c : j["components"]) {
        check_keys(c, "mixture component", {"mean", "sigma", "weight"}, {"mean", "sigma"});
        if (!c["mean"].is_array() || c["mean"].size() != 2)
            throw FormatError("mixture component mean must be a 2-vector");
        MixtureComponent mc;
        mc.mean_x = c["mean"][0].get<double>();
        mc.mean_y = c["mean"][1].get<double>();
        mc.sigma = c["sigma"].get<double>();
        mc.weight = get_number(c, "mixture component", "weight", 1.0);
        spec.components.push_back(mc);
    }
    spec.normalize();
    return spec;
}

json mixture_spec_to_json(const MixtureSpec& spec) {
    json comps = json::array();
    for (const auto& c : spec.components)
        comps.push_back(json{{"mean", {c.mean_x, c.mean_y}}, {"sigma", c.sigma}, {"weight", c.weight}});
    return json{{"components", comps}};
}

GlyphSpec parse_glyph_spec(const json& j) {
    check_keys(j, "glyphs",
               {"background_classes", "evaluation_classes", "examples_per_class", "image_size",
                "min_strokes", "max_strokes", "stroke_thickness", "jitter", "seed"},
               {});
    GlyphSpec spec;
    spec.background_classes = get_count(j, "glyphs", "background_classes", spec.background_classes);
    spec.evaluation_classes = get_count(j, "glyphs", "evaluation_classes", spec.evaluation_classes);
    spec.examples_per_class = get_count(j, "glyphs", "examples_per_class", spec.examples_per_class);
    spec.image_size = get_count(j, "glyphs", "image_size", spec.image_size);
    spec.min_strokes = get_count(j, "glyphs", "min_strokes", spec.min_strokes);
    spec.max_strokes = get_count(j, "glyphs", "max_strokes", spec.max_strokes);
    spec.stroke_thickness = get_number(j, "glyphs", "stroke_thickness", spec.stroke_thickness);
    spec.jitter = get_number(j, "glyphs", "jitter", spec.jitter);
    spec.seed = static_cast<std::uint64_t>(get_count(j, "glyphs", "seed", spec.seed));
    spec.validate();
    return spec;
}

json glyph_spec_to_json(const GlyphSpec& spec) {
    return json{{"background_classes", spec.background_classes},
                {"evaluation_classes", spec.evaluation_classes},
                {"examples_per_class", spec.examples_per_class},
                {"image_size", spec.image_size},
                {"min_strokes", spec.min_strokes},
                {"max_strokes", spec.max_strokes},
                {"stroke_thickness", spec.stroke_thickness},
                {"jitter", spec.jitter},
                {"seed", spec.seed}};
}

TrainRunConfig TrainRunConfig::from_json(const json& j) {
    check_keys(j, "config",
               {"format_version", "gan", "model", "data", "out_dir", "checkpoint_every",
                "grid_every"},
               {"format_version", "gan", "model", "data", "out_dir"});
    if (!j["format_version"].is_number_integer() ||
        j["format_version"].get<int>() != kConfigFormatVersion)
        throw FormatError("config.format_version must be " + std::to_string(kConfigFormatVersion));

    TrainRunConfig cfg;
    cfg.gan = parse_gan_config(j["gan"]);

    const json& model = j["model"];
    check_keys(model, "model", {"preset", "hidden"}, {"preset"});
    if (model["preset"] == "mlp2d")
        cfg.model.preset = ModelConfig::Preset::Mlp2d;
    else if (model["preset"] == "conv16")
        cfg.model.preset = ModelConfig::Preset::Conv16;
    else
        throw FormatError("model.preset must be \"mlp2d\" or \"conv16\"");
    cfg.model.hidden = get_count(model, "model", "hidden", 64);

    const json& data = j["data"];
    check_keys(data, "data", {"kind", "mixture", "glyphs", "path"}, {"kind"});
    if (data["kind"] == "mixture") {
        cfg.data.kind = DataConfig::Kind::Mixture;
        if (!data.contains("mixture")) throw FormatError("data: mixture kind needs a mixture spec");
        cfg.data.mixture = parse_mixture_spec(data["mixture"]);
    } else if (data["kind"] == "glyphs") {
        cfg.data.kind = DataConfig::Kind::Glyphs;
        cfg.data.glyphs = data.contains("glyphs") ? parse_glyph_spec(data["glyphs"]) : GlyphSpec{};
    } else if (data["kind"] == "dataset") {
        cfg.data.kind = DataConfig::Kind::DatasetPath;
        if (!data.contains("path") || !data["path"].is_string())
            throw FormatError("data: dataset kind needs a path");
        cfg.data.path = data["path"].get<std::string>();
    } else {
        throw FormatError("data.kind must be \"mixture\", \"glyphs\" or \"dataset\"");
    }

    if (!j["out_dir"].is_string() || j["out_dir"].get<std::string>().empty())
        throw FormatError("config.out_dir must be a non-empty string");
    cfg.out_dir = j["out_dir"].get<std::string>();
    cfg.checkpoint_every = get_count(j, "config", "checkpoint_every", 500);
    cfg.grid_every = get_count(j, "config", "grid_every", 500);
    return cfg;
}

TrainRunConfig TrainRunConfig::from_file(const std::string& path) {
    return from_json(load_json_file(path));
}

json TrainRunConfig::to_json() const {
    json j;
    j["format_version"] = kConfigFormatVersion;
    j["gan"] = gan_config_to_json(gan);
    j["model"] = json{{"preset", model.preset == ModelConfig::Preset::Mlp2d ? "mlp2d" : "conv16"},
                      {"hidden", model.hidden}};
    switch (data.kind) {
        case DataConfig::Kind::Mixture:
            j["data"] = json{{"kind", "mixture"}, {"mixture", mixture_spec_to_json(data.mixture)}};
            break;
        case DataConfig::Kind::Glyphs:
            j["data"] = json{{"kind", "glyphs"}, {"glyphs", glyph_spec_to_json(data.glyphs)}};
            break;
        case DataConfig::Kind::DatasetPath:
            j["data"] = json{{"kind", "dataset"}, {"path", data.path}};
            break;
    }
    j["out_dir"] = out_dir;
    j["checkpoint_every"] = checkpoint_every;
    j["grid_every"] = grid_every;
    return j;
}

DivergenceJob DivergenceJob::from_file(const std::string& path) {
    const json j = load_json_file(path);
    check_keys(j, "divergence spec", {"mode", "p", "q", "p_path", "q_path", "bounds", "resolution"},
               {"mode"});
    DivergenceJob job;
    if (j["mode"] == "exact") {
        job.mode = Mode::Exact;
        if (!j.contains("p") || !j.contains("q") || !j["p"].is_array() || !j["q"].is_array())
            throw FormatError("divergence spec: exact mode needs p and q mass arrays");
        job.p = j["p"].get<std::vector<double>>();
        job.q = j["q"].get<std::vector<double>>();
    } else if (j["mode"] == "samples") {
        job.mode = Mode::Samples;
        if (!j.contains("p_path") || !j.contains("q_path"))
            throw FormatError("divergence spec: samples mode needs p_path and q_path");
        job.p_path = j["p_path"].get<std::string>();
        job.q_path = j["q_path"].get<std::string>();
        if (j.contains("bounds")) {
            if (!j["bounds"].is_array() || j["bounds"].size() != 4)
                throw FormatError("divergence spec: bounds must be [x0,y0,x1,y1]");
            job.bounds = {j["bounds"][0].get<double>(), j["bounds"][1].get<double>(),
                          j["bounds"][2].get<double>(), j["bounds"][3].get<double>()};
        } else {
            job.bounds = {-8.0, -8.0, 8.0, 8.0};
        }
        job.resolution = get_count(j, "divergence spec", "resolution", 32);
    } else {
        throw FormatError("divergence spec: mode must be \"exact\" or \"samples\"");
    }
    return job;
}

}  // namespace pigan
