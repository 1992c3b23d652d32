#pragma once

// Pipeline configuration file (JSON). Every key is optional; absent keys keep
// their defaults.
//
// {
//   "imaging":  { "binarizeThreshold": 60, "kernelRadius": 1, "minArea": 50 },
//   "detector": { "spotThreshold": 50, "spotMinArea": 8, "yellowHueMin": 20, "yellowHueMax": 45,
//                 "yellowSatThreshold": 70, "chalkBrightThreshold": 140, "chalkMinFraction": 0.08 },
//   "fusion":   { "iouThreshold": 0.5, "centroidDiagonalFraction": 0.5 },
//   "calibration": "densities.json",
//   "backend": "classical" | "external",
//   "strict": false,
//   "scaleTag": "",
//   "maxUnresolved": null
// }

#include <optional>
#include <string>
#include <vector>

#include "detect.hpp"
#include "detection_io.hpp"
#include "fusion.hpp"
#include "report.hpp"
#include "synthgen.hpp"

namespace ricescope {

enum class Backend : std::uint8_t { CLASSICAL, EXTERNAL };

inline const char* to_cstr(Backend b) { return b == Backend::CLASSICAL ? "classical" : "external"; }

struct PipelineConfig {
    ImagingConfig imaging;
    DetectorConfig detector;
    FusionConfig fusion;
    std::string calibration_path;
    Backend backend = Backend::CLASSICAL;
    bool strict = false;
    std::string scale_tag;
    std::optional<std::int64_t> max_unresolved;

    void validate() const {
        auto bad = [](const std::string& msg) { fail(ErrorCode::CONFIG_ERROR, msg); };
        if (imaging.binarize_threshold <= 0 || imaging.binarize_threshold >= 255)
            bad("imaging.binarizeThreshold must lie in (0, 255)");
        if (imaging.kernel_radius < 1) bad("imaging.kernelRadius must be at least 1");
        if (imaging.min_area < 1) bad("imaging.minArea must be at least 1");
        if (detector.spot_threshold < 0 || detector.spot_threshold > 255) bad("detector.spotThreshold outside [0, 255]");
        if (detector.spot_min_area < 1) bad("detector.spotMinArea must be at least 1");
        if (!(detector.yellow_hue_min >= 0 && detector.yellow_hue_min <= detector.yellow_hue_max &&
              detector.yellow_hue_max <= 360))
            bad("detector yellow hue range is invalid");
        if (!(detector.yellow_sat_threshold >= 0 && detector.yellow_sat_threshold <= 255))
            bad("detector.yellowSatThreshold outside [0, 255]");
        if (detector.chalk_bright_threshold < 0 || detector.chalk_bright_threshold > 255)
            bad("detector.chalkBrightThreshold outside [0, 255]");
        if (!(detector.chalk_min_fraction >= 0 && detector.chalk_min_fraction < 1))
            bad("detector.chalkMinFraction outside [0, 1)");
        fusion.validate();
        if (max_unresolved && *max_unresolved < 0) bad("maxUnresolved must not be negative");
    }
};

inline ordered_json config_to_json(const PipelineConfig& c) {
    ordered_json j;
    j["imaging"]["binarizeThreshold"] = c.imaging.binarize_threshold;
    j["imaging"]["kernelRadius"] = c.imaging.kernel_radius;
    j["imaging"]["minArea"] = c.imaging.min_area;
    j["detector"]["spotThreshold"] = c.detector.spot_threshold;
    j["detector"]["spotMinArea"] = c.detector.spot_min_area;
    j["detector"]["yellowHueMin"] = c.detector.yellow_hue_min;
    j["detector"]["yellowHueMax"] = c.detector.yellow_hue_max;
    j["detector"]["yellowSatThreshold"] = c.detector.yellow_sat_threshold;
    j["detector"]["chalkBrightThreshold"] = c.detector.chalk_bright_threshold;
    j["detector"]["chalkMinFraction"] = c.detector.chalk_min_fraction;
    j["fusion"]["iouThreshold"] = c.fusion.iou_threshold;
    j["fusion"]["centroidDiagonalFraction"] = c.fusion.centroid_diagonal_fraction;
    j["calibration"] = c.calibration_path;
    j["backend"] = to_cstr(c.backend);
    j["strict"] = c.strict;
    j["scaleTag"] = c.scale_tag;
    j["maxUnresolved"] = c.max_unresolved ? ordered_json(*c.max_unresolved) : ordered_json(nullptr);
    return j;
}

namespace detail {

template <typename T>
void read_into(const json& obj, const char* key, T& out, const std::string& section) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    const std::string where = section.empty() ? key : section + "." + key;
    try {
        if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
            if (!v.is_number_integer()) fail(ErrorCode::CONFIG_ERROR, where + " must be an integer");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) fail(ErrorCode::CONFIG_ERROR, where + " must be a number");
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) fail(ErrorCode::CONFIG_ERROR, where + " must be true or false");
        } else {
            if (!v.is_string()) fail(ErrorCode::CONFIG_ERROR, where + " must be a string");
        }
        out = v.get<T>();
    } catch (const json::exception& e) {
        fail(ErrorCode::CONFIG_ERROR, where + ": " + e.what());
    }
}

inline void check_config_fields(const json& obj, std::initializer_list<const char*> known, const std::string& where,
                                const ParseOptions& opt) {
    try {
        check_fields(obj, known, where, opt);
    } catch (const Error& e) {
        fail(ErrorCode::CONFIG_ERROR, e.what());
    }
}

inline const json& section(const json& j, const char* name, const ParseOptions& opt,
                           std::initializer_list<const char*> known) {
    static const json empty = json::object();
    if (!j.contains(name)) return empty;
    const auto& s = j.at(name);
    if (!s.is_object()) fail(ErrorCode::CONFIG_ERROR, std::string(name) + " must be an object");
    check_config_fields(s, known, name, opt);
    return s;
}

} // namespace detail

/// Builds a configuration from JSON. Strictness comes from the file's own
/// "strict" key unless forced by the caller.
inline PipelineConfig parse_config(const json& j, std::optional<bool> force_strict = std::nullopt,
                                   std::vector<std::string>* warnings = nullptr) {
    if (!j.is_object()) fail(ErrorCode::CONFIG_ERROR, "configuration must be a JSON object");
    PipelineConfig c;
    detail::read_into(j, "strict", c.strict, "");
    if (force_strict) c.strict = *force_strict;
    const ParseOptions opt{c.strict, warnings};

    detail::check_config_fields(j,
                                {"imaging", "detector", "fusion", "calibration", "backend", "strict", "scaleTag",
                                 "maxUnresolved"},
                                "configuration", opt);
    const auto& im = detail::section(j, "imaging", opt, {"binarizeThreshold", "kernelRadius", "minArea"});
    detail::read_into(im, "binarizeThreshold", c.imaging.binarize_threshold, "imaging");
    detail::read_into(im, "kernelRadius", c.imaging.kernel_radius, "imaging");
    detail::read_into(im, "minArea", c.imaging.min_area, "imaging");

    const auto& de = detail::section(j, "detector", opt,
                                     {"spotThreshold", "spotMinArea", "yellowHueMin", "yellowHueMax",
                                      "yellowSatThreshold", "chalkBrightThreshold", "chalkMinFraction"});
    detail::read_into(de, "spotThreshold", c.detector.spot_threshold, "detector");
    detail::read_into(de, "spotMinArea", c.detector.spot_min_area, "detector");
    detail::read_into(de, "yellowHueMin", c.detector.yellow_hue_min, "detector");
    detail::read_into(de, "yellowHueMax", c.detector.yellow_hue_max, "detector");
    detail::read_into(de, "yellowSatThreshold", c.detector.yellow_sat_threshold, "detector");
    detail::read_into(de, "chalkBrightThreshold", c.detector.chalk_bright_threshold, "detector");
    detail::read_into(de, "chalkMinFraction", c.detector.chalk_min_fraction, "detector");

    const auto& fu = detail::section(j, "fusion", opt, {"iouThreshold", "centroidDiagonalFraction"});
    detail::read_into(fu, "iouThreshold", c.fusion.iou_threshold, "fusion");
    detail::read_into(fu, "centroidDiagonalFraction", c.fusion.centroid_diagonal_fraction, "fusion");

    detail::read_into(j, "calibration", c.calibration_path, "");
    if (j.contains("backend")) {
        std::string b;
        detail::read_into(j, "backend", b, "");
        if (b == "classical") c.backend = Backend::CLASSICAL;
        else if (b == "external") c.backend = Backend::EXTERNAL;
        else fail(ErrorCode::CONFIG_ERROR, "backend must be 'classical' or 'external'");
    }
    detail::read_into(j, "scaleTag", c.scale_tag, "");
    if (j.contains("maxUnresolved") && !j.at("maxUnresolved").is_null()) {
        std::int64_t m = 0;
        detail::read_into(j, "maxUnresolved", m, "");
        c.max_unresolved = m;
    }
    c.validate();
    return c;
}

/// Applies "a.b=value" overrides. The value is read as JSON when it parses,
/// otherwise as a plain string. Unknown keys are always rejected.
inline json apply_overrides(json j, const std::vector<std::string>& assignments) {
    const json defaults = json::parse(config_to_json(PipelineConfig{}).dump());
    for (const auto& a : assignments) {
        const auto eq = a.find('=');
        if (eq == std::string::npos || eq == 0) fail(ErrorCode::CONFIG_ERROR, "override '" + a + "' is not key=value");
        const std::string key = a.substr(0, eq), text = a.substr(eq + 1);
        json value;
        try {
            value = json::parse(text);
        } catch (const json::exception&) {
            value = text;
        }
        json::json_pointer ptr("/" + [&] {
            std::string p = key;
            for (auto& ch : p)
                if (ch == '.') ch = '/';
            return p;
        }());
        if (!defaults.contains(ptr) || defaults.at(ptr).is_object())
            fail(ErrorCode::CONFIG_ERROR, "unknown configuration key '" + key + "'");
        j[ptr] = value;
    }
    return j;
}

inline PipelineConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {},
                                  std::optional<bool> force_strict = std::nullopt,
                                  std::vector<std::string>* warnings = nullptr) {
    json j = json::object();
    if (!path.empty()) {
        try {
            j = detail::read_json_file(path);
        } catch (const Error& e) {
            fail(ErrorCode::CONFIG_ERROR, e.what());
        }
    }
    return parse_config(apply_overrides(std::move(j), overrides), force_strict, warnings);
}

// Scene spec file for the generator; keys mirror SceneSpec in camelCase.

inline SceneSpec parse_scene_spec(const json& j, bool strict = true) {
    if (!j.is_object()) fail(ErrorCode::CONFIG_ERROR, "scene spec must be a JSON object");
    SceneSpec s;
    const ParseOptions opt{strict, nullptr};
    detail::check_config_fields(j,
                                {"width", "height", "minKernels", "maxKernels", "frequencies", "dualProbability",
                                 "seed", "semiMajor", "aspect", "pcFraction", "mcFraction", "brokenKeep", "bodyNoise",
                                 "backgroundNoise", "gap", "maxAttempts"},
                                "scene spec", opt);
    detail::read_into(j, "width", s.width, "");
    detail::read_into(j, "height", s.height, "");
    detail::read_into(j, "minKernels", s.min_kernels, "");
    detail::read_into(j, "maxKernels", s.max_kernels, "");
    detail::read_into(j, "dualProbability", s.dual_probability, "");
    detail::read_into(j, "seed", s.seed, "");
    detail::read_into(j, "bodyNoise", s.body_noise, "");
    detail::read_into(j, "backgroundNoise", s.background_noise, "");
    detail::read_into(j, "gap", s.gap, "");
    detail::read_into(j, "maxAttempts", s.max_attempts, "");
    if (j.contains("frequencies")) {
        const auto& f = j.at("frequencies");
        if (!f.is_object()) fail(ErrorCode::CONFIG_ERROR, "frequencies must be an object");
        for (auto it = f.begin(); it != f.end(); ++it) {
            const auto p = parse_property(it.key());
            if (!p || !it.value().is_number()) fail(ErrorCode::CONFIG_ERROR, "bad frequency entry '" + it.key() + "'");
            s.frequency[index_of(*p)] = it.value().get<double>();
        }
    }
    auto range = [&](const char* key, Range& r) {
        if (!j.contains(key)) return;
        const auto& v = j.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            fail(ErrorCode::CONFIG_ERROR, std::string(key) + " must be [lo, hi]");
        r = {v[0].get<double>(), v[1].get<double>()};
    };
    range("semiMajor", s.semi_major);
    range("aspect", s.aspect);
    range("pcFraction", s.pc_fraction);
    range("mcFraction", s.mc_fraction);
    range("brokenKeep", s.broken_keep);
    try {
        s.validate();
    } catch (const Error& e) {
        fail(ErrorCode::CONFIG_ERROR, e.what());
    }
    return s;
}

} // namespace ricescope
