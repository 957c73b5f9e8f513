#ifndef PRBNET_CONFIG_HPP
#define PRBNET_CONFIG_HPP

#include <array>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "prbnet/errors.hpp"

namespace prbnet {

enum class StageBlockKind { CSP, MSP, ELAN };

inline std::string to_string(StageBlockKind k) {
    switch (k) {
        case StageBlockKind::CSP: return "csp";
        case StageBlockKind::MSP: return "msp";
        case StageBlockKind::ELAN: return "elan";
    }
    return "?";
}

inline StageBlockKind block_kind_from_string(const std::string& s) {
    if (s == "csp") return StageBlockKind::CSP;
    if (s == "msp") return StageBlockKind::MSP;
    if (s == "elan") return StageBlockKind::ELAN;
    throw ConfigError("unknown backbone kind '" + s + "' (expected csp|msp|elan)");
}

struct BackboneConfig {
    StageBlockKind kind = StageBlockKind::CSP;
    int stem_channels = 16;
    std::array<int, 4> stage_channels = {16, 32, 64, 128};
    std::array<int, 4> blocks_per_stage = {1, 2, 2, 1};
    float activation_slope = 0.1f;
};

// conv units inside one stage block
inline constexpr int kBlockDepth = 2;

struct PyramidConfig {
    int num_paths = 3;  // J parallel bi-fusion paths
    int num_levels = 4; // K
    int path_width = 32; // C_p

    // level k (1-based) lives at stride 32 / 2^(k-1)
    int level_stride(int k) const { return 32 >> (k - 1); }
};

struct HeadConfig {
    int num_classes = 3;
    // per level k=1..K, list of (w, h) anchor shapes at image scale
    std::vector<std::vector<std::pair<float, float>>> anchors;
    float conf_threshold = 0.25f;
    float iou_threshold = 0.45f;

    int anchors_per_level() const { return anchors.empty() ? 0 : static_cast<int>(anchors[0].size()); }
};

struct TextConfig {
    float tau = 0.5f;
    std::string stopword_file = "data/stopwords.txt";
    std::string exception_file = "data/lemma_exceptions.txt";
};

struct PipelineConfig {
    BackboneConfig backbone;
    PyramidConfig pyramid;
    HeadConfig head;
    TextConfig text;
    uint64_t seed = 42;

    bool operator==(const PipelineConfig&) const = default;
};

inline bool operator==(const BackboneConfig& a, const BackboneConfig& b) {
    return a.kind == b.kind && a.stem_channels == b.stem_channels &&
           a.stage_channels == b.stage_channels && a.blocks_per_stage == b.blocks_per_stage &&
           a.activation_slope == b.activation_slope;
}
inline bool operator==(const PyramidConfig& a, const PyramidConfig& b) {
    return a.num_paths == b.num_paths && a.num_levels == b.num_levels && a.path_width == b.path_width;
}
inline bool operator==(const HeadConfig& a, const HeadConfig& b) {
    return a.num_classes == b.num_classes && a.anchors == b.anchors &&
           a.conf_threshold == b.conf_threshold && a.iou_threshold == b.iou_threshold;
}
inline bool operator==(const TextConfig& a, const TextConfig& b) {
    return a.tau == b.tau && a.stopword_file == b.stopword_file &&
           a.exception_file == b.exception_file;
}

// default anchor table: {1,2,4} x base per level, base = 2*stride, square
inline std::vector<std::vector<std::pair<float, float>>> default_anchors(const PyramidConfig& pyr) {
    std::vector<std::vector<std::pair<float, float>>> out;
    for (int k = 1; k <= pyr.num_levels; ++k) {
        float base = 2.0f * static_cast<float>(pyr.level_stride(k));
        out.push_back({{base, base}, {2 * base, 2 * base}, {4 * base, 4 * base}});
    }
    return out;
}

inline void validate_config(const PipelineConfig& cfg) {
    const BackboneConfig& bb = cfg.backbone;
    if (bb.stem_channels < 1) throw ConfigError("backbone.stem_channels must be >= 1");
    for (int i = 0; i < 4; ++i) {
        if (bb.blocks_per_stage[i] < 1)
            throw ConfigError("backbone.blocks_per_stage[" + std::to_string(i) + "] must be >= 1");
        if (i > 0 && bb.stage_channels[i] < bb.stage_channels[i - 1])
            throw ConfigError("backbone.stage_channels must be non-decreasing at stage " +
                              std::to_string(i));
        if ((bb.kind == StageBlockKind::CSP || bb.kind == StageBlockKind::MSP) &&
            bb.stage_channels[i] % 2 != 0)
            throw ConfigError("backbone.stage_channels[" + std::to_string(i) +
                              "] must be even for split blocks (stage " + std::to_string(i) + ")");
    }
    if (bb.activation_slope < 0.0f || bb.activation_slope >= 1.0f)
        throw ConfigError("backbone.activation_slope must be in [0, 1)");
    const PyramidConfig& pyr = cfg.pyramid;
    if (pyr.num_paths < 1) throw ConfigError("pyramid.num_paths must be >= 1");
    if (pyr.num_levels < 2 || pyr.num_levels > 4)
        throw ConfigError("pyramid.num_levels must be in [2, 4]");
    if (pyr.path_width < 2 || pyr.path_width % 2 != 0)
        throw ConfigError("pyramid.path_width must be even and >= 2");
    const HeadConfig& hd = cfg.head;
    if (hd.num_classes < 1) throw ConfigError("head.num_classes must be >= 1");
    if (hd.anchors.size() != static_cast<size_t>(pyr.num_levels))
        throw ConfigError("head.anchors must have one entry per pyramid level");
    size_t a = hd.anchors[0].size();
    if (a < 1) throw ConfigError("head.anchors needs at least one shape per level");
    for (const auto& level : hd.anchors) {
        if (level.size() != a) throw ConfigError("head.anchors levels must share anchor count");
        for (auto [w, h] : level)
            if (w <= 0.0f || h <= 0.0f) throw ConfigError("anchor sizes must be positive");
    }
    if (hd.conf_threshold < 0.0f || hd.conf_threshold > 1.0f)
        throw ConfigError("head.conf_threshold must be in [0, 1]");
    if (hd.iou_threshold <= 0.0f || hd.iou_threshold > 1.0f)
        throw ConfigError("head.iou_threshold must be in (0, 1]");
    if (cfg.text.tau <= 0.0f || cfg.text.tau > 1.0f)
        throw ConfigError("text.tau must be in (0, 1]");
}

inline nlohmann::json config_to_json(const PipelineConfig& cfg) {
    nlohmann::json anchors = nlohmann::json::array();
    for (const auto& level : cfg.head.anchors) {
        nlohmann::json l = nlohmann::json::array();
        for (auto [w, h] : level) l.push_back({w, h});
        anchors.push_back(l);
    }
    return {
        {"backbone",
         {{"kind", to_string(cfg.backbone.kind)},
          {"stem_channels", cfg.backbone.stem_channels},
          {"stage_channels", cfg.backbone.stage_channels},
          {"blocks_per_stage", cfg.backbone.blocks_per_stage},
          {"activation_slope", cfg.backbone.activation_slope}}},
        {"pyramid",
         {{"num_paths", cfg.pyramid.num_paths},
          {"num_levels", cfg.pyramid.num_levels},
          {"path_width", cfg.pyramid.path_width}}},
        {"head",
         {{"num_classes", cfg.head.num_classes},
          {"anchors", anchors},
          {"conf_threshold", cfg.head.conf_threshold},
          {"iou_threshold", cfg.head.iou_threshold}}},
        {"text",
         {{"tau", cfg.text.tau},
          {"stopword_file", cfg.text.stopword_file},
          {"exception_file", cfg.text.exception_file}}},
        {"seed", cfg.seed},
    };
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    try {
        const auto& bb = j.at("backbone");
        cfg.backbone.kind = block_kind_from_string(bb.at("kind").get<std::string>());
        cfg.backbone.stem_channels = bb.at("stem_channels").get<int>();
        auto sc = bb.at("stage_channels").get<std::vector<int>>();
        auto bp = bb.at("blocks_per_stage").get<std::vector<int>>();
        if (sc.size() != 4 || bp.size() != 4)
            throw ConfigError("backbone.stage_channels / blocks_per_stage need exactly 4 entries");
        std::copy(sc.begin(), sc.end(), cfg.backbone.stage_channels.begin());
        std::copy(bp.begin(), bp.end(), cfg.backbone.blocks_per_stage.begin());
        cfg.backbone.activation_slope = bb.value("activation_slope", 0.1f);

        const auto& pyr = j.at("pyramid");
        cfg.pyramid.num_paths = pyr.at("num_paths").get<int>();
        cfg.pyramid.num_levels = pyr.at("num_levels").get<int>();
        cfg.pyramid.path_width = pyr.at("path_width").get<int>();

        const auto& hd = j.at("head");
        cfg.head.num_classes = hd.at("num_classes").get<int>();
        cfg.head.conf_threshold = hd.value("conf_threshold", 0.25f);
        cfg.head.iou_threshold = hd.value("iou_threshold", 0.45f);
        if (hd.contains("anchors")) {
            for (const auto& level : hd.at("anchors")) {
                std::vector<std::pair<float, float>> l;
                for (const auto& a : level) l.emplace_back(a.at(0).get<float>(), a.at(1).get<float>());
                cfg.head.anchors.push_back(std::move(l));
            }
        } else {
            cfg.head.anchors = default_anchors(cfg.pyramid);
        }

        if (j.contains("text")) {
            const auto& tx = j.at("text");
            cfg.text.tau = tx.value("tau", 0.5f);
            cfg.text.stopword_file = tx.value("stopword_file", cfg.text.stopword_file);
            cfg.text.exception_file = tx.value("exception_file", cfg.text.exception_file);
        }
        cfg.seed = j.value("seed", 42ull);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    validate_config(cfg);
    return cfg;
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse '" + path + "': " + e.what());
    }
    return config_from_json(j);
}

inline void save_config(const PipelineConfig& cfg, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << config_to_json(cfg).dump(2) << "\n";
}

// Shipped desk-scale presets. The MSP preset doubles backbone widths so the
// shipped configs reproduce the params/flops ordering CSP < ELAN < MSP.
inline PipelineConfig preset(const std::string& name) {
    PipelineConfig cfg;
    if (name == "desk-csp") {
        cfg.backbone.kind = StageBlockKind::CSP;
    } else if (name == "desk-elan") {
        cfg.backbone.kind = StageBlockKind::ELAN;
    } else if (name == "desk-msp") {
        cfg.backbone.kind = StageBlockKind::MSP;
        cfg.backbone.stem_channels = 32;
        cfg.backbone.stage_channels = {32, 64, 128, 256};
    } else if (name == "desk-csp-2x") {
        cfg.backbone.kind = StageBlockKind::CSP;
        cfg.backbone.stem_channels = 32;
        cfg.backbone.stage_channels = {32, 64, 128, 256};
    } else if (name == "desk-csp-4x") {
        cfg.backbone.kind = StageBlockKind::CSP;
        cfg.backbone.stem_channels = 64;
        cfg.backbone.stage_channels = {64, 128, 256, 512};
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    cfg.head.anchors = default_anchors(cfg.pyramid);
    validate_config(cfg);
    return cfg;
}

} // namespace prbnet

#endif
