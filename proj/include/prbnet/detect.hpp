#ifndef PRBNET_DETECT_HPP
#define PRBNET_DETECT_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "prbnet/backbone.hpp"
#include "prbnet/config.hpp"
#include "prbnet/filter.hpp"
#include "prbnet/graph.hpp"
#include "prbnet/heads.hpp"
#include "prbnet/image.hpp"
#include "prbnet/pyramid.hpp"
#include "prbnet/text.hpp"

namespace prbnet {

struct DetectOptions {
    std::string image_path;
    std::string prompt;
    bool no_prompt = false; // bypass semantic filtering
    bool pad = false;
};

namespace detail {

// fixed 6-decimal formatting for byte-stable output
inline std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace detail

// Detection JSON, serialized by hand so repeated runs are byte-identical.
inline std::string detection_json(const DetectOptions& opt, const FilteredResult& result,
                                  const CategoryVocab& vocab) {
    std::string j = "{\n";
    j += "  \"image\": \"" + detail::json_escape(opt.image_path) + "\",\n";
    j += "  \"prompt\": \"" + detail::json_escape(opt.prompt) + "\",\n";
    j += "  \"prompt_classes\": [";
    bool first = true;
    for (int id : result.prompt_set.class_ids) {
        if (!first) j += ", ";
        j += "\"" + detail::json_escape(vocab.classes[id].name) + "\"";
        first = false;
    }
    j += "],\n  \"detections\": [";
    first = true;
    for (const Detection& d : result.detections) {
        j += first ? "\n" : ",\n";
        first = false;
        j += "    {\"class\": \"" + detail::json_escape(vocab.classes[d.class_id].name) +
             "\", \"class_id\": " + std::to_string(d.class_id) + ", \"score\": " +
             detail::fmt6(d.score) + ", \"box\": [" + detail::fmt6(d.x1) + ", " +
             detail::fmt6(d.y1) + ", " + detail::fmt6(d.x2) + ", " + detail::fmt6(d.y2) + "]}";
    }
    j += first ? "],\n" : "\n  ],\n";
    j += "  \"dropped_count\": " + std::to_string(result.dropped_count) + "\n}\n";
    return j;
}

// backbone -> pyramid -> lead heads -> decode -> nms
inline std::vector<Detection> run_detector(const Tensor& image, const PipelineConfig& cfg,
                                           const WeightContainer& wc) {
    FeatureSet features = backbone_forward(image, cfg.backbone, wc);
    FusionState fused = pyramid_forward(features, cfg.pyramid, wc, cfg.backbone.activation_slope);
    std::vector<RawPredictionLevel> raw;
    std::vector<int> strides;
    for (int k = 1; k <= cfg.pyramid.num_levels; ++k) {
        raw.push_back(lead_head_forward(fused.lead[k - 1], cfg.head.num_classes,
                                        cfg.head.anchors_per_level(), k, wc));
        strides.push_back(cfg.pyramid.level_stride(k));
    }
    std::vector<Detection> dets =
        decode(raw, cfg.head.anchors, strides, cfg.head.conf_threshold, image.w, image.h);
    return nms(dets, cfg.head.iou_threshold);
}

// Full pipeline: detect, derive the prompt class set, filter, write JSON
// (write-then-rename, so failures never leave a partial output file).
inline FilteredResult run_detect(const DetectOptions& opt, const PipelineConfig& cfg,
                                 const WeightContainer& wc, const StopWords& stop,
                                 const Lemmatizer& lm, const EmbeddingTable& table,
                                 const CategoryVocab& vocab, const std::string& out_path) {
    if (cfg.head.num_classes != static_cast<int>(vocab.classes.size()))
        throw ConfigError("head.num_classes (" + std::to_string(cfg.head.num_classes) +
                          ") != vocab size (" + std::to_string(vocab.classes.size()) + ")");
    Tensor image = load_image_ppm(opt.image_path, opt.pad);
    std::vector<Detection> dets = run_detector(image, cfg, wc);

    FilteredResult result;
    if (opt.no_prompt) {
        result.detections = dets;
        for (const CategoryClass& c : vocab.classes) result.prompt_set.class_ids.insert(c.class_id);
    } else {
        PromptClassSet p_i = prompt_to_classes(opt.prompt, stop, lm, table, vocab, cfg.text.tau);
        result = filter(dets, p_i);
    }

    if (!out_path.empty()) {
        std::string tmp = out_path + ".tmp";
        {
            std::ofstream os(tmp, std::ios::binary);
            if (!os) throw IoError("cannot open '" + tmp + "' for writing");
            os << detection_json(opt, result, vocab);
            if (!os) throw IoError("write failure on '" + tmp + "'");
        }
        std::filesystem::rename(tmp, out_path);
    }
    return result;
}

} // namespace prbnet

#endif
