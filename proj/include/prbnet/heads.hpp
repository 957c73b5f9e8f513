#ifndef PRBNET_HEADS_HPP
#define PRBNET_HEADS_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "prbnet/config.hpp"
#include "prbnet/tensor.hpp"
#include "prbnet/weights.hpp"

namespace prbnet {

// logits per level: cls (A*num_classes ch), box (A*4 ch), obj (A ch)
struct RawPredictionLevel {
    Tensor cls, box, obj;
};

struct Detection {
    int class_id = 0;
    float score = 0.0f;
    float x1 = 0, y1 = 0, x2 = 0, y2 = 0; // corner form, image coordinates
};

inline float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

// three parallel 1x1 conv branches on LeadFusion_k; outputs are logits
inline RawPredictionLevel lead_head_forward(const Tensor& lead_k, int num_classes, int anchors,
                                            int k, const WeightContainer& wc) {
    const std::string base = "head.level" + std::to_string(k);
    RawPredictionLevel out;
    out.cls = conv2d(lead_k, wc.conv(base + ".cls", lead_k.c, anchors * num_classes, 1, 1, 1, 1, 0, 0));
    out.box = conv2d(lead_k, wc.conv(base + ".box", lead_k.c, anchors * 4, 1, 1, 1, 1, 0, 0));
    out.obj = conv2d(lead_k, wc.conv(base + ".obj", lead_k.c, anchors * 1, 1, 1, 1, 1, 0, 0));
    return out;
}

// Anchor decode per cell (gx, gy) and anchor a:
//   cx = (2*sigmoid(tx) - 0.5 + gx) * stride        (cy analogous)
//   w  = (2*sigmoid(tw))^2 * anchor_w               (h analogous)
//   score = sigmoid(obj) * sigmoid(cls_c), c = argmax over classes
// emits a detection iff score >= conf_threshold; boxes converted to corner
// form and clipped to the image. Degenerate boxes after clipping are dropped.
inline std::vector<Detection> decode(const std::vector<RawPredictionLevel>& raw,
                                     const std::vector<std::vector<std::pair<float, float>>>& anchors,
                                     const std::vector<int>& strides, float conf_threshold,
                                     int img_w, int img_h) {
    if (raw.size() != anchors.size() || raw.size() != strides.size())
        throw ArgumentError("decode: levels, anchors, strides must align");
    std::vector<Detection> dets;
    for (size_t lvl = 0; lvl < raw.size(); ++lvl) {
        const RawPredictionLevel& r = raw[lvl];
        const float s = static_cast<float>(strides[lvl]);
        const int a_count = static_cast<int>(anchors[lvl].size());
        const int num_classes = r.cls.c / a_count;
        for (int gy = 0; gy < r.obj.h; ++gy)
            for (int gx = 0; gx < r.obj.w; ++gx)
                for (int a = 0; a < a_count; ++a) {
                    int best_c = 0;
                    float best_logit = r.cls.at(0, a * num_classes, gy, gx);
                    for (int c = 1; c < num_classes; ++c) {
                        float v = r.cls.at(0, a * num_classes + c, gy, gx);
                        if (v > best_logit) {
                            best_logit = v;
                            best_c = c;
                        }
                    }
                    float score = sigmoid(r.obj.at(0, a, gy, gx)) * sigmoid(best_logit);
                    if (score < conf_threshold) continue;
                    float tx = r.box.at(0, a * 4 + 0, gy, gx);
                    float ty = r.box.at(0, a * 4 + 1, gy, gx);
                    float tw = r.box.at(0, a * 4 + 2, gy, gx);
                    float th = r.box.at(0, a * 4 + 3, gy, gx);
                    float cx = (2.0f * sigmoid(tx) - 0.5f + static_cast<float>(gx)) * s;
                    float cy = (2.0f * sigmoid(ty) - 0.5f + static_cast<float>(gy)) * s;
                    float bw = 2.0f * sigmoid(tw);
                    bw = bw * bw * anchors[lvl][a].first;
                    float bh = 2.0f * sigmoid(th);
                    bh = bh * bh * anchors[lvl][a].second;
                    Detection d;
                    d.class_id = best_c;
                    d.score = score;
                    d.x1 = std::clamp(cx - bw * 0.5f, 0.0f, static_cast<float>(img_w));
                    d.y1 = std::clamp(cy - bh * 0.5f, 0.0f, static_cast<float>(img_h));
                    d.x2 = std::clamp(cx + bw * 0.5f, 0.0f, static_cast<float>(img_w));
                    d.y2 = std::clamp(cy + bh * 0.5f, 0.0f, static_cast<float>(img_h));
                    if (d.x1 >= d.x2 || d.y1 >= d.y2) continue;
                    dets.push_back(d);
                }
    }
    return dets;
}

inline float iou(float ax1, float ay1, float ax2, float ay2, float bx1, float by1, float bx2,
                 float by2) {
    float ix1 = std::max(ax1, bx1), iy1 = std::max(ay1, by1);
    float ix2 = std::min(ax2, bx2), iy2 = std::min(ay2, by2);
    float iw = std::max(0.0f, ix2 - ix1), ih = std::max(0.0f, iy2 - iy1);
    float inter = iw * ih;
    float area_a = (ax2 - ax1) * (ay2 - ay1);
    float area_b = (bx2 - bx1) * (by2 - by1);
    float uni = area_a + area_b - inter;
    return uni <= 0.0f ? 0.0f : inter / uni;
}

inline float iou(const Detection& a, const Detection& b) {
    return iou(a.x1, a.y1, a.x2, a.y2, b.x1, b.y1, b.x2, b.y2);
}

// score desc, then smaller class_id, then lexicographic box
inline bool detection_order(const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.class_id != b.class_id) return a.class_id < b.class_id;
    return std::tie(a.x1, a.y1, a.x2, a.y2) < std::tie(b.x1, b.y1, b.x2, b.y2);
}

// class-wise greedy suppression with deterministic tie-breaking
inline std::vector<Detection> nms(std::vector<Detection> dets, float iou_threshold) {
    if (iou_threshold <= 0.0f || iou_threshold > 1.0f)
        throw ArgumentError("nms iou_threshold must be in (0, 1]");
    std::sort(dets.begin(), dets.end(), detection_order);
    std::vector<Detection> kept;
    for (const Detection& d : dets) {
        bool suppressed = false;
        for (const Detection& k : kept)
            if (k.class_id == d.class_id && iou(k, d) >= iou_threshold) {
                suppressed = true;
                break;
            }
        if (!suppressed) kept.push_back(d);
    }
    return kept;
}

} // namespace prbnet

#endif
