#ifndef PRBNET_BACKBONE_HPP
#define PRBNET_BACKBONE_HPP

#include <optional>
#include <string>

#include "prbnet/config.hpp"
#include "prbnet/tensor.hpp"
#include "prbnet/weights.hpp"

namespace prbnet {

// backbone outputs X_0..X_3 at strides 4/8/16/32
struct FeatureSet {
    Tensor x0, x1, x2, x3;

    const Tensor& level(int i) const {
        switch (i) {
            case 0: return x0;
            case 1: return x1;
            case 2: return x2;
            case 3: return x3;
        }
        throw ArgumentError("feature level out of range");
    }
};

namespace detail {

inline Tensor slice_channels(const Tensor& t, int c0, int c1) {
    if (c0 < 0 || c1 > t.c || c0 >= c1) throw ShapeError("bad channel slice");
    Tensor out(t.n, c1 - c0, t.h, t.w);
    const size_t plane = static_cast<size_t>(t.h) * t.w;
    for (int in = 0; in < t.n; ++in)
        for (int ic = c0; ic < c1; ++ic) {
            const float* src = t.data.data() + t.index(in, ic, 0, 0);
            float* dst = out.data.data() + out.index(in, ic - c0, 0, 0);
            for (size_t p = 0; p < plane; ++p) dst[p] = src[p];
        }
    return out;
}

inline Tensor add(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("add shape mismatch");
    Tensor out = a;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

} // namespace detail

// channel-split partial block: one half processed by residual conv units,
// the other bypasses; halves re-fused by a 1x1 conv
inline Tensor csp_block(const Tensor& input, int width, int depth, const WeightContainer& wc,
                        const std::string& base, float slope) {
    if (width % 2 != 0) throw ConfigError("csp_block width must be even (" + base + ")");
    if (input.c != width) throw ShapeError("csp_block channel mismatch at " + base);
    const int half = width / 2;
    Tensor bypass = detail::slice_channels(input, 0, half);
    Tensor y = detail::slice_channels(input, half, width);
    for (int u = 1; u <= depth; ++u) {
        ConvSpec s = wc.conv(base + ".conv" + std::to_string(u), half, half, 3, 3, 1, 1, 1, 1);
        y = detail::add(y, leaky_relu(conv2d(y, s), slope));
    }
    Tensor cat = concat_channels({bypass, y});
    return conv2d(cat, wc.conv(base + ".fuse", width, width, 1, 1, 1, 1, 0, 0));
}

// dense layer aggregation: fuse input plus every intermediate unit output
inline Tensor elan_block(const Tensor& input, int width, int depth, const WeightContainer& wc,
                         const std::string& base, float slope) {
    if (input.c != width) throw ShapeError("elan_block channel mismatch at " + base);
    std::vector<Tensor> members = {input};
    Tensor y = input;
    for (int u = 1; u <= depth; ++u) {
        ConvSpec s = wc.conv(base + ".conv" + std::to_string(u), width, width, 3, 3, 1, 1, 1, 1);
        y = leaky_relu(conv2d(y, s), slope);
        members.push_back(y);
    }
    Tensor cat = concat_channels(members);
    return conv2d(cat, wc.conv(base + ".fuse", (depth + 1) * width, width, 1, 1, 1, 1, 0, 0));
}

// CSP-style split plus a cross-stage tap: the previous stage's bypass half,
// 1x1-projected, joins the fusion. Returns (output, this block's tap).
inline std::pair<Tensor, Tensor> msp_block(const Tensor& input,
                                           const std::optional<Tensor>& prev_stage_tap, int width,
                                           int depth, const WeightContainer& wc,
                                           const std::string& base, float slope) {
    if (width % 2 != 0) throw ConfigError("msp_block width must be even (" + base + ")");
    if (input.c != width) throw ShapeError("msp_block channel mismatch at " + base);
    const int half = width / 2;
    Tensor bypass = detail::slice_channels(input, 0, half);
    Tensor y = detail::slice_channels(input, half, width);
    for (int u = 1; u <= depth; ++u) {
        ConvSpec s = wc.conv(base + ".conv" + std::to_string(u), half, half, 3, 3, 1, 1, 1, 1);
        y = detail::add(y, leaky_relu(conv2d(y, s), slope));
    }
    std::vector<Tensor> members = {bypass, y};
    if (prev_stage_tap) {
        if (prev_stage_tap->h != input.h || prev_stage_tap->w != input.w)
            throw ShapeError("msp tap spatial dims mismatch at " + base);
        ConvSpec proj =
            wc.conv(base + ".tapproj", prev_stage_tap->c, half, 1, 1, 1, 1, 0, 0);
        members.push_back(conv2d(*prev_stage_tap, proj));
    }
    Tensor cat = concat_channels(members);
    Tensor out = conv2d(cat, wc.conv(base + ".fuse", cat.c, width, 1, 1, 1, 1, 0, 0));
    return {std::move(out), std::move(bypass)};
}

// stem (stride 2) then 4 stages, each a stride-2 transition conv followed by
// the configured stage blocks; emits X_0..X_3 at strides 4/8/16/32
inline FeatureSet backbone_forward(const Tensor& image, const BackboneConfig& cfg,
                                   const WeightContainer& wc) {
    if (image.c != 3) throw ArgumentError("backbone expects a 3-channel image");
    if (image.h % 32 != 0 || image.w % 32 != 0)
        throw ArgumentError("image dims must be divisible by 32, got " + image.shape_str());
    const float slope = cfg.activation_slope;

    // downsampling convs use 2x2 stride-2, pad 0: exact integer halving under
    // the strict output-dimension rule
    Tensor t = leaky_relu(
        conv2d(image, wc.conv("backbone.stem.conv1", 3, cfg.stem_channels, 2, 2, 2, 2, 0, 0)),
        slope);
    t = leaky_relu(
        conv2d(t, wc.conv("backbone.stem.conv2", cfg.stem_channels, cfg.stem_channels, 3, 3, 1, 1,
                          1, 1)),
        slope);

    FeatureSet fs;
    int prev_c = cfg.stem_channels;
    std::optional<Tensor> stage_tap; // MSP only: previous stage's bypass half
    for (int s = 1; s <= 4; ++s) {
        const std::string stage = "backbone.stage" + std::to_string(s);
        const int width = cfg.stage_channels[s - 1];
        t = leaky_relu(conv2d(t, wc.conv(stage + ".down", prev_c, width, 2, 2, 2, 2, 0, 0)), slope);

        std::optional<Tensor> tap_here;
        if (cfg.kind == StageBlockKind::MSP && stage_tap)
            tap_here = downsample_avg2x(*stage_tap);

        std::optional<Tensor> next_tap;
        for (int b = 0; b < cfg.blocks_per_stage[s - 1]; ++b) {
            const std::string base = stage + ".block" + std::to_string(b);
            switch (cfg.kind) {
                case StageBlockKind::CSP:
                    t = csp_block(t, width, kBlockDepth, wc, base, slope);
                    break;
                case StageBlockKind::ELAN:
                    t = elan_block(t, width, kBlockDepth, wc, base, slope);
                    break;
                case StageBlockKind::MSP: {
                    auto [out, tap] = msp_block(t, tap_here, width, kBlockDepth, wc, base, slope);
                    t = std::move(out);
                    next_tap = std::move(tap);
                    break;
                }
            }
        }
        stage_tap = std::move(next_tap);
        prev_c = width;
        (s == 1 ? fs.x0 : s == 2 ? fs.x1 : s == 3 ? fs.x2 : fs.x3) = t;
    }
    return fs;
}

} // namespace prbnet

#endif
