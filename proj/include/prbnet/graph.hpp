#ifndef PRBNET_GRAPH_HPP
#define PRBNET_GRAPH_HPP

#include <string>
#include <vector>

#include "prbnet/config.hpp"
#include "prbnet/errors.hpp"
#include "prbnet/weights.hpp"

namespace prbnet {

// One node of the forward graph. Conv nodes carry the weight arrays
// "<name>.weight" / "<name>.bias"; elemwise nodes (activations, resamples,
// concats, residual adds) carry only an output element count for FLOP
// accounting.
struct GraphNode {
    enum class Kind { Conv, Elemwise };
    std::string name;
    Kind kind = Kind::Elemwise;
    // conv geometry
    int in_c = 0, out_c = 0, kh = 0, kw = 0, sh = 1, sw = 1, ph = 0, pw = 0;
    // output spatial size (h*w), for flop counting
    long long out_h = 0, out_w = 0;

    long long out_elems() const { return static_cast<long long>(out_c) * out_h * out_w; }
    long long param_count() const {
        if (kind != Kind::Conv) return 0;
        return static_cast<long long>(out_c) * in_c * kh * kw + out_c;
    }
    long long flops() const {
        if (kind == Kind::Conv)
            return 2ll * kh * kw * in_c * out_c * out_h * out_w;
        return out_elems();
    }
};

namespace graphdetail {

struct Builder {
    std::vector<GraphNode>& nodes;

    void conv(const std::string& name, int in_c, int out_c, int k, int stride, int pad, int out_h,
              int out_w) {
        GraphNode n;
        n.name = name;
        n.kind = GraphNode::Kind::Conv;
        n.in_c = in_c;
        n.out_c = out_c;
        n.kh = n.kw = k;
        n.sh = n.sw = stride;
        n.ph = n.pw = pad;
        n.out_h = out_h;
        n.out_w = out_w;
        nodes.push_back(std::move(n));
    }

    void elemwise(const std::string& name, int c, int out_h, int out_w) {
        GraphNode n;
        n.name = name;
        n.out_c = c;
        n.out_h = out_h;
        n.out_w = out_w;
        nodes.push_back(std::move(n));
    }

    // resample from one stride to another; one elemwise node summing all steps
    void resample(const std::string& name, int c, int from_stride, int to_stride, int img_h,
                  int img_w) {
        if (from_stride == to_stride) return;
        long long elems = 0;
        int s = from_stride;
        while (s > to_stride) {
            s /= 2;
            elems += static_cast<long long>(c) * (img_h / s) * (img_w / s);
        }
        while (s < to_stride) {
            s *= 2;
            elems += static_cast<long long>(c) * (img_h / s) * (img_w / s);
        }
        GraphNode n;
        n.name = name;
        n.out_c = 1;
        n.out_h = elems;
        n.out_w = 1;
        nodes.push_back(std::move(n));
    }
};

} // namespace graphdetail

// Enumerates every node of the forward graph, in evaluation order.
// backbone_forward / pyramid_forward / lead_head_forward consume exactly the
// conv nodes listed here.
inline std::vector<GraphNode> build_graph(const PipelineConfig& cfg, int img_h, int img_w) {
    if (img_h % 32 != 0 || img_w % 32 != 0)
        throw ConfigError("input size must be divisible by 32");
    std::vector<GraphNode> nodes;
    graphdetail::Builder g{nodes};
    const BackboneConfig& bb = cfg.backbone;
    const int depth = kBlockDepth;

    // --- backbone ---
    int h = img_h / 2, w = img_w / 2;
    g.conv("backbone.stem.conv1", 3, bb.stem_channels, 2, 2, 0, h, w);
    g.elemwise("backbone.stem.act1", bb.stem_channels, h, w);
    g.conv("backbone.stem.conv2", bb.stem_channels, bb.stem_channels, 3, 1, 1, h, w);
    g.elemwise("backbone.stem.act2", bb.stem_channels, h, w);

    int prev_c = bb.stem_channels;
    for (int s = 1; s <= 4; ++s) {
        const std::string stage = "backbone.stage" + std::to_string(s);
        const int wc = bb.stage_channels[s - 1];
        h /= 2;
        w /= 2;
        g.conv(stage + ".down", prev_c, wc, 2, 2, 0, h, w);
        g.elemwise(stage + ".actdown", wc, h, w);
        const bool has_tap = bb.kind == StageBlockKind::MSP && s > 1;
        const int tap_c = has_tap ? bb.stage_channels[s - 2] / 2 : 0;
        if (has_tap) g.elemwise(stage + ".tapdown", tap_c, h, w);
        for (int b = 0; b < bb.blocks_per_stage[s - 1]; ++b) {
            const std::string base = stage + ".block" + std::to_string(b);
            if (bb.kind == StageBlockKind::ELAN) {
                for (int u = 1; u <= depth; ++u) {
                    g.conv(base + ".conv" + std::to_string(u), wc, wc, 3, 1, 1, h, w);
                    g.elemwise(base + ".act" + std::to_string(u), wc, h, w);
                }
                g.elemwise(base + ".concat", (depth + 1) * wc, h, w);
                g.conv(base + ".fuse", (depth + 1) * wc, wc, 1, 1, 0, h, w);
            } else {
                const int half = wc / 2;
                for (int u = 1; u <= depth; ++u) {
                    g.conv(base + ".conv" + std::to_string(u), half, half, 3, 1, 1, h, w);
                    g.elemwise(base + ".act" + std::to_string(u), half, h, w);
                    g.elemwise(base + ".add" + std::to_string(u), half, h, w);
                }
                int fuse_in = 2 * half;
                if (has_tap) {
                    g.conv(base + ".tapproj", tap_c, half, 1, 1, 0, h, w);
                    fuse_in += half;
                }
                g.elemwise(base + ".concat", fuse_in, h, w);
                g.conv(base + ".fuse", fuse_in, wc, 1, 1, 0, h, w);
            }
        }
        prev_c = wc;
    }

    // --- pyramid ---
    const PyramidConfig& pyr = cfg.pyramid;
    const int cp = pyr.path_width;
    auto feat_stride = [](int i) { return 4 << i; };
    auto feat_c = [&](int i) { return bb.stage_channels[i]; };
    for (int j = 1; j <= pyr.num_paths; ++j) {
        const std::string path = "pyramid.path" + std::to_string(j);
        for (int k = 1; k <= pyr.num_levels; ++k) {
            const std::string core = path + ".core" + std::to_string(k);
            const int sk = pyr.level_stride(k);
            const int hk = img_h / sk, wk = img_w / sk;
            int n_in = 0;
            for (int i : {4 - k, 3 - k}) {
                if (i < 0 || i > 3) continue;
                g.resample(core + ".resample.x" + std::to_string(i), feat_c(i), feat_stride(i), sk,
                           img_h, img_w);
                g.conv(core + ".projx" + std::to_string(i), feat_c(i), cp, 1, 1, 0, hk, wk);
                ++n_in;
            }
            if (k > 1) {
                g.resample(core + ".resample.prev", cp, pyr.level_stride(k - 1), sk, img_h, img_w);
                g.conv(core + ".projprev", cp, cp, 1, 1, 0, hk, wk);
                ++n_in;
            }
            g.elemwise(core + ".concat", n_in * cp, hk, wk);
            g.conv(core + ".fuse", n_in * cp, cp, 3, 1, 1, hk, wk);
            g.elemwise(core + ".act", cp, hk, wk);
        }
        for (int k = pyr.num_levels; k >= 1; --k) {
            const std::string bfm = path + ".bfm" + std::to_string(k);
            const int sk = pyr.level_stride(k);
            const int hk = img_h / sk, wk = img_w / sk;
            if (k == pyr.num_levels) {
                g.conv(bfm + ".proj", cp, cp, 1, 1, 0, hk, wk);
            } else {
                g.resample(bfm + ".resample", cp, pyr.level_stride(k + 1), sk, img_h, img_w);
                g.conv(bfm + ".proj", cp, cp, 1, 1, 0, hk, wk);
                g.elemwise(bfm + ".concat", 2 * cp, hk, wk);
                g.conv(bfm + ".fuse", 2 * cp, cp, 3, 1, 1, hk, wk);
                g.elemwise(bfm + ".act", cp, hk, wk);
            }
        }
    }
    for (int k = 1; k <= pyr.num_levels; ++k) {
        const int sk = pyr.level_stride(k);
        g.elemwise("pyramid.lead" + std::to_string(k) + ".concat", pyr.num_paths * cp, img_h / sk,
                   img_w / sk);
        g.elemwise("pyramid.aux" + std::to_string(k) + ".concat", pyr.num_paths * cp, img_h / sk,
                   img_w / sk);
    }

    // --- lead heads ---
    const int lead_c = pyr.num_paths * cp;
    const int a = cfg.head.anchors_per_level();
    for (int k = 1; k <= pyr.num_levels; ++k) {
        const std::string lvl = "head.level" + std::to_string(k);
        const int sk = pyr.level_stride(k);
        const int hk = img_h / sk, wk = img_w / sk;
        g.conv(lvl + ".cls", lead_c, a * cfg.head.num_classes, 1, 1, 0, hk, wk);
        g.conv(lvl + ".box", lead_c, a * 4, 1, 1, 0, hk, wk);
        g.conv(lvl + ".obj", lead_c, a * 1, 1, 1, 0, hk, wk);
    }
    return nodes;
}

// Conv nodes only (the weight-bearing graph). Weight shapes do not depend on
// the input size; 64x64 is used as the canonical probe.
inline std::vector<GraphNode> enumerate_conv_nodes(const PipelineConfig& cfg) {
    std::vector<GraphNode> out;
    for (GraphNode& n : build_graph(cfg, 64, 64))
        if (n.kind == GraphNode::Kind::Conv) out.push_back(std::move(n));
    return out;
}

// seeded init per the documented recipe in weights.hpp
inline WeightContainer seed_weights(const PipelineConfig& cfg, uint64_t seed) {
    WeightContainer wc;
    for (const GraphNode& n : enumerate_conv_nodes(cfg)) {
        WeightEntry wgt;
        wgt.shape = {static_cast<uint32_t>(n.out_c), static_cast<uint32_t>(n.in_c),
                     static_cast<uint32_t>(n.kh), static_cast<uint32_t>(n.kw)};
        wgt.data.resize(wgt.element_count());
        uint64_t hw = prng::fnv1a64(n.name + ".weight");
        for (size_t i = 0; i < wgt.data.size(); ++i)
            wgt.data[i] = prng::seeded_value(seed, hw, i);
        wc.entries.emplace(n.name + ".weight", std::move(wgt));

        WeightEntry b;
        b.shape = {static_cast<uint32_t>(n.out_c)};
        b.data.resize(n.out_c);
        uint64_t hb = prng::fnv1a64(n.name + ".bias");
        for (size_t i = 0; i < b.data.size(); ++i) b.data[i] = prng::seeded_value(seed, hb, i);
        wc.entries.emplace(n.name + ".bias", std::move(b));
    }
    return wc;
}

// strict mode: every graph array present with the right shape, nothing extra
inline void validate_weights(const WeightContainer& wc, const PipelineConfig& cfg) {
    size_t expected = 0;
    for (const GraphNode& n : enumerate_conv_nodes(cfg)) {
        wc.get(n.name + ".weight",
               {static_cast<uint32_t>(n.out_c), static_cast<uint32_t>(n.in_c),
                static_cast<uint32_t>(n.kh), static_cast<uint32_t>(n.kw)});
        wc.get(n.name + ".bias", {static_cast<uint32_t>(n.out_c)});
        expected += 2;
    }
    if (wc.entries.size() != expected) {
        std::unordered_set<std::string> known;
        for (const GraphNode& n : enumerate_conv_nodes(cfg)) {
            known.insert(n.name + ".weight");
            known.insert(n.name + ".bias");
        }
        for (const auto& [name, e] : wc.entries)
            if (!known.count(name)) throw WeightError("unexpected array '" + name + "'");
    }
}

inline WeightContainer load_weights(const std::string& path, const PipelineConfig& cfg) {
    WeightContainer wc = read_weights_file(path);
    validate_weights(wc, cfg);
    return wc;
}

} // namespace prbnet

#endif
