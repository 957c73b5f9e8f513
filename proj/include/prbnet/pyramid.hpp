#ifndef PRBNET_PYRAMID_HPP
#define PRBNET_PYRAMID_HPP

#include <optional>
#include <string>
#include <vector>

#include "prbnet/backbone.hpp"
#include "prbnet/config.hpp"
#include "prbnet/tensor.hpp"
#include "prbnet/weights.hpp"

namespace prbnet {

// CORE/BFM maps per path and level, plus the per-level LeadFusion/AuxFusion
// concatenations. Indices are 1-based to match the weight naming scheme.
struct FusionState {
    // core[j-1][k-1], bfm[j-1][k-1]
    std::vector<std::vector<Tensor>> core;
    std::vector<std::vector<Tensor>> bfm;
    std::vector<Tensor> lead; // lead[k-1]
    std::vector<Tensor> aux;  // aux[k-1]
};

namespace detail {

inline Tensor resample_to_stride(Tensor t, int from_stride, int to_stride) {
    while (from_stride > to_stride) {
        t = upsample_nearest2x(t);
        from_stride /= 2;
    }
    while (from_stride < to_stride) {
        t = downsample_avg2x(t);
        from_stride *= 2;
    }
    return t;
}

} // namespace detail

// Bottom-up fusion node for level k: inputs X_{4-k}, X_{3-k} and the previous
// CORE output, out-of-range members omitted. Each present input is resampled
// to the level stride, 1x1-projected to the path width, concatenated and
// fused by a 3x3 conv + activation.
inline Tensor core_step(const FeatureSet& features, const std::optional<Tensor>& core_prev, int j,
                        int k, const PyramidConfig& cfg, const WeightContainer& wc, float slope) {
    const std::string base = "pyramid.path" + std::to_string(j) + ".core" + std::to_string(k);
    const int sk = cfg.level_stride(k);
    const int cp = cfg.path_width;
    std::vector<Tensor> projected;
    for (int i : {4 - k, 3 - k}) {
        if (i < 0 || i > 3) continue;
        Tensor r = detail::resample_to_stride(features.level(i), 4 << i, sk);
        projected.push_back(
            conv2d(r, wc.conv(base + ".projx" + std::to_string(i), r.c, cp, 1, 1, 1, 1, 0, 0)));
    }
    if (k > 1) {
        if (!core_prev) throw ArgumentError("core_step level " + std::to_string(k) +
                                            " needs the previous CORE output");
        Tensor r = detail::resample_to_stride(*core_prev, cfg.level_stride(k - 1), sk);
        projected.push_back(conv2d(r, wc.conv(base + ".projprev", cp, cp, 1, 1, 1, 1, 0, 0)));
    }
    if (projected.empty()) throw ArgumentError("core_step has no inputs at level " + std::to_string(k));
    Tensor cat = concat_channels(projected);
    return leaky_relu(conv2d(cat, wc.conv(base + ".fuse", cat.c, cp, 3, 3, 1, 1, 1, 1)), slope);
}

// Top-down fusion node: {CORE_k, BFM_{k+1}}; at the boundary k = K the node
// is a 1x1 conv of CORE_K alone.
inline Tensor bfm_step(const Tensor& core_k, const std::optional<Tensor>& bfm_next, int j, int k,
                       const PyramidConfig& cfg, const WeightContainer& wc, float slope) {
    const std::string base = "pyramid.path" + std::to_string(j) + ".bfm" + std::to_string(k);
    const int cp = cfg.path_width;
    if (k == cfg.num_levels) {
        return conv2d(core_k, wc.conv(base + ".proj", cp, cp, 1, 1, 1, 1, 0, 0));
    }
    if (!bfm_next) throw ArgumentError("bfm_step level " + std::to_string(k) + " needs BFM_{k+1}");
    Tensor r = detail::resample_to_stride(*bfm_next, cfg.level_stride(k + 1), cfg.level_stride(k));
    Tensor proj = conv2d(r, wc.conv(base + ".proj", cp, cp, 1, 1, 1, 1, 0, 0));
    if (proj.h != core_k.h || proj.w != core_k.w)
        throw ShapeError("bfm_step stride mismatch at level " + std::to_string(k));
    Tensor cat = concat_channels({core_k, proj});
    return leaky_relu(conv2d(cat, wc.conv(base + ".fuse", 2 * cp, cp, 3, 3, 1, 1, 1, 1)), slope);
}

// Runs all J bi-fusion paths and forms LeadFusion_k = cat_j BFM^j_k and
// AuxFusion_k = cat_j CORE^j_k. Concat order is fixed by path index.
inline FusionState pyramid_forward(const FeatureSet& features, const PyramidConfig& cfg,
                                   const WeightContainer& wc, float slope) {
    FusionState st;
    const int J = cfg.num_paths, K = cfg.num_levels;
    st.core.resize(J);
    st.bfm.resize(J);
    for (int j = 1; j <= J; ++j) {
        auto& core = st.core[j - 1];
        auto& bfm = st.bfm[j - 1];
        core.reserve(K);
        for (int k = 1; k <= K; ++k) {
            std::optional<Tensor> prev;
            if (k > 1) prev = core[k - 2];
            core.push_back(core_step(features, prev, j, k, cfg, wc, slope));
        }
        bfm.resize(K);
        for (int k = K; k >= 1; --k) {
            std::optional<Tensor> next;
            if (k < K) next = bfm[k];
            bfm[k - 1] = bfm_step(core[k - 1], next, j, k, cfg, wc, slope);
        }
    }
    for (int k = 1; k <= K; ++k) {
        std::vector<Tensor> lead_members, aux_members;
        for (int j = 1; j <= J; ++j) {
            lead_members.push_back(st.bfm[j - 1][k - 1]);
            aux_members.push_back(st.core[j - 1][k - 1]);
        }
        st.lead.push_back(concat_channels(lead_members));
        st.aux.push_back(concat_channels(aux_members));
    }
    return st;
}

} // namespace prbnet

#endif
