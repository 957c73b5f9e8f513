#include <catch2/catch_amalgamated.hpp>

#include "prbnet/backbone.hpp"
#include "prbnet/graph.hpp"
#include "test_util.hpp"

using namespace prbnet;
using testutil::random_tensor;

namespace {

WeightContainer block_weights(const std::string& base, int width, int depth, bool identity_fuse,
                              int fuse_in = -1) {
    if (fuse_in < 0) fuse_in = width;
    WeightContainer wc;
    const int half = width / 2;
    for (int u = 1; u <= depth; ++u) {
        WeightEntry w;
        w.shape = {static_cast<uint32_t>(half), static_cast<uint32_t>(half), 3, 3};
        w.data.assign(w.element_count(), 0.0f);
        wc.entries[base + ".conv" + std::to_string(u) + ".weight"] = w;
        WeightEntry b;
        b.shape = {static_cast<uint32_t>(half)};
        b.data.assign(half, 0.0f);
        wc.entries[base + ".conv" + std::to_string(u) + ".bias"] = b;
    }
    WeightEntry fw;
    fw.shape = {static_cast<uint32_t>(width), static_cast<uint32_t>(fuse_in), 1, 1};
    fw.data.assign(fw.element_count(), 0.0f);
    if (identity_fuse)
        for (int o = 0; o < width; ++o) fw.data[static_cast<size_t>(o) * fuse_in + o] = 1.0f;
    wc.entries[base + ".fuse.weight"] = fw;
    WeightEntry fb;
    fb.shape = {static_cast<uint32_t>(width)};
    fb.data.assign(width, 0.0f);
    wc.entries[base + ".fuse.bias"] = fb;
    return wc;
}

} // namespace

TEST_CASE("csp_block: zero processed branch passes bypass channels through") {
    const int width = 8;
    WeightContainer wc = block_weights("blk", width, 1, /*identity_fuse=*/true);
    Tensor in = random_tensor(5, 1, width, 6, 6);
    Tensor out = csp_block(in, width, 1, wc, "blk", 0.1f);
    REQUIRE(out.same_shape(in));
    // zero conv weights make the processed half a pure residual copy; the
    // identity fuse reproduces the bypass half verbatim
    for (int ic = 0; ic < width / 2; ++ic)
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 6; ++x) REQUIRE(out.at(0, ic, y, x) == in.at(0, ic, y, x));
}

TEST_CASE("csp_block shape contract on seeded input") {
    PipelineConfig cfg = preset("desk-csp");
    WeightContainer wc = seed_weights(cfg, 9);
    Tensor in = random_tensor(7, 1, 16, 16, 16);
    Tensor out = csp_block(in, 16, kBlockDepth, wc, "backbone.stage1.block0", 0.1f);
    REQUIRE(out.same_shape(in));
    REQUIRE_THROWS_AS(csp_block(random_tensor(8, 1, 7, 4, 4), 7, 1, wc, "x", 0.1f), ConfigError);
}

TEST_CASE("elan_block: depth-1 fusion consumes 2*width channels") {
    const int width = 8;
    WeightContainer wc;
    {
        WeightEntry w;
        w.shape = {width, width, 3, 3};
        w.data.assign(w.element_count(), 0.01f);
        wc.entries["blk.conv1.weight"] = w;
        WeightEntry b;
        b.shape = {width};
        b.data.assign(width, 0.0f);
        wc.entries["blk.conv1.bias"] = b;
        WeightEntry fw;
        fw.shape = {width, 2 * width, 1, 1}; // cat{input, unit1} = 2*width members
        fw.data.assign(fw.element_count(), 0.01f);
        wc.entries["blk.fuse.weight"] = fw;
        WeightEntry fb;
        fb.shape = {width};
        fb.data.assign(width, 0.0f);
        wc.entries["blk.fuse.bias"] = fb;
    }
    Tensor in = random_tensor(9, 1, width, 5, 5);
    Tensor out = elan_block(in, width, 1, wc, "blk", 0.1f);
    REQUIRE(out.same_shape(in));
}

TEST_CASE("elan params exceed csp params at identical width and depth") {
    PipelineConfig csp = preset("desk-csp");
    PipelineConfig elan = csp;
    elan.backbone.kind = StageBlockKind::ELAN;
    long long p_csp = 0, p_elan = 0;
    for (const GraphNode& n : enumerate_conv_nodes(csp))
        if (n.name.find(".block") != std::string::npos) p_csp += n.param_count();
    for (const GraphNode& n : enumerate_conv_nodes(elan))
        if (n.name.find(".block") != std::string::npos) p_elan += n.param_count();
    REQUIRE(p_elan > p_csp);
}

TEST_CASE("msp_block: no tap degenerates to the csp graph structure") {
    PipelineConfig csp = preset("desk-csp");
    PipelineConfig msp = csp;
    msp.backbone.kind = StageBlockKind::MSP;
    auto stage1_nodes = [](const PipelineConfig& cfg) {
        std::vector<std::string> names;
        for (const GraphNode& n : build_graph(cfg, 64, 64))
            if (n.name.rfind("backbone.stage1.", 0) == 0) names.push_back(n.name);
        return names;
    };
    // stage 1 has no previous stage, so MSP and CSP build identical node lists
    REQUIRE(stage1_nodes(csp) == stage1_nodes(msp));
}

TEST_CASE("msp_block runs with a tap and rejects mis-sized taps") {
    const int width = 8, tap_c = 4;
    WeightContainer wc = block_weights("blk", width, 1, false, width + width / 2);
    WeightEntry tw;
    tw.shape = {width / 2, tap_c, 1, 1};
    tw.data.assign(tw.element_count(), 0.05f);
    wc.entries["blk.tapproj.weight"] = tw;
    WeightEntry tb;
    tb.shape = {width / 2};
    tb.data.assign(width / 2, 0.0f);
    wc.entries["blk.tapproj.bias"] = tb;

    Tensor in = random_tensor(15, 1, width, 6, 6);
    Tensor tap = random_tensor(16, 1, tap_c, 6, 6);
    auto [out, next_tap] = msp_block(in, tap, width, 1, wc, "blk", 0.1f);
    REQUIRE(out.same_shape(in));
    REQUIRE(next_tap.c == width / 2);

    Tensor bad_tap = random_tensor(17, 1, tap_c, 4, 4);
    REQUIRE_THROWS_AS(msp_block(in, bad_tap, width, 1, wc, "blk", 0.1f), ShapeError);
}

TEST_CASE("backbone_forward shape algebra and stride schedule") {
    for (const char* name : {"desk-csp", "desk-elan", "desk-msp"}) {
        PipelineConfig cfg = preset(name);
        WeightContainer wc = seed_weights(cfg, 1);
        for (int hw : {64, 96}) {
            Tensor img = random_tensor(21, 1, 3, hw, hw, 0.0f, 1.0f);
            FeatureSet fs = backbone_forward(img, cfg.backbone, wc);
            for (int i = 0; i < 4; ++i) {
                int stride = 4 << i;
                REQUIRE(fs.level(i).c == cfg.backbone.stage_channels[i]);
                REQUIRE(fs.level(i).h == hw / stride);
                REQUIRE(fs.level(i).w == hw / stride);
            }
        }
    }
}

TEST_CASE("backbone_forward shapes match the reference example") {
    PipelineConfig cfg = preset("desk-csp");
    WeightContainer wc = seed_weights(cfg, 42);
    Tensor img = random_tensor(23, 1, 3, 64, 64, 0.0f, 1.0f);
    FeatureSet fs = backbone_forward(img, cfg.backbone, wc);
    REQUIRE(fs.x0.shape_str() == "1x16x16x16");
    REQUIRE(fs.x1.shape_str() == "1x32x8x8");
    REQUIRE(fs.x2.shape_str() == "1x64x4x4");
    REQUIRE(fs.x3.shape_str() == "1x128x2x2");
}

TEST_CASE("backbone_forward is deterministic") {
    PipelineConfig cfg = preset("desk-msp");
    WeightContainer wc = seed_weights(cfg, 3);
    Tensor img = random_tensor(29, 1, 3, 64, 64, 0.0f, 1.0f);
    FeatureSet a = backbone_forward(img, cfg.backbone, wc);
    FeatureSet b = backbone_forward(img, cfg.backbone, wc);
    for (int i = 0; i < 4; ++i) REQUIRE(a.level(i).data == b.level(i).data);
}

TEST_CASE("backbone_forward rejects bad inputs") {
    PipelineConfig cfg = preset("desk-csp");
    WeightContainer wc = seed_weights(cfg, 1);
    REQUIRE_THROWS_AS(backbone_forward(random_tensor(1, 1, 3, 60, 64, 0, 1), cfg.backbone, wc),
                      ArgumentError);
    REQUIRE_THROWS_AS(backbone_forward(random_tensor(1, 1, 4, 64, 64, 0, 1), cfg.backbone, wc),
                      ArgumentError);
}

TEST_CASE("backbone forward consumes exactly the enumerated backbone nodes") {
    for (const char* name : {"desk-csp", "desk-elan", "desk-msp"}) {
        PipelineConfig cfg = preset(name);
        WeightContainer wc = seed_weights(cfg, 5);
        std::unordered_set<std::string> touched;
        wc.access_log = &touched;
        backbone_forward(random_tensor(31, 1, 3, 64, 64, 0, 1), cfg.backbone, wc);
        for (const GraphNode& n : enumerate_conv_nodes(cfg)) {
            if (n.name.rfind("backbone.", 0) != 0) continue;
            REQUIRE(touched.count(n.name + ".weight") == 1);
            REQUIRE(touched.count(n.name + ".bias") == 1);
        }
    }
}

TEST_CASE("shipped preset params follow the CSP < ELAN < MSP ordering") {
    auto total = [](const char* name) {
        long long t = 0;
        for (const GraphNode& n : enumerate_conv_nodes(preset(name))) t += n.param_count();
        return t;
    };
    REQUIRE(total("desk-csp") < total("desk-elan"));
    REQUIRE(total("desk-elan") < total("desk-msp"));
}
