#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "prbnet/filter.hpp"

using namespace prbnet;

namespace {

PromptClassSet set_of(std::initializer_list<int> ids) {
    PromptClassSet p;
    p.class_ids = std::set<int>(ids);
    return p;
}

std::vector<Detection> random_dets(unsigned seed, int n, int classes) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> score(0.01f, 0.99f);
    std::uniform_real_distribution<float> pos(0.0f, 100.0f);
    std::vector<Detection> out;
    for (int i = 0; i < n; ++i) {
        Detection d;
        d.class_id = static_cast<int>(rng() % classes);
        d.score = score(rng);
        d.x1 = pos(rng);
        d.y1 = pos(rng);
        d.x2 = d.x1 + 1.0f + pos(rng);
        d.y2 = d.y1 + 1.0f + pos(rng);
        out.push_back(d);
    }
    return out;
}

} // namespace

TEST_CASE("filter keeps admitted classes and counts drops") {
    std::vector<Detection> dets = {
        {0, 0.9f, 0, 0, 10, 10},
        {1, 0.8f, 5, 5, 15, 15},
        {2, 0.7f, 20, 20, 30, 30},
        {0, 0.6f, 40, 40, 50, 50},
    };
    FilteredResult r = filter(dets, set_of({0}));
    REQUIRE(r.detections.size() == 2);
    REQUIRE(r.dropped_count == 2);
    for (const Detection& d : r.detections) REQUIRE(d.class_id == 0);
    REQUIRE(r.detections[0].score == 0.9f);
    REQUIRE(r.detections[1].score == 0.6f);
}

TEST_CASE("empty prompt set drops everything; full set drops nothing") {
    std::vector<Detection> dets = random_dets(7, 40, 4);
    FilteredResult none = filter(dets, set_of({}));
    REQUIRE(none.detections.empty());
    REQUIRE(none.dropped_count == dets.size());

    FilteredResult all = filter(dets, set_of({0, 1, 2, 3}));
    REQUIRE(all.detections.size() == dets.size());
    REQUIRE(all.dropped_count == 0);
}

TEST_CASE("output is sorted by detection order and boxes pass through untouched") {
    std::vector<Detection> dets = random_dets(11, 60, 3);
    FilteredResult r = filter(dets, set_of({0, 2}));
    for (size_t i = 1; i < r.detections.size(); ++i)
        REQUIRE_FALSE(detection_order(r.detections[i], r.detections[i - 1]));
    for (const Detection& kept : r.detections) {
        bool found = false;
        for (const Detection& d : dets)
            found |= d.class_id == kept.class_id && d.score == kept.score && d.x1 == kept.x1 &&
                     d.y1 == kept.y1 && d.x2 == kept.x2 && d.y2 == kept.y2;
        REQUIRE(found);
    }
    REQUIRE(r.detections.size() + r.dropped_count == dets.size());
}

TEST_CASE("filter output is a subset and filtering is idempotent") {
    for (unsigned seed : {21u, 22u, 23u, 24u}) {
        std::vector<Detection> dets = random_dets(seed, 50, 5);
        PromptClassSet p = set_of({1, 3});
        FilteredResult once = filter(dets, p);
        FilteredResult twice = filter(once.detections, p);
        REQUIRE(twice.dropped_count == 0);
        REQUIRE(twice.detections.size() == once.detections.size());
        for (size_t i = 0; i < once.detections.size(); ++i)
            REQUIRE(twice.detections[i].score == once.detections[i].score);
    }
}

TEST_CASE("kept set is monotone in the prompt class set") {
    std::vector<Detection> dets = random_dets(31, 80, 6);
    std::vector<PromptClassSet> chain = {set_of({2}), set_of({2, 4}), set_of({0, 2, 4}),
                                         set_of({0, 1, 2, 3, 4, 5})};
    size_t prev = 0;
    for (const PromptClassSet& p : chain) {
        FilteredResult r = filter(dets, p);
        REQUIRE(r.detections.size() >= prev);
        prev = r.detections.size();
    }
}

TEST_CASE("filter commutes with class-wise NMS") {
    for (unsigned seed : {41u, 42u, 43u, 44u, 45u}) {
        std::mt19937 rng(seed);
        std::uniform_real_distribution<float> score(0.01f, 0.99f);
        std::uniform_int_distribution<int> coord(0, 20);
        std::vector<Detection> dets;
        for (int i = 0; i < 40; ++i) {
            Detection d;
            d.class_id = static_cast<int>(rng() % 3);
            d.score = score(rng);
            d.x1 = static_cast<float>(coord(rng));
            d.y1 = static_cast<float>(coord(rng));
            d.x2 = d.x1 + 1.0f + static_cast<float>(coord(rng));
            d.y2 = d.y1 + 1.0f + static_cast<float>(coord(rng));
            dets.push_back(d);
        }
        PromptClassSet p = set_of({0, 2});
        std::vector<Detection> nms_then_filter = filter(nms(dets, 0.45f), p).detections;
        std::vector<Detection> filter_then_nms = nms(filter(dets, p).detections, 0.45f);
        REQUIRE(nms_then_filter.size() == filter_then_nms.size());
        for (size_t i = 0; i < nms_then_filter.size(); ++i) {
            REQUIRE(nms_then_filter[i].class_id == filter_then_nms[i].class_id);
            REQUIRE(nms_then_filter[i].score == filter_then_nms[i].score);
        }
    }
}

TEST_CASE("rescore hook applies to kept detections only") {
    std::vector<Detection> dets = {
        {0, 0.9f, 0, 0, 10, 10},
        {1, 0.8f, 5, 5, 15, 15},
    };
    FilteredResult r = filter(dets, set_of({0}), [](const Detection& d) { return d.score * 0.5f; });
    REQUIRE(r.detections.size() == 1);
    REQUIRE(r.detections[0].score == 0.45f);
}
