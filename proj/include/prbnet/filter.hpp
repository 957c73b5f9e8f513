#ifndef PRBNET_FILTER_HPP
#define PRBNET_FILTER_HPP

#include <algorithm>
#include <vector>

#include "prbnet/heads.hpp"
#include "prbnet/text.hpp"

namespace prbnet {

struct FilteredResult {
    std::vector<Detection> detections; // sorted by score descending
    size_t dropped_count = 0;
    PromptClassSet prompt_set;
};

// Semantic filter: keep exactly the detections whose class_id is in
// the prompt class set. An empty set keeps nothing. Scores and boxes pass
// through unmodified. Score re-weighting could plug in here via `rescore`.
inline FilteredResult filter(const std::vector<Detection>& dets, const PromptClassSet& p_i,
                             float (*rescore)(const Detection&) = nullptr) {
    FilteredResult out;
    out.prompt_set = p_i;
    for (const Detection& d : dets) {
        if (p_i.class_ids.count(d.class_id)) {
            Detection kept = d;
            if (rescore) kept.score = rescore(d);
            out.detections.push_back(kept);
        } else {
            ++out.dropped_count;
        }
    }
    std::stable_sort(out.detections.begin(), out.detections.end(), detection_order);
    return out;
}

} // namespace prbnet

#endif
