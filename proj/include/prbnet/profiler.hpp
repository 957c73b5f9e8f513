#ifndef PRBNET_PROFILER_HPP
#define PRBNET_PROFILER_HPP

#include <map>
#include <string>

#include "prbnet/graph.hpp"

namespace prbnet {

// Per-node cost breakdown. FLOPs use the 2-ops-per-multiply-accumulate
// convention; resampling, activations, residual adds and concats count one op
// per output element.
struct CostReport {
    std::map<std::string, long long> breakdown;
    long long total = 0;
};

// analytic parameter count: conv = out*(in*kh*kw) + out, summed over the
// exact graph that forward would build
inline CostReport count_params(const PipelineConfig& cfg) {
    validate_config(cfg);
    CostReport r;
    for (const GraphNode& n : enumerate_conv_nodes(cfg)) {
        long long p = n.param_count();
        r.breakdown[n.name] = p;
        r.total += p;
    }
    return r;
}

inline CostReport count_flops(const PipelineConfig& cfg, int img_h, int img_w) {
    validate_config(cfg);
    if (img_h % 32 != 0 || img_w % 32 != 0)
        throw ConfigError("profile input size must be divisible by 32");
    CostReport r;
    for (const GraphNode& n : build_graph(cfg, img_h, img_w)) {
        long long f = n.flops();
        r.breakdown[n.name] += f;
        r.total += f;
    }
    return r;
}

} // namespace prbnet

#endif
