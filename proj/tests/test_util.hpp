#ifndef PRBNET_TEST_UTIL_HPP
#define PRBNET_TEST_UTIL_HPP

#include <cmath>
#include <random>
#include <string>

#include "prbnet/tensor.hpp"

namespace testutil {

inline prbnet::Tensor random_tensor(unsigned seed, int n, int c, int h, int w, float lo = -1.0f,
                                    float hi = 1.0f) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(lo, hi);
    prbnet::Tensor t(n, c, h, w);
    for (float& v : t.data) v = dist(rng);
    return t;
}

inline prbnet::ConvSpec random_conv(unsigned seed, int in_c, int out_c, int k, int stride,
                                    int pad) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    prbnet::ConvSpec s;
    s.in_channels = in_c;
    s.out_channels = out_c;
    s.kh = s.kw = k;
    s.sh = s.sw = stride;
    s.ph = s.pw = pad;
    s.weights.resize(static_cast<size_t>(out_c) * in_c * k * k);
    s.bias.resize(out_c);
    for (float& v : s.weights) v = dist(rng);
    for (float& v : s.bias) v = dist(rng);
    return s;
}

inline bool close_rel(float a, float b, double rtol, double atol = 0.0) {
    double d = std::abs(static_cast<double>(a) - b);
    return d <= atol + rtol * std::max({1.0, std::abs(static_cast<double>(a)),
                                        std::abs(static_cast<double>(b))});
}

inline bool tensors_close(const prbnet::Tensor& a, const prbnet::Tensor& b, double rtol,
                          double atol = 0.0) {
    if (!a.same_shape(b)) return false;
    for (size_t i = 0; i < a.data.size(); ++i)
        if (!close_rel(a.data[i], b.data[i], rtol, atol)) return false;
    return true;
}

inline std::string data_path(const std::string& rel) {
    return std::string(PRBNET_SOURCE_DIR) + "/" + rel;
}

} // namespace testutil

#endif
