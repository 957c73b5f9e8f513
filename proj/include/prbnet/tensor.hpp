#ifndef PRBNET_TENSOR_HPP
#define PRBNET_TENSOR_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "prbnet/errors.hpp"

namespace prbnet {

// Dense rank-4 feature map, NCHW row-major, float32 throughout.
struct Tensor {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<float> data;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_, float fill = 0.0f)
        : n(n_), c(c_), h(h_), w(w_), data(static_cast<size_t>(n_) * c_ * h_ * w_, fill) {
        if (n_ < 1 || c_ < 1 || h_ < 1 || w_ < 1)
            throw ShapeError("tensor dims must be >= 1, got " + shape_str());
    }

    size_t size() const { return data.size(); }

    size_t index(int in, int ic, int iy, int ix) const {
        return ((static_cast<size_t>(in) * c + ic) * h + iy) * w + ix;
    }
    float& at(int in, int ic, int iy, int ix) { return data[index(in, ic, iy, ix)]; }
    float at(int in, int ic, int iy, int ix) const { return data[index(in, ic, iy, ix)]; }

    bool same_shape(const Tensor& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }

    std::string shape_str() const {
        return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" +
               std::to_string(w);
    }
};

// 2-D convolution parameters (cross-correlation, zero padding).
struct ConvSpec {
    int in_channels = 0;
    int out_channels = 0;
    int kh = 1, kw = 1;
    int sh = 1, sw = 1;
    int ph = 0, pw = 0;
    std::vector<float> weights; // (out, in, kh, kw) row-major
    std::vector<float> bias;    // (out)

    void validate() const {
        if (sh < 1 || sw < 1) throw ShapeError("conv stride must be >= 1");
        if (ph < 0 || pw < 0) throw ShapeError("conv padding must be >= 0");
        size_t want_w = static_cast<size_t>(out_channels) * in_channels * kh * kw;
        if (weights.size() != want_w)
            throw ShapeError("conv weights size " + std::to_string(weights.size()) +
                             " != expected " + std::to_string(want_w));
        if (bias.size() != static_cast<size_t>(out_channels))
            throw ShapeError("conv bias size mismatch");
    }
};

namespace detail {

inline std::pair<int, int> conv_out_dims(const Tensor& input, const ConvSpec& s) {
    int num_h = input.h + 2 * s.ph - s.kh;
    int num_w = input.w + 2 * s.pw - s.kw;
    if (num_h < 0 || num_w < 0 || num_h % s.sh != 0 || num_w % s.sw != 0)
        throw ShapeError("conv output dims not positive integers for input " + input.shape_str());
    return {num_h / s.sh + 1, num_w / s.sw + 1};
}

inline void conv_check(const Tensor& input, const ConvSpec& s) {
    s.validate();
    if (input.c != s.in_channels)
        throw ShapeError("conv input has " + std::to_string(input.c) + " channels, spec expects " +
                         std::to_string(s.in_channels));
}

} // namespace detail

// Reference oracle: literal direct summation, independent of the im2col path below.
inline Tensor conv2d_naive(const Tensor& input, const ConvSpec& s) {
    detail::conv_check(input, s);
    auto [h_out, w_out] = detail::conv_out_dims(input, s);
    Tensor out(input.n, s.out_channels, h_out, w_out);
    for (int in = 0; in < input.n; ++in)
        for (int oc = 0; oc < s.out_channels; ++oc)
            for (int oy = 0; oy < h_out; ++oy)
                for (int ox = 0; ox < w_out; ++ox) {
                    float acc = s.bias[oc];
                    for (int ic = 0; ic < s.in_channels; ++ic)
                        for (int ky = 0; ky < s.kh; ++ky)
                            for (int kx = 0; kx < s.kw; ++kx) {
                                int iy = oy * s.sh - s.ph + ky;
                                int ix = ox * s.sw - s.pw + kx;
                                if (iy < 0 || iy >= input.h || ix < 0 || ix >= input.w) continue;
                                float wv = s.weights[((static_cast<size_t>(oc) * s.in_channels + ic) * s.kh + ky) * s.kw + kx];
                                acc += wv * input.at(in, ic, iy, ix);
                            }
                    out.at(in, oc, oy, ox) = acc;
                }
    return out;
}

// im2col + axpy kernel. Summation order is fixed (c, ky, kx) so repeated runs
// are bit-identical; matches conv2d_naive within accumulation-order tolerance.
inline Tensor conv2d(const Tensor& input, const ConvSpec& s) {
    detail::conv_check(input, s);
    auto [h_out, w_out] = detail::conv_out_dims(input, s);
    Tensor out(input.n, s.out_channels, h_out, w_out);

    const int k_total = s.in_channels * s.kh * s.kw;
    const size_t plane = static_cast<size_t>(h_out) * w_out;
    std::vector<float> col(static_cast<size_t>(k_total) * plane);

    for (int in = 0; in < input.n; ++in) {
        // unfold input into (k_total, h_out*w_out)
        size_t row = 0;
        for (int ic = 0; ic < s.in_channels; ++ic)
            for (int ky = 0; ky < s.kh; ++ky)
                for (int kx = 0; kx < s.kw; ++kx, ++row) {
                    float* dst = col.data() + row * plane;
                    for (int oy = 0; oy < h_out; ++oy) {
                        int iy = oy * s.sh - s.ph + ky;
                        if (iy < 0 || iy >= input.h) {
                            for (int ox = 0; ox < w_out; ++ox) *dst++ = 0.0f;
                            continue;
                        }
                        const float* src = input.data.data() + input.index(in, ic, iy, 0);
                        for (int ox = 0; ox < w_out; ++ox) {
                            int ix = ox * s.sw - s.pw + kx;
                            *dst++ = (ix < 0 || ix >= input.w) ? 0.0f : src[ix];
                        }
                    }
                }
        // tile the plane and sweep 4 output channels together so each col row
        // is reused from cache; per-element accumulation order is unchanged
        constexpr size_t kBlock = 1024;
        for (size_t p0 = 0; p0 < plane; p0 += kBlock) {
            const size_t len = std::min(kBlock, plane - p0);
            int oc = 0;
            for (; oc + 3 < s.out_channels; oc += 4) {
                float* dst0 = out.data.data() + out.index(in, oc, 0, 0) + p0;
                float* dst1 = out.data.data() + out.index(in, oc + 1, 0, 0) + p0;
                float* dst2 = out.data.data() + out.index(in, oc + 2, 0, 0) + p0;
                float* dst3 = out.data.data() + out.index(in, oc + 3, 0, 0) + p0;
                for (size_t p = 0; p < len; ++p) {
                    dst0[p] = s.bias[oc];
                    dst1[p] = s.bias[oc + 1];
                    dst2[p] = s.bias[oc + 2];
                    dst3[p] = s.bias[oc + 3];
                }
                const float* w0 = s.weights.data() + static_cast<size_t>(oc) * k_total;
                for (int k = 0; k < k_total; ++k) {
                    const float a0 = w0[k];
                    const float a1 = w0[k_total + k];
                    const float a2 = w0[2 * static_cast<size_t>(k_total) + k];
                    const float a3 = w0[3 * static_cast<size_t>(k_total) + k];
                    const float* src = col.data() + static_cast<size_t>(k) * plane + p0;
                    for (size_t p = 0; p < len; ++p) {
                        dst0[p] += a0 * src[p];
                        dst1[p] += a1 * src[p];
                        dst2[p] += a2 * src[p];
                        dst3[p] += a3 * src[p];
                    }
                }
            }
            for (; oc < s.out_channels; ++oc) {
                float* dst = out.data.data() + out.index(in, oc, 0, 0) + p0;
                for (size_t p = 0; p < len; ++p) dst[p] = s.bias[oc];
                const float* wrow = s.weights.data() + static_cast<size_t>(oc) * k_total;
                for (int k = 0; k < k_total; ++k) {
                    const float a = wrow[k];
                    const float* src = col.data() + static_cast<size_t>(k) * plane + p0;
                    for (size_t p = 0; p < len; ++p) dst[p] += a * src[p];
                }
            }
        }
    }
    return out;
}

// out[n,c,y,x] = in[n,c,y/2,x/2]
inline Tensor upsample_nearest2x(const Tensor& input) {
    Tensor out(input.n, input.c, input.h * 2, input.w * 2);
    for (int in = 0; in < input.n; ++in)
        for (int ic = 0; ic < input.c; ++ic)
            for (int y = 0; y < out.h; ++y) {
                const float* src = input.data.data() + input.index(in, ic, y / 2, 0);
                float* dst = out.data.data() + out.index(in, ic, y, 0);
                for (int x = 0; x < out.w; ++x) dst[x] = src[x / 2];
            }
    return out;
}

// mean of each 2x2 block
inline Tensor downsample_avg2x(const Tensor& input) {
    if (input.h % 2 != 0 || input.w % 2 != 0)
        throw ShapeError("downsample_avg2x needs even spatial dims, got " + input.shape_str());
    Tensor out(input.n, input.c, input.h / 2, input.w / 2);
    for (int in = 0; in < input.n; ++in)
        for (int ic = 0; ic < input.c; ++ic)
            for (int y = 0; y < out.h; ++y)
                for (int x = 0; x < out.w; ++x) {
                    float sum = input.at(in, ic, 2 * y, 2 * x) + input.at(in, ic, 2 * y, 2 * x + 1) +
                                input.at(in, ic, 2 * y + 1, 2 * x) +
                                input.at(in, ic, 2 * y + 1, 2 * x + 1);
                    out.at(in, ic, y, x) = sum * 0.25f;
                }
    return out;
}

inline Tensor concat_channels(const std::vector<Tensor>& inputs) {
    if (inputs.empty()) throw ArgumentError("concat_channels needs a non-empty list");
    const Tensor& first = inputs.front();
    int c_total = 0;
    for (const Tensor& t : inputs) {
        if (t.n != first.n || t.h != first.h || t.w != first.w)
            throw ShapeError("concat_channels mismatch: " + t.shape_str() + " vs " + first.shape_str());
        c_total += t.c;
    }
    Tensor out(first.n, c_total, first.h, first.w);
    const size_t plane = static_cast<size_t>(first.h) * first.w;
    for (int in = 0; in < first.n; ++in) {
        int oc = 0;
        for (const Tensor& t : inputs)
            for (int ic = 0; ic < t.c; ++ic, ++oc) {
                const float* src = t.data.data() + t.index(in, ic, 0, 0);
                float* dst = out.data.data() + out.index(in, oc, 0, 0);
                for (size_t p = 0; p < plane; ++p) dst[p] = src[p];
            }
    }
    return out;
}

inline Tensor leaky_relu(const Tensor& input, float slope) {
    if (slope < 0.0f || slope >= 1.0f) throw ArgumentError("leaky_relu slope must be in [0, 1)");
    Tensor out = input;
    for (float& v : out.data) v = v >= 0.0f ? v : slope * v;
    return out;
}

inline Tensor affine_channel(const Tensor& input, const std::vector<float>& scale,
                             const std::vector<float>& shift) {
    if (scale.size() != static_cast<size_t>(input.c) || shift.size() != static_cast<size_t>(input.c))
        throw ShapeError("affine_channel scale/shift length must equal channel count");
    Tensor out = input;
    const size_t plane = static_cast<size_t>(input.h) * input.w;
    for (int in = 0; in < input.n; ++in)
        for (int ic = 0; ic < input.c; ++ic) {
            float* p = out.data.data() + out.index(in, ic, 0, 0);
            for (size_t i = 0; i < plane; ++i) p[i] = scale[ic] * p[i] + shift[ic];
        }
    return out;
}

} // namespace prbnet

#endif
