#ifndef PRBNET_IMAGE_HPP
#define PRBNET_IMAGE_HPP

#include <fstream>
#include <string>

#include "prbnet/errors.hpp"
#include "prbnet/tensor.hpp"

namespace prbnet {

// Binary PPM ("P6", maxval 255) -> (1, 3, H, W) RGB tensor in [0, 1].
// With pad_to_32, dims are zero-padded up to the next multiple of 32;
// otherwise non-divisible dims are rejected.
inline Tensor load_image_ppm(const std::string& path, bool pad_to_32 = false) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open image '" + path + "'");
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    is >> magic;
    if (magic != "P6") throw IoError("bad PPM magic in '" + path + "' (want P6)");
    auto skip_ws_comments = [&] {
        while (true) {
            int c = is.peek();
            if (c == '#') {
                std::string line;
                std::getline(is, line);
            } else if (std::isspace(c)) {
                is.get();
            } else {
                break;
            }
        }
    };
    skip_ws_comments();
    is >> w;
    skip_ws_comments();
    is >> h;
    skip_ws_comments();
    is >> maxval;
    if (!is || w < 1 || h < 1) throw IoError("bad PPM header in '" + path + "'");
    if (maxval != 255) throw IoError("unsupported PPM maxval " + std::to_string(maxval));
    is.get(); // single whitespace after maxval

    std::vector<unsigned char> raw(static_cast<size_t>(w) * h * 3);
    if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
        throw IoError("truncated pixel data in '" + path + "'");

    int out_h = h, out_w = w;
    if (pad_to_32) {
        out_h = (h + 31) / 32 * 32;
        out_w = (w + 31) / 32 * 32;
    } else if (h % 32 != 0 || w % 32 != 0) {
        throw IoError("image dims " + std::to_string(w) + "x" + std::to_string(h) +
                      " not divisible by 32 (use --pad)");
    }
    Tensor t(1, 3, out_h, out_w, 0.0f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                t.at(0, c, y, x) = static_cast<float>(raw[(static_cast<size_t>(y) * w + x) * 3 + c]) / 255.0f;
    return t;
}

// reference writer (fixtures and round-trip tests)
inline void save_image_ppm(const Tensor& t, const std::string& path) {
    if (t.n != 1 || t.c != 3) throw ArgumentError("save_image_ppm expects a 1x3xHxW tensor");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << "P6\n" << t.w << " " << t.h << "\n255\n";
    for (int y = 0; y < t.h; ++y)
        for (int x = 0; x < t.w; ++x)
            for (int c = 0; c < 3; ++c) {
                float v = t.at(0, c, y, x);
                int q = static_cast<int>(v * 255.0f + 0.5f);
                os.put(static_cast<char>(q < 0 ? 0 : q > 255 ? 255 : q));
            }
    if (!os) throw IoError("write failure on '" + path + "'");
}

} // namespace prbnet

#endif
