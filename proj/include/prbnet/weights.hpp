#ifndef PRBNET_WEIGHTS_HPP
#define PRBNET_WEIGHTS_HPP

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "prbnet/errors.hpp"
#include "prbnet/tensor.hpp"

namespace prbnet {

// Deterministic init recipe (shared across implementations):
//   h     = FNV-1a 64 of the array name
//   base  = (seed * 0x9E3779B97F4A7C15) ^ h
//   x_i   = splitmix-finalize(base + i * 0x9E3779B97F4A7C15)
//   u_i   = (x_i >> 11) / 2^53            in [0, 1)
//   value = float(0.2 * u_i - 0.1)        in (-0.1, 0.1)
namespace prng {

inline uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline float seeded_value(uint64_t seed, uint64_t name_hash, uint64_t index) {
    uint64_t base = (seed * 0x9E3779B97F4A7C15ull) ^ name_hash;
    uint64_t x = mix64(base + index * 0x9E3779B97F4A7C15ull);
    double u = static_cast<double>(x >> 11) * (1.0 / 9007199254740992.0);
    return static_cast<float>(0.2 * u - 0.1);
}

} // namespace prng

struct WeightEntry {
    std::vector<uint32_t> shape;
    std::vector<float> data;

    size_t element_count() const {
        size_t n = 1;
        for (uint32_t d : shape) n *= d;
        return n;
    }
};

// Named flat float arrays keyed by hierarchical node name
// (e.g. "backbone.stage2.block0.conv1.weight").
class WeightContainer {
public:
    std::map<std::string, WeightEntry> entries;

    // When set, every successful lookup records its name here (test hook).
    mutable std::unordered_set<std::string>* access_log = nullptr;

    const WeightEntry& get(const std::string& name) const {
        auto it = entries.find(name);
        if (it == entries.end()) throw WeightError("missing array '" + name + "'");
        if (access_log) access_log->insert(name);
        return it->second;
    }

    const WeightEntry& get(const std::string& name, const std::vector<uint32_t>& shape) const {
        const WeightEntry& e = get(name);
        if (e.shape != shape) {
            std::string want, got;
            for (uint32_t d : shape) want += std::to_string(d) + " ";
            for (uint32_t d : e.shape) got += std::to_string(d) + " ";
            throw WeightError("array '" + name + "' has shape [" + got + "], expected [" + want + "]");
        }
        return e;
    }

    // Assemble a ConvSpec from "<node>.weight" / "<node>.bias".
    ConvSpec conv(const std::string& node, int in_c, int out_c, int kh, int kw, int sh, int sw,
                  int ph, int pw) const {
        ConvSpec s;
        s.in_channels = in_c;
        s.out_channels = out_c;
        s.kh = kh;
        s.kw = kw;
        s.sh = sh;
        s.sw = sw;
        s.ph = ph;
        s.pw = pw;
        s.weights = get(node + ".weight", {static_cast<uint32_t>(out_c), static_cast<uint32_t>(in_c),
                                           static_cast<uint32_t>(kh), static_cast<uint32_t>(kw)})
                        .data;
        s.bias = get(node + ".bias", {static_cast<uint32_t>(out_c)}).data;
        return s;
    }
};

// --- PRBW binary format ---
// magic "PRBW", version u32, entry count u32, then per entry:
// name length u16, UTF-8 name, rank u8, dims as u32 each, raw LE float32 data.
// All integers little-endian.

namespace detail {

inline void put_u16(std::ostream& os, uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>(v >> 8)};
    os.write(reinterpret_cast<char*>(b), 2);
}
inline void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<char*>(b), 4);
}
inline uint16_t take_u16(std::istream& is) {
    unsigned char b[2];
    if (!is.read(reinterpret_cast<char*>(b), 2)) throw IoError("truncated weight file");
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
}
inline uint32_t take_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw IoError("truncated weight file");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

} // namespace detail

inline void save_weights(const WeightContainer& wc, const std::string& path) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw IoError("cannot open '" + tmp + "' for writing");
        os.write("PRBW", 4);
        detail::put_u32(os, 1u); // version
        detail::put_u32(os, static_cast<uint32_t>(wc.entries.size()));
        for (const auto& [name, e] : wc.entries) {
            detail::put_u16(os, static_cast<uint16_t>(name.size()));
            os.write(name.data(), static_cast<std::streamsize>(name.size()));
            os.put(static_cast<char>(e.shape.size()));
            for (uint32_t d : e.shape) detail::put_u32(os, d);
            static_assert(sizeof(float) == 4);
            os.write(reinterpret_cast<const char*>(e.data.data()),
                     static_cast<std::streamsize>(e.data.size() * 4));
        }
        if (!os) throw IoError("write failure on '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

inline WeightContainer read_weights_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open weight file '" + path + "'");
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "PRBW", 4) != 0)
        throw WeightError("bad magic in '" + path + "'");
    uint32_t version = detail::take_u32(is);
    if (version != 1) throw WeightError("unsupported weight file version " + std::to_string(version));
    uint32_t count = detail::take_u32(is);
    WeightContainer wc;
    for (uint32_t i = 0; i < count; ++i) {
        uint16_t name_len = detail::take_u16(is);
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len)) throw IoError("truncated weight file");
        int rank = is.get();
        if (rank < 0) throw IoError("truncated weight file");
        WeightEntry e;
        for (int r = 0; r < rank; ++r) e.shape.push_back(detail::take_u32(is));
        e.data.resize(e.element_count());
        if (!is.read(reinterpret_cast<char*>(e.data.data()),
                     static_cast<std::streamsize>(e.data.size() * 4)))
            throw IoError("truncated weight file at array '" + name + "'");
        if (!wc.entries.emplace(name, std::move(e)).second)
            throw WeightError("duplicate array '" + name + "'");
    }
    return wc;
}

} // namespace prbnet

#endif
