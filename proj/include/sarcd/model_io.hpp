#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "sarcd/error.hpp"
#include "sarcd/pcanet.hpp"

namespace sarcd {

// Binary model container, fixed little-endian layout:
//   magic "PCNM" | version u32 | h,k,L1,L2,block_side,D u32 | normalize u8 |
//   stage-1 filters (L1*k*k f64, filter-major row-major) | stage-2 filters |
//   classifier weights (D f64) | bias f64 | CRC32 of all preceding bytes.

inline constexpr std::uint32_t kModelVersion = 1;
inline constexpr char kModelMagic[4] = {'P', 'C', 'N', 'M'};

namespace detail {

inline std::uint32_t crc32(const std::uint8_t* data, std::size_t len) {
    static const std::array<std::uint32_t, 256> table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int bit = 0; bit < 8; ++bit)
                c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < len; ++i)
        crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

inline void put_f64(std::vector<std::uint8_t>& out, double v) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xFF));
}

struct ByteReader {
    const std::uint8_t* p;
    std::size_t len;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > len)
            throw format_error("model file truncated at byte " + std::to_string(pos));
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = static_cast<std::uint32_t>(p[pos]) |
                          (static_cast<std::uint32_t>(p[pos + 1]) << 8) |
                          (static_cast<std::uint32_t>(p[pos + 2]) << 16) |
                          (static_cast<std::uint32_t>(p[pos + 3]) << 24);
        pos += 4;
        return v;
    }
    std::uint8_t u8() {
        need(1);
        return p[pos++];
    }
    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(p[pos + i]) << (8 * i);
        pos += 8;
        return std::bit_cast<double>(bits);
    }
};

} // namespace detail

inline std::vector<std::uint8_t> serialize_model(const PcaNetModel& model) {
    const int l1 = static_cast<int>(model.stage1.filters.size());
    const int l2 = static_cast<int>(model.stage2.filters.size());
    const long long dim = feature_length(model.h, model.block_side, l1, l2);
    if (static_cast<long long>(model.classifier.weights.size()) != dim)
        throw param_error("serialize_model: classifier length does not match feature length");

    std::vector<std::uint8_t> out;
    out.reserve(64 + static_cast<std::size_t>(l1 + l2) * model.k * model.k * 8 +
                static_cast<std::size_t>(dim) * 8 + 16);
    out.insert(out.end(), kModelMagic, kModelMagic + 4);
    detail::put_u32(out, kModelVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(model.h));
    detail::put_u32(out, static_cast<std::uint32_t>(model.k));
    detail::put_u32(out, static_cast<std::uint32_t>(l1));
    detail::put_u32(out, static_cast<std::uint32_t>(l2));
    detail::put_u32(out, static_cast<std::uint32_t>(model.block_side));
    detail::put_u32(out, static_cast<std::uint32_t>(dim));
    out.push_back(model.normalize_hist ? 1 : 0);
    for (const FilterBank* bank : {&model.stage1, &model.stage2})
        for (const Mat& f : bank->filters)
            for (double v : f.v) // row-major within each filter
                detail::put_f64(out, v);
    for (double w : model.classifier.weights)
        detail::put_f64(out, w);
    detail::put_f64(out, model.classifier.bias);
    detail::put_u32(out, detail::crc32(out.data(), out.size()));
    return out;
}

inline void save_model(const PcaNetModel& model, const std::string& path) {
    const std::vector<std::uint8_t> bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw format_error("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw format_error("write failed for '" + path + "'");
}

inline PcaNetModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4 + 4 + 24 + 1 + 4)
        throw format_error("model file truncated: only " + std::to_string(bytes.size()) +
                           " bytes");
    for (int i = 0; i < 4; ++i)
        if (bytes[i] != static_cast<std::uint8_t>(kModelMagic[i]))
            throw format_error("bad model magic (not a PCNM file)");

    const std::uint32_t stored_crc =
        static_cast<std::uint32_t>(bytes[bytes.size() - 4]) |
        (static_cast<std::uint32_t>(bytes[bytes.size() - 3]) << 8) |
        (static_cast<std::uint32_t>(bytes[bytes.size() - 2]) << 16) |
        (static_cast<std::uint32_t>(bytes[bytes.size() - 1]) << 24);
    if (detail::crc32(bytes.data(), bytes.size() - 4) != stored_crc)
        throw format_error("model CRC mismatch: file is corrupted");

    detail::ByteReader rd{bytes.data(), bytes.size() - 4, 4};
    const std::uint32_t version = rd.u32();
    if (version != kModelVersion)
        throw format_error("unsupported model version " + std::to_string(version));

    PcaNetModel model;
    model.h = static_cast<int>(rd.u32());
    model.k = static_cast<int>(rd.u32());
    const int l1 = static_cast<int>(rd.u32());
    const int l2 = static_cast<int>(rd.u32());
    model.block_side = static_cast<int>(rd.u32());
    const std::uint32_t dim = rd.u32();
    model.normalize_hist = rd.u8() != 0;

    if (model.h < 1 || model.h % 2 == 0 || model.k < 1 || model.k % 2 == 0 || l1 < 1 ||
        l2 < 1 || l2 > 24)
        throw format_error("model header holds invalid network geometry");
    if (feature_length(model.h, model.block_side, l1, l2) != static_cast<long long>(dim))
        throw format_error("model header inconsistent: D != L1 * blocks * 2^L2");

    auto read_bank = [&](int count) {
        FilterBank bank;
        bank.k = model.k;
        for (int j = 0; j < count; ++j) {
            Mat f(model.k, model.k);
            for (double& v : f.v)
                v = rd.f64();
            bank.filters.push_back(std::move(f));
        }
        return bank;
    };
    model.stage1 = read_bank(l1);
    model.stage2 = read_bank(l2);
    model.classifier.weights.resize(dim);
    for (double& w : model.classifier.weights)
        w = rd.f64();
    model.classifier.bias = rd.f64();
    if (rd.pos != rd.len)
        throw format_error("model file has " + std::to_string(rd.len - rd.pos) +
                           " unexpected trailing bytes");
    return model;
}

inline PcaNetModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw format_error("cannot open '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

} // namespace sarcd
