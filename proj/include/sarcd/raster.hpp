#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "sarcd/error.hpp"

namespace sarcd {

// Pixel coordinate, row-major addressing throughout.
struct Coord {
    int row = 0;
    int col = 0;

    friend bool operator==(const Coord& a, const Coord& b) {
        return a.row == b.row && a.col == b.col;
    }
    friend bool operator<(const Coord& a, const Coord& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    }
};

// Single-channel intensity image. Values are carried as doubles regardless
// of the source bit depth so downstream math is depth-agnostic.
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<double> values; // row-major, length width*height

    Raster() = default;
    Raster(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int row, int col) { return values[static_cast<std::size_t>(row) * width + col]; }
    double at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
    std::size_t size() const { return values.size(); }
};

// Two co-registered acquisitions of the same scene. Construct through
// make_pair/load_pair so the equal-dimensions invariant holds.
struct TemporalPair {
    Raster t1;
    Raster t2;
};

// Binary ground truth / prediction map: 0 = unchanged, 1 = changed.
struct ReferenceMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> labels;

    ReferenceMap() = default;
    ReferenceMap(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), labels(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t& at(int row, int col) { return labels[static_cast<std::size_t>(row) * width + col]; }
    std::uint8_t at(int row, int col) const { return labels[static_cast<std::size_t>(row) * width + col]; }
    std::size_t size() const { return labels.size(); }
};

namespace detail {

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw format_error("cannot open '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

inline bool is_pgm_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Skips whitespace and '#' comment lines; pos is advanced in place.
inline void skip_pgm_separators(const std::string& b, std::size_t& pos) {
    while (pos < b.size()) {
        if (is_pgm_space(b[pos])) {
            ++pos;
        } else if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n')
                ++pos;
        } else {
            break;
        }
    }
}

inline long parse_pgm_number(const std::string& b, std::size_t& pos, const std::string& what) {
    skip_pgm_separators(b, pos);
    if (pos >= b.size() || b[pos] < '0' || b[pos] > '9')
        throw format_error("malformed PGM header: expected " + what + " at byte " +
                           std::to_string(pos));
    long value = 0;
    while (pos < b.size() && b[pos] >= '0' && b[pos] <= '9') {
        value = value * 10 + (b[pos] - '0');
        if (value > 1000000000L)
            throw format_error("malformed PGM header: " + what + " out of range at byte " +
                               std::to_string(pos));
        ++pos;
    }
    return value;
}

} // namespace detail

// Reads a binary PGM (P5), 8-bit or 16-bit big-endian samples.
inline Raster load_raster(const std::string& path) {
    const std::string b = detail::read_file_bytes(path);
    if (b.size() < 2 || b[0] != 'P')
        throw format_error(path + ": not a PGM file (bad magic at byte 0)");
    if (b[1] == '2')
        throw format_error(path + ": ASCII PGM (P2) unsupported, binary P5 required (byte 1)");
    if (b[1] != '5')
        throw format_error(path + ": not a binary PGM (bad magic at byte 1)");

    std::size_t pos = 2;
    const long width = detail::parse_pgm_number(b, pos, "width");
    const long height = detail::parse_pgm_number(b, pos, "height");
    const long maxval = detail::parse_pgm_number(b, pos, "maxval");
    if (width < 1 || height < 1)
        throw format_error(path + ": non-positive dimensions in header (byte " +
                           std::to_string(pos) + ")");
    if (maxval < 1 || maxval > 65535)
        throw format_error(path + ": unsupported max-value " + std::to_string(maxval) +
                           " (byte " + std::to_string(pos) + ")");
    if (pos >= b.size() || !detail::is_pgm_space(b[pos]))
        throw format_error(path + ": missing whitespace before payload at byte " +
                           std::to_string(pos));
    ++pos; // exactly one separator byte before the payload

    const int bytes_per_sample = maxval > 255 ? 2 : 1;
    const std::size_t need = static_cast<std::size_t>(width) * height * bytes_per_sample;
    if (b.size() - pos < need)
        throw format_error(path + ": truncated payload, need " + std::to_string(need) +
                           " bytes from byte " + std::to_string(pos) + ", have " +
                           std::to_string(b.size() - pos));

    Raster r(static_cast<int>(width), static_cast<int>(height));
    const unsigned char* p = reinterpret_cast<const unsigned char*>(b.data()) + pos;
    if (bytes_per_sample == 1) {
        for (std::size_t i = 0; i < r.size(); ++i)
            r.values[i] = static_cast<double>(p[i]);
    } else {
        for (std::size_t i = 0; i < r.size(); ++i)
            r.values[i] = static_cast<double>((static_cast<unsigned>(p[2 * i]) << 8) |
                                              p[2 * i + 1]);
    }
    return r;
}

// Writes a binary PGM. Values are rounded to nearest integer and must fit
// the requested depth; 16-bit samples are written big-endian.
inline void save_raster(const Raster& r, const std::string& path, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16)
        throw param_error("save_raster: bit depth must be 8 or 16");
    const long maxval = bit_depth == 8 ? 255 : 65535;

    std::vector<long> quantized(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const long q = std::llround(r.values[i]);
        if (q < 0 || q > maxval)
            throw format_error("save_raster: value " + std::to_string(r.values[i]) +
                               " out of [0," + std::to_string(maxval) + "] at pixel (row " +
                               std::to_string(i / r.width) + ", col " +
                               std::to_string(i % r.width) + ")");
        quantized[i] = q;
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw format_error("cannot open '" + path + "' for writing");
    out << "P5\n" << r.width << " " << r.height << "\n" << maxval << "\n";
    std::string payload;
    payload.reserve(r.size() * (bit_depth == 8 ? 1 : 2));
    for (long q : quantized) {
        if (bit_depth == 8) {
            payload.push_back(static_cast<char>(q));
        } else {
            payload.push_back(static_cast<char>(q >> 8));
            payload.push_back(static_cast<char>(q & 0xFF));
        }
    }
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out)
        throw format_error("write failed for '" + path + "'");
}

inline TemporalPair make_pair(Raster t1, Raster t2) {
    if (t1.width != t2.width || t1.height != t2.height)
        throw format_error("temporal pair misaligned: " + std::to_string(t1.width) + "x" +
                           std::to_string(t1.height) + " vs " + std::to_string(t2.width) +
                           "x" + std::to_string(t2.height));
    return TemporalPair{std::move(t1), std::move(t2)};
}

inline TemporalPair load_pair(const std::string& path1, const std::string& path2) {
    return make_pair(load_raster(path1), load_raster(path2));
}

// Reference maps are 8-bit PGMs; any nonzero sample counts as changed.
inline ReferenceMap load_reference(const std::string& path) {
    const Raster r = load_raster(path);
    ReferenceMap m(r.width, r.height);
    for (std::size_t i = 0; i < r.size(); ++i)
        m.labels[i] = r.values[i] != 0.0 ? 1 : 0;
    return m;
}

inline void save_reference(const ReferenceMap& m, const std::string& path) {
    Raster r(m.width, m.height);
    for (std::size_t i = 0; i < m.size(); ++i)
        r.values[i] = m.labels[i] ? 255.0 : 0.0;
    save_raster(r, path, 8);
}

// Per-pixel |ln((t2 + offset) / (t1 + offset))|. The offset guards the log
// at zero intensity; symmetric in t1/t2 because of the absolute value.
inline Raster log_ratio(const TemporalPair& pair, double offset) {
    if (!(offset > 0.0))
        throw param_error("log_ratio: offset must be positive");
    if (pair.t1.width != pair.t2.width || pair.t1.height != pair.t2.height)
        throw param_error("log_ratio: pair dimensions disagree");
    Raster out(pair.t1.width, pair.t1.height);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.values[i] = std::fabs(std::log((pair.t2.values[i] + offset) /
                                           (pair.t1.values[i] + offset)));
    return out;
}

} // namespace sarcd
