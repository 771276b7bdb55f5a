#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "sarcd/error.hpp"
#include "sarcd/raster.hpp"
#include "sarcd/rng.hpp"

namespace sarcd {

// Synthetic two-date scene: flat background at bg_level, random discs that
// appear in t2 at fg_level, unit-mean gamma speckle on both dates.
struct SceneSpec {
    int width = 128;
    int height = 128;
    int n_blobs = 3;
    double radius_min = 6.0;
    double radius_max = 12.0;
    int looks = 2;
    double bg_level = 60.0;
    double fg_level = 140.0;
    std::uint64_t seed = 0;
};

struct CleanScene {
    Raster t1;
    Raster t2;
    ReferenceMap ref;
};

struct Scene {
    TemporalPair pair;
    ReferenceMap ref;
};

inline void validate_spec(const SceneSpec& spec) {
    if (spec.width < 1 || spec.height < 1)
        throw param_error("scene: dimensions must be positive");
    if (spec.n_blobs < 0)
        throw param_error("scene: blob count must be >= 0");
    if (spec.looks < 1)
        throw param_error("scene: looks must be >= 1");
    if (spec.fg_level == spec.bg_level)
        throw param_error("scene: foreground level must differ from background");
    if (spec.bg_level < 0.0 || spec.fg_level < 0.0)
        throw param_error("scene: reflectivity levels must be non-negative");
    if (spec.n_blobs > 0) {
        if (!(spec.radius_min > 0.0) || spec.radius_max < spec.radius_min)
            throw param_error("scene: invalid blob radius range");
        if (spec.radius_max >= std::min(spec.width, spec.height))
            throw param_error("scene: blob radius " + std::to_string(spec.radius_max) +
                              " does not fit a " + std::to_string(spec.width) + "x" +
                              std::to_string(spec.height) + " image");
    }
}

// t1 is flat background; t2 adds n_blobs random discs (centers uniform over
// the grid, radius uniform in range, overlaps allowed, clipped at the image
// edge). The reference marks exactly the disc pixels.
inline CleanScene generate_reflectivity(const SceneSpec& spec) {
    validate_spec(spec);
    CleanScene s;
    s.t1 = Raster(spec.width, spec.height, spec.bg_level);
    s.t2 = Raster(spec.width, spec.height, spec.bg_level);
    s.ref = ReferenceMap(spec.width, spec.height, 0);

    Rng rng(derive_seed(spec.seed, RngPurpose::scene_geometry));
    for (int blob = 0; blob < spec.n_blobs; ++blob) {
        const int cy = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.height)));
        const int cx = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.width)));
        const double radius =
            spec.radius_min + rng.next_real() * (spec.radius_max - spec.radius_min);
        const double radius_sq = radius * radius;
        const int span = static_cast<int>(std::floor(radius));
        for (int r = std::max(0, cy - span); r <= std::min(spec.height - 1, cy + span); ++r)
            for (int c = std::max(0, cx - span); c <= std::min(spec.width - 1, cx + span); ++c) {
                const double dr = r - cy, dc = c - cx;
                if (dr * dr + dc * dc <= radius_sq) {
                    s.t2.at(r, c) = spec.fg_level;
                    s.ref.at(r, c) = 1;
                }
            }
    }
    return s;
}

// Unit-mean gamma multiplier with shape L: sum of L exponentials of rate L.
// O(looks) per draw, exact for integer looks, reproducible from the stream.
inline double gamma_speckle_draw(int looks, Rng& rng) {
    double g = 0.0;
    for (int i = 0; i < looks; ++i)
        g += -std::log(1.0 - rng.next_real());
    return g / static_cast<double>(looks);
}

// Multiplies every pixel by an independent unit-mean gamma draw, row-major
// order (the order is part of the reproducibility contract).
inline Raster apply_speckle(const Raster& clean, int looks, Rng& rng) {
    if (looks < 1)
        throw param_error("apply_speckle: looks must be >= 1");
    Raster out(clean.width, clean.height);
    for (std::size_t i = 0; i < clean.size(); ++i)
        out.values[i] = clean.values[i] * gamma_speckle_draw(looks, rng);
    return out;
}

inline Scene generate_scene(const SceneSpec& spec) {
    CleanScene clean = generate_reflectivity(spec);
    Rng rng1(derive_seed(spec.seed, RngPurpose::speckle_t1));
    Rng rng2(derive_seed(spec.seed, RngPurpose::speckle_t2));
    Scene s;
    s.pair = make_pair(apply_speckle(clean.t1, spec.looks, rng1),
                       apply_speckle(clean.t2, spec.looks, rng2));
    s.ref = std::move(clean.ref);
    return s;
}

// Round to nearest integer and clamp to the depth range. Applied before any
// scene is written to or consumed as a PGM so in-memory and file-based
// pipelines agree bit for bit.
inline Raster quantize(const Raster& r, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16)
        throw param_error("quantize: bit depth must be 8 or 16");
    const double maxval = bit_depth == 8 ? 255.0 : 65535.0;
    Raster out(r.width, r.height);
    for (std::size_t i = 0; i < r.size(); ++i)
        out.values[i] = std::clamp(std::round(r.values[i]), 0.0, maxval);
    return out;
}

inline Scene generate_quantized_scene(const SceneSpec& spec, int bit_depth = 16) {
    Scene s = generate_scene(spec);
    s.pair.t1 = quantize(s.pair.t1, bit_depth);
    s.pair.t2 = quantize(s.pair.t2, bit_depth);
    return s;
}

} // namespace sarcd
