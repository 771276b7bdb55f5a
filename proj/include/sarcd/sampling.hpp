#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sarcd/error.hpp"
#include "sarcd/raster.hpp"
#include "sarcd/rng.hpp"

namespace sarcd {

// Set of pixel coordinates stored as a bitmap over the image grid.
struct PixelSet {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> mask;

    PixelSet() = default;
    PixelSet(int w, int h) : width(w), height(h), mask(static_cast<std::size_t>(w) * h, 0) {}

    bool contains(Coord c) const {
        return mask[static_cast<std::size_t>(c.row) * width + c.col] != 0;
    }
    void insert(Coord c) { mask[static_cast<std::size_t>(c.row) * width + c.col] = 1; }

    long long count() const {
        long long n = 0;
        for (std::uint8_t m : mask)
            n += m;
        return n;
    }

    // Row-major enumeration; the fixed order is what makes seeded draws
    // reproducible.
    std::vector<Coord> coords() const {
        std::vector<Coord> out;
        out.reserve(static_cast<std::size_t>(count()));
        for (int r = 0; r < height; ++r)
            for (int c = 0; c < width; ++c)
                if (mask[static_cast<std::size_t>(r) * width + c])
                    out.push_back(Coord{r, c});
        return out;
    }
};

// Disjoint decomposition of the reference map: dilated boundary band, inner
// changed, inner unchanged.
struct SamplePartition {
    PixelSet omega_b;
    PixelSet omega_c;
    PixelSet omega_u;
    int radius = 0;
};

enum class Strategy { uc, buc, obuc, pseudo, generalize };

inline const char* strategy_name(Strategy s) {
    switch (s) {
    case Strategy::uc: return "uc";
    case Strategy::buc: return "buc";
    case Strategy::obuc: return "obuc";
    case Strategy::pseudo: return "pseudo";
    case Strategy::generalize: return "generalize";
    }
    return "?";
}

inline Strategy strategy_from_name(const std::string& name) {
    if (name == "uc") return Strategy::uc;
    if (name == "buc") return Strategy::buc;
    if (name == "obuc") return Strategy::obuc;
    if (name == "pseudo") return Strategy::pseudo;
    if (name == "generalize") return Strategy::generalize;
    throw param_error("unknown strategy '" + name + "'");
}

struct Sample {
    Coord at;
    int label = 0; // 0 unchanged, 1 changed
};

struct TrainingSet {
    std::vector<Sample> samples;
    long long n_changed = 0;
    long long n_unchanged = 0;
    Strategy strategy = Strategy::uc;
};

namespace detail {

inline void push_sample(TrainingSet& ts, Coord at, int label) {
    ts.samples.push_back(Sample{at, label});
    (label ? ts.n_changed : ts.n_unchanged) += 1;
}

// k coordinates uniformly without replacement from a PixelSet.
inline std::vector<Coord> draw_from_set(const PixelSet& set, long long k, Rng& rng) {
    const std::vector<Coord> all = set.coords();
    const auto idx = rng.sample_indices(static_cast<std::uint32_t>(all.size()),
                                        static_cast<std::uint32_t>(k));
    std::vector<Coord> out;
    out.reserve(idx.size());
    for (std::uint32_t i : idx)
        out.push_back(all[i]);
    return out;
}

} // namespace detail

// Every pixel with at least one in-bounds 8-neighbor of the opposite class.
inline PixelSet find_boundary(const ReferenceMap& ref) {
    PixelSet out(ref.width, ref.height);
    for (int r = 0; r < ref.height; ++r)
        for (int c = 0; c < ref.width; ++c) {
            const std::uint8_t label = ref.at(r, c);
            bool boundary = false;
            for (int dr = -1; dr <= 1 && !boundary; ++dr)
                for (int dc = -1; dc <= 1 && !boundary; ++dc) {
                    if (dr == 0 && dc == 0)
                        continue;
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || rr >= ref.height || cc < 0 || cc >= ref.width)
                        continue;
                    if (ref.at(rr, cc) != label)
                        boundary = true;
                }
            if (boundary)
                out.insert(Coord{r, c});
        }
    return out;
}

// Morphological dilation with a square (2r+1)x(2r+1) structuring element,
// clipped to the image bounds.
inline PixelSet dilate(const PixelSet& mask, int radius) {
    if (radius < 0)
        throw param_error("dilate: radius must be >= 0");
    if (radius == 0)
        return mask;
    PixelSet out(mask.width, mask.height);
    for (int r = 0; r < mask.height; ++r)
        for (int c = 0; c < mask.width; ++c) {
            if (!mask.contains(Coord{r, c}))
                continue;
            const int r0 = std::max(0, r - radius), r1 = std::min(mask.height - 1, r + radius);
            const int c0 = std::max(0, c - radius), c1 = std::min(mask.width - 1, c + radius);
            for (int rr = r0; rr <= r1; ++rr)
                for (int cc = c0; cc <= c1; ++cc)
                    out.insert(Coord{rr, cc});
        }
    return out;
}

inline SamplePartition partition(const ReferenceMap& ref, int radius) {
    SamplePartition part;
    part.radius = radius;
    part.omega_b = dilate(find_boundary(ref), radius);
    part.omega_c = PixelSet(ref.width, ref.height);
    part.omega_u = PixelSet(ref.width, ref.height);
    for (int r = 0; r < ref.height; ++r)
        for (int c = 0; c < ref.width; ++c) {
            const Coord at{r, c};
            if (part.omega_b.contains(at))
                continue;
            (ref.at(r, c) ? part.omega_c : part.omega_u).insert(at);
        }
    return part;
}

// 0 = inner unchanged, 128 = boundary band, 255 = inner changed.
inline Raster partition_visualization(const SamplePartition& part) {
    Raster out(part.omega_b.width, part.omega_b.height);
    for (int r = 0; r < out.height; ++r)
        for (int c = 0; c < out.width; ++c) {
            const Coord at{r, c};
            out.at(r, c) = part.omega_b.contains(at) ? 128.0
                           : part.omega_c.contains(at) ? 255.0
                                                       : 0.0;
        }
    return out;
}

inline long long sample_budget(double rate, long long total_pixels) {
    if (!(rate > 0.0) || rate > 1.0)
        throw param_error("sampling rate must be in (0, 1]");
    const long long budget = std::llround(rate * static_cast<double>(total_pixels));
    if (budget < 1)
        throw param_error("sampling rate yields an empty budget");
    return budget;
}

// Uniform draw over all labeled pixels; deliberately keeps the class
// imbalance of the map.
inline TrainingSet draw_uc(const ReferenceMap& ref, double rate, Rng& rng) {
    const long long total = static_cast<long long>(ref.size());
    const long long budget = sample_budget(rate, total);
    TrainingSet ts;
    ts.strategy = Strategy::uc;
    const auto idx = rng.sample_indices(static_cast<std::uint32_t>(total),
                                        static_cast<std::uint32_t>(budget));
    for (std::uint32_t i : idx) {
        const Coord at{static_cast<int>(i) / ref.width, static_cast<int>(i) % ref.width};
        detail::push_sample(ts, at, ref.at(at.row, at.col));
    }
    return ts;
}

// Boundary-guided draw: up to half the budget from the boundary band, the
// rest split between the inner sets (shortfall in one inner set reallocated
// to the other). Every sample carries its true reference label.
inline TrainingSet draw_buc(const SamplePartition& part, const ReferenceMap& ref, double rate,
                            Rng& rng) {
    const long long total = static_cast<long long>(ref.size());
    const long long budget = sample_budget(rate, total);
    TrainingSet ts;
    ts.strategy = Strategy::buc;

    const long long nb = std::min(part.omega_b.count(), (budget + 1) / 2);
    const long long remaining = budget - nb;
    // odd remainder goes to the changed side
    long long quota_c = remaining - remaining / 2;
    long long quota_u = remaining / 2;
    const long long avail_c = part.omega_c.count();
    const long long avail_u = part.omega_u.count();
    long long take_c = std::min(quota_c, avail_c);
    long long take_u = std::min(quota_u, avail_u);
    long long shortfall = remaining - take_c - take_u;
    const long long extra_c = std::min(shortfall, avail_c - take_c);
    take_c += extra_c;
    shortfall -= extra_c;
    take_u += std::min(shortfall, avail_u - take_u);

    for (Coord at : detail::draw_from_set(part.omega_b, nb, rng))
        detail::push_sample(ts, at, ref.at(at.row, at.col));
    for (Coord at : detail::draw_from_set(part.omega_c, take_c, rng))
        detail::push_sample(ts, at, ref.at(at.row, at.col));
    for (Coord at : detail::draw_from_set(part.omega_u, take_u, rng))
        detail::push_sample(ts, at, ref.at(at.row, at.col));
    return ts;
}

// Duplicates minority-class samples (drawn with replacement from the ones
// already present) until the class counts match.
inline TrainingSet oversample_balance(TrainingSet ts, Rng& rng) {
    if (ts.n_changed == 0 || ts.n_unchanged == 0)
        throw degeneracy_error(std::string("oversample_balance: the ") +
                               (ts.n_changed == 0 ? "changed" : "unchanged") +
                               " class has no samples");
    const int minority_label = ts.n_changed < ts.n_unchanged ? 1 : 0;
    std::vector<Sample> minority;
    for (const Sample& s : ts.samples)
        if (s.label == minority_label)
            minority.push_back(s);
    long long deficit = std::llabs(ts.n_changed - ts.n_unchanged);
    while (deficit-- > 0) {
        const Sample& pick = minority[rng.below(minority.size())];
        detail::push_sample(ts, pick.at, pick.label);
    }
    ts.strategy = Strategy::obuc;
    return ts;
}

namespace detail {

// Nearest-rank percentile on a sorted copy.
inline double percentile_value(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    return values[static_cast<std::size_t>(std::llround(pos))];
}

} // namespace detail

// Two-class k-means on the difference-map values; the cluster with the
// higher centroid is "changed". Keeps the tau fraction of each cluster
// closest to its centroid as pseudolabeled samples. The rng parameter is
// part of the strategy interface; this baseline is fully deterministic.
inline TrainingSet pseudolabel_baseline(const Raster& diff, double tau, Rng& rng) {
    (void)rng;
    if (!(tau > 0.0) || tau > 1.0)
        throw param_error("pseudolabel_baseline: confidence must be in (0, 1]");
    const std::size_t n = diff.size();
    if (n == 0)
        throw param_error("pseudolabel_baseline: empty difference map");

    double c0 = detail::percentile_value(diff.values, 0.05);
    double c1 = detail::percentile_value(diff.values, 0.95);
    if (c0 == c1)
        throw degeneracy_error("pseudolabel_baseline: difference map is constant");

    std::vector<std::uint8_t> assign(n, 0);
    for (int iter = 0; iter < 100; ++iter) {
        bool moved = false;
        double sum0 = 0.0, sum1 = 0.0;
        long long cnt0 = 0, cnt1 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = diff.values[i];
            const std::uint8_t a = std::fabs(v - c0) <= std::fabs(v - c1) ? 0 : 1;
            if (a != assign[i]) {
                assign[i] = a;
                moved = true;
            }
            if (a == 0) {
                sum0 += v;
                ++cnt0;
            } else {
                sum1 += v;
                ++cnt1;
            }
        }
        if (cnt0 > 0)
            c0 = sum0 / static_cast<double>(cnt0);
        if (cnt1 > 0)
            c1 = sum1 / static_cast<double>(cnt1);
        if (!moved && iter > 0)
            break;
    }
    if (c0 == c1)
        throw degeneracy_error("pseudolabel_baseline: clusters collapsed");

    const int changed_cluster = c1 > c0 ? 1 : 0;
    TrainingSet ts;
    ts.strategy = Strategy::pseudo;
    for (int cluster = 0; cluster <= 1; ++cluster) {
        const double centroid = cluster == 0 ? c0 : c1;
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i)
            if (assign[i] == cluster)
                members.push_back(i);
        std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            const double da = std::fabs(diff.values[a] - centroid);
            const double db = std::fabs(diff.values[b] - centroid);
            return da != db ? da < db : a < b;
        });
        const std::size_t keep =
            static_cast<std::size_t>(tau * static_cast<double>(members.size()));
        for (std::size_t m = 0; m < keep; ++m) {
            const std::size_t i = members[m];
            const Coord at{static_cast<int>(i) / diff.width, static_cast<int>(i) % diff.width};
            detail::push_sample(ts, at, cluster == changed_cluster ? 1 : 0);
        }
    }
    return ts;
}

// Cross-scene training draw: the whole boundary band plus round(|boundary|/2)
// pixels from each inner set (clipped to availability).
inline TrainingSet draw_generalize(const SamplePartition& part, const ReferenceMap& ref,
                                   Rng& rng) {
    const long long nb = part.omega_b.count();
    if (nb == 0)
        throw param_error("draw_generalize: the boundary set is empty");
    TrainingSet ts;
    ts.strategy = Strategy::generalize;
    for (Coord at : part.omega_b.coords())
        detail::push_sample(ts, at, ref.at(at.row, at.col));
    const long long quota = std::llround(static_cast<double>(nb) / 2.0);
    for (Coord at : detail::draw_from_set(part.omega_c, std::min(quota, part.omega_c.count()), rng))
        detail::push_sample(ts, at, ref.at(at.row, at.col));
    for (Coord at : detail::draw_from_set(part.omega_u, std::min(quota, part.omega_u.count()), rng))
        detail::push_sample(ts, at, ref.at(at.row, at.col));
    return ts;
}

} // namespace sarcd
