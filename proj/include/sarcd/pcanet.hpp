#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sarcd/classifier.hpp"
#include "sarcd/error.hpp"
#include "sarcd/mat.hpp"
#include "sarcd/raster.hpp"
#include "sarcd/rng.hpp"

namespace sarcd {

// Vertical concatenation of the two h x h patches (t1 over t2) centered at
// the same location; the unit every filter sees.
struct CascadedPatch {
    Mat data; // 2h x h
    Coord center;
    int h = 0;
};

// Columns are vectorized, zero-mean, unit-norm k x k sub-windows.
struct PatchMatrix {
    Mat data; // k^2 x N
    int k = 0;
};

// Eigenfilters of one stage, leading eigenvalue first.
struct FilterBank {
    int k = 0;
    std::vector<Mat> filters;       // each k x k
    std::vector<double> eigenvalues; // empty for banks restored from disk
};

struct PcaNetModel {
    int h = 0;          // patch side, odd
    int k = 0;          // filter side, odd
    int block_side = 0; // histogram block side
    bool normalize_hist = true;
    FilterBank stage1;
    FilterBank stage2;
    LinearModel classifier;
};

// --- index and vectorization conventions -----------------------------------

// Symmetric mirror fold (edge pixel repeated); keeps every image pixel
// classifiable even when its neighborhood leaves the frame.
inline int mirror_index(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0)
            i = -i - 1;
        else
            i = 2 * n - 1 - i;
    }
    return i;
}

// vec/mat are column-major, mutually inverse. All filter reshaping and
// sub-window vectorization go through these two.
inline std::vector<double> vec_column_major(const Mat& m) {
    std::vector<double> v(static_cast<std::size_t>(m.rows) * m.cols);
    std::size_t idx = 0;
    for (int c = 0; c < m.cols; ++c)
        for (int r = 0; r < m.rows; ++r)
            v[idx++] = m.at(r, c);
    return v;
}

inline Mat mat_column_major(const std::vector<double>& v, int rows, int cols) {
    if (v.size() != static_cast<std::size_t>(rows) * cols)
        throw param_error("mat_column_major: length does not match shape");
    Mat m(rows, cols);
    std::size_t idx = 0;
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r)
            m.at(r, c) = v[idx++];
    return m;
}

// --- core operations --------------------------------------------------------

inline void cascade_patch_into(const TemporalPair& pair, Coord center, int h, Mat& out) {
    if (h < 1 || h % 2 == 0)
        throw param_error("cascade_patch: patch side must be odd, got " + std::to_string(h));
    const int half = h / 2;
    const int height = pair.t1.height;
    const int width = pair.t1.width;
    out.rows = 2 * h;
    out.cols = h;
    out.v.resize(static_cast<std::size_t>(2 * h) * h);
    for (int dr = -half; dr <= half; ++dr) {
        const int r1 = mirror_index(center.row + dr, height);
        for (int dc = -half; dc <= half; ++dc) {
            const int c1 = mirror_index(center.col + dc, width);
            out.at(dr + half, dc + half) = pair.t1.at(r1, c1);
            out.at(dr + half + h, dc + half) = pair.t2.at(r1, c1);
        }
    }
}

inline CascadedPatch cascade_patch(const TemporalPair& pair, Coord center, int h) {
    CascadedPatch p;
    p.center = center;
    p.h = h;
    cascade_patch_into(pair, center, h, p.data);
    return p;
}

// Remove the mean, then scale to unit l2 norm; degenerate (constant) input
// maps to the zero vector.
inline void normalize_values(std::vector<double>& v) {
    if (v.empty())
        return;
    double mean = 0.0;
    for (double x : v)
        mean += x;
    mean /= static_cast<double>(v.size());
    double norm_sq = 0.0;
    for (double& x : v) {
        x -= mean;
        norm_sq += x * x;
    }
    const double norm = std::sqrt(norm_sq);
    if (norm > 1e-12) {
        for (double& x : v)
            x /= norm;
    } else {
        for (double& x : v)
            x = 0.0;
    }
}

inline std::vector<double> normalize_vector(std::vector<double> v) {
    normalize_values(v);
    return v;
}

inline Mat normalize_mat(Mat m) {
    normalize_values(m.v);
    return m;
}

// Draws up to n_max k x k sub-windows from the patches (round-robin over
// patches, uniformly random position inside each), normalizes each window
// and stacks them as columns. If n_max covers every available window the
// full grid is enumerated instead of sampled. Column order is shuffled.
inline PatchMatrix build_patch_matrix(const std::vector<CascadedPatch>& patches, int k,
                                      long long n_max, Rng& rng) {
    if (patches.empty())
        throw param_error("build_patch_matrix: no training patches");
    if (n_max < 1)
        throw param_error("build_patch_matrix: n_max must be >= 1");
    const int rows = patches[0].data.rows;
    const int cols = patches[0].data.cols;
    if (k < 1 || k > cols)
        throw param_error("build_patch_matrix: window side " + std::to_string(k) +
                          " exceeds patch side " + std::to_string(cols));
    for (const CascadedPatch& p : patches)
        if (p.data.rows != rows || p.data.cols != cols)
            throw param_error("build_patch_matrix: patches have mixed shapes");

    const long long pos_r = rows - k + 1;
    const long long pos_c = cols - k + 1;
    const long long per_patch = pos_r * pos_c;
    const long long available = per_patch * static_cast<long long>(patches.size());
    const long long n = std::min(n_max, available);

    PatchMatrix out;
    out.k = k;
    out.data = Mat(k * k, static_cast<int>(n));
    std::vector<double> window(static_cast<std::size_t>(k) * k);

    auto put_column = [&](long long column, const Mat& src, int r0, int c0) {
        std::size_t idx = 0;
        for (int c = 0; c < k; ++c)
            for (int r = 0; r < k; ++r)
                window[idx++] = src.at(r0 + r, c0 + c);
        normalize_values(window);
        for (int i = 0; i < k * k; ++i)
            out.data.at(i, static_cast<int>(column)) = window[i];
    };

    if (n == available) {
        long long column = 0;
        for (const CascadedPatch& p : patches)
            for (int r0 = 0; r0 < pos_r; ++r0)
                for (int c0 = 0; c0 < pos_c; ++c0)
                    put_column(column++, p.data, r0, c0);
    } else {
        for (long long i = 0; i < n; ++i) {
            const Mat& src = patches[static_cast<std::size_t>(i % patches.size())].data;
            const int r0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(pos_r)));
            const int c0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(pos_c)));
            put_column(i, src, r0, c0);
        }
    }

    // shuffle column order
    std::vector<std::uint32_t> perm(static_cast<std::size_t>(n));
    for (std::uint32_t i = 0; i < perm.size(); ++i)
        perm[i] = i;
    rng.shuffle(perm);
    Mat shuffled(out.data.rows, out.data.cols);
    for (int c = 0; c < out.data.cols; ++c)
        for (int r = 0; r < out.data.rows; ++r)
            shuffled.at(r, c) = out.data.at(r, perm[c]);
    out.data = std::move(shuffled);
    return out;
}

// Leading L eigenvectors of X X^T, columns of the returned matrix, with the
// sign of each flipped so its largest-magnitude entry is positive (ties by
// lowest index). Throws if the numeric rank of the covariance is below L.
inline std::pair<Mat, std::vector<double>> learn_eigenvectors(const Mat& x, int count) {
    const int dim = x.rows;
    if (count < 1 || count > dim)
        throw param_error("learn_eigenvectors: requested " + std::to_string(count) +
                          " eigenvectors from dimension " + std::to_string(dim));

    Mat cov(dim, dim);
    for (int n = 0; n < x.cols; ++n)
        for (int i = 0; i < dim; ++i) {
            const double xi = x.at(i, n);
            if (xi == 0.0)
                continue;
            for (int j = i; j < dim; ++j)
                cov.at(i, j) += xi * x.at(j, n);
        }
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < i; ++j)
            cov.at(i, j) = cov.at(j, i);

    SymEigen eig = jacobi_eigen_sym(cov);

    const double lambda_max = eig.values.empty() ? 0.0 : std::max(eig.values[0], 0.0);
    int rank = 0;
    for (double lam : eig.values)
        if (lam > lambda_max * 1e-12 && lam > 0.0)
            ++rank;
    if (rank < count)
        throw degeneracy_error("learn_eigenvectors: numeric rank " + std::to_string(rank) +
                               " is below the requested " + std::to_string(count) +
                               " filters");

    Mat u(dim, count);
    std::vector<double> values(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) {
        values[j] = eig.values[j];
        int arg = 0;
        double best = std::fabs(eig.vectors.at(0, j));
        for (int i = 1; i < dim; ++i) {
            const double a = std::fabs(eig.vectors.at(i, j));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        const double sign = eig.vectors.at(arg, j) < 0.0 ? -1.0 : 1.0;
        for (int i = 0; i < dim; ++i)
            u.at(i, j) = sign * eig.vectors.at(i, j);
    }
    return {std::move(u), std::move(values)};
}

inline FilterBank learn_filters(const PatchMatrix& x, int count) {
    if (x.data.rows != x.k * x.k)
        throw param_error("learn_filters: patch matrix rows do not equal k^2");
    auto [u, values] = learn_eigenvectors(x.data, count);
    FilterBank bank;
    bank.k = x.k;
    bank.eigenvalues = std::move(values);
    bank.filters.reserve(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) {
        std::vector<double> col(static_cast<std::size_t>(u.rows));
        for (int i = 0; i < u.rows; ++i)
            col[i] = u.at(i, j);
        bank.filters.push_back(mat_column_major(col, x.k, x.k));
    }
    return bank;
}

// 2-D linear cross-correlation with zero padding of (k-1)/2 on all sides;
// output shape equals input shape. The filter side must be odd.
inline void convolve_same_into(const Mat& in, const Mat& filter, Mat& out) {
    if (filter.rows != filter.cols)
        throw param_error("convolve_same: filter must be square");
    if (filter.rows % 2 == 0)
        throw param_error("convolve_same: filter side must be odd");
    const int side = filter.rows;
    const int pad = (side - 1) / 2;
    out.rows = in.rows;
    out.cols = in.cols;
    out.v.assign(static_cast<std::size_t>(in.rows) * in.cols, 0.0);
    for (int r = 0; r < in.rows; ++r) {
        const int i0 = std::max(0, pad - r);
        const int i1 = std::min(side, in.rows + pad - r);
        for (int c = 0; c < in.cols; ++c) {
            const int j0 = std::max(0, pad - c);
            const int j1 = std::min(side, in.cols + pad - c);
            double acc = 0.0;
            for (int i = i0; i < i1; ++i) {
                const double* in_row = in.v.data() +
                                       static_cast<std::size_t>(r + i - pad) * in.cols +
                                       (c + j0 - pad);
                const double* f_row = filter.v.data() + static_cast<std::size_t>(i) * side + j0;
                for (int j = 0; j < j1 - j0; ++j)
                    acc += in_row[j] * f_row[j];
            }
            out.at(r, c) = acc;
        }
    }
}

inline Mat convolve_same(const Mat& in, const Mat& filter) {
    Mat out;
    convolve_same_into(in, filter, out);
    return out;
}

// Full two-stage cascade: normalized patch -> L1 stage-1 maps, each map
// re-normalized and filtered by every stage-2 filter. Output index j*L2+l
// is stage-1 filter j followed by stage-2 filter l.
inline std::vector<Mat> run_cascade(const FilterBank& stage1, const FilterBank& stage2,
                                    const CascadedPatch& patch) {
    const Mat p0 = normalize_mat(patch.data);
    std::vector<Mat> out;
    out.reserve(stage1.filters.size() * stage2.filters.size());
    for (const Mat& w1 : stage1.filters) {
        const Mat n1 = normalize_mat(convolve_same(p0, w1));
        for (const Mat& w2 : stage2.filters)
            out.push_back(convolve_same(n1, w2));
    }
    return out;
}

struct HashedMap {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint32_t> v;
};

// Per pixel: sum over maps l (1-based) of 2^(l-1) * [map_l > 0]. Zeros hash
// to bit 0; the bit weight grows with the filter index.
inline HashedMap binary_hash(const std::vector<Mat>& maps) {
    if (maps.empty())
        throw param_error("binary_hash: no maps");
    if (maps.size() > 24)
        throw param_error("binary_hash: more than 24 maps would overflow the histogram");
    HashedMap h;
    h.rows = maps[0].rows;
    h.cols = maps[0].cols;
    h.v.assign(static_cast<std::size_t>(h.rows) * h.cols, 0);
    for (std::size_t l = 0; l < maps.size(); ++l) {
        if (maps[l].rows != h.rows || maps[l].cols != h.cols)
            throw param_error("binary_hash: maps have mixed shapes");
        const std::uint32_t bit = 1u << l;
        for (std::size_t i = 0; i < h.v.size(); ++i)
            if (maps[l].v[i] > 0.0)
                h.v[i] |= bit;
    }
    return h;
}

// Non-overlapping block_side x block_side blocks in row-major block order;
// per block a `bins`-bin count histogram, concatenated. When normalized,
// each block histogram is divided by block_side^2 and sums to one.
inline std::vector<double> block_histogram(const HashedMap& hashed, int block_side, int bins,
                                           bool normalize) {
    if (block_side < 1 || hashed.rows % block_side != 0 || hashed.cols % block_side != 0)
        throw param_error("block_histogram: block side " + std::to_string(block_side) +
                          " does not divide a " + std::to_string(hashed.rows) + "x" +
                          std::to_string(hashed.cols) + " map");
    const int blocks_r = hashed.rows / block_side;
    const int blocks_c = hashed.cols / block_side;
    std::vector<double> out(static_cast<std::size_t>(blocks_r) * blocks_c * bins, 0.0);
    const double scale = normalize ? 1.0 / (static_cast<double>(block_side) * block_side) : 1.0;
    for (int br = 0; br < blocks_r; ++br)
        for (int bc = 0; bc < blocks_c; ++bc) {
            double* hist = out.data() + (static_cast<std::size_t>(br) * blocks_c + bc) * bins;
            for (int r = br * block_side; r < (br + 1) * block_side; ++r)
                for (int c = bc * block_side; c < (bc + 1) * block_side; ++c) {
                    const std::uint32_t code = hashed.v[static_cast<std::size_t>(r) * hashed.cols + c];
                    if (code >= static_cast<std::uint32_t>(bins))
                        throw param_error("block_histogram: hash code " + std::to_string(code) +
                                          " outside " + std::to_string(bins) + " bins");
                    hist[code] += scale;
                }
        }
    return out;
}

// Histogram blocks per cascaded patch (2h x h map cut into block_side^2 cells).
inline int blocks_per_patch(int h, int block_side) {
    if (block_side < 1 || h % block_side != 0)
        throw param_error("blocks_per_patch: block side " + std::to_string(block_side) +
                          " does not divide patch side " + std::to_string(h));
    return (2 * h / block_side) * (h / block_side);
}

inline long long feature_length(int h, int block_side, int l1, int l2) {
    return static_cast<long long>(l1) * blocks_per_patch(h, block_side) * (1LL << l2);
}

// Scratch buffers so per-pixel feature extraction does not allocate.
struct FeatureWorkspace {
    Mat cascade;
    Mat stage1_map;
    Mat stage1_norm;
    Mat stage2_map;
    HashedMap hashed;
};

// cascade -> normalize -> two-stage filtering -> per-group hashing ->
// block histograms, concatenated in stage-1 filter order.
inline void extract_feature_into(const PcaNetModel& model, const TemporalPair& pair,
                                 Coord center, FeatureWorkspace& ws,
                                 std::vector<double>& feature) {
    const int l1 = static_cast<int>(model.stage1.filters.size());
    const int l2 = static_cast<int>(model.stage2.filters.size());
    const int bins = 1 << l2;

    cascade_patch_into(pair, center, model.h, ws.cascade);
    normalize_values(ws.cascade.v);

    feature.clear();
    feature.reserve(static_cast<std::size_t>(feature_length(model.h, model.block_side, l1, l2)));
    for (int j = 0; j < l1; ++j) {
        convolve_same_into(ws.cascade, model.stage1.filters[j], ws.stage1_map);
        ws.stage1_norm = ws.stage1_map;
        normalize_values(ws.stage1_norm.v);

        ws.hashed.rows = ws.stage1_norm.rows;
        ws.hashed.cols = ws.stage1_norm.cols;
        ws.hashed.v.assign(ws.stage1_norm.v.size(), 0);
        for (int l = 0; l < l2; ++l) {
            convolve_same_into(ws.stage1_norm, model.stage2.filters[l], ws.stage2_map);
            const std::uint32_t bit = 1u << l;
            for (std::size_t i = 0; i < ws.stage2_map.v.size(); ++i)
                if (ws.stage2_map.v[i] > 0.0)
                    ws.hashed.v[i] |= bit;
        }
        const std::vector<double> hist =
            block_histogram(ws.hashed, model.block_side, bins, model.normalize_hist);
        feature.insert(feature.end(), hist.begin(), hist.end());
    }
}

inline std::vector<double> extract_feature(const PcaNetModel& model, const TemporalPair& pair,
                                           Coord center) {
    FeatureWorkspace ws;
    std::vector<double> feature;
    extract_feature_into(model, pair, center, ws, feature);
    return feature;
}

// --- filter-bank training ----------------------------------------------------

struct FitParams {
    int h = 7;
    int k = 5;
    int l1 = 8;
    int l2 = 8;
    long long n_max = 50000;
};

struct FitInfo {
    long long stage1_windows = 0;
    long long stage2_pool = 0; // stage-1 maps pooled for stage-2 learning
    long long stage2_windows = 0;
};

struct StageBanks {
    FilterBank stage1;
    FilterBank stage2;
};

// Reference to a training patch center inside a list of temporal pairs, so
// the banks can be fitted across several scenes at once.
struct TrainingPatchRef {
    int pair_index = 0;
    Coord center;
};

inline StageBanks fit_feature_extractor(const std::vector<const TemporalPair*>& pairs,
                                        const std::vector<TrainingPatchRef>& refs,
                                        const FitParams& params, Rng& rng,
                                        FitInfo* info = nullptr) {
    if (pairs.empty() || refs.empty())
        throw param_error("fit_feature_extractor: no training patches");
    if (params.h < 1 || params.h % 2 == 0)
        throw param_error("fit_feature_extractor: patch side must be odd");
    if (params.k < 1 || params.k % 2 == 0)
        throw param_error("fit_feature_extractor: filter side must be odd");
    if (params.k > params.h)
        throw param_error("fit_feature_extractor: filter side exceeds patch side");

    std::vector<CascadedPatch> patches;
    patches.reserve(refs.size());
    for (const TrainingPatchRef& ref : refs) {
        if (ref.pair_index < 0 || ref.pair_index >= static_cast<int>(pairs.size()))
            throw param_error("fit_feature_extractor: pair index out of range");
        patches.push_back(cascade_patch(*pairs[ref.pair_index], ref.center, params.h));
    }

    StageBanks banks;
    {
        const PatchMatrix x1 = build_patch_matrix(patches, params.k, params.n_max, rng);
        if (info)
            info->stage1_windows = x1.data.cols;
        banks.stage1 = learn_filters(x1, params.l1);
    }

    // Stage-1 responses of every training patch, normalized, become the
    // training pool for the second bank (pooled jointly across filters).
    std::vector<CascadedPatch> pool;
    pool.reserve(patches.size() * banks.stage1.filters.size());
    Mat map;
    for (CascadedPatch& p : patches) {
        normalize_values(p.data.v);
        for (const Mat& w1 : banks.stage1.filters) {
            convolve_same_into(p.data, w1, map);
            CascadedPatch q;
            q.center = p.center;
            q.h = p.h;
            q.data = normalize_mat(map);
            pool.push_back(std::move(q));
        }
    }
    if (info)
        info->stage2_pool = static_cast<long long>(pool.size());
    {
        const PatchMatrix x2 = build_patch_matrix(pool, params.k, params.n_max, rng);
        if (info)
            info->stage2_windows = x2.data.cols;
        banks.stage2 = learn_filters(x2, params.l2);
    }
    return banks;
}

inline StageBanks fit_feature_extractor(const TemporalPair& pair,
                                        const std::vector<Coord>& coords,
                                        const FitParams& params, Rng& rng,
                                        FitInfo* info = nullptr) {
    std::vector<const TemporalPair*> pairs{&pair};
    std::vector<TrainingPatchRef> refs;
    refs.reserve(coords.size());
    for (Coord c : coords)
        refs.push_back(TrainingPatchRef{0, c});
    return fit_feature_extractor(pairs, refs, params, rng, info);
}

} // namespace sarcd
