#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sarcd/error.hpp"
#include "sarcd/rng.hpp"

namespace sarcd {

// Terminal linear classifier trained on hinge loss. Labels are {0,1} at the
// module boundary and {-1,+1} internally.
struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    double lambda = 0.0;
    int epochs = 0;
    std::uint64_t seed = 0;
};

// Regularized objective: (lambda/2)||w||^2 + mean_i max(0, 1 - y_i (w.f_i + b)).
inline double hinge_objective(const std::vector<double>& w, double b,
                              const std::vector<std::vector<double>>& feats,
                              const std::vector<int>& labels_pm, double lambda) {
    double reg = 0.0;
    for (double wi : w)
        reg += wi * wi;
    double loss = 0.0;
    for (std::size_t i = 0; i < feats.size(); ++i) {
        double d = b;
        for (std::size_t j = 0; j < w.size(); ++j)
            d += w[j] * feats[i][j];
        loss += std::max(0.0, 1.0 - labels_pm[i] * d);
    }
    return 0.5 * lambda * reg + loss / static_cast<double>(feats.size());
}

// Subgradient of hinge_objective at (w, b). Samples with margin exactly 1
// (the kink) contribute nothing. The accumulation visits samples in `order`;
// the order only permutes floating-point summation.
inline void hinge_subgradient(const std::vector<double>& w, double b,
                              const std::vector<std::vector<double>>& feats,
                              const std::vector<int>& labels_pm, double lambda,
                              const std::vector<std::uint32_t>& order,
                              std::vector<double>& grad_w, double& grad_b) {
    const double inv_n = 1.0 / static_cast<double>(feats.size());
    grad_w.assign(w.size(), 0.0);
    grad_b = 0.0;
    for (std::uint32_t i : order) {
        const std::vector<double>& f = feats[i];
        double d = b;
        for (std::size_t j = 0; j < w.size(); ++j)
            d += w[j] * f[j];
        const double y = labels_pm[i];
        if (y * d < 1.0) {
            for (std::size_t j = 0; j < w.size(); ++j)
                grad_w[j] -= inv_n * y * f[j];
            grad_b -= inv_n * y;
        }
    }
    for (std::size_t j = 0; j < w.size(); ++j)
        grad_w[j] += lambda * w[j];
}

// Projected full-batch subgradient descent: one step per epoch with step
// size 1/(lambda*t) at epoch t, bias unregularized, final iterate returned.
// After each step the iterate is projected onto a region known to contain
// the optimum (||w|| <= sqrt(2/lambda) since the objective at zero is 1, and
// |b| <= 1 + ||w||_max * max||f||); without the projection the huge early
// steps leave an imbalanced draw stuck predicting the majority class.
// The per-epoch shuffle fixes the accumulation order, so duplicated inputs
// reproduce the same decision function up to float-summation noise.
inline LinearModel train_linear(const std::vector<std::vector<double>>& feats,
                                const std::vector<int>& labels01, double lambda,
                                int epochs, std::uint64_t seed) {
    if (feats.empty() || feats.size() != labels01.size())
        throw param_error("train_linear: need matching non-empty features and labels");
    if (!(lambda > 0.0))
        throw param_error("train_linear: lambda must be positive");
    if (epochs < 1)
        throw param_error("train_linear: epochs must be >= 1");
    const std::size_t dim = feats[0].size();
    bool has_pos = false, has_neg = false;
    std::vector<int> labels_pm(labels01.size());
    for (std::size_t i = 0; i < labels01.size(); ++i) {
        if (feats[i].size() != dim)
            throw param_error("train_linear: inconsistent feature lengths");
        for (double x : feats[i])
            if (!std::isfinite(x))
                throw format_error("train_linear: non-finite feature value in sample " +
                                   std::to_string(i));
        labels_pm[i] = labels01[i] ? 1 : -1;
        (labels01[i] ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg)
        throw degeneracy_error(std::string("train_linear: only the ") +
                               (has_pos ? "changed" : "unchanged") + " class is present");

    Rng rng(seed);
    std::vector<std::uint32_t> order(feats.size());
    for (std::uint32_t i = 0; i < order.size(); ++i)
        order[i] = i;

    double max_feat_norm_sq = 0.0;
    for (const std::vector<double>& f : feats) {
        double ns = 0.0;
        for (double x : f)
            ns += x * x;
        max_feat_norm_sq = std::max(max_feat_norm_sq, ns);
    }
    const double w_ball = std::sqrt(2.0 / lambda);
    const double b_ball = 1.0 + w_ball * std::sqrt(max_feat_norm_sq);

    std::vector<double> w(dim, 0.0), grad_w(dim, 0.0);
    double b = 0.0, grad_b = 0.0;
    for (int t = 1; t <= epochs; ++t) {
        rng.shuffle(order);
        hinge_subgradient(w, b, feats, labels_pm, lambda, order, grad_w, grad_b);
        const double step = 1.0 / (lambda * t);
        for (std::size_t j = 0; j < dim; ++j)
            w[j] -= step * grad_w[j];
        b -= step * grad_b;

        double w_norm_sq = 0.0;
        for (double wj : w)
            w_norm_sq += wj * wj;
        if (w_norm_sq > w_ball * w_ball) {
            const double scale = w_ball / std::sqrt(w_norm_sq);
            for (double& wj : w)
                wj *= scale;
        }
        b = std::clamp(b, -b_ball, b_ball);
    }

    LinearModel m;
    m.weights = std::move(w);
    m.bias = b;
    m.lambda = lambda;
    m.epochs = epochs;
    m.seed = seed;
    return m;
}

inline double decision_value(const LinearModel& m, const std::vector<double>& f) {
    if (f.size() != m.weights.size())
        throw param_error("decision_value: feature length " + std::to_string(f.size()) +
                          " does not match weight length " + std::to_string(m.weights.size()));
    double d = m.bias;
    for (std::size_t j = 0; j < f.size(); ++j)
        d += m.weights[j] * f[j];
    return d;
}

// 1 (changed) iff the decision value is strictly positive; ties go unchanged.
inline int predict(const LinearModel& m, const std::vector<double>& f) {
    return decision_value(m, f) > 0.0 ? 1 : 0;
}

} // namespace sarcd
