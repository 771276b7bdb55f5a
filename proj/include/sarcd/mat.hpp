#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "sarcd/error.hpp"

namespace sarcd {

// Dense row-major matrix of doubles. Only what the filter-learning and
// patch plumbing needs; not a general linear-algebra library.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0)
        : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {}

    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i)
            m.at(i, i) = 1.0;
        return m;
    }
};

inline Mat mul(const Mat& a, const Mat& b) {
    if (a.cols != b.rows)
        throw param_error("mul: inner dimensions disagree");
    Mat c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int k = 0; k < a.cols; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0)
                continue;
            for (int j = 0; j < b.cols; ++j)
                c.at(i, j) += aik * b.at(k, j);
        }
    return c;
}

inline Mat transpose(const Mat& a) {
    Mat t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j)
            t.at(j, i) = a.at(i, j);
    return t;
}

struct SymEigen {
    std::vector<double> values; // non-increasing
    Mat vectors;                // column i pairs with values[i]
};

// Cyclic Jacobi eigendecomposition for symmetric matrices. The rotations
// keep the accumulated vector matrix orthonormal to machine precision,
// which is what the filter-bank invariants rely on. Quadratic convergence;
// the sweep cap is never reached in practice for the sizes used here.
inline SymEigen jacobi_eigen_sym(Mat a) {
    if (a.rows != a.cols)
        throw param_error("jacobi_eigen_sym: matrix must be square");
    const int n = a.rows;
    Mat vec = Mat::identity(n);

    auto off_diag_sq = [&]() {
        double s = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q)
                s += a.at(p, q) * a.at(p, q);
        return s;
    };
    double diag_sq = 0.0;
    for (int i = 0; i < n; ++i)
        diag_sq += a.at(i, i) * a.at(i, i);
    double scale = diag_sq + 2.0 * off_diag_sq();

    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        const double off = off_diag_sq();
        if (off <= 1e-30 * (scale + 1e-300))
            break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (apq == 0.0)
                    continue;
                const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0)
                                     ? 1.0 / (theta + std::sqrt(theta * theta + 1.0))
                                     : -1.0 / (-theta + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int i = 0; i < n; ++i) {
                    const double aip = a.at(i, p);
                    const double aiq = a.at(i, q);
                    a.at(i, p) = c * aip - s * aiq;
                    a.at(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = a.at(p, i);
                    const double aqi = a.at(q, i);
                    a.at(p, i) = c * api - s * aqi;
                    a.at(q, i) = s * api + c * aqi;
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = vec.at(i, p);
                    const double viq = vec.at(i, q);
                    vec.at(i, p) = c * vip - s * viq;
                    vec.at(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i)
        order[i] = i;
    for (int i = 1; i < n; ++i) { // stable insertion sort by eigenvalue, descending
        int j = i;
        while (j > 0 && a.at(order[j - 1], order[j - 1]) < a.at(order[j], order[j])) {
            std::swap(order[j - 1], order[j]);
            --j;
        }
    }

    SymEigen out;
    out.values.resize(n);
    out.vectors = Mat(n, n);
    for (int j = 0; j < n; ++j) {
        out.values[j] = a.at(order[j], order[j]);
        for (int i = 0; i < n; ++i)
            out.vectors.at(i, j) = vec.at(i, order[j]);
    }
    return out;
}

} // namespace sarcd
