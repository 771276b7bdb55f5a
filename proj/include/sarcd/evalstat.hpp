#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "sarcd/error.hpp"
#include "sarcd/raster.hpp"

namespace sarcd {

// Positive class = changed.
struct ConfusionMatrix {
    long long tp = 0;
    long long tn = 0;
    long long fp = 0;
    long long fn = 0;

    long long total() const { return tp + tn + fp + fn; }
};

inline ConfusionMatrix confusion(const ReferenceMap& pred, const ReferenceMap& ref) {
    if (pred.width != ref.width || pred.height != ref.height)
        throw format_error("confusion: prediction " + std::to_string(pred.width) + "x" +
                           std::to_string(pred.height) + " vs reference " +
                           std::to_string(ref.width) + "x" + std::to_string(ref.height));
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const bool p = pred.labels[i] != 0;
        const bool r = ref.labels[i] != 0;
        if (p && r)
            ++cm.tp;
        else if (!p && !r)
            ++cm.tn;
        else if (p && !r)
            ++cm.fp;
        else
            ++cm.fn;
    }
    return cm;
}

// Chance-corrected agreement (po - pe) / (1 - pe). When both marginals are
// degenerate and agreeing (pe would be 1), returns 1 for full agreement and
// 0 otherwise -- frozen convention keeping the function total.
inline double kappa(const ConfusionMatrix& cm) {
    const long long n = cm.total();
    if (n < 1)
        throw param_error("kappa: empty confusion matrix");
    const long long pred_changed = cm.tp + cm.fp;
    const long long ref_changed = cm.tp + cm.fn;
    const bool degenerate_agreeing = (pred_changed == n && ref_changed == n) ||
                                     (pred_changed == 0 && ref_changed == 0);
    if (degenerate_agreeing)
        return (cm.tp + cm.tn) == n ? 1.0 : 0.0;
    const double nd = static_cast<double>(n);
    const double po = static_cast<double>(cm.tp + cm.tn) / nd;
    const double pe = (static_cast<double>(pred_changed) * static_cast<double>(ref_changed) +
                       static_cast<double>(cm.tn + cm.fn) * static_cast<double>(cm.tn + cm.fp)) /
                      (nd * nd);
    return (po - pe) / (1.0 - pe);
}

// Rates with a zero denominator are reported as absent rather than crashing.
struct ErrorRates {
    std::optional<double> false_alarm; // fp / (fp + tn)
    std::optional<double> missed;      // fn / (fn + tp)
    double overall_error = 0.0;        // (fp + fn) / N
    double pcc = 0.0;                  // 1 - overall_error
};

inline ErrorRates error_rates(const ConfusionMatrix& cm) {
    const long long n = cm.total();
    if (n < 1)
        throw param_error("error_rates: empty confusion matrix");
    ErrorRates r;
    if (cm.fp + cm.tn > 0)
        r.false_alarm = static_cast<double>(cm.fp) / static_cast<double>(cm.fp + cm.tn);
    if (cm.fn + cm.tp > 0)
        r.missed = static_cast<double>(cm.fn) / static_cast<double>(cm.fn + cm.tp);
    r.overall_error = static_cast<double>(cm.fp + cm.fn) / static_cast<double>(n);
    r.pcc = 1.0 - r.overall_error;
    return r;
}

struct EvalReport {
    ConfusionMatrix cm;
    double kappa = 0.0;
    ErrorRates rates;
};

inline EvalReport evaluate(const ReferenceMap& pred, const ReferenceMap& ref) {
    EvalReport rep;
    rep.cm = confusion(pred, ref);
    rep.kappa = kappa(rep.cm);
    rep.rates = error_rates(rep.cm);
    return rep;
}

struct RunAggregate {
    std::vector<double> kappas;
    double mean = 0.0;
    std::optional<double> std_dev; // sample standard deviation, n-1 denominator
};

inline RunAggregate aggregate(const std::vector<double>& kappas) {
    if (kappas.empty())
        throw param_error("aggregate: no runs");
    RunAggregate agg;
    agg.kappas = kappas;
    for (double k : kappas)
        agg.mean += k;
    agg.mean /= static_cast<double>(kappas.size());
    if (kappas.size() >= 2) {
        double ss = 0.0;
        for (double k : kappas)
            ss += (k - agg.mean) * (k - agg.mean);
        agg.std_dev = std::sqrt(ss / static_cast<double>(kappas.size() - 1));
    }
    return agg;
}

namespace detail {

// Continued-fraction core of the regularized incomplete beta function
// (modified Lentz). Converges in a handful of terms for the arguments the
// t CDF produces.
inline double betacf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double eps = 3e-16;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny)
        d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny)
            d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny)
            d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= eps)
            break;
    }
    return h;
}

} // namespace detail

inline double regularized_incomplete_beta(double a, double b, double x) {
    if (x < 0.0 || x > 1.0)
        throw param_error("regularized_incomplete_beta: x outside [0, 1]");
    if (x == 0.0)
        return 0.0;
    if (x == 1.0)
        return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log(1.0 - x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0))
        return bt * detail::betacf(a, b, x) / a;
    return 1.0 - bt * detail::betacf(b, a, 1.0 - x) / b;
}

// Two-sided p-value of Student's t statistic.
inline double students_t_two_sided_p(double t, double dof) {
    if (!(dof > 0.0))
        throw param_error("students_t_two_sided_p: dof must be positive");
    if (t == 0.0)
        return 1.0;
    const double x = dof / (dof + t * t);
    return regularized_incomplete_beta(0.5 * dof, 0.5, x);
}

struct TTestReport {
    double t_value = 0.0;
    double p_value = 1.0;
    double dof = std::numeric_limits<double>::quiet_NaN();
    bool significant = false; // p < 5e-3
};

// Welch two-sample test, t = (mean(a) - mean(b)) / sqrt(sa^2/na + sb^2/nb)
// with Welch-Satterthwaite degrees of freedom. Call with a = baseline and
// b = proposed so a superior b yields a negative t. Both samples constant:
// equal means give t = 0, p = 1; different means give an infinite t with
// p = 0 (dof stays undefined in both cases).
inline TTestReport welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw param_error("welch_t_test: both samples need at least 2 values");
    auto mean_var = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v)
            m += x;
        m /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v)
            ss += (x - m) * (x - m);
        return std::pair<double, double>{m, ss / static_cast<double>(v.size() - 1)};
    };
    const auto [ma, va] = mean_var(a);
    const auto [mb, vb] = mean_var(b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double se_sq = va / na + vb / nb;

    TTestReport rep;
    if (se_sq == 0.0) {
        if (ma == mb) {
            rep.t_value = 0.0;
            rep.p_value = 1.0;
        } else {
            rep.t_value = ma > mb ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
            rep.p_value = 0.0;
            rep.significant = true;
        }
        return rep;
    }
    rep.t_value = (ma - mb) / std::sqrt(se_sq);
    rep.dof = se_sq * se_sq /
              ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    rep.p_value = students_t_two_sided_p(rep.t_value, rep.dof);
    rep.significant = rep.p_value < 5e-3;
    return rep;
}

} // namespace sarcd
