#ifndef THERMOFUSE_METRICS_REPORT_HPP
#define THERMOFUSE_METRICS_REPORT_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "thermofuse/metrics/confusion.hpp"

namespace thermofuse::metrics {

struct EmptyList : std::runtime_error {
    EmptyList() : std::runtime_error("EmptyList: no reports to aggregate") {}
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double sensitivity = 0.0;  // identical to recall for one-vs-rest
    double specificity = 0.0;
    bool defined = true;  // false when a zero denominator forced a 0 (D17 convention)
};

struct MetricsReport {
    std::vector<ClassMetrics> per_class;
    ClassMetrics macro;
    double mcc = 0.0;
    double accuracy = 0.0;
    std::optional<double> auc_macro;
    std::vector<std::optional<double>> auc_per_class;
    std::vector<std::int64_t> support;  // per-class true counts
    bool has_undefined = false;
    ConfusionMatrix cm{kNumClasses};
};

// One-vs-rest metrics per class plus unweighted macro averages. Classes with
// a zero denominator contribute 0 to the macro mean and are flagged.
inline MetricsReport per_class_metrics(const ConfusionMatrix& cm) {
    if (cm.total <= 0) throw EmptyMatrix();
    MetricsReport rep;
    rep.cm = cm;
    rep.per_class.resize(cm.k);
    rep.support.resize(cm.k);
    double sp = 0, sr = 0, sf = 0, ssens = 0, sspec = 0;
    for (int c = 0; c < cm.k; ++c) {
        const std::int64_t tp = cm.at(c, c);
        const std::int64_t fn = cm.row_sum(c) - tp;
        const std::int64_t fp = cm.col_sum(c) - tp;
        const std::int64_t tn = cm.total - tp - fn - fp;
        ClassMetrics& cl = rep.per_class[c];
        rep.support[c] = tp + fn;
        bool defined = true;
        if (tp + fp > 0) cl.precision = double(tp) / double(tp + fp);
        else defined = false;
        if (tp + fn > 0) cl.recall = double(tp) / double(tp + fn);
        else defined = false;
        cl.sensitivity = cl.recall;
        if (tn + fp > 0) cl.specificity = double(tn) / double(tn + fp);
        else defined = false;
        if (cl.precision + cl.recall > 0)
            cl.f1 = 2.0 * cl.precision * cl.recall / (cl.precision + cl.recall);
        cl.defined = defined;
        if (!defined) rep.has_undefined = true;
        sp += cl.precision; sr += cl.recall; sf += cl.f1;
        ssens += cl.sensitivity; sspec += cl.specificity;
    }
    rep.macro.precision = sp / cm.k;
    rep.macro.recall = sr / cm.k;
    rep.macro.f1 = sf / cm.k;
    rep.macro.sensitivity = ssens / cm.k;
    rep.macro.specificity = sspec / cm.k;
    rep.macro.defined = !rep.has_undefined;
    rep.accuracy = double(cm.trace()) / double(cm.total);
    return rep;
}

// Multiclass Matthews correlation from row/column sums; degenerate matrices
// (a zero sqrt factor) return 0.
inline double mcc(const ConfusionMatrix& cm) {
    if (cm.total <= 0) throw EmptyMatrix();
    const double s = static_cast<double>(cm.total);
    const double c = static_cast<double>(cm.trace());
    double sum_pt = 0, sum_pp = 0, sum_tt = 0;
    for (int k = 0; k < cm.k; ++k) {
        const double p = static_cast<double>(cm.col_sum(k));
        const double t = static_cast<double>(cm.row_sum(k));
        sum_pt += p * t;
        sum_pp += p * p;
        sum_tt += t * t;
    }
    const double num = c * s - sum_pt;
    const double f1 = s * s - sum_pp;
    const double f2 = s * s - sum_tt;
    if (f1 <= 0.0 || f2 <= 0.0) return 0.0;
    return num / std::sqrt(f1 * f2);
}

inline MetricsReport evaluate(const ConfusionMatrix& cm) {
    MetricsReport rep = per_class_metrics(cm);
    rep.mcc = mcc(cm);
    return rep;
}

// Unweighted arithmetic mean of every scalar; support and the confusion
// matrix are summed.
inline MetricsReport aggregate_folds(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) throw EmptyList();
    const int k = static_cast<int>(reports.front().per_class.size());
    for (const auto& r : reports)
        if (static_cast<int>(r.per_class.size()) != k)
            throw std::invalid_argument("aggregate_folds: class sets differ");

    MetricsReport agg;
    agg.per_class.resize(k);
    agg.support.assign(k, 0);
    agg.cm = ConfusionMatrix(k);
    const double n = static_cast<double>(reports.size());
    int auc_count = 0;
    double auc_sum = 0;
    for (const auto& r : reports) {
        for (int c = 0; c < k; ++c) {
            agg.per_class[c].precision += r.per_class[c].precision / n;
            agg.per_class[c].recall += r.per_class[c].recall / n;
            agg.per_class[c].f1 += r.per_class[c].f1 / n;
            agg.per_class[c].sensitivity += r.per_class[c].sensitivity / n;
            agg.per_class[c].specificity += r.per_class[c].specificity / n;
            agg.per_class[c].defined = agg.per_class[c].defined && r.per_class[c].defined;
            agg.support[c] += c < static_cast<int>(r.support.size()) ? r.support[c] : 0;
        }
        agg.macro.precision += r.macro.precision / n;
        agg.macro.recall += r.macro.recall / n;
        agg.macro.f1 += r.macro.f1 / n;
        agg.macro.sensitivity += r.macro.sensitivity / n;
        agg.macro.specificity += r.macro.specificity / n;
        agg.mcc += r.mcc / n;
        agg.accuracy += r.accuracy / n;
        agg.has_undefined = agg.has_undefined || r.has_undefined;
        if (r.auc_macro) {
            auc_sum += *r.auc_macro;
            ++auc_count;
        }
        if (r.cm.k == k) {
            for (std::size_t i = 0; i < agg.cm.m.size(); ++i) agg.cm.m[i] += r.cm.m[i];
            agg.cm.total += r.cm.total;
        }
    }
    if (auc_count > 0) agg.auc_macro = auc_sum / auc_count;
    agg.macro.defined = !agg.has_undefined;
    return agg;
}

// Plain mean of already-scalar values (fold accuracies etc).
inline double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) throw EmptyList();
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

}  // namespace thermofuse::metrics

#endif
