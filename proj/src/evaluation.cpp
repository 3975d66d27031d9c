#include "pprfraud/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pprfraud {

namespace {

void check_lengths(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("scores and labels differ in length");
}

std::pair<std::size_t, std::size_t> class_counts(std::span<const int> labels) {
    const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    return {pos, labels.size() - pos};
}

// Indices ordered by descending score; ties keep input order.
std::vector<std::size_t> descending_order(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

// Cumulative (tp, fp, threshold) after each distinct score, highest first.
struct Step {
    std::size_t tp, fp;
    double threshold;
};

std::vector<Step> threshold_steps(std::span<const double> scores, std::span<const int> labels) {
    const auto order = descending_order(scores);
    std::vector<Step> steps;
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double t = scores[order[i]];
        for (; i < order.size() && scores[order[i]] == t; ++i) (labels[order[i]] == 1 ? tp : fp)++;
        steps.push_back({tp, fp, t});
    }
    return steps;
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    check_lengths(scores, labels);
    const auto [n_pos, n_neg] = class_counts(labels);
    if (n_pos == 0 || n_neg == 0) throw SingleClassEval();

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        // Ranks i+1 .. j share their average.
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) rank_sum += avg_rank;
        i = j;
    }
    const double n1 = static_cast<double>(n_pos);
    const double n0 = static_cast<double>(n_neg);
    return (rank_sum - n1 * (n1 + 1.0) / 2.0) / (n1 * n0);
}

ConfusionMetrics confusion_at(std::span<const double> scores, std::span<const int> labels, double threshold) {
    check_lengths(scores, labels);
    ConfusionMetrics m;
    m.threshold = threshold;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        const bool actual = labels[i] == 1;
        if (predicted && actual) ++m.tp;
        else if (predicted) ++m.fp;
        else if (actual) ++m.fn;
        else ++m.tn;
    }
    const double total = static_cast<double>(scores.size());
    m.accuracy = total > 0 ? static_cast<double>(m.tp + m.tn) / total : 0.0;

    auto ratio = [](std::size_t num, std::size_t den, bool& undefined) {
        undefined = den == 0;
        return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    m.precision = ratio(m.tp, m.tp + m.fp, m.precision_undefined);
    m.recall = ratio(m.tp, m.tp + m.fn, m.recall_undefined);

    bool ignored = false;
    const double neg_precision = ratio(m.tn, m.tn + m.fn, ignored);
    const double neg_recall = ratio(m.tn, m.tn + m.fp, ignored);
    const double support_pos = static_cast<double>(m.tp + m.fn);
    const double support_neg = static_cast<double>(m.tn + m.fp);
    if (total > 0) {
        m.weighted_precision = (support_pos * m.precision + support_neg * neg_precision) / total;
        m.weighted_recall = (support_pos * m.recall + support_neg * neg_recall) / total;
    }
    return m;
}

std::vector<CurvePoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
    check_lengths(scores, labels);
    const auto [n_pos, n_neg] = class_counts(labels);
    if (n_pos == 0 || n_neg == 0) throw SingleClassEval();
    std::vector<CurvePoint> points{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
    for (const auto& s : threshold_steps(scores, labels))
        points.push_back({static_cast<double>(s.fp) / static_cast<double>(n_neg),
                          static_cast<double>(s.tp) / static_cast<double>(n_pos), s.threshold});
    return points;
}

std::vector<CurvePoint> pr_curve(std::span<const double> scores, std::span<const int> labels) {
    check_lengths(scores, labels);
    const auto [n_pos, n_neg] = class_counts(labels);
    if (n_pos == 0 || n_neg == 0) throw SingleClassEval();
    std::vector<CurvePoint> points{{0.0, 1.0, std::numeric_limits<double>::infinity()}};
    for (const auto& s : threshold_steps(scores, labels))
        points.push_back({static_cast<double>(s.tp) / static_cast<double>(n_pos),
                          static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp), s.threshold});
    return points;
}

double average_precision(std::span<const CurvePoint> pr) {
    double area = 0.0;
    for (std::size_t k = 1; k < pr.size(); ++k) area += (pr[k].x - pr[k - 1].x) * pr[k].y;
    return area;
}

MetricsReport evaluate(std::span<const double> scores, std::span<const int> labels, double threshold) {
    MetricsReport r;
    r.auc = roc_auc(scores, labels);
    r.confusion = confusion_at(scores, labels, threshold);
    r.roc_points = roc_curve(scores, labels);
    r.pr_points = pr_curve(scores, labels);
    r.average_precision = average_precision(r.pr_points);
    return r;
}

std::vector<double> quantile_edges(std::span<const double> actual, std::size_t n_bins) {
    if (n_bins < 1) throw std::invalid_argument("n_bins must be >= 1");
    std::vector<double> sorted(actual.begin(), actual.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> edges;
    if (sorted.empty()) return edges;
    const std::size_t n = sorted.size();
    for (std::size_t i = 1; i < n_bins; ++i) {
        const double e = sorted[std::min(n - 1, i * n / n_bins)];
        if (e > sorted.front() && (edges.empty() || e > edges.back())) edges.push_back(e);
    }
    if (edges.empty() && sorted.back() > sorted.front()) {
        // Mass piled on the minimum swallowed every quantile; split off the rest.
        edges.push_back(*std::upper_bound(sorted.begin(), sorted.end(), sorted.front()));
    }
    return edges;
}

double psi_from_proportions(std::span<const double> q_actual, std::span<const double> q_expected) {
    if (q_actual.size() != q_expected.size()) throw std::invalid_argument("psi: bin counts differ");
    double total = 0.0;
    for (std::size_t i = 0; i < q_actual.size(); ++i) {
        const double a = std::max(q_actual[i], kPsiProportionFloor);
        const double e = std::max(q_expected[i], kPsiProportionFloor);
        total += (a - e) * std::log(a / e);
    }
    return total;
}

PsiResult psi_on_edges(std::span<const double> actual, std::span<const double> expected,
                       std::span<const double> edges) {
    if (actual.empty() || expected.empty()) throw std::invalid_argument("psi: samples must be non-empty");
    PsiResult r;
    r.edges.assign(edges.begin(), edges.end());
    const std::size_t bins = edges.size() + 1;
    r.actual_counts.assign(bins, 0);
    r.expected_counts.assign(bins, 0);
    auto bin_of = [&](double v) {
        return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
    };
    for (double v : actual) ++r.actual_counts[bin_of(v)];
    for (double v : expected) ++r.expected_counts[bin_of(v)];
    r.n_actual = actual.size();
    r.n_expected = expected.size();
    for (std::size_t b = 0; b < bins; ++b) {
        r.q_actual.push_back(static_cast<double>(r.actual_counts[b]) / static_cast<double>(r.n_actual));
        r.q_expected.push_back(static_cast<double>(r.expected_counts[b]) / static_cast<double>(r.n_expected));
    }
    r.psi = psi_from_proportions(r.q_actual, r.q_expected);
    return r;
}

PsiResult psi(std::span<const double> actual, std::span<const double> expected, std::size_t n_bins) {
    if (actual.empty() || expected.empty()) throw std::invalid_argument("psi: samples must be non-empty");
    const auto edges = quantile_edges(actual, n_bins);
    PsiResult r = psi_on_edges(actual, expected, edges);
    if (edges.empty()) {
        r.degenerate = true;
        r.psi = 0.0;
    }
    return r;
}

}  // namespace pprfraud
