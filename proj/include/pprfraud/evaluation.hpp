#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pprfraud {

class SingleClassEval : public std::invalid_argument {
public:
    SingleClassEval() : std::invalid_argument("evaluation needs both positive and negative labels") {}
};

struct CurvePoint {
    double x = 0.0;
    double y = 0.0;
    double threshold = 0.0;
};

struct ConfusionMetrics {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double threshold = 0.5;
    double accuracy = 0.0;
    // Fraud-positive class. Set to 0 with the matching flag raised when undefined.
    double precision = 0.0;
    double recall = 0.0;
    bool precision_undefined = false;
    bool recall_undefined = false;
    // Averages over both classes weighted by class support.
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
};

struct MetricsReport {
    double auc = 0.0;
    double average_precision = 0.0;
    ConfusionMetrics confusion;
    std::vector<CurvePoint> roc_points;  // x = FPR, y = TPR
    std::vector<CurvePoint> pr_points;   // x = recall, y = precision
};

// Mann-Whitney AUC with average ranks for tied scores.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Predicts positive iff score >= threshold.
ConfusionMetrics confusion_at(std::span<const double> scores, std::span<const int> labels,
                              double threshold = 0.5);

// One point per distinct score threshold, descending, preceded by (0, 0).
std::vector<CurvePoint> roc_curve(std::span<const double> scores, std::span<const int> labels);

// One point per distinct score threshold, descending, preceded by (recall 0, precision 1).
// Recall is non-decreasing along the sequence.
std::vector<CurvePoint> pr_curve(std::span<const double> scores, std::span<const int> labels);

// Step-wise area under a PR curve: sum of (r_k - r_{k-1}) * p_k.
double average_precision(std::span<const CurvePoint> pr);

MetricsReport evaluate(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

struct PsiResult {
    std::string feature;
    double psi = 0.0;
    // Interior edges; bin i covers [edges[i-1], edges[i]) with -inf / +inf at the ends.
    std::vector<double> edges;
    std::vector<std::size_t> actual_counts;
    std::vector<std::size_t> expected_counts;
    std::vector<double> q_actual;
    std::vector<double> q_expected;
    std::size_t n_actual = 0;
    std::size_t n_expected = 0;
    // All actual values identical: one bin, PSI reported as 0.
    bool degenerate = false;
};

inline constexpr double kPsiProportionFloor = 1e-6;

// Equal-frequency interior edges taken from `actual`, duplicates merged.
std::vector<double> quantile_edges(std::span<const double> actual, std::size_t n_bins);

// Sum over bins of (q_a - q_e) * ln(q_a / q_e), both proportions floored at 1e-6.
double psi_from_proportions(std::span<const double> q_actual, std::span<const double> q_expected);

PsiResult psi_on_edges(std::span<const double> actual, std::span<const double> expected,
                       std::span<const double> edges);

// Bins come from `actual` (training sample); `expected` is the comparison sample.
PsiResult psi(std::span<const double> actual, std::span<const double> expected, std::size_t n_bins = 10);

}  // namespace pprfraud
