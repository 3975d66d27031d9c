#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pprfraud/features.hpp"

namespace pprfraud {

struct ScalerStats {
    std::vector<double> mean;
    std::vector<double> stddev;
};

enum class ClassWeighting { none, balanced };

struct TrainParams {
    double learning_rate = 0.1;
    double l2_lambda = 1e-6;
    std::size_t max_epochs = 500;
    double loss_tol = 1e-10;
    ClassWeighting class_weighting = ClassWeighting::none;

    void validate() const;
};

struct LogisticModel {
    std::vector<std::string> feature_names;
    std::vector<double> weights;
    double intercept = 0.0;
    ScalerStats scaler;
    TrainParams params;
    std::size_t epochs_run = 0;
    double final_loss = 0.0;
    // Set when the training labels were all identical; the model is intercept-only.
    bool single_class = false;
};

struct ImportanceEntry {
    std::string feature;
    double importance = 0.0;
};

class EmptyMatrix : public std::invalid_argument {
public:
    EmptyMatrix() : std::invalid_argument("matrix has no rows") {}
};

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Population standard deviation; a deviation below 1e-12 is replaced by 1.
ScalerStats fit_scaler(const Matrix& train);
Matrix apply_scaler(const Matrix& m, const ScalerStats& stats);

struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> grad_weights;
    double grad_intercept = 0.0;
};

// Per-row weights for the log-loss mean; all ones unless class balancing is requested.
std::vector<double> sample_weights(std::span<const int> labels, ClassWeighting weighting);

// Weighted mean log-loss plus (lambda / 2) * ||w||^2, and its analytic gradient.
LossAndGradient log_loss(const Matrix& x, std::span<const int> labels, std::span<const double> sample_weight,
                         std::span<const double> weights, double intercept, double l2_lambda);

/**
 * Full-batch gradient descent on standardized features.
 *
 * Weights start at zero and the intercept at the log-odds of the weighted positive rate.
 * A step that raises the loss is halved until it does not (at most 60 times). Training
 * stops when the relative loss change drops below params.loss_tol or after
 * params.max_epochs accepted steps. Single-class labels yield an intercept-only model
 * with single_class set.
 */
LogisticModel train(const Matrix& standardized, std::span<const int> labels, const TrainParams& params = {});

// Scaler fit, standardization and train() in one call; the model keeps the scaler
// and applies it in predict_proba.
LogisticModel fit_logistic(const Matrix& raw, std::span<const int> labels, std::vector<std::string> names,
                           const TrainParams& params = {});

double sigmoid(double z);

// Applies the stored scaler (if any) and returns sigmoid(w.x + b) per row.
std::vector<double> predict_proba(const LogisticModel& model, const Matrix& raw);

// Descending |weight|, ties by feature name. The intercept is not ranked.
std::vector<ImportanceEntry> feature_importance(const LogisticModel& model);

std::string model_to_json(const LogisticModel& model);
LogisticModel model_from_json(const std::string& text);

const char* to_string(ClassWeighting weighting);
ClassWeighting parse_class_weighting(const std::string& text);

}  // namespace pprfraud
