#include "pprfraud/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <json.hpp>

namespace pprfraud {

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

void TrainParams::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
    if (!(l2_lambda >= 0.0)) throw std::invalid_argument("l2_lambda must be >= 0");
    if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
    if (!(loss_tol > 0.0)) throw std::invalid_argument("loss_tol must be > 0");
}

ScalerStats fit_scaler(const Matrix& train) {
    if (train.rows == 0) throw EmptyMatrix();
    ScalerStats s;
    s.mean.assign(train.cols, 0.0);
    s.stddev.assign(train.cols, 0.0);
    const double n = static_cast<double>(train.rows);
    for (std::size_t r = 0; r < train.rows; ++r)
        for (std::size_t c = 0; c < train.cols; ++c) s.mean[c] += train(r, c);
    for (auto& m : s.mean) m /= n;
    for (std::size_t r = 0; r < train.rows; ++r)
        for (std::size_t c = 0; c < train.cols; ++c) {
            const double d = train(r, c) - s.mean[c];
            s.stddev[c] += d * d;
        }
    for (auto& sd : s.stddev) {
        sd = std::sqrt(sd / n);
        if (sd < 1e-12) sd = 1.0;
    }
    return s;
}

Matrix apply_scaler(const Matrix& m, const ScalerStats& stats) {
    if (stats.mean.size() != m.cols || stats.stddev.size() != m.cols)
        throw DimensionMismatch("scaler has " + std::to_string(stats.mean.size()) + " columns, matrix has " +
                                std::to_string(m.cols));
    Matrix out(m.rows, m.cols);
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c) out(r, c) = (m(r, c) - stats.mean[c]) / stats.stddev[c];
    return out;
}

std::vector<double> sample_weights(std::span<const int> labels, ClassWeighting weighting) {
    std::vector<double> w(labels.size(), 1.0);
    if (weighting == ClassWeighting::none) return w;
    const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const std::size_t negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0) return w;
    const double n = static_cast<double>(labels.size());
    const double w_pos = n / (2.0 * static_cast<double>(positives));
    const double w_neg = n / (2.0 * static_cast<double>(negatives));
    for (std::size_t i = 0; i < labels.size(); ++i) w[i] = labels[i] == 1 ? w_pos : w_neg;
    return w;
}

LossAndGradient log_loss(const Matrix& x, std::span<const int> labels, std::span<const double> sample_weight,
                         std::span<const double> weights, double intercept, double l2_lambda) {
    if (labels.size() != x.rows || sample_weight.size() != x.rows || weights.size() != x.cols)
        throw DimensionMismatch("log_loss: inconsistent dimensions");
    LossAndGradient out;
    out.grad_weights.assign(x.cols, 0.0);
    double total_weight = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) {
        const auto row = x.row(r);
        double z = intercept;
        for (std::size_t c = 0; c < x.cols; ++c) z += weights[c] * row[c];
        const double s = sample_weight[r];
        const double y = labels[r];
        out.loss += s * (softplus(z) - y * z);
        const double residual = s * (sigmoid(z) - y);
        for (std::size_t c = 0; c < x.cols; ++c) out.grad_weights[c] += residual * row[c];
        out.grad_intercept += residual;
        total_weight += s;
    }
    if (total_weight > 0.0) {
        out.loss /= total_weight;
        out.grad_intercept /= total_weight;
        for (auto& g : out.grad_weights) g /= total_weight;
    }
    for (std::size_t c = 0; c < x.cols; ++c) {
        out.loss += 0.5 * l2_lambda * weights[c] * weights[c];
        out.grad_weights[c] += l2_lambda * weights[c];
    }
    return out;
}

LogisticModel train(const Matrix& standardized, std::span<const int> labels, const TrainParams& params) {
    params.validate();
    if (standardized.rows == 0) throw EmptyMatrix();
    if (labels.size() != standardized.rows)
        throw DimensionMismatch("train: " + std::to_string(labels.size()) + " labels for " +
                                std::to_string(standardized.rows) + " rows");
    for (int y : labels)
        if (y != 0 && y != 1) throw std::invalid_argument("train: labels must be 0 or 1");

    LogisticModel model;
    model.params = params;
    model.weights.assign(standardized.cols, 0.0);

    const auto sw = sample_weights(labels, params.class_weighting);
    double pos = 0.0, total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        pos += sw[i] * labels[i];
        total += sw[i];
    }
    model.intercept = logit(std::clamp(pos / total, 1e-6, 1.0 - 1e-6));

    const bool all_same = std::adjacent_find(labels.begin(), labels.end(), std::not_equal_to<>()) == labels.end();
    if (all_same) {
        model.single_class = true;
        model.final_loss = log_loss(standardized, labels, sw, model.weights, model.intercept, params.l2_lambda).loss;
        return model;
    }

    LossAndGradient current = log_loss(standardized, labels, sw, model.weights, model.intercept, params.l2_lambda);
    std::vector<double> candidate(model.weights.size());
    for (std::size_t epoch = 0; epoch < params.max_epochs; ++epoch) {
        double step = params.learning_rate;
        bool accepted = false;
        LossAndGradient next;
        double next_intercept = 0.0;
        for (int halving = 0; halving <= 60; ++halving, step *= 0.5) {
            for (std::size_t c = 0; c < candidate.size(); ++c)
                candidate[c] = model.weights[c] - step * current.grad_weights[c];
            next_intercept = model.intercept - step * current.grad_intercept;
            next = log_loss(standardized, labels, sw, candidate, next_intercept, params.l2_lambda);
            if (next.loss <= current.loss) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        const double change = std::abs(current.loss - next.loss) / std::max(std::abs(current.loss), 1e-300);
        model.weights = candidate;
        model.intercept = next_intercept;
        current = std::move(next);
        model.epochs_run = epoch + 1;
        if (change < params.loss_tol) break;
    }
    model.final_loss = current.loss;
    return model;
}

LogisticModel fit_logistic(const Matrix& raw, std::span<const int> labels, std::vector<std::string> names,
                           const TrainParams& params) {
    if (names.size() != raw.cols) throw DimensionMismatch("fit_logistic: feature names do not match columns");
    ScalerStats scaler = fit_scaler(raw);
    LogisticModel model = train(apply_scaler(raw, scaler), labels, params);
    model.scaler = std::move(scaler);
    model.feature_names = std::move(names);
    return model;
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<double> predict_proba(const LogisticModel& model, const Matrix& raw) {
    if (raw.cols != model.weights.size())
        throw DimensionMismatch("predict_proba: model expects " + std::to_string(model.weights.size()) +
                                " columns, got " + std::to_string(raw.cols));
    const bool scaled = !model.scaler.mean.empty();
    std::vector<double> out(raw.rows);
    for (std::size_t r = 0; r < raw.rows; ++r) {
        double z = model.intercept;
        for (std::size_t c = 0; c < raw.cols; ++c) {
            const double v = scaled ? (raw(r, c) - model.scaler.mean[c]) / model.scaler.stddev[c] : raw(r, c);
            z += model.weights[c] * v;
        }
        out[r] = sigmoid(z);
    }
    return out;
}

std::vector<ImportanceEntry> feature_importance(const LogisticModel& model) {
    std::vector<ImportanceEntry> out;
    for (std::size_t i = 0; i < model.weights.size(); ++i) {
        std::string name = i < model.feature_names.size() ? model.feature_names[i] : "f" + std::to_string(i + 1);
        out.push_back({std::move(name), std::abs(model.weights[i])});
    }
    std::sort(out.begin(), out.end(), [](const ImportanceEntry& a, const ImportanceEntry& b) {
        if (a.importance != b.importance) return a.importance > b.importance;
        return a.feature < b.feature;
    });
    return out;
}

std::string model_to_json(const LogisticModel& model) {
    nlohmann::ordered_json j;
    j["feature_names"] = model.feature_names;
    j["weights"] = model.weights;
    j["intercept"] = model.intercept;
    j["scaler"] = {{"mean", model.scaler.mean}, {"stddev", model.scaler.stddev}};
    j["training"] = {{"learning_rate", model.params.learning_rate},
                     {"l2_lambda", model.params.l2_lambda},
                     {"max_epochs", model.params.max_epochs},
                     {"loss_tol", model.params.loss_tol},
                     {"class_weighting", to_string(model.params.class_weighting)},
                     {"epochs_run", model.epochs_run},
                     {"final_loss", model.final_loss},
                     {"single_class", model.single_class}};
    return j.dump(2);
}

LogisticModel model_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    LogisticModel m;
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    m.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
    m.scaler.stddev = j.at("scaler").at("stddev").get<std::vector<double>>();
    const auto& t = j.at("training");
    m.params.learning_rate = t.at("learning_rate").get<double>();
    m.params.l2_lambda = t.at("l2_lambda").get<double>();
    m.params.max_epochs = t.at("max_epochs").get<std::size_t>();
    m.params.loss_tol = t.at("loss_tol").get<double>();
    m.params.class_weighting = parse_class_weighting(t.at("class_weighting").get<std::string>());
    m.epochs_run = t.at("epochs_run").get<std::size_t>();
    m.final_loss = t.at("final_loss").get<double>();
    m.single_class = t.at("single_class").get<bool>();
    if (m.weights.size() != m.feature_names.size())
        throw DimensionMismatch("model json: weights and feature_names differ in length");
    return m;
}

const char* to_string(ClassWeighting weighting) {
    return weighting == ClassWeighting::none ? "none" : "balanced";
}

ClassWeighting parse_class_weighting(const std::string& text) {
    if (text == "none") return ClassWeighting::none;
    if (text == "balanced") return ClassWeighting::balanced;
    throw std::invalid_argument("unknown class_weighting '" + text + "'");
}

}  // namespace pprfraud
