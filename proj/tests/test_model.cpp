#include <cmath>
#include <random>

#include "doctest.h"
#include "pprfraud/model.hpp"

using namespace pprfraud;

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(r, c);
    for (auto& x : m.data) x = n(rng);
    return m;
}

std::vector<int> random_labels(std::mt19937_64& rng, std::size_t n) {
    std::bernoulli_distribution b(0.4);
    std::vector<int> y(n);
    for (auto& v : y) v = b(rng);
    y[0] = 1;
    y[1] = 0;
    return y;
}

}  // namespace

TEST_CASE("scaler") {
    Matrix m(2, 2);
    m(0, 0) = 0;
    m(1, 0) = 2;
    m(0, 1) = 5;
    m(1, 1) = 5;
    auto stats = fit_scaler(m);
    CHECK(stats.mean[0] == 1.0);
    CHECK(stats.stddev[0] == 1.0);
    CHECK(stats.stddev[1] == 1.0);
    auto s = apply_scaler(m, stats);
    CHECK(s(0, 0) == -1.0);
    CHECK(s(1, 0) == 1.0);
    CHECK(s(0, 1) == 0.0);
    CHECK(s(1, 1) == 0.0);

    std::mt19937_64 rng(1);
    auto r = random_matrix(rng, 50, 4);
    for (auto& x : r.data) x = 3 * x + 7;
    auto z = apply_scaler(r, fit_scaler(r));
    for (std::size_t j = 0; j < 4; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < 50; ++i) mean += z(i, j);
        CHECK(std::abs(mean / 50) < 1e-9);
    }
    CHECK_THROWS_AS(fit_scaler(Matrix(0, 3)), EmptyMatrix);
}

TEST_CASE("separable two-point set") {
    Matrix x(2, 1);
    x(0, 0) = -1;
    x(1, 0) = 1;
    std::vector<int> y = {0, 1};
    TrainParams params;
    params.learning_rate = 1.0;
    params.l2_lambda = 1e-8;
    params.max_epochs = 2000;
    auto model = train(x, y, params);
    CHECK(model.final_loss < 0.01);
    CHECK(model.weights[0] > 0);
}

TEST_CASE("single-class labels give an intercept-only model") {
    std::mt19937_64 rng(2);
    auto x = random_matrix(rng, 20, 3);
    std::vector<int> y(20, 0);
    auto model = train(x, y);
    CHECK(model.single_class);
    for (double w : model.weights) CHECK(w == 0.0);
    for (double p : predict_proba(model, x)) CHECK(p < 0.5);
}

TEST_CASE("analytic gradient matches central differences") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    const double h = 1e-6;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        auto x = random_matrix(rng, 10, 7);
        auto y = random_labels(rng, 10);
        std::vector<double> sw = sample_weights(y, trial % 2 ? ClassWeighting::balanced : ClassWeighting::none);
        std::vector<double> w(7);
        for (auto& v : w) v = n(rng);
        const double b = n(rng);
        const double lambda = 0.1;
        auto lg = log_loss(x, y, sw, w, b, lambda);
        auto rel = [](double a, double f) { return std::abs(a - f) / std::max({std::abs(a), std::abs(f), 1e-8}); };
        for (std::size_t j = 0; j < 7; ++j) {
            auto wp = w, wm = w;
            wp[j] += h;
            wm[j] -= h;
            const double fd = (log_loss(x, y, sw, wp, b, lambda).loss - log_loss(x, y, sw, wm, b, lambda).loss) / (2 * h);
            worst = std::max(worst, rel(lg.grad_weights[j], fd));
        }
        const double fd_b = (log_loss(x, y, sw, w, b + h, lambda).loss - log_loss(x, y, sw, w, b - h, lambda).loss) / (2 * h);
        worst = std::max(worst, rel(lg.grad_intercept, fd_b));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("prediction") {
    LogisticModel zero;
    zero.weights = {0.0, 0.0};
    Matrix x(3, 2);
    for (double p : predict_proba(zero, x)) CHECK(p == 0.5);

    CHECK(sigmoid(40.0) >= 1.0 - 1e-15);
    CHECK(sigmoid(40.0) <= 1.0);
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(std::isfinite(sigmoid(-800.0)));
    CHECK(sigmoid(0.0) == 0.5);

    LogisticModel big;
    big.weights = {40.0};
    Matrix one(1, 1);
    one(0, 0) = 1.0;
    CHECK(predict_proba(big, one)[0] >= 1.0 - 1e-15);

    LogisticModel mono;
    mono.weights = {2.0};
    Matrix line(5, 1);
    for (std::size_t i = 0; i < 5; ++i) line(i, 0) = static_cast<double>(i) - 2.0;
    auto p = predict_proba(mono, line);
    for (std::size_t i = 1; i < 5; ++i) CHECK(p[i] > p[i - 1]);

    Matrix wrong(1, 3);
    CHECK_THROWS_AS(predict_proba(mono, wrong), DimensionMismatch);
}

TEST_CASE("importance ordering") {
    LogisticModel m;
    m.feature_names = {"f1", "f2", "f3"};
    m.weights = {0.8, -0.7, 0.01};
    auto imp = feature_importance(m);
    REQUIRE(imp.size() == 3);
    CHECK(imp[0].feature == "f1");
    CHECK(imp[1].feature == "f2");
    CHECK(imp[2].feature == "f3");
    CHECK(imp[1].importance == 0.7);

    m.weights = {-0.8, 0.7, -0.01};
    auto flipped = feature_importance(m);
    for (std::size_t i = 0; i < 3; ++i) CHECK(flipped[i].feature == imp[i].feature);

    m.feature_names = {"f3", "f1", "f2"};
    m.weights = {0.01, 0.8, -0.7};
    auto permuted = feature_importance(m);
    for (std::size_t i = 0; i < 3; ++i) CHECK(permuted[i].feature == imp[i].feature);

    m.feature_names = {"amount", "ppr", "channel"};
    m.weights = {0.0, 0.3, -0.5};
    auto z = feature_importance(m);
    CHECK(z.back().feature == "amount");
    CHECK(z.back().importance == 0.0);
}

TEST_CASE("accepted steps never raise the loss") {
    std::mt19937_64 rng(4);
    auto x = random_matrix(rng, 200, 5);
    std::vector<int> y(200);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t i = 0; i < 200; ++i) y[i] = x(i, 0) - 0.5 * x(i, 2) + noise(rng) > 0;
    TrainParams params;
    params.learning_rate = 5.0;
    params.loss_tol = 1e-300;
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= 40; ++k) {
        params.max_epochs = k;
        auto model = train(x, y, params);
        CHECK(model.final_loss <= previous);
        previous = model.final_loss;
    }
}

TEST_CASE("a separating feature ranks first") {
    std::mt19937_64 rng(5);
    auto x = random_matrix(rng, 100, 4);
    std::vector<int> y(100);
    for (std::size_t i = 0; i < 100; ++i) {
        y[i] = i % 2;
        x(i, 2) = y[i] ? 1.0 + std::abs(x(i, 2)) : -1.0 - std::abs(x(i, 2));
    }
    TrainParams params;
    params.l2_lambda = 0.0;
    auto model = fit_logistic(x, y, {"a", "b", "sep", "d"}, params);
    CHECK(feature_importance(model).front().feature == "sep");
}

TEST_CASE("model json round-trip") {
    std::mt19937_64 rng(6);
    auto x = random_matrix(rng, 30, 3);
    auto y = random_labels(rng, 30);
    TrainParams params;
    params.class_weighting = ClassWeighting::balanced;
    auto model = fit_logistic(x, y, {"a", "b", "c"}, params);
    auto back = model_from_json(model_to_json(model));
    CHECK(back.feature_names == model.feature_names);
    CHECK(back.weights == model.weights);
    CHECK(back.intercept == model.intercept);
    CHECK(back.scaler.mean == model.scaler.mean);
    CHECK(back.scaler.stddev == model.scaler.stddev);
    CHECK(back.params.class_weighting == ClassWeighting::balanced);
    CHECK(predict_proba(back, x) == predict_proba(model, x));
}

TEST_CASE("balanced weights") {
    std::vector<int> y = {1, 0, 0, 0};
    auto w = sample_weights(y, ClassWeighting::balanced);
    CHECK(w[0] == doctest::Approx(2.0));
    CHECK(w[1] == doctest::Approx(4.0 / 6.0));
    auto ones = sample_weights(y, ClassWeighting::none);
    for (double v : ones) CHECK(v == 1.0);
}
