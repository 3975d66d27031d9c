#pragma once

#include <array>
#include <deque>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pprfraud/exposure.hpp"
#include "pprfraud/ingest.hpp"

namespace pprfraud {

enum class TimeOfDayMode {
    // Debtor's 7-day average amount over its window average amount.
    amount_ratio,
    // Laplace-smoothed share of the debtor's prior transactions in the same UTC hour.
    hour_consistency,
};

struct FeatureRow {
    double current_amount = 0.0;
    int current_amount_first_digit = 0;
    double channel_index = 1.0;
    std::size_t trx_count_creditor = 0;
    double day_of_week = 0.0;
    double time_of_day = 1.0;
    double ppr = 0.0;
    int label = 0;

    friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

inline constexpr std::size_t kBaselineFeatureCount = 6;
inline constexpr std::size_t kFullFeatureCount = 7;

// Column names in matrix order; the last one is "ppr" when include_ppr is set.
std::vector<std::string> feature_names(bool include_ppr);

// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

struct FeatureMatrix {
    std::vector<FeatureRow> train;
    std::vector<FeatureRow> test;
};

Matrix design_matrix(std::span<const FeatureRow> rows, bool include_ppr);
std::vector<int> labels_of(std::span<const FeatureRow> rows);

// Leading significant decimal digit; 0 for a zero amount.
int first_digit(double amount);

/**
 * Channel rank encoder fit on training rows.
 *
 * Channels are ranked 1..K by descending frequency, ties broken lexicographically,
 * and encoded as rank / K. Unseen channels encode as 1.
 */
class ChannelEncoder {
public:
    static ChannelEncoder fit(std::span<const Transaction> train);

    double encode(const std::string& channel) const;
    std::size_t size() const { return rank_.size(); }

private:
    std::unordered_map<std::string, std::size_t> rank_;
};

/**
 * Sliding-window history per account, fed in chronological order.
 *
 * Queries made at time `now` only see events added before them; the caller adds a
 * transaction after every transaction sharing its timestamp has been scored.
 */
class HistoryIndex {
public:
    explicit HistoryIndex(int window_days = 45);

    void add(const Transaction& txn);

    // Prior transactions into `creditor` within the window ending at `now`.
    std::size_t creditor_count(AccountHash creditor, Timestamp now) const;

    struct DebtorWindow {
        std::size_t total = 0;
        std::size_t same_weekday = 0;
        std::size_t same_hour = 0;
        std::size_t count_7d = 0;
        std::int64_t sum_cents_7d = 0;
        std::int64_t sum_cents_window = 0;
    };
    DebtorWindow debtor_window(AccountHash debtor, Timestamp now) const;

    int window_days() const { return window_days_; }

private:
    struct DebtorEvent {
        Timestamp time;
        std::int64_t cents;
    };

    int window_days_;
    std::unordered_map<AccountHash, std::vector<Timestamp>> creditor_events_;
    std::unordered_map<AccountHash, std::vector<DebtorEvent>> debtor_events_;
};

double day_of_week_score(const Transaction& txn, const HistoryIndex& hist);
double time_of_day_score(const Transaction& txn, const HistoryIndex& hist,
                         TimeOfDayMode mode = TimeOfDayMode::amount_ratio);
std::size_t trx_count_creditor(const Transaction& txn, const HistoryIndex& hist);

struct FeatureOptions {
    int window_days = 45;
    TimeOfDayMode time_of_day = TimeOfDayMode::amount_ratio;
    ExposureMode exposure = ExposureMode::sum;
};

// Scores one transaction against the history strictly before it.
FeatureRow score_transaction(const Transaction& txn, const HistoryIndex& hist, const ScoreTable& scores,
                             const ChannelEncoder& encoder, const FeatureOptions& options);

// One chronological pass over history, train and test. History rows feed the index
// only; train and test rows each yield a FeatureRow.
FeatureMatrix assemble_features(const SplitDataset& dataset, const ScoreTable& scores,
                                const ChannelEncoder& encoder, const FeatureOptions& options = {});

void write_features(std::ostream& out, std::span<const FeatureRow> rows);
std::vector<FeatureRow> read_features(std::istream& in);

const char* to_string(TimeOfDayMode mode);
TimeOfDayMode parse_time_of_day_mode(const std::string& text);

}  // namespace pprfraud
