#include "pprfraud/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "pprfraud/csv.hpp"

namespace pprfraud {

namespace {

using namespace std::chrono;

constexpr std::int64_t kSecondsPerDay = 86400;

unsigned weekday_of(Timestamp t) { return weekday{floor<days>(t)}.c_encoding(); }

unsigned hour_of(Timestamp t) {
    return static_cast<unsigned>((t - floor<days>(t)).count() / 3600);
}

const std::vector<std::string> kColumns = {
    "current_amount", "current_amount_first_digit", "channel_index", "trx_count_creditor",
    "day_of_week",    "time_of_day",                "ppr",           "label"};

}  // namespace

std::vector<std::string> feature_names(bool include_ppr) {
    const std::size_t n = include_ppr ? kFullFeatureCount : kBaselineFeatureCount;
    return std::vector<std::string>(kColumns.begin(), kColumns.begin() + static_cast<std::ptrdiff_t>(n));
}

Matrix design_matrix(std::span<const FeatureRow> rows, bool include_ppr) {
    Matrix m(rows.size(), include_ppr ? kFullFeatureCount : kBaselineFeatureCount);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const FeatureRow& r = rows[i];
        m(i, 0) = r.current_amount;
        m(i, 1) = r.current_amount_first_digit;
        m(i, 2) = r.channel_index;
        m(i, 3) = static_cast<double>(r.trx_count_creditor);
        m(i, 4) = r.day_of_week;
        m(i, 5) = r.time_of_day;
        if (include_ppr) m(i, 6) = r.ppr;
    }
    return m;
}

std::vector<int> labels_of(std::span<const FeatureRow> rows) {
    std::vector<int> labels;
    labels.reserve(rows.size());
    for (const auto& r : rows) labels.push_back(r.label);
    return labels;
}

int first_digit(double amount) {
    if (!(amount > 0.0) || !std::isfinite(amount)) return 0;
    // Scientific form puts the leading significant digit first; rounding to 15 digits
    // absorbs representation error such as 0.3 = 0.29999...
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), amount, std::chars_format::scientific, 14);
    if (ec != std::errc{}) return 0;
    return buf[0] - '0';
}

ChannelEncoder ChannelEncoder::fit(std::span<const Transaction> train) {
    std::unordered_map<std::string, std::size_t> freq;
    for (const auto& t : train) ++freq[t.channel];
    std::vector<std::pair<std::string, std::size_t>> ordered(freq.begin(), freq.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    ChannelEncoder enc;
    for (std::size_t i = 0; i < ordered.size(); ++i) enc.rank_[ordered[i].first] = i + 1;
    return enc;
}

double ChannelEncoder::encode(const std::string& channel) const {
    auto it = rank_.find(channel);
    if (it == rank_.end()) return 1.0;
    return static_cast<double>(it->second) / static_cast<double>(rank_.size());
}

HistoryIndex::HistoryIndex(int window_days) : window_days_(window_days) {
    if (window_days < 1) throw std::invalid_argument("window_days must be >= 1");
}

void HistoryIndex::add(const Transaction& txn) {
    creditor_events_[txn.creditor_account].push_back(txn.event_time);
    debtor_events_[txn.debtor_account].push_back({txn.event_time, txn.amount.cents});
}

std::size_t HistoryIndex::creditor_count(AccountHash creditor, Timestamp now) const {
    auto it = creditor_events_.find(creditor);
    if (it == creditor_events_.end()) return 0;
    const auto& times = it->second;
    const Timestamp start = now - seconds{window_days_ * kSecondsPerDay};
    auto lo = std::lower_bound(times.begin(), times.end(), start);
    auto hi = std::lower_bound(lo, times.end(), now);
    return static_cast<std::size_t>(hi - lo);
}

HistoryIndex::DebtorWindow HistoryIndex::debtor_window(AccountHash debtor, Timestamp now) const {
    DebtorWindow w;
    auto it = debtor_events_.find(debtor);
    if (it == debtor_events_.end()) return w;
    const auto& events = it->second;
    const Timestamp start = now - seconds{window_days_ * kSecondsPerDay};
    const Timestamp start_7d = now - seconds{7 * kSecondsPerDay};
    auto by_time = [](const DebtorEvent& e, Timestamp t) { return e.time < t; };
    auto lo = std::lower_bound(events.begin(), events.end(), start, by_time);
    auto hi = std::lower_bound(lo, events.end(), now, by_time);
    const unsigned wd = weekday_of(now);
    const unsigned hour = hour_of(now);
    for (auto e = lo; e != hi; ++e) {
        ++w.total;
        w.sum_cents_window += e->cents;
        if (weekday_of(e->time) == wd) ++w.same_weekday;
        if (hour_of(e->time) == hour) ++w.same_hour;
        if (e->time >= start_7d) {
            ++w.count_7d;
            w.sum_cents_7d += e->cents;
        }
    }
    return w;
}

double day_of_week_score(const Transaction& txn, const HistoryIndex& hist) {
    const auto w = hist.debtor_window(txn.debtor_account, txn.event_time);
    return static_cast<double>(w.same_weekday + 1) / static_cast<double>(w.total + 7);
}

double time_of_day_score(const Transaction& txn, const HistoryIndex& hist, TimeOfDayMode mode) {
    const auto w = hist.debtor_window(txn.debtor_account, txn.event_time);
    if (mode == TimeOfDayMode::hour_consistency)
        return static_cast<double>(w.same_hour + 1) / static_cast<double>(w.total + 24);
    if (w.count_7d == 0 || w.total == 0 || w.sum_cents_window == 0) return 1.0;
    const double avg_7d = static_cast<double>(w.sum_cents_7d) / static_cast<double>(w.count_7d);
    const double avg_window = static_cast<double>(w.sum_cents_window) / static_cast<double>(w.total);
    return std::clamp(avg_7d / avg_window, 0.0, 10.0);
}

std::size_t trx_count_creditor(const Transaction& txn, const HistoryIndex& hist) {
    return hist.creditor_count(txn.creditor_account, txn.event_time);
}

FeatureRow score_transaction(const Transaction& txn, const HistoryIndex& hist, const ScoreTable& scores,
                             const ChannelEncoder& encoder, const FeatureOptions& options) {
    FeatureRow row;
    row.current_amount = txn.amount.value();
    row.current_amount_first_digit = first_digit(row.current_amount);
    row.channel_index = encoder.encode(txn.channel);
    row.trx_count_creditor = trx_count_creditor(txn, hist);
    row.day_of_week = day_of_week_score(txn, hist);
    row.time_of_day = time_of_day_score(txn, hist, options.time_of_day);
    row.ppr = transaction_exposure(txn, scores, options.exposure);
    row.label = txn.label;
    return row;
}

FeatureMatrix assemble_features(const SplitDataset& dataset, const ScoreTable& scores,
                                const ChannelEncoder& encoder, const FeatureOptions& options) {
    enum class Part { history, train, test };
    struct Ref {
        const Transaction* txn;
        Part part;
    };
    std::vector<Ref> stream;
    stream.reserve(dataset.history.size() + dataset.train.size() + dataset.test.size());
    for (const auto& t : dataset.history) stream.push_back({&t, Part::history});
    for (const auto& t : dataset.train) stream.push_back({&t, Part::train});
    for (const auto& t : dataset.test) stream.push_back({&t, Part::test});
    std::stable_sort(stream.begin(), stream.end(),
                     [](const Ref& a, const Ref& b) { return chronological_less(*a.txn, *b.txn); });

    HistoryIndex hist(options.window_days);
    FeatureMatrix out;
    out.train.reserve(dataset.train.size());
    out.test.reserve(dataset.test.size());
    for (std::size_t i = 0; i < stream.size();) {
        // Every transaction in a same-timestamp batch sees only strictly earlier events.
        std::size_t end = i;
        while (end < stream.size() && stream[end].txn->event_time == stream[i].txn->event_time) ++end;
        for (std::size_t k = i; k < end; ++k) {
            if (stream[k].part == Part::history) continue;
            FeatureRow row = score_transaction(*stream[k].txn, hist, scores, encoder, options);
            (stream[k].part == Part::train ? out.train : out.test).push_back(row);
        }
        for (std::size_t k = i; k < end; ++k) hist.add(*stream[k].txn);
        i = end;
    }
    return out;
}

void write_features(std::ostream& out, std::span<const FeatureRow> rows) {
    csv::write_record(out, kColumns);
    for (const auto& r : rows)
        csv::write_record(out, {csv::format_double(r.current_amount),
                                std::to_string(r.current_amount_first_digit),
                                csv::format_double(r.channel_index), std::to_string(r.trx_count_creditor),
                                csv::format_double(r.day_of_week), csv::format_double(r.time_of_day),
                                csv::format_double(r.ppr), std::to_string(r.label)});
}

std::vector<FeatureRow> read_features(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!csv::next_line(in, line, line_no)) throw std::runtime_error("feature matrix: missing header");
    auto header = csv::split_record(line);
    const auto col = csv::resolve_columns(*header, kColumns);
    std::vector<FeatureRow> rows;
    while (csv::next_line(in, line, line_no)) {
        auto f = csv::split_record(line);
        if (!f || f->size() != header->size())
            throw std::runtime_error("feature matrix: malformed row at line " + std::to_string(line_no));
        auto real = [&](std::size_t k) {
            auto v = csv::parse_double((*f)[col[k]]);
            if (!v || !std::isfinite(*v))
                throw std::runtime_error("feature matrix: bad " + kColumns[k] + " at line " +
                                         std::to_string(line_no));
            return *v;
        };
        auto integer = [&](std::size_t k) {
            auto v = csv::parse_int64((*f)[col[k]]);
            if (!v || *v < 0)
                throw std::runtime_error("feature matrix: bad " + kColumns[k] + " at line " +
                                         std::to_string(line_no));
            return *v;
        };
        FeatureRow r;
        r.current_amount = real(0);
        r.current_amount_first_digit = static_cast<int>(integer(1));
        r.channel_index = real(2);
        r.trx_count_creditor = static_cast<std::size_t>(integer(3));
        r.day_of_week = real(4);
        r.time_of_day = real(5);
        r.ppr = real(6);
        r.label = static_cast<int>(integer(7));
        if (r.label > 1) throw std::runtime_error("feature matrix: label must be 0 or 1 at line " + std::to_string(line_no));
        rows.push_back(r);
    }
    return rows;
}

const char* to_string(TimeOfDayMode mode) {
    return mode == TimeOfDayMode::amount_ratio ? "amount_ratio" : "hour_consistency";
}

TimeOfDayMode parse_time_of_day_mode(const std::string& text) {
    if (text == "amount_ratio") return TimeOfDayMode::amount_ratio;
    if (text == "hour_consistency") return TimeOfDayMode::hour_consistency;
    throw std::invalid_argument("unknown time_of_day mode '" + text + "'");
}

}  // namespace pprfraud
