#include "pprfraud/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pprfraud/csv.hpp"

namespace pprfraud {

namespace {

using namespace std::chrono;

bool parse_fixed_int(std::string_view text, int& out) {
    if (text.empty()) return false;
    int value = 0;
    for (char c : text) {
        if (c < '0' || c > '9') return false;
        value = value * 10 + (c - '0');
    }
    out = value;
    return true;
}

std::string pad2(unsigned v) {
    std::string s = std::to_string(v);
    return s.size() < 2 ? "0" + s : s;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace

MalformedRow::MalformedRow(std::size_t line_no, const std::string& reason)
    : std::runtime_error("malformed row at line " + std::to_string(line_no) + ": " + reason),
      line_no_(line_no) {}

MissingColumn::MissingColumn(const std::string& name)
    : std::runtime_error("missing column '" + name + "'"), name_(name) {}

std::vector<std::string> LedgerSchema::column_names() const {
    return {id,       event_time, amount,         currency,  execution_date,
            txn_type, status,     channel,        label,     debtor_account,
            creditor_account, party_id, source_ip, session_id, creditor_party_id};
}

std::optional<std::chrono::sys_days> parse_date(std::string_view text) {
    text = trim(text);
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    if (!parse_fixed_int(text.substr(0, 4), y) || !parse_fixed_int(text.substr(5, 2), m) ||
        !parse_fixed_int(text.substr(8, 2), d))
        return std::nullopt;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return sys_days{ymd};
}

std::string format_date(std::chrono::sys_days d) {
    const year_month_day ymd{d};
    return std::to_string(static_cast<int>(ymd.year())) + "-" +
           pad2(static_cast<unsigned>(ymd.month())) + "-" + pad2(static_cast<unsigned>(ymd.day()));
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    text = trim(text);
    if (text.size() != 19 || (text[10] != 'T' && text[10] != ' ') || text[13] != ':' ||
        text[16] != ':')
        return std::nullopt;
    auto date = parse_date(text.substr(0, 10));
    int hh = 0, mm = 0, ss = 0;
    if (!date || !parse_fixed_int(text.substr(11, 2), hh) ||
        !parse_fixed_int(text.substr(14, 2), mm) || !parse_fixed_int(text.substr(17, 2), ss))
        return std::nullopt;
    if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
    return Timestamp{*date} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_timestamp(Timestamp t) {
    const auto day_start = floor<days>(t);
    const hh_mm_ss<seconds> tod{t - day_start};
    return format_date(day_start) + "T" + pad2(static_cast<unsigned>(tod.hours().count())) + ":" +
           pad2(static_cast<unsigned>(tod.minutes().count())) + ":" +
           pad2(static_cast<unsigned>(tod.seconds().count()));
}

std::optional<Amount> parse_amount(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    const auto dot = text.find('.');
    const std::string_view whole = text.substr(0, dot);
    const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if (whole.empty() && frac.empty()) return std::nullopt;
    constexpr std::int64_t kLimit = std::numeric_limits<std::int64_t>::max() / 1000;
    std::int64_t units = 0;
    for (char c : whole) {
        if (c < '0' || c > '9') return std::nullopt;
        units = units * 10 + (c - '0');
        if (units > kLimit) return std::nullopt;
    }
    std::int64_t cents = 0;
    for (std::size_t i = 0; i < frac.size(); ++i) {
        const char c = frac[i];
        if (c < '0' || c > '9') return std::nullopt;
        if (i < 2) {
            cents = cents * 10 + (c - '0');
        } else if (c != '0') {
            // Sub-cent precision is not representable.
            return std::nullopt;
        }
    }
    if (frac.size() == 1) cents *= 10;
    return Amount{units * 100 + cents};
}

std::string format_amount(Amount a) {
    const std::int64_t frac = a.cents % 100;
    return std::to_string(a.cents / 100) + "." + (frac < 10 ? "0" : "") + std::to_string(frac);
}

std::vector<Transaction> parse_ledger(std::istream& in, const LedgerSchema& schema) {
    std::vector<Transaction> out;
    std::string line;
    std::size_t line_no = 0;
    if (!csv::next_line(in, line, line_no)) throw MissingColumn(schema.id);

    auto header = csv::split_record(line);
    if (!header) throw MalformedRow(line_no, "unterminated quote in header");
    for (auto& h : *header) h = std::string(trim(h));
    const auto names = schema.column_names();
    std::vector<std::size_t> col;
    for (const auto& name : names) {
        auto it = std::find(header->begin(), header->end(), name);
        if (it == header->end()) throw MissingColumn(name);
        col.push_back(static_cast<std::size_t>(it - header->begin()));
    }
    const std::size_t width = header->size();

    while (csv::next_line(in, line, line_no)) {
        auto fields = csv::split_record(line);
        if (!fields) throw MalformedRow(line_no, "unterminated quote");
        if (fields->size() != width)
            throw MalformedRow(line_no, "expected " + std::to_string(width) + " fields, got " +
                                            std::to_string(fields->size()));
        auto field = [&](std::size_t k) -> std::string_view { return trim((*fields)[col[k]]); };
        auto hash = [&](std::size_t k) {
            auto v = csv::parse_int64(field(k));
            if (!v) throw MalformedRow(line_no, "bad integer in column '" + names[k] + "'");
            return *v;
        };

        Transaction t;
        t.id = std::string(field(0));
        if (t.id.empty()) throw MalformedRow(line_no, "empty id");
        auto ts = parse_timestamp(field(1));
        if (!ts) throw MalformedRow(line_no, "bad timestamp '" + std::string(field(1)) + "'");
        t.event_time = *ts;
        auto amount = parse_amount(field(2));
        if (!amount) throw MalformedRow(line_no, "bad amount '" + std::string(field(2)) + "'");
        t.amount = *amount;
        t.currency = std::string(field(3));
        auto date = parse_date(field(4));
        if (!date) throw MalformedRow(line_no, "bad date '" + std::string(field(4)) + "'");
        t.execution_date = *date;
        t.txn_type = std::string(field(5));
        t.status = std::string(field(6));
        t.channel = std::string(field(7));
        const auto label = field(8);
        if (label == "0") {
            t.label = 0;
        } else if (label == "1") {
            t.label = 1;
        } else {
            throw MalformedRow(line_no, "label must be 0 or 1, got '" + std::string(label) + "'");
        }
        t.debtor_account = hash(9);
        t.creditor_account = hash(10);
        if (t.debtor_account == 0 || t.creditor_account == 0)
            throw MalformedRow(line_no, "account hash 0 is reserved");
        t.party_id = hash(11);
        t.source_ip = hash(12);
        t.session_id = hash(13);
        t.creditor_party_id = hash(14);
        out.push_back(std::move(t));
    }
    return out;
}

void write_ledger(std::ostream& out, std::span<const Transaction> txns, const LedgerSchema& schema) {
    csv::write_record(out, schema.column_names());
    for (const auto& t : txns) {
        csv::write_record(out, {t.id, format_timestamp(t.event_time), format_amount(t.amount),
                                t.currency, format_date(t.execution_date), t.txn_type, t.status,
                                t.channel, std::to_string(t.label), std::to_string(t.debtor_account),
                                std::to_string(t.creditor_account), std::to_string(t.party_id),
                                std::to_string(t.source_ip), std::to_string(t.session_id),
                                std::to_string(t.creditor_party_id)});
    }
}

std::vector<Transaction> filter_status(std::span<const Transaction> txns, const std::string& status) {
    std::vector<Transaction> out;
    for (const auto& t : txns)
        if (t.status == status) out.push_back(t);
    return out;
}

bool chronological_less(const Transaction& a, const Transaction& b) {
    if (a.event_time != b.event_time) return a.event_time < b.event_time;
    return a.id < b.id;
}

SplitDataset chronological_split(std::span<const Transaction> txns, int history_days,
                                 double train_fraction) {
    if (history_days < 0) throw std::invalid_argument("history_days must be >= 0");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train_fraction must lie in (0, 1)");

    std::vector<Transaction> sorted(txns.begin(), txns.end());
    std::stable_sort(sorted.begin(), sorted.end(), chronological_less);

    SplitDataset split;
    if (sorted.empty()) throw EmptyAfterHistory();
    const Timestamp history_end = floor<days>(sorted.front().event_time) + days{history_days};
    auto first_post = std::find_if(sorted.begin(), sorted.end(),
                                   [&](const Transaction& t) { return t.event_time >= history_end; });
    const auto remaining = static_cast<std::size_t>(sorted.end() - first_post);
    if (remaining == 0) throw EmptyAfterHistory();

    const auto n_train = static_cast<std::size_t>(
        std::floor(static_cast<double>(remaining) * train_fraction + 1e-9));
    auto test_begin = first_post + static_cast<std::ptrdiff_t>(n_train);

    split.history.assign(std::make_move_iterator(sorted.begin()), std::make_move_iterator(first_post));
    split.train.assign(std::make_move_iterator(first_post), std::make_move_iterator(test_begin));
    split.test.assign(std::make_move_iterator(test_begin), std::make_move_iterator(sorted.end()));
    split.train_start = history_end;
    split.test_start = split.test.empty() ? split.train.back().event_time : split.test.front().event_time;
    return split;
}

}  // namespace pprfraud
