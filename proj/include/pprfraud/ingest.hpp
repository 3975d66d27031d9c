#pragma once

#include <chrono>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pprfraud {

using Timestamp = std::chrono::sys_seconds;
using AccountHash = std::int64_t;

// Currency amount held as an exact count of hundredths.
struct Amount {
    std::int64_t cents = 0;

    double value() const { return static_cast<double>(cents) / 100.0; }
    friend auto operator<=>(const Amount&, const Amount&) = default;
};

struct Transaction {
    std::string id;
    Timestamp event_time{};
    Amount amount{};
    std::string currency;
    std::chrono::sys_days execution_date{};
    std::string txn_type;
    std::string status;
    std::string channel;
    int label = 0;
    AccountHash debtor_account = 0;
    AccountHash creditor_account = 0;
    std::int64_t party_id = 0;
    std::int64_t source_ip = 0;
    std::int64_t session_id = 0;
    std::int64_t creditor_party_id = 0;

    friend bool operator==(const Transaction&, const Transaction&) = default;
};

struct SplitDataset {
    std::vector<Transaction> history;
    std::vector<Transaction> train;
    std::vector<Transaction> test;
    // First instant after the history window, and event time of the first test row
    // (equal to the end of train when test is empty).
    Timestamp train_start{};
    Timestamp test_start{};
};

// Column names for each Transaction field. Defaults to the ledger export names.
struct LedgerSchema {
    std::string id = "id";
    std::string event_time = "eventtimecet";
    std::string amount = "trxamount";
    std::string currency = "currency";
    std::string execution_date = "transactionexecutiondate";
    std::string txn_type = "transactiontype";
    std::string status = "trxstatus";
    std::string channel = "channel";
    std::string label = "label";
    std::string debtor_account = "debtoraccountnumberhash";
    std::string creditor_account = "creditoraccountnumberhash";
    std::string party_id = "partyidhash";
    std::string source_ip = "sourceiphash";
    std::string session_id = "sessionidhash";
    std::string creditor_party_id = "creditoraccountpartyidhash";

    std::vector<std::string> column_names() const;
};

class MalformedRow : public std::runtime_error {
public:
    MalformedRow(std::size_t line_no, const std::string& reason);
    std::size_t line_no() const { return line_no_; }

private:
    std::size_t line_no_;
};

class MissingColumn : public std::runtime_error {
public:
    explicit MissingColumn(const std::string& name);
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

class EmptyAfterHistory : public std::runtime_error {
public:
    EmptyAfterHistory() : std::runtime_error("no transactions remain after the history window") {}
};

std::vector<Transaction> parse_ledger(std::istream& in, const LedgerSchema& schema = {});
void write_ledger(std::ostream& out, std::span<const Transaction> txns,
                  const LedgerSchema& schema = {});

std::vector<Transaction> filter_status(std::span<const Transaction> txns, const std::string& status);

// Sorts by (event_time, id); the first `history_days` calendar days become history,
// the earliest `train_fraction` of the remainder (by count) becomes train.
SplitDataset chronological_split(std::span<const Transaction> txns, int history_days = 14,
                                 double train_fraction = 0.7);

bool chronological_less(const Transaction& a, const Transaction& b);

// Field-level parsers, exposed for the other CSV readers and for tests.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);
std::optional<std::chrono::sys_days> parse_date(std::string_view text);
std::string format_date(std::chrono::sys_days d);
std::optional<Amount> parse_amount(std::string_view text);
std::string format_amount(Amount a);

}  // namespace pprfraud
