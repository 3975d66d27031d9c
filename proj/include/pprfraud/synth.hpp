#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pprfraud/ingest.hpp"

namespace pprfraud {

struct ChannelShare {
    std::string name;
    double probability = 0.0;
};

struct SynthConfig {
    std::uint64_t seed = 42;
    std::size_t n_accounts = 5000;
    std::size_t n_transactions = 100000;
    int span_days = 180;
    double fraud_rate = 0.005;
    std::size_t n_rings = 20;
    std::size_t ring_size = 4;
    double initiated_fraction = 0.47;
    std::vector<ChannelShare> channels = {
        {"DIRECT_WEB", 0.45}, {"MOBILE_RETAIL", 0.35}, {"BRANCH", 0.12}, {"TELEPHONE", 0.08}};
    double amount_mu = 4.0;
    double amount_sigma = 1.0;
    // First calendar day of the generated ledger.
    std::chrono::sys_days start_date = std::chrono::sys_days{
        std::chrono::year{2020} / std::chrono::August / std::chrono::day{1}};
};

struct RingMember {
    std::size_t ring_id = 0;
    AccountHash account = 0;
};

struct SynthLedger {
    std::vector<Transaction> transactions;
    std::vector<RingMember> rings;
};

class InvalidConfig : public std::invalid_argument {
public:
    explicit InvalidConfig(const std::string& what) : std::invalid_argument("invalid synth config: " + what) {}
};

class RingCapacityExceeded : public std::invalid_argument {
public:
    RingCapacityExceeded(std::size_t needed, std::size_t available);
};

// Throws InvalidConfig naming the first violated constraint.
void validate(const SynthConfig& config);

// Background traffic between uniformly random account pairs, sorted by event time.
std::vector<Transaction> generate_ledger(const SynthConfig& config);

// Reroutes every label-1 row to a mule creditor. Fraud rows are dealt round-robin over
// a seeded shuffle of all mules, so each mule receives at least one fraudulent payment
// whenever there are at least n_rings * ring_size fraud rows.
SynthLedger inject_rings(std::vector<Transaction> ledger, const SynthConfig& config);

// generate_ledger followed by inject_rings.
SynthLedger synthesize(const SynthConfig& config);

void write_rings(std::ostream& out, std::span<const RingMember> rings);

}  // namespace pprfraud
