#include "pprfraud/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

#include "pprfraud/csv.hpp"

namespace pprfraud {

namespace {

// Independent RNG streams derived from the single configured seed.
constexpr std::uint64_t kAccountStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kTrafficStream = 0xbf58476d1ce4e5b9ULL;
constexpr std::uint64_t kRingStream = 0x94d049bb133111ebULL;

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
    return std::mt19937_64(seq);
}

std::int64_t nonzero_hash(std::mt19937_64& rng, std::unordered_set<std::int64_t>& used) {
    for (;;) {
        // Keep hashes within 53 bits so they survive a round trip through double-based tools.
        const auto v = static_cast<std::int64_t>(rng() >> 11);
        if (v != 0 && used.insert(v).second) return v;
    }
}

struct AccountPool {
    std::vector<AccountHash> accounts;
    std::vector<std::int64_t> parties;
};

AccountPool make_accounts(const SynthConfig& config) {
    auto rng = stream(config.seed, kAccountStream);
    std::unordered_set<std::int64_t> used;
    AccountPool pool;
    pool.accounts.reserve(config.n_accounts);
    pool.parties.reserve(config.n_accounts);
    for (std::size_t i = 0; i < config.n_accounts; ++i) {
        pool.accounts.push_back(nonzero_hash(rng, used));
        pool.parties.push_back(nonzero_hash(rng, used));
    }
    return pool;
}

}  // namespace

RingCapacityExceeded::RingCapacityExceeded(std::size_t needed, std::size_t available)
    : std::invalid_argument("rings need " + std::to_string(needed) + " mule accounts but only " +
                            std::to_string(available) + " accounts exist") {}

void validate(const SynthConfig& config) {
    double total = 0.0;
    for (const auto& c : config.channels) {
        if (c.name.empty()) throw InvalidConfig("channel name must be non-empty");
        if (!(c.probability >= 0.0)) throw InvalidConfig("channel probability must be >= 0");
        total += c.probability;
    }
    if (config.channels.empty() || std::abs(total - 1.0) > 1e-9)
        throw InvalidConfig("channel probabilities must sum to 1");
    if (!(config.fraud_rate >= 0.0 && config.fraud_rate < 1.0))
        throw InvalidConfig("fraud_rate must lie in [0, 1)");
    if (config.ring_size < 2) throw InvalidConfig("ring_size must be >= 2");
    if (!(config.initiated_fraction > 0.0 && config.initiated_fraction <= 1.0))
        throw InvalidConfig("initiated_fraction must lie in (0, 1]");
    if (config.span_days < 1) throw InvalidConfig("span_days must be >= 1");
    if (config.n_transactions > 0 && config.n_accounts < 2)
        throw InvalidConfig("n_accounts must be >= 2 to draw account pairs");
    if (!(config.amount_sigma >= 0.0) || !std::isfinite(config.amount_mu))
        throw InvalidConfig("amount_lognormal parameters must be finite with sigma >= 0");
}

std::vector<Transaction> generate_ledger(const SynthConfig& config) {
    validate(config);
    const AccountPool pool = make_accounts(config);
    auto rng = stream(config.seed, kTrafficStream);

    const std::int64_t span_seconds = static_cast<std::int64_t>(config.span_days) * 86400;
    std::uniform_int_distribution<std::int64_t> when(0, span_seconds - 1);
    std::uniform_int_distribution<std::size_t> pick(0, config.n_accounts ? config.n_accounts - 1 : 0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::lognormal_distribution<double> amount(config.amount_mu, config.amount_sigma);
    std::vector<double> weights;
    for (const auto& c : config.channels) weights.push_back(c.probability);
    std::discrete_distribution<std::size_t> channel(weights.begin(), weights.end());
    std::unordered_set<std::int64_t> used_ip;
    std::unordered_set<std::int64_t> used_session;

    std::vector<Transaction> rows;
    rows.reserve(config.n_transactions);
    const Timestamp start{config.start_date};
    for (std::size_t i = 0; i < config.n_transactions; ++i) {
        Transaction t;
        t.event_time = start + std::chrono::seconds{when(rng)};
        const std::size_t debtor = pick(rng);
        std::size_t creditor = pick(rng);
        while (creditor == debtor) creditor = pick(rng);
        t.debtor_account = pool.accounts[debtor];
        t.creditor_account = pool.accounts[creditor];
        t.party_id = pool.parties[debtor];
        t.creditor_party_id = pool.parties[creditor];
        t.amount = Amount{std::max<std::int64_t>(1, std::llround(amount(rng) * 100.0))};
        t.channel = config.channels[channel(rng)].name;
        t.status = unit(rng) < config.initiated_fraction ? "Initiated" : "Completed";
        t.label = unit(rng) < config.fraud_rate ? 1 : 0;
        t.source_ip = nonzero_hash(rng, used_ip);
        // Session ids in the source export are signed; mirror that.
        t.session_id = -nonzero_hash(rng, used_session);
        t.currency = "EUR";
        t.txn_type = "Domestic";
        t.execution_date = std::chrono::floor<std::chrono::days>(t.event_time);
        rows.push_back(std::move(t));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Transaction& a, const Transaction& b) { return a.event_time < b.event_time; });
    // Ids are zero-padded in chronological order so the (event_time, id) order matches.
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::string digits = std::to_string(i);
        rows[i].id = "T" + std::string(9 > digits.size() ? 9 - digits.size() : 0, '0') + digits;
    }
    return rows;
}

SynthLedger inject_rings(std::vector<Transaction> ledger, const SynthConfig& config) {
    validate(config);
    const std::size_t n_mules = config.n_rings * config.ring_size;
    if (n_mules > config.n_accounts) throw RingCapacityExceeded(n_mules, config.n_accounts);

    SynthLedger out;
    if (config.n_rings == 0) {
        out.transactions = std::move(ledger);
        return out;
    }

    const AccountPool pool = make_accounts(config);
    auto rng = stream(config.seed, kRingStream);
    std::vector<std::size_t> order(config.n_accounts);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<std::size_t> mules(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_mules));
    for (std::size_t m = 0; m < n_mules; ++m)
        out.rings.push_back({m / config.ring_size, pool.accounts[mules[m]]});

    std::vector<std::size_t> fraud_rows;
    for (std::size_t i = 0; i < ledger.size(); ++i)
        if (ledger[i].label == 1) fraud_rows.push_back(i);
    std::shuffle(fraud_rows.begin(), fraud_rows.end(), rng);
    for (std::size_t k = 0; k < fraud_rows.size(); ++k) {
        const std::size_t mule = mules[k % n_mules];
        Transaction& t = ledger[fraud_rows[k]];
        t.creditor_account = pool.accounts[mule];
        t.creditor_party_id = pool.parties[mule];
    }
    out.transactions = std::move(ledger);
    return out;
}

SynthLedger synthesize(const SynthConfig& config) {
    return inject_rings(generate_ledger(config), config);
}

void write_rings(std::ostream& out, std::span<const RingMember> rings) {
    csv::write_record(out, {"ring_id", "account_hash"});
    for (const auto& r : rings) csv::write_record(out, {std::to_string(r.ring_id), std::to_string(r.account)});
}

}  // namespace pprfraud
