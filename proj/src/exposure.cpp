#include "pprfraud/exposure.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "pprfraud/csv.hpp"

namespace pprfraud {

namespace {

// In-edge view of the transition matrix: for each target, its sources and the
// probability of stepping source -> target.
struct TransposedTransitions {
    std::vector<std::size_t> offsets;
    std::vector<NodeId> sources;
    std::vector<double> probability;
    std::vector<NodeId> dangling;
};

double edge_weight(const TransactionGraph& g, std::size_t e, WeightMode mode) {
    switch (mode) {
        case WeightMode::count:
            return static_cast<double>(g.edge_counts()[e]);
        case WeightMode::amount:
            return static_cast<double>(g.edge_amounts_cents()[e]);
        case WeightMode::unweighted:
            return 1.0;
    }
    return 0.0;
}

TransposedTransitions transpose(const TransactionGraph& g, WeightMode mode) {
    const std::size_t n = g.n_nodes();
    const auto offsets = g.out_offsets();
    const auto targets = g.out_targets();

    std::vector<double> out_total(n, 0.0);
    for (NodeId u = 0; u < n; ++u)
        for (std::size_t e = offsets[u]; e < offsets[u + 1]; ++e) out_total[u] += edge_weight(g, e, mode);

    TransposedTransitions t;
    t.offsets.assign(n + 1, 0);
    for (NodeId u = 0; u < n; ++u) {
        if (out_total[u] <= 0.0) {
            t.dangling.push_back(u);
            continue;
        }
        for (std::size_t e = offsets[u]; e < offsets[u + 1]; ++e) ++t.offsets[targets[e] + 1];
    }
    for (std::size_t v = 0; v < n; ++v) t.offsets[v + 1] += t.offsets[v];

    t.sources.resize(t.offsets[n]);
    t.probability.resize(t.offsets[n]);
    std::vector<std::size_t> cursor(t.offsets.begin(), t.offsets.end() - 1);
    // Sources are visited in ascending id, so each in-list is sorted by source.
    for (NodeId u = 0; u < n; ++u) {
        if (out_total[u] <= 0.0) continue;
        for (std::size_t e = offsets[u]; e < offsets[u + 1]; ++e) {
            const std::size_t slot = cursor[targets[e]]++;
            t.sources[slot] = u;
            t.probability[slot] = edge_weight(g, e, mode) / out_total[u];
        }
    }
    return t;
}

double combine_endpoints(double debtor, double creditor, ExposureMode mode) {
    switch (mode) {
        case ExposureMode::sum:
            return debtor + creditor;
        case ExposureMode::max:
            return std::max(debtor, creditor);
        case ExposureMode::creditor:
            return creditor;
    }
    return 0.0;
}

template <typename Fn>
void for_ranges(std::size_t n, unsigned threads, Fn&& fn) {
    constexpr std::size_t kMinPerThread = 4096;
    const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(1, n / kMinPerThread));
    if (workers <= 1) {
        fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin < end) pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
}

}  // namespace

void PprParams::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
}

NotConverged::NotConverged(PprScores last)
    : std::runtime_error("personalized PageRank did not converge after " +
                         std::to_string(last.iterations_used) + " iterations (residual " +
                         csv::format_double(last.residual) + ")"),
      last_(std::move(last)) {}

PersonalizationVector build_personalization(std::span<const Transaction> train_txns,
                                            const TransactionGraph& graph) {
    const std::size_t n = graph.n_nodes();
    if (n == 0) throw EmptyGraph();

    std::vector<double> debtor_sum(n, 0.0), creditor_sum(n, 0.0);
    std::vector<std::size_t> debtor_n(n, 0), creditor_n(n, 0);
    for (const auto& t : train_txns) {
        if (auto u = graph.node_of(t.debtor_account)) {
            debtor_sum[*u] += t.label;
            ++debtor_n[*u];
        }
        if (auto v = graph.node_of(t.creditor_account)) {
            creditor_sum[*v] += t.label;
            ++creditor_n[*v];
        }
    }

    PersonalizationVector pv;
    pv.p.assign(n, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (creditor_n[i] > 0) {
            pv.p[i] = creditor_sum[i] / static_cast<double>(creditor_n[i]);
        } else if (debtor_n[i] > 0) {
            pv.p[i] = debtor_sum[i] / static_cast<double>(debtor_n[i]);
        }
        total += pv.p[i];
    }
    if (total <= 0.0) {
        std::fill(pv.p.begin(), pv.p.end(), 1.0 / static_cast<double>(n));
    } else {
        for (auto& x : pv.p) x /= total;
    }
    return pv;
}

PprScores compute_ppr(const TransactionGraph& graph, const PersonalizationVector& p,
                      const PprParams& params) {
    params.validate();
    const std::size_t n = graph.n_nodes();
    if (p.p.size() != n)
        throw std::invalid_argument("personalization length " + std::to_string(p.p.size()) +
                                    " does not match " + std::to_string(n) + " nodes");

    const TransposedTransitions t = transpose(graph, params.weight_mode);
    const double alpha = params.alpha;
    const double restart = 1.0 - alpha;

    PprScores result;
    std::vector<double> current = p.p;
    std::vector<double> next(n, 0.0);
    for (std::size_t iter = 1; iter <= params.max_iter; ++iter) {
        double dangling_mass = 0.0;
        for (NodeId u : t.dangling) dangling_mass += current[u];
        const double teleport = alpha * dangling_mass + restart;

        for_ranges(n, params.threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t v = begin; v < end; ++v) {
                double inflow = 0.0;
                for (std::size_t k = t.offsets[v]; k < t.offsets[v + 1]; ++k)
                    inflow += current[t.sources[k]] * t.probability[k];
                next[v] = alpha * inflow + teleport * p.p[v];
            }
        });

        double residual = 0.0;
        for (std::size_t v = 0; v < n; ++v) residual += std::abs(next[v] - current[v]);
        current.swap(next);
        result.iterations_used = iter;
        result.residual = residual;
        if (residual < params.tol) {
            result.converged = true;
            break;
        }
    }
    result.scores = std::move(current);
    return result;
}

const PprScores& require_converged(const PprScores& scores) {
    if (!scores.converged) throw NotConverged(scores);
    return scores;
}

ScoreTable::ScoreTable(const TransactionGraph& graph, const PprScores& scores) {
    if (scores.scores.size() != graph.n_nodes())
        throw std::invalid_argument("score vector does not match graph size");
    scores_.reserve(graph.n_nodes());
    for (NodeId u = 0; u < graph.n_nodes(); ++u) scores_.emplace(graph.hash_of(u), scores.scores[u]);
}

double ScoreTable::score(AccountHash account) const {
    auto it = scores_.find(account);
    return it == scores_.end() ? 0.0 : it->second;
}

void ScoreTable::write_csv(std::ostream& out) const {
    std::vector<std::pair<AccountHash, double>> rows(scores_.begin(), scores_.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    csv::write_record(out, {"account_hash", "ppr_score"});
    for (const auto& [account, score] : rows)
        csv::write_record(out, {std::to_string(account), csv::format_double(score)});
}

ScoreTable ScoreTable::read_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!csv::next_line(in, line, line_no)) throw std::runtime_error("score table: missing header");
    auto header = csv::split_record(line);
    const auto col = csv::resolve_columns(*header, {"account_hash", "ppr_score"});
    ScoreTable table;
    while (csv::next_line(in, line, line_no)) {
        auto f = csv::split_record(line);
        if (!f || f->size() != header->size())
            throw std::runtime_error("score table: malformed row at line " + std::to_string(line_no));
        auto account = csv::parse_int64((*f)[col[0]]);
        auto score = csv::parse_double((*f)[col[1]]);
        if (!account || !score || !(*score >= 0.0))
            throw std::runtime_error("score table: bad value at line " + std::to_string(line_no));
        table.scores_[*account] = *score;
    }
    return table;
}

double transaction_exposure(const Transaction& txn, const ScoreTable& table, ExposureMode mode) {
    return combine_endpoints(table.score(txn.debtor_account), table.score(txn.creditor_account), mode);
}

double transaction_exposure(const Transaction& txn, const PprScores& scores,
                            const TransactionGraph& graph, ExposureMode mode) {
    auto lookup = [&](AccountHash a) {
        auto node = graph.node_of(a);
        return node ? scores.scores.at(*node) : 0.0;
    };
    return combine_endpoints(lookup(txn.debtor_account), lookup(txn.creditor_account), mode);
}

const char* to_string(WeightMode mode) {
    switch (mode) {
        case WeightMode::count:
            return "count";
        case WeightMode::amount:
            return "amount";
        case WeightMode::unweighted:
            return "unweighted";
    }
    return "?";
}

const char* to_string(ExposureMode mode) {
    switch (mode) {
        case ExposureMode::sum:
            return "sum";
        case ExposureMode::max:
            return "max";
        case ExposureMode::creditor:
            return "creditor";
    }
    return "?";
}

WeightMode parse_weight_mode(const std::string& text) {
    if (text == "count") return WeightMode::count;
    if (text == "amount") return WeightMode::amount;
    if (text == "unweighted") return WeightMode::unweighted;
    throw std::invalid_argument("unknown weight_mode '" + text + "'");
}

ExposureMode parse_exposure_mode(const std::string& text) {
    if (text == "sum") return ExposureMode::sum;
    if (text == "max") return ExposureMode::max;
    if (text == "creditor") return ExposureMode::creditor;
    throw std::invalid_argument("unknown exposure_mode '" + text + "'");
}

}  // namespace pprfraud
