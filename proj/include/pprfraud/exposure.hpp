#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "pprfraud/graph.hpp"
#include "pprfraud/ingest.hpp"

namespace pprfraud {

enum class WeightMode { count, amount, unweighted };
enum class ExposureMode { sum, max, creditor };

struct PersonalizationVector {
    std::vector<double> p;
};

struct PprParams {
    double alpha = 0.85;
    double tol = 1e-9;
    std::size_t max_iter = 1000;
    WeightMode weight_mode = WeightMode::count;
    // Worker threads for the transposed mat-vec. Results do not depend on this value.
    unsigned threads = 1;

    void validate() const;
};

struct PprScores {
    std::vector<double> scores;
    std::size_t iterations_used = 0;
    bool converged = false;
    // L1 distance between the last two iterates.
    double residual = 0.0;
};

class EmptyGraph : public std::invalid_argument {
public:
    EmptyGraph() : std::invalid_argument("personalization requested for a graph with no nodes") {}
};

class NotConverged : public std::runtime_error {
public:
    explicit NotConverged(PprScores last);
    const PprScores& last_iterate() const { return last_; }

private:
    PprScores last_;
};

// Average fraud label per account, creditor role overriding debtor role, normalized
// to a distribution over graph nodes. Falls back to uniform when no account has a
// positive label average.
PersonalizationVector build_personalization(std::span<const Transaction> train_txns,
                                            const TransactionGraph& graph);

/**
 * Personalized PageRank by power iteration.
 *
 * Iterates pi <- alpha * (T^T pi + m p) + (1 - alpha) p from pi_0 = p, where T is the
 * row-stochastic transition matrix under params.weight_mode and m is the mass held by
 * dangling nodes (no out-edges, or zero total out-weight). Stops when the L1 change
 * drops below params.tol or after params.max_iter steps. The result reports whether it
 * converged; use require_converged() to turn a miss into NotConverged.
 */
PprScores compute_ppr(const TransactionGraph& graph, const PersonalizationVector& p,
                      const PprParams& params = {});

const PprScores& require_converged(const PprScores& scores);

// Per-account score lookup; accounts absent from the graph score 0.
class ScoreTable {
public:
    ScoreTable() = default;
    ScoreTable(const TransactionGraph& graph, const PprScores& scores);

    double score(AccountHash account) const;
    std::size_t size() const { return scores_.size(); }

    // account_hash,ppr_score sorted by descending score, ties by ascending hash.
    void write_csv(std::ostream& out) const;
    static ScoreTable read_csv(std::istream& in);

private:
    std::unordered_map<AccountHash, double> scores_;
};

double transaction_exposure(const Transaction& txn, const ScoreTable& table,
                            ExposureMode mode = ExposureMode::sum);
double transaction_exposure(const Transaction& txn, const PprScores& scores,
                            const TransactionGraph& graph, ExposureMode mode = ExposureMode::sum);

const char* to_string(WeightMode mode);
const char* to_string(ExposureMode mode);
WeightMode parse_weight_mode(const std::string& text);
ExposureMode parse_exposure_mode(const std::string& text);

}  // namespace pprfraud
