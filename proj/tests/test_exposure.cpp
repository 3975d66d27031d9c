#include <numeric>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "pprfraud/exposure.hpp"
#include "pprfraud/features.hpp"
#include "pprfraud/synth.hpp"

using namespace pprfraud;
using oracle::make_txn;

namespace {

double linf(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

PersonalizationVector uniform(std::size_t n) {
    return PersonalizationVector{std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

}  // namespace

TEST_CASE("personalization falls back to uniform") {
    std::vector<Transaction> rows = {make_txn("1", 0, 1, 2), make_txn("2", 1, 2, 3)};
    auto g = build_graph(rows);
    auto p = build_personalization(rows, g);
    for (double x : p.p) CHECK(x == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("personalization: creditor average overrides debtor average") {
    // X = 1 pays itself once (label 1) and receives once from account 3 (label 0):
    // creditor labels {1, 0}, debtor labels {1}. Account 3 is a label-0 debtor.
    std::vector<Transaction> rows = {make_txn("a", 0, 1, 1, 100, 1), make_txn("b", 1, 3, 1, 100, 0)};
    auto g = build_graph(rows);
    auto p = build_personalization(rows, g);
    CHECK(p.p[*g.node_of(1)] == doctest::Approx(1.0));
    CHECK(p.p[*g.node_of(3)] == 0.0);

    // Add a label-1 debtor 2 paying a label-0-only creditor 4 twice: raw 2 -> 0.5 (debtor).
    rows.push_back(make_txn("c", 2, 2, 4, 100, 1));
    rows.push_back(make_txn("d", 3, 2, 4, 100, 0));
    g = build_graph(rows);
    p = build_personalization(rows, g);
    // Raw: X 0.5, 2 0.5, 4 0.5 (creditor labels {1, 0}), 3 0.
    CHECK(p.p[*g.node_of(1)] == doctest::Approx(1.0 / 3.0));
    CHECK(p.p[*g.node_of(2)] == doctest::Approx(1.0 / 3.0));
    CHECK(p.p[*g.node_of(4)] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("personalization: symmetric raw scores") {
    std::vector<Transaction> rows = {make_txn("1", 0, 1, 2, 100, 1), make_txn("2", 1, 1, 2, 100, 0),
                                     make_txn("3", 2, 3, 4, 100, 1), make_txn("4", 3, 3, 4, 100, 0)};
    // Debtors 1 and 3 average 0.5 each, creditors 2 and 4 average 0.5 each.
    auto g = build_graph(rows);
    auto p = build_personalization(rows, g);
    for (double x : p.p) CHECK(x == doctest::Approx(0.25));

    std::vector<Transaction> two = {make_txn("1", 0, 1, 1, 100, 1), make_txn("2", 1, 1, 1, 100, 0),
                                    make_txn("3", 2, 2, 2, 100, 1), make_txn("4", 3, 2, 2, 100, 0)};
    auto g2 = build_graph(two);
    auto p2 = build_personalization(two, g2);
    REQUIRE(p2.p.size() == 2);
    CHECK(p2.p[0] == doctest::Approx(0.5));
    CHECK(p2.p[1] == doctest::Approx(0.5));
}

TEST_CASE("personalization on an empty graph throws") {
    CHECK_THROWS_AS(build_personalization({}, build_graph({})), EmptyGraph);
}

TEST_CASE("3-cycle with uniform personalization") {
    std::vector<Transaction> rows = {make_txn("1", 0, 1, 2), make_txn("2", 1, 2, 3), make_txn("3", 2, 3, 1)};
    auto g = build_graph(rows);
    for (double alpha : {0.1, 0.5, 0.85, 0.99}) {
        PprParams params;
        params.alpha = alpha;
        auto s = compute_ppr(g, uniform(3), params);
        CHECK(s.converged);
        for (double x : s.scores) CHECK(std::abs(x - 1.0 / 3.0) <= 1e-12);
    }
}

TEST_CASE("power iteration matches the dense solve") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 30; ++trial) {
        auto rows = oracle::random_graph_ledger(rng);
        auto g = build_graph(rows);
        auto p = oracle::random_personalization(rng, g.n_nodes());
        auto s = require_converged(compute_ppr(g, p));
        CHECK(linf(s.scores, oracle::dense_ppr(rows, g, p, 0.85)) < 1e-8);
        const double total = std::accumulate(s.scores.begin(), s.scores.end(), 0.0);
        CHECK(std::abs(total - 1.0) <= 1e-9);
        for (double x : s.scores) CHECK(x >= 0.0);
    }
}

TEST_CASE("uniform personalization reduces to standard PageRank") {
    std::mt19937_64 rng(202);
    for (int trial = 0; trial < 30; ++trial) {
        auto rows = oracle::random_graph_ledger(rng);
        auto g = build_graph(rows);
        auto s = compute_ppr(g, uniform(g.n_nodes()));
        CHECK(linf(s.scores, oracle::standard_pagerank(rows, g, 0.85)) < 1e-8);
    }
}

TEST_CASE("every iterate is a distribution") {
    std::mt19937_64 rng(303);
    auto rows = oracle::random_graph_ledger(rng);
    auto g = build_graph(rows);
    auto p = oracle::random_personalization(rng, g.n_nodes());
    for (std::size_t k = 1; k <= 40; ++k) {
        PprParams params;
        params.max_iter = k;
        params.tol = 1e-300;
        auto s = compute_ppr(g, p, params);
        CHECK(s.iterations_used == k);
        CHECK_FALSE(s.converged);
        CHECK(std::abs(std::accumulate(s.scores.begin(), s.scores.end(), 0.0) - 1.0) <= 1e-9);
    }
}

TEST_CASE("converged scores satisfy the fixed point") {
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 10; ++trial) {
        auto rows = oracle::random_graph_ledger(rng);
        auto g = build_graph(rows);
        auto p = oracle::random_personalization(rng, g.n_nodes());
        const double alpha = 0.85;
        auto s = require_converged(compute_ppr(g, p));

        // One more step, walking each transaction as its own edge.
        const std::size_t n = g.n_nodes();
        std::vector<double> out(n, 0.0);
        for (const auto& t : rows) out[*g.node_of(t.debtor_account)] += 1.0;
        double dangling = 0.0;
        for (std::size_t u = 0; u < n; ++u)
            if (out[u] == 0.0) dangling += s.scores[u];
        std::vector<double> next(n);
        for (std::size_t v = 0; v < n; ++v) next[v] = (alpha * dangling + 1.0 - alpha) * p.p[v];
        for (const auto& t : rows) {
            const auto u = *g.node_of(t.debtor_account);
            next[*g.node_of(t.creditor_account)] += alpha * s.scores[u] / out[u];
        }
        double l1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) l1 += std::abs(next[i] - s.scores[i]);
        CHECK(l1 < PprParams{}.tol);
    }
}

TEST_CASE("NotConverged carries the last iterate") {
    std::mt19937_64 rng(505);
    auto rows = oracle::random_graph_ledger(rng);
    auto g = build_graph(rows);
    PprParams params;
    params.max_iter = 2;
    params.tol = 1e-300;
    auto s = compute_ppr(g, uniform(g.n_nodes()), params);
    CHECK_FALSE(s.converged);
    try {
        require_converged(s);
        FAIL("expected NotConverged");
    } catch (const NotConverged& e) {
        CHECK(e.last_iterate().scores == s.scores);
        CHECK(e.last_iterate().iterations_used == 2);
    }
}

TEST_CASE("thread count does not change the scores") {
    SynthConfig c;
    c.n_accounts = 20000;
    c.n_transactions = 60000;
    auto rows = synthesize(c).transactions;
    auto g = build_graph(rows);
    auto p = build_personalization(rows, g);
    auto one = compute_ppr(g, p);
    for (unsigned threads : {2u, 3u, 8u}) {
        PprParams params;
        params.threads = threads;
        auto many = compute_ppr(g, p, params);
        CHECK(many.scores == one.scores);
        CHECK(many.iterations_used == one.iterations_used);
    }
}

TEST_CASE("seed dominance on a star") {
    std::vector<Transaction> rows;
    for (AccountHash leaf = 2; leaf <= 8; ++leaf) rows.push_back(make_txn(std::to_string(leaf), leaf, leaf, 1));
    auto g = build_graph(rows);
    PersonalizationVector p{std::vector<double>(g.n_nodes(), 0.0)};
    const NodeId seed = *g.node_of(5);
    p.p[seed] = 1.0;
    auto s = compute_ppr(g, p);
    for (AccountHash leaf = 2; leaf <= 8; ++leaf)
        if (leaf != 5) CHECK(s.scores[seed] > s.scores[*g.node_of(leaf)]);
}

TEST_CASE("small damping keeps scores near p") {
    std::mt19937_64 rng(606);
    auto rows = oracle::random_graph_ledger(rng);
    auto g = build_graph(rows);
    auto p = oracle::random_personalization(rng, g.n_nodes());
    for (double alpha : {1e-2, 1e-3, 1e-4}) {
        PprParams params;
        params.alpha = alpha;
        CHECK(linf(compute_ppr(g, p, params).scores, p.p) < 10 * alpha);
    }
}

TEST_CASE("weight modes differ only through transition weights") {
    // A -> B once with a large amount, A -> C three times with small amounts.
    std::vector<Transaction> rows = {make_txn("1", 0, 1, 2, 900), make_txn("2", 1, 1, 3, 100),
                                     make_txn("3", 2, 1, 3, 100), make_txn("4", 3, 1, 3, 100)};
    auto g = build_graph(rows);
    PersonalizationVector p{std::vector<double>(3, 0.0)};
    p.p[*g.node_of(1)] = 1.0;
    auto score = [&](WeightMode mode, AccountHash h) {
        PprParams params;
        params.weight_mode = mode;
        return compute_ppr(g, p, params).scores[*g.node_of(h)];
    };
    CHECK(score(WeightMode::count, 3) > score(WeightMode::count, 2));
    CHECK(score(WeightMode::amount, 2) > score(WeightMode::amount, 3));
    CHECK(score(WeightMode::unweighted, 2) == doctest::Approx(score(WeightMode::unweighted, 3)));
}

TEST_CASE("invalid parameters") {
    auto g = build_graph(std::vector<Transaction>{make_txn("1", 0, 1, 2)});
    PprParams params;
    params.alpha = 1.0;
    CHECK_THROWS_AS(compute_ppr(g, uniform(2), params), std::invalid_argument);
    CHECK_THROWS_AS(compute_ppr(g, uniform(3)), std::invalid_argument);
}

TEST_CASE("transaction exposure") {
    std::vector<Transaction> rows = {make_txn("1", 0, 1, 2), make_txn("2", 1, 2, 3)};
    auto g = build_graph(rows);
    PprScores s;
    s.scores.assign(3, 0.0);
    s.scores[*g.node_of(1)] = 0.1;
    s.scores[*g.node_of(2)] = 0.3;
    s.scores[*g.node_of(3)] = 0.6;
    ScoreTable table(g, s);
    auto t = make_txn("x", 5, 1, 2);
    CHECK(transaction_exposure(t, table) == doctest::Approx(0.4));
    CHECK(transaction_exposure(t, s, g) == doctest::Approx(0.4));
    CHECK(transaction_exposure(t, table, ExposureMode::max) == doctest::Approx(0.3));
    CHECK(transaction_exposure(t, table, ExposureMode::creditor) == doctest::Approx(0.3));
    CHECK(transaction_exposure(make_txn("y", 5, 98, 99), table) == 0.0);
    CHECK(transaction_exposure(make_txn("z", 5, 98, 3), table) == doctest::Approx(0.6));
}

TEST_CASE("score table round-trips") {
    std::mt19937_64 rng(707);
    auto rows = oracle::random_graph_ledger(rng);
    auto g = build_graph(rows);
    auto s = compute_ppr(g, uniform(g.n_nodes()));
    ScoreTable table(g, s);
    std::ostringstream out;
    table.write_csv(out);
    std::istringstream in(out.str());
    auto back = ScoreTable::read_csv(in);
    CHECK(back.size() == table.size());
    for (NodeId u = 0; u < g.n_nodes(); ++u) CHECK(back.score(g.hash_of(u)) == s.scores[u]);
}

TEST_CASE("fraud rows carry more exposure on the default synthetic ledger") {
    SynthConfig c;
    auto split = chronological_split(filter_status(synthesize(c).transactions, "Initiated"));
    std::vector<Transaction> known = split.history;
    known.insert(known.end(), split.train.begin(), split.train.end());
    auto g = build_graph(known);
    auto s = require_converged(compute_ppr(g, build_personalization(split.train, g)));
    ScoreTable table(g, s);
    double sum[2] = {0, 0};
    double n[2] = {0, 0};
    for (const auto& t : split.test) {
        sum[t.label] += transaction_exposure(t, table);
        n[t.label] += 1;
    }
    REQUIRE(n[1] > 0);
    CHECK(sum[1] / n[1] > sum[0] / n[0]);
}
