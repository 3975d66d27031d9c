#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <unordered_map>
#include <vector>

#include "pprfraud/ingest.hpp"

namespace pprfraud {

using NodeId = std::uint32_t;

// One aggregated debtor -> creditor edge, keyed by account hashes.
struct EdgeRecord {
    AccountHash source = 0;
    AccountHash target = 0;
    std::uint64_t count = 0;
    std::int64_t amount_cents = 0;

    friend bool operator==(const EdgeRecord&, const EdgeRecord&) = default;
};

/**
 * Directed account graph in compressed sparse row form.
 *
 * Parallel transactions between the same (debtor, creditor) pair collapse into one
 * edge carrying the transaction count and the summed amount. Self-loops are kept.
 * Node ids are dense and follow first appearance (debtor before creditor) in the
 * input sequence; targets within each row are sorted by node id.
 */
class TransactionGraph {
public:
    TransactionGraph() = default;

    static TransactionGraph build(std::span<const Transaction> txns);
    static TransactionGraph from_edges(std::span<const EdgeRecord> edges);

    std::size_t n_nodes() const { return node_hash_.size(); }
    std::size_t n_edges() const { return out_targets_.size(); }

    std::optional<NodeId> node_of(AccountHash account) const;
    AccountHash hash_of(NodeId node) const { return node_hash_.at(node); }

    std::span<const std::size_t> out_offsets() const { return out_offsets_; }
    std::span<const NodeId> out_targets() const { return out_targets_; }
    std::span<const std::uint64_t> edge_counts() const { return edge_count_; }
    std::span<const std::int64_t> edge_amounts_cents() const { return edge_amount_; }

    std::size_t out_degree(NodeId u) const { return out_offsets_[u + 1] - out_offsets_[u]; }
    std::uint64_t out_count(NodeId u) const;

    // Edges in CSR order.
    std::vector<EdgeRecord> edge_list() const;

private:
    NodeId intern(AccountHash account);
    void assemble(std::vector<std::pair<std::uint64_t, std::pair<std::uint64_t, std::int64_t>>>& keyed);

    std::vector<AccountHash> node_hash_;
    std::unordered_map<AccountHash, NodeId> node_index_;
    std::vector<std::size_t> out_offsets_{0};
    std::vector<NodeId> out_targets_;
    std::vector<std::uint64_t> edge_count_;
    std::vector<std::int64_t> edge_amount_;
};

inline TransactionGraph build_graph(std::span<const Transaction> txns) {
    return TransactionGraph::build(txns);
}

void write_edges(std::ostream& out, const TransactionGraph& graph);
std::vector<EdgeRecord> read_edges(std::istream& in);

}  // namespace pprfraud
