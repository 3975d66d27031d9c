#include "pprfraud/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "pprfraud/csv.hpp"

namespace pprfraud {

namespace {

using KeyedEdge = std::pair<std::uint64_t, std::pair<std::uint64_t, std::int64_t>>;

std::uint64_t edge_key(NodeId u, NodeId v) { return (static_cast<std::uint64_t>(u) << 32) | v; }

}  // namespace

NodeId TransactionGraph::intern(AccountHash account) {
    auto [it, inserted] = node_index_.try_emplace(account, static_cast<NodeId>(node_hash_.size()));
    if (inserted) node_hash_.push_back(account);
    return it->second;
}

void TransactionGraph::assemble(std::vector<KeyedEdge>& keyed) {
    std::sort(keyed.begin(), keyed.end(),
              [](const KeyedEdge& a, const KeyedEdge& b) { return a.first < b.first; });
    out_offsets_.assign(node_hash_.size() + 1, 0);
    out_targets_.clear();
    edge_count_.clear();
    edge_amount_.clear();
    for (std::size_t i = 0; i < keyed.size();) {
        const std::uint64_t key = keyed[i].first;
        std::uint64_t count = 0;
        std::int64_t amount = 0;
        for (; i < keyed.size() && keyed[i].first == key; ++i) {
            count += keyed[i].second.first;
            amount += keyed[i].second.second;
        }
        const auto source = static_cast<NodeId>(key >> 32);
        out_targets_.push_back(static_cast<NodeId>(key & 0xffffffffULL));
        edge_count_.push_back(count);
        edge_amount_.push_back(amount);
        ++out_offsets_[source + 1];
    }
    for (std::size_t u = 0; u < node_hash_.size(); ++u) out_offsets_[u + 1] += out_offsets_[u];
}

TransactionGraph TransactionGraph::build(std::span<const Transaction> txns) {
    TransactionGraph g;
    std::vector<KeyedEdge> keyed;
    keyed.reserve(txns.size());
    for (const auto& t : txns) {
        const NodeId u = g.intern(t.debtor_account);
        const NodeId v = g.intern(t.creditor_account);
        keyed.push_back({edge_key(u, v), {1, t.amount.cents}});
    }
    g.assemble(keyed);
    return g;
}

TransactionGraph TransactionGraph::from_edges(std::span<const EdgeRecord> edges) {
    TransactionGraph g;
    std::vector<KeyedEdge> keyed;
    keyed.reserve(edges.size());
    for (const auto& e : edges) {
        const NodeId u = g.intern(e.source);
        const NodeId v = g.intern(e.target);
        keyed.push_back({edge_key(u, v), {e.count, e.amount_cents}});
    }
    g.assemble(keyed);
    return g;
}

std::optional<NodeId> TransactionGraph::node_of(AccountHash account) const {
    auto it = node_index_.find(account);
    if (it == node_index_.end()) return std::nullopt;
    return it->second;
}

std::uint64_t TransactionGraph::out_count(NodeId u) const {
    std::uint64_t total = 0;
    for (std::size_t e = out_offsets_[u]; e < out_offsets_[u + 1]; ++e) total += edge_count_[e];
    return total;
}

std::vector<EdgeRecord> TransactionGraph::edge_list() const {
    std::vector<EdgeRecord> edges;
    edges.reserve(n_edges());
    for (NodeId u = 0; u < n_nodes(); ++u)
        for (std::size_t e = out_offsets_[u]; e < out_offsets_[u + 1]; ++e)
            edges.push_back({node_hash_[u], node_hash_[out_targets_[e]], edge_count_[e], edge_amount_[e]});
    return edges;
}

void write_edges(std::ostream& out, const TransactionGraph& graph) {
    csv::write_record(out, {"source_hash", "target_hash", "count", "amount_sum"});
    for (const auto& e : graph.edge_list())
        csv::write_record(out, {std::to_string(e.source), std::to_string(e.target),
                                std::to_string(e.count), format_amount(Amount{e.amount_cents})});
}

std::vector<EdgeRecord> read_edges(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!csv::next_line(in, line, line_no)) throw std::runtime_error("edge list: missing header");
    auto header = csv::split_record(line);
    const auto col = csv::resolve_columns(*header, {"source_hash", "target_hash", "count", "amount_sum"});
    std::vector<EdgeRecord> edges;
    while (csv::next_line(in, line, line_no)) {
        auto f = csv::split_record(line);
        if (!f || f->size() != header->size())
            throw std::runtime_error("edge list: malformed row at line " + std::to_string(line_no));
        auto src = csv::parse_int64((*f)[col[0]]);
        auto dst = csv::parse_int64((*f)[col[1]]);
        auto cnt = csv::parse_int64((*f)[col[2]]);
        auto amt = parse_amount((*f)[col[3]]);
        if (!src || !dst || !cnt || *cnt < 1 || !amt)
            throw std::runtime_error("edge list: bad value at line " + std::to_string(line_no));
        edges.push_back({*src, *dst, static_cast<std::uint64_t>(*cnt), amt->cents});
    }
    return edges;
}

}  // namespace pprfraud
