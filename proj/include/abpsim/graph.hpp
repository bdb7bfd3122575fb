#pragma once

#include "abpsim/types.hpp"

#include <algorithm>
#include <utility>
#include <vector>

namespace abpsim {

/// Undirected simple graph over node IDs in [0, 254].
class Graph {
public:
    Graph() : adj_(kMaxNodes), present_(kMaxNodes, false) {}

    void add_node(NodeId v)
    {
        if (!present_[v]) {
            present_[v] = true;
            nodes_.insert(std::upper_bound(nodes_.begin(), nodes_.end(), v), v);
        }
    }

    void add_edge(NodeId a, NodeId b)
    {
        if (a == b)
            return;
        add_node(a);
        add_node(b);
        if (has_edge(a, b))
            return;
        adj_[a].insert(std::upper_bound(adj_[a].begin(), adj_[a].end(), b), b);
        adj_[b].insert(std::upper_bound(adj_[b].begin(), adj_[b].end(), a), a);
    }

    bool contains(NodeId v) const { return present_[v]; }
    bool has_edge(NodeId a, NodeId b) const
    {
        return std::binary_search(adj_[a].begin(), adj_[a].end(), b);
    }

    /// Sorted node IDs.
    const std::vector<NodeId>& nodes() const { return nodes_; }
    /// Sorted neighbour IDs (open neighbourhood).
    const std::vector<NodeId>& neighbors(NodeId v) const { return adj_[v]; }
    int degree(NodeId v) const { return static_cast<int>(adj_[v].size()); }

    std::size_t edge_count() const
    {
        std::size_t n = 0;
        for (auto v : nodes_)
            n += adj_[v].size();
        return n / 2;
    }

    std::vector<std::pair<NodeId, NodeId>> edges() const
    {
        std::vector<std::pair<NodeId, NodeId>> out;
        for (auto v : nodes_)
            for (auto u : adj_[v])
                if (v < u)
                    out.emplace_back(v, u);
        return out;
    }

    friend bool operator==(const Graph& a, const Graph& b)
    {
        return a.nodes_ == b.nodes_ && a.adj_ == b.adj_;
    }

private:
    std::vector<std::vector<NodeId>> adj_;
    std::vector<bool> present_;
    std::vector<NodeId> nodes_;
};

} // namespace abpsim
