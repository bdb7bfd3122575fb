#pragma once

#include "abpsim/types.hpp"

#include <map>
#include <set>
#include <vector>

namespace abpsim {

struct ClusterAssignment {
    std::map<NodeId, NodeId> ch_of; // node -> CH id or kNoCluster
    std::map<NodeId, Role> role_of;

    NodeId head_of(NodeId v) const
    {
        auto it = ch_of.find(v);
        return it == ch_of.end() ? kNoCluster : it->second;
    }

    bool is_head(NodeId v) const { return head_of(v) == v; }

    std::set<NodeId> heads() const
    {
        std::set<NodeId> out;
        for (auto [v, c] : ch_of)
            if (v == c)
                out.insert(v);
        return out;
    }

    /// Members of c, excluding c itself.
    std::vector<NodeId> members(NodeId c) const
    {
        std::vector<NodeId> out;
        for (auto [v, h] : ch_of)
            if (h == c && v != c)
                out.push_back(v);
        return out;
    }

    /// Member count per CH.
    std::map<NodeId, int> member_counts() const
    {
        std::map<NodeId, int> out;
        for (auto [v, h] : ch_of)
            if (h == v)
                out.try_emplace(v, 0);
        for (auto [v, h] : ch_of)
            if (h != v && h != kNoCluster && out.count(h))
                ++out[h];
        return out;
    }

    friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;
};

} // namespace abpsim
