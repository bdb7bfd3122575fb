#pragma once

#include "abpsim/types.hpp"

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <stdexcept>

namespace abpsim {

using IdSet = std::set<NodeId>;

/// |a symmetric-difference b|.
int set_distance(const IdSet& a, const IdSet& b);

/// Ring buffer of neighbour-ID sets, one row per broadcast period.
class TopologyHistoryTable {
public:
    struct Row {
        std::int64_t bp_index = 0;
        IdSet neighbors;
    };

    explicit TopologyHistoryTable(std::size_t capacity = 5);

    void record(std::int64_t bp_index, IdSet neighbors);
    void clear() { rows_.clear(); }

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return rows_.size(); }
    const std::deque<Row>& rows() const { return rows_; }

private:
    std::size_t capacity_;
    std::deque<Row> rows_; // oldest first
};

/// Mean set_distance over consecutive row pairs; nullopt with fewer than 2 rows.
std::optional<double> mobility_rate(const TopologyHistoryTable& tht);

struct NotEntitledError : std::logic_error {
    using std::logic_error::logic_error;
};

/// MR_c of a CH's cluster, measured on the CH's own THT. Only CHs may ask.
std::optional<double> cluster_mean_mr(const TopologyHistoryTable& ch_tht, bool is_ch);

struct BpController {
    double bp_min = 1.0;
    double bp_max = 8.0;
    double mr_ref = 4.0;
    double bp_current = 1.0; // starts at bp_min

    static BpController make(double bp_min, double bp_max, double mr_ref)
    {
        return BpController{bp_min, bp_max, mr_ref, bp_min};
    }

    /// Only CHs originate BP changes; returns false (no-op) otherwise.
    bool request_change(bool is_ch, double new_bp);
};

/// Linear inverse map MR -> BP, clamped to [bp_min, bp_max] and snapped to the
/// bp_min grid. Does not modify ctrl.
double adapt_bp(double mr_c, const BpController& ctrl);

} // namespace abpsim
