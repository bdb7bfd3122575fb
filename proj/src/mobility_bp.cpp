#include "abpsim/mobility_bp.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace abpsim {

int set_distance(const IdSet& a, const IdSet& b)
{
    int n = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++n;
            ++ia;
        } else if (*ib < *ia) {
            ++n;
            ++ib;
        } else {
            ++ia;
            ++ib;
        }
    }
    n += static_cast<int>(std::distance(ia, a.end()) + std::distance(ib, b.end()));
    return n;
}

TopologyHistoryTable::TopologyHistoryTable(std::size_t capacity) : capacity_(capacity)
{
    if (capacity_ < 2)
        throw std::invalid_argument("THT capacity must be >= 2");
}

void TopologyHistoryTable::record(std::int64_t bp_index, IdSet neighbors)
{
    rows_.push_back(Row{bp_index, std::move(neighbors)});
    while (rows_.size() > capacity_)
        rows_.pop_front();
}

std::optional<double> mobility_rate(const TopologyHistoryTable& tht)
{
    const auto& rows = tht.rows();
    if (rows.size() < 2)
        return std::nullopt;
    int total = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
        total += set_distance(rows[i - 1].neighbors, rows[i].neighbors);
    return static_cast<double>(total) / static_cast<double>(rows.size() - 1);
}

std::optional<double> cluster_mean_mr(const TopologyHistoryTable& ch_tht, bool is_ch)
{
    if (!is_ch)
        throw NotEntitledError("only cluster heads measure cluster mobility rate");
    return mobility_rate(ch_tht);
}

bool BpController::request_change(bool is_ch, double new_bp)
{
    if (!is_ch)
        return false;
    bp_current = std::clamp(new_bp, bp_min, bp_max);
    return true;
}

double adapt_bp(double mr_c, const BpController& ctrl)
{
    const double ratio = std::max(0.0, mr_c) / ctrl.mr_ref;
    const double raw = ctrl.bp_max - (ctrl.bp_max - ctrl.bp_min) * ratio;
    const double clamped = std::clamp(raw, ctrl.bp_min, ctrl.bp_max);
    const double snapped = std::round(clamped / ctrl.bp_min) * ctrl.bp_min;
    return std::clamp(snapped, ctrl.bp_min, ctrl.bp_max);
}

} // namespace abpsim
