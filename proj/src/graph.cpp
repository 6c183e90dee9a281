#include "prefnet/graph.hpp"

namespace prefnet {

PreferenceGraph::PreferenceGraph(const RatingTable& table, const SelectedPairs& selected)
    : table_(&table), selected_(&selected) {
    nodes_.reserve(table.size());
    user_nodes_.resize(table.user_count());
    for (const Rating& r : table.ratings()) {
        const int u = table.user_index(r.user);
        const int i = table.item_index(r.item);
        user_nodes_[u].push_back(static_cast<int>(nodes_.size()));
        nodes_.push_back({u, i, r.value});
    }
}

int PreferenceGraph::full_neighborhood_size(std::size_t k) const {
    const Node& n = nodes_[k];
    return table_->users_who_rated(n.item_idx) + table_->items_rated_by(n.user_idx) - 2;
}

void PreferenceGraph::for_each_active_edge(
    std::size_t k, const std::function<void(EdgeKind, int, int, int, int)>& visit) const {
    const Node& n = nodes_[k];
    // Same-item neighbors: ratings on n.item by other users.
    for (const auto& e : table_->by_item(n.item_idx)) {
        if (e.other == n.user_idx) continue;
        const int pair = selected_->user_pair_index(n.user_idx, e.other);
        if (pair >= 0) visit(EdgeKind::UserUser, pair, e.other, n.item_idx, e.value);
    }
    // Same-user neighbors: ratings by n.user on other items.
    for (const auto& e : table_->by_user(n.user_idx)) {
        if (e.other == n.item_idx) continue;
        const int pair = selected_->item_pair_index(n.item_idx, e.other);
        if (pair >= 0) visit(EdgeKind::ItemItem, pair, n.user_idx, e.other, e.value);
    }
}

std::size_t PreferenceGraph::active_edge_count() const {
    std::size_t twice = 0;
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        for_each_active_edge(k, [&](EdgeKind, int, int, int, int) { ++twice; });
    }
    return twice / 2;
}

}  // namespace prefnet
