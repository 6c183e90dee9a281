#pragma once

#include <functional>

#include "prefnet/rating_table.hpp"
#include "prefnet/similarity.hpp"

namespace prefnet {

/// View of the rating graph: one node per observed rating, an edge between
/// any two ratings by the same user or on the same item. Edges are derived
/// from the table's adjacency on demand; the active subset is induced by the
/// selected positive-correlation pairs.
class PreferenceGraph {
public:
    struct Node {
        int user_idx;
        int item_idx;
        int value;
    };

    PreferenceGraph(const RatingTable& table, const SelectedPairs& selected);

    const RatingTable& table() const { return *table_; }
    const SelectedPairs& selected() const { return *selected_; }

    std::size_t node_count() const { return nodes_.size(); }
    const Node& node(std::size_t k) const { return nodes_[k]; }
    const std::vector<int>& nodes_of_user(int user_idx) const { return user_nodes_[user_idx]; }

    /// U(i) + I(u) - 2: every other rating on the same item or by the same
    /// user.
    int full_neighborhood_size(std::size_t k) const;

    /// Visits the active edges incident to node k as
    /// (kind, pair index, neighbor user_idx, neighbor item_idx, neighbor
    /// rating).
    void for_each_active_edge(
        std::size_t k,
        const std::function<void(EdgeKind, int, int, int, int)>& visit) const;

    /// Total number of active edges (each counted once).
    std::size_t active_edge_count() const;

private:
    const RatingTable* table_;
    const SelectedPairs* selected_;
    std::vector<Node> nodes_;
    std::vector<std::vector<int>> user_nodes_;  // node indexes per dense user
};

inline PreferenceGraph build_graph(const RatingTable& table, const SelectedPairs& selected) {
    return PreferenceGraph(table, selected);
}

}  // namespace prefnet
