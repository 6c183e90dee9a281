#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "prefnet/types.hpp"

namespace prefnet {

/// Sparse set of (user, item, rating) triples with per-user and per-item
/// adjacency. External ids are arbitrary positive integers; internally every
/// user/item is mapped to a dense index so hot loops run on flat arrays.
class RatingTable {
public:
    struct Entry {
        int other;  // dense index of the counterpart (item for byUser, user for byItem)
        int value;
    };

    explicit RatingTable(int scale_max = 5) : scale_max_(scale_max) {}

    /// Inserts a rating. Throws ValidationError on a duplicate (user, item)
    /// pair or a value outside 1..S.
    void add(UserId user, ItemId item, int value);

    int scale_max() const { return scale_max_; }
    std::size_t size() const { return ratings_.size(); }
    bool empty() const { return ratings_.empty(); }

    int user_count() const { return static_cast<int>(user_ids_.size()); }
    int item_count() const { return static_cast<int>(item_ids_.size()); }

    /// Dense index of a known id, or -1.
    int user_index(UserId u) const;
    int item_index(ItemId i) const;

    UserId user_id(int idx) const { return user_ids_[idx]; }
    ItemId item_id(int idx) const { return item_ids_[idx]; }

    /// Ratings by one user / on one item, as (counterpart dense index, value)
    /// pairs in insertion order.
    const std::vector<Entry>& by_user(int user_idx) const { return by_user_[user_idx]; }
    const std::vector<Entry>& by_item(int item_idx) const { return by_item_[item_idx]; }

    std::optional<int> value(UserId u, ItemId i) const;
    std::optional<int> value_by_index(int user_idx, int item_idx) const;

    const std::vector<Rating>& ratings() const { return ratings_; }

    /// I(u) and U(i) of the neighbourhood-size identity.
    int items_rated_by(int user_idx) const { return static_cast<int>(by_user_[user_idx].size()); }
    int users_who_rated(int item_idx) const { return static_cast<int>(by_item_[item_idx].size()); }

    bool operator==(const RatingTable& other) const;

private:
    int ensure_user(UserId u);
    int ensure_item(ItemId i);

    int scale_max_;
    std::vector<Rating> ratings_;
    std::vector<UserId> user_ids_;
    std::vector<ItemId> item_ids_;
    std::unordered_map<UserId, int> user_index_;
    std::unordered_map<ItemId, int> item_index_;
    std::vector<std::vector<Entry>> by_user_;
    std::vector<std::vector<Entry>> by_item_;
};

/// Per-user, per-item and global rating means over a training table.
/// Users/items absent from the table fall back to the global mean.
struct MeanStats {
    std::vector<double> user_mean;  // by dense user index
    std::vector<double> item_mean;  // by dense item index
    double global_mean = 0.0;

    double user_mean_or_global(int user_idx) const {
        return user_idx >= 0 ? user_mean[user_idx] : global_mean;
    }
    double item_mean_or_global(int item_idx) const {
        return item_idx >= 0 ? item_mean[item_idx] : global_mean;
    }
};

MeanStats compute_means(const RatingTable& table);

}  // namespace prefnet
