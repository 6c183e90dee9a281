#include "prefnet/rating_table.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace prefnet {

void RatingTable::add(UserId user, ItemId item, int value) {
    if (value < 1 || value > scale_max_) {
        throw ValidationError("rating " + std::to_string(value) + " for (" +
                              std::to_string(user) + "," + std::to_string(item) +
                              ") outside 1.." + std::to_string(scale_max_));
    }
    const int ui = ensure_user(user);
    const int ii = ensure_item(item);
    for (const Entry& e : by_user_[ui]) {
        if (e.other == ii) {
            throw ValidationError("duplicate rating for (" + std::to_string(user) + "," +
                                  std::to_string(item) + ")");
        }
    }
    ratings_.push_back({user, item, value});
    by_user_[ui].push_back({ii, value});
    by_item_[ii].push_back({ui, value});
}

int RatingTable::ensure_user(UserId u) {
    auto [it, inserted] = user_index_.try_emplace(u, static_cast<int>(user_ids_.size()));
    if (inserted) {
        user_ids_.push_back(u);
        by_user_.emplace_back();
    }
    return it->second;
}

int RatingTable::ensure_item(ItemId i) {
    auto [it, inserted] = item_index_.try_emplace(i, static_cast<int>(item_ids_.size()));
    if (inserted) {
        item_ids_.push_back(i);
        by_item_.emplace_back();
    }
    return it->second;
}

int RatingTable::user_index(UserId u) const {
    auto it = user_index_.find(u);
    return it == user_index_.end() ? -1 : it->second;
}

int RatingTable::item_index(ItemId i) const {
    auto it = item_index_.find(i);
    return it == item_index_.end() ? -1 : it->second;
}

std::optional<int> RatingTable::value(UserId u, ItemId i) const {
    return value_by_index(user_index(u), item_index(i));
}

std::optional<int> RatingTable::value_by_index(int user_idx, int item_idx) const {
    if (user_idx < 0 || item_idx < 0) return std::nullopt;
    // Scan the shorter adjacency list.
    if (by_user_[user_idx].size() <= by_item_[item_idx].size()) {
        for (const Entry& e : by_user_[user_idx])
            if (e.other == item_idx) return e.value;
    } else {
        for (const Entry& e : by_item_[item_idx])
            if (e.other == user_idx) return e.value;
    }
    return std::nullopt;
}

bool RatingTable::operator==(const RatingTable& other) const {
    if (scale_max_ != other.scale_max_ || ratings_.size() != other.ratings_.size()) return false;
    std::vector<Rating> a = ratings_;
    std::vector<Rating> b = other.ratings_;
    auto key = [](const Rating& r) { return std::pair(r.user, r.item); };
    std::sort(a.begin(), a.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
    std::sort(b.begin(), b.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
    return a == b;
}

MeanStats compute_means(const RatingTable& table) {
    MeanStats stats;
    stats.user_mean.assign(table.user_count(), 0.0);
    stats.item_mean.assign(table.item_count(), 0.0);
    double total = 0.0;
    for (int u = 0; u < table.user_count(); ++u) {
        double sum = 0.0;
        for (const auto& e : table.by_user(u)) sum += e.value;
        stats.user_mean[u] = sum / static_cast<double>(table.by_user(u).size());
        total += sum;
    }
    for (int i = 0; i < table.item_count(); ++i) {
        double sum = 0.0;
        for (const auto& e : table.by_item(i)) sum += e.value;
        stats.item_mean[i] = sum / static_cast<double>(table.by_item(i).size());
    }
    stats.global_mean = table.empty() ? 0.0 : total / static_cast<double>(table.size());
    return stats;
}

}  // namespace prefnet
