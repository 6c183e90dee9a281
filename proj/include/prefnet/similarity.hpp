#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "prefnet/rating_table.hpp"

namespace prefnet {

inline std::uint64_t pack_pair(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

/// Pearson correlation between two users over their co-rated items, with
/// deviations centred on means over that co-rated sample (so a single
/// co-rating is always degenerate). Degenerate cases return 0.
double pearson_user_similarity(const RatingTable& table, const MeanStats& means, UserId u, UserId v);

/// Adjusted cosine between two items over their common raters, with
/// deviations centred on each rater's mean. Degenerate cases return 0.
double adjusted_cosine_item_similarity(const RatingTable& table, const MeanStats& means, ItemId i,
                                       ItemId j);

/// Symmetric pair -> value map over dense indexes. Pairs with value 0 are
/// not stored; lookups of absent pairs return 0.
class SimilarityTable {
public:
    struct Neighbor {
        int other;
        double value;
    };

    SimilarityTable() = default;
    /// `pairs` holds (packed key, value) with nonzero values; keys unique.
    SimilarityTable(std::vector<std::pair<std::uint64_t, double>> pairs, int node_count);

    double lookup(int a, int b) const;
    /// Neighbors of `a` sorted by similarity descending, index ascending on
    /// ties.
    std::span<const Neighbor> neighbors(int a) const;
    std::size_t pair_count() const { return keys_.size(); }

    const std::vector<std::uint64_t>& keys() const { return keys_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<std::uint64_t> keys_;  // sorted
    std::vector<double> values_;
    std::vector<int> offsets_;
    std::vector<Neighbor> adjacency_;
};

/// Positive-correlation pairs that carry a correlation feature, with a
/// stable parameter slot per pair (position in key-sorted order).
class SelectedPairs {
public:
    SelectedPairs() = default;
    SelectedPairs(std::vector<std::uint64_t> user_keys, std::vector<std::uint64_t> item_keys);

    int user_pair_index(int u_idx, int v_idx) const { return find(user_keys_, pack_pair(u_idx, v_idx)); }
    int item_pair_index(int i_idx, int j_idx) const { return find(item_keys_, pack_pair(i_idx, j_idx)); }

    std::size_t user_pair_count() const { return user_keys_.size(); }
    std::size_t item_pair_count() const { return item_keys_.size(); }

    const std::vector<std::uint64_t>& user_keys() const { return user_keys_; }
    const std::vector<std::uint64_t>& item_keys() const { return item_keys_; }

    static std::pair<int, int> unpack(std::uint64_t key) {
        return {static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu)};
    }

private:
    static int find(const std::vector<std::uint64_t>& keys, std::uint64_t key);
    std::vector<std::uint64_t> user_keys_;  // sorted
    std::vector<std::uint64_t> item_keys_;  // sorted
};

struct CorrelationStats {
    SimilarityTable user_sim;
    SimilarityTable item_sim;
    SelectedPairs selected;
    int min_co_user = 2;
    int min_co_item = 2;
};

/// Computes both similarity tables by iterating co-rating lists (never the
/// full cross product) and selects the strictly positive pairs that meet the
/// co-rating thresholds.
CorrelationStats compute_correlation_stats(const RatingTable& table, const MeanStats& means,
                                           int min_co_user = 2, int min_co_item = 2);

/// Binary cache keyed by a hash of the training file. load returns false on
/// missing file, key mismatch, or threshold mismatch.
void save_correlation_cache(const CorrelationStats& stats, const RatingTable& table,
                            std::uint64_t table_hash, const std::filesystem::path& path);
bool load_correlation_cache(CorrelationStats& stats, const RatingTable& table,
                            std::uint64_t table_hash, int min_co_user, int min_co_item,
                            const std::filesystem::path& path);

}  // namespace prefnet
