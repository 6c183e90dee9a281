#pragma once

#include <vector>

#include "prefnet/rating_table.hpp"
#include "prefnet/similarity.hpp"

namespace prefnet {

struct BaselinePrediction {
    UserId user = 0;
    ItemId item = 0;
    double raw = 0.0;
    int rounded = 0;  // round-half-up of raw, clamped to 1..S
};

/// GroupLens-style user-based prediction: the user's mean plus the
/// similarity-weighted mean-centred deviations of the item's other raters.
/// Empty or zero-weight neighborhoods fall back to the user mean (global
/// mean for unseen users).
BaselinePrediction user_based_predict(const RatingTable& table, const MeanStats& means,
                                      const SimilarityTable& user_sim, UserId u, ItemId i);

/// Item-based analogue over the items the user has rated, with adjusted
/// cosine similarities; falls back to the item mean.
BaselinePrediction item_based_predict(const RatingTable& table, const MeanStats& means,
                                      const SimilarityTable& item_sim, UserId u, ItemId i);

/// User-based top-N: candidate items of the user's `neighbors` best
/// positively correlated users, ranked by how many of those neighbors rated
/// each item. Users with no positively correlated neighbor fall back to
/// globally popular unseen items. Each returned item carries the user-based
/// rounded prediction for hit-error evaluation.
struct TopNItem {
    ItemId item = 0;
    int rater_count = 0;
    int predicted = 0;
    double raw = 0.0;
};
std::vector<TopNItem> user_based_topn(const RatingTable& table, const MeanStats& means,
                                      const SimilarityTable& user_sim, UserId u, int n,
                                      int neighbors = 100);

}  // namespace prefnet
