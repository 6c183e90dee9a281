#pragma once

#include <vector>

#include "prefnet/model.hpp"

namespace prefnet {

enum class FallbackLevel { Full, ContentOnly, GlobalMean };

const char* to_string(FallbackLevel level);

struct Prediction {
    UserId user = 0;
    ItemId item = 0;
    int predicted = 0;
    double confidence = 0.0;
    FallbackLevel fallback = FallbackLevel::Full;
};

/// Argmax of the local conditional over the node's Markov blanket of
/// training ratings, with its probability as confidence.
Prediction predict_rating(const PnModel& model, UserId u, ItemId i);

enum class JointMethod { Exact, Icm };

struct JointPrediction {
    std::vector<Prediction> predictions;  // aligned with the target order
    JointMethod method = JointMethod::Exact;
    int sweeps = 0;  // ICM only
};

/// Joint MAP over a set of new nodes whose external neighbors are training
/// ratings. Exact enumeration under the S^m <= 10^6 budget, otherwise
/// iterated conditional modes from the independent predictions.
JointPrediction joint_predict(const PnModel& model,
                              const std::vector<std::pair<UserId, ItemId>>& targets);

enum class CandidateMode { UserBased, ItemBased, Union };

enum class RankingVariant { MaximalEnergy, ExpectedEnergy };

const char* to_string(RankingVariant variant);

struct RankedEntry {
    ItemId item = 0;
    double score = 0.0;  // energy change; lower is better
    int predicted = 0;
    double confidence = 0.0;
};

struct RankedRecommendation {
    UserId user = 0;
    RankingVariant ranking = RankingVariant::ExpectedEnergy;
    std::vector<RankedEntry> entries;  // ascending by score
    bool truncated = false;            // fewer than N candidates existed
};

struct TopNConfig {
    int n = 20;
    int candidates = 500;  // C: candidate pool cap, trimmed by popularity
    int neighbors = 100;   // K consulted per side; <= 0 means unbounded
    CandidateMode mode = CandidateMode::Union;
    RankingVariant ranking = RankingVariant::ExpectedEnergy;
};

/// Candidate pool entry scored under both energy-change variants.
struct ScoredCandidate {
    ItemId item = 0;
    double maximal = 0.0;
    double expected = 0.0;
    int predicted = 0;
    double confidence = 0.0;
};

/// Top-N machinery with the per-model candidate indexes built once.
/// Correlated neighbors are ranked by learned pair-weight magnitude once the
/// model has trained correlation weights, by raw similarity before that.
class Recommender {
public:
    explicit Recommender(const PnModel& model);

    /// Unseen items reachable through co-rating neighbors: the union of
    /// items rated by the K most correlated users (user-based), or of each
    /// rated item's K most correlated unseen items (item-based), or both.
    /// K <= 0 consults every co-rating neighbor, under which the two modes
    /// return the same set. Users without training ratings get every rated
    /// item as a candidate.
    std::vector<ItemId> candidate_set(UserId u, int K, CandidateMode mode) const;

    /// Candidate pool (trimmed to C by popularity) with both energy-change
    /// scores per item, in candidate order.
    std::vector<ScoredCandidate> score_candidates(UserId u, const TopNConfig& config) const;

    /// The N lowest-scoring items under the configured ranking variant.
    RankedRecommendation recommend_top_n(UserId u, const TopNConfig& config) const;

    /// Sorts scored candidates under one variant and keeps the best N.
    RankedRecommendation rank(UserId u, std::vector<ScoredCandidate> scored,
                              RankingVariant variant, int n) const;

private:
    struct ScoredNeighbor {
        int other;
        double score;
    };
    std::vector<ScoredNeighbor> scored_user_neighbors(int user_idx, int K) const;
    std::vector<ScoredNeighbor> scored_item_neighbors(int item_idx, int K,
                                                      const std::vector<std::uint8_t>& rated) const;

    const PnModel* model_;
    bool use_weights_ = false;
    // Selected-pair adjacency sorted by |weight| desc, id asc; built only
    // when the model has trained correlation weights.
    std::vector<int> user_adj_offsets_, item_adj_offsets_;
    std::vector<ScoredNeighbor> user_adj_, item_adj_;
};

/// One-shot conveniences over a freshly built Recommender.
std::vector<ItemId> candidate_set(const PnModel& model, UserId u, int K, CandidateMode mode);
RankedRecommendation recommend_top_n(const PnModel& model, UserId u, const TopNConfig& config);

}  // namespace prefnet
