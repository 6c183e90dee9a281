#include "prefnet/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace prefnet {

const char* to_string(FallbackLevel level) {
    switch (level) {
        case FallbackLevel::Full: return "full";
        case FallbackLevel::ContentOnly: return "content-only";
        default: return "global-mean";
    }
}

const char* to_string(RankingVariant variant) {
    return variant == RankingVariant::MaximalEnergy ? "maximal-energy" : "expected-energy";
}

namespace {

int round_half_up_clamped(double x, int scale_max) {
    const int r = static_cast<int>(std::floor(x + 0.5));
    return std::clamp(r, 1, scale_max);
}

}  // namespace

Prediction predict_rating(const PnModel& model, UserId u, ItemId i) {
    const NodeContext ctx = model.context_for_prediction(u, i);
    Prediction p;
    p.user = u;
    p.item = i;
    if (!ctx.has_any_signal()) {
        // Nothing known about either side: fall back to the rounded global
        // mean with a uniform-equivalent confidence.
        p.predicted = round_half_up_clamped(model.means().global_mean, model.scale_max());
        p.confidence = 1.0 / model.scale_max();
        p.fallback = FallbackLevel::GlobalMean;
        return p;
    }
    const LocalDistribution dist = model.local_conditional(ctx);
    p.predicted = dist.argmax;
    p.confidence = dist.confidence;
    p.fallback = ctx.edges.empty() ? FallbackLevel::ContentOnly : FallbackLevel::Full;
    return p;
}

namespace {

// Edge between two target nodes; deviations centre on item means for
// same-user pairs and user means for same-item pairs.
struct InternalEdge {
    int a, b;  // target indexes
    EdgeKind kind;
    double weight;
};

double internal_edge_energy(const InternalEdge& e, int ra, int rb, const NodeContext& ctx_a,
                            const NodeContext& ctx_b, int scale_max) {
    const double dev_a =
        e.kind == EdgeKind::UserUser ? ra - ctx_a.user_mean : ra - ctx_a.item_mean;
    const double dev_b =
        e.kind == EdgeKind::UserUser ? rb - ctx_b.user_mean : rb - ctx_b.item_mean;
    const double diff = dev_a - dev_b;
    return -e.weight * g(diff >= 0 ? diff : -diff, scale_max);
}

}  // namespace

JointPrediction joint_predict(const PnModel& model,
                              const std::vector<std::pair<UserId, ItemId>>& targets) {
    const int S = model.scale_max();
    const std::size_t m = targets.size();
    JointPrediction result;
    if (m == 0) return result;

    std::vector<NodeContext> contexts;
    contexts.reserve(m);
    for (const auto& [u, i] : targets) contexts.push_back(model.context_for_prediction(u, i));

    // Internal edges among targets sharing a user or an item, where the
    // matching pair carries a correlation weight.
    std::vector<InternalEdge> internal;
    if (model.features().correlation) {
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = a + 1; b < m; ++b) {
                const bool same_user = targets[a].first == targets[b].first;
                const bool same_item = targets[a].second == targets[b].second;
                if (same_user && !same_item) {
                    const int pair = model.selected().item_pair_index(contexts[a].item_idx,
                                                                      contexts[b].item_idx);
                    if (pair >= 0) {
                        internal.push_back({static_cast<int>(a), static_cast<int>(b),
                                            EdgeKind::ItemItem,
                                            model.params().item_pair_weight(pair)});
                    }
                } else if (same_item && !same_user) {
                    const int pair = model.selected().user_pair_index(contexts[a].user_idx,
                                                                      contexts[b].user_idx);
                    if (pair >= 0) {
                        internal.push_back({static_cast<int>(a), static_cast<int>(b),
                                            EdgeKind::UserUser,
                                            model.params().user_pair_weight(pair)});
                    }
                }
            }
        }
    }

    // Enumeration budget: S^m <= 10^6.
    bool exact = true;
    {
        double budget = 1.0;
        for (std::size_t k = 0; k < m && exact; ++k) {
            budget *= S;
            if (budget > 1e6) exact = false;
        }
    }

    std::vector<int> assignment(m, 1);
    if (exact) {
        result.method = JointMethod::Exact;
        std::vector<double> external(m * (S + 1));
        for (std::size_t t = 0; t < m; ++t) {
            for (int r = 1; r <= S; ++r) external[t * (S + 1) + r] = model.added_energy(r, contexts[t]);
        }
        std::vector<int> current(m, 1);
        std::vector<int> best(m, 1);
        double best_energy = std::numeric_limits<double>::infinity();
        bool done = false;
        while (!done) {
            double energy = 0.0;
            for (std::size_t t = 0; t < m; ++t) energy += external[t * (S + 1) + current[t]];
            for (const InternalEdge& e : internal) {
                energy += internal_edge_energy(e, current[e.a], current[e.b], contexts[e.a],
                                               contexts[e.b], S);
            }
            // Strict < with lexicographic enumeration keeps the smallest
            // assignment on ties.
            if (energy < best_energy) {
                best_energy = energy;
                best = current;
            }
            int t = static_cast<int>(m) - 1;
            while (t >= 0 && current[t] == S) current[t--] = 1;
            if (t < 0) done = true;
            else ++current[t];
        }
        assignment = best;
    } else {
        result.method = JointMethod::Icm;
        for (std::size_t t = 0; t < m; ++t) {
            assignment[t] = model.local_conditional(contexts[t]).argmax;
        }
        std::vector<std::vector<int>> incident(m);
        for (std::size_t e = 0; e < internal.size(); ++e) {
            incident[internal[e].a].push_back(static_cast<int>(e));
            incident[internal[e].b].push_back(static_cast<int>(e));
        }
        const int max_sweeps = 50;
        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
            bool changed = false;
            for (std::size_t t = 0; t < m; ++t) {
                double best_e = std::numeric_limits<double>::infinity();
                int best_r = 1;
                for (int r = 1; r <= S; ++r) {
                    double e = model.added_energy(r, contexts[t]);
                    for (int ei : incident[t]) {
                        const InternalEdge& edge = internal[ei];
                        const int ra = edge.a == static_cast<int>(t) ? r : assignment[edge.a];
                        const int rb = edge.b == static_cast<int>(t) ? r : assignment[edge.b];
                        e += internal_edge_energy(edge, ra, rb, contexts[edge.a], contexts[edge.b],
                                                  S);
                    }
                    if (e < best_e) {
                        best_e = e;
                        best_r = r;
                    }
                }
                if (best_r != assignment[t]) {
                    assignment[t] = best_r;
                    changed = true;
                }
            }
            result.sweeps = sweep + 1;
            if (!changed) break;
        }
    }

    // Per-target confidence: local conditional given the other targets fixed
    // at the joint assignment.
    result.predictions.reserve(m);
    for (std::size_t t = 0; t < m; ++t) {
        Prediction p;
        p.user = targets[t].first;
        p.item = targets[t].second;
        if (!contexts[t].has_any_signal()) {
            // Featureless targets are always isolated; give them the same
            // rounded-global-mean fallback as single prediction.
            p.predicted = round_half_up_clamped(model.means().global_mean, S);
            p.confidence = 1.0 / S;
            p.fallback = FallbackLevel::GlobalMean;
            result.predictions.push_back(p);
            continue;
        }
        std::vector<double> energies(S + 1, 0.0);
        double min_e = std::numeric_limits<double>::infinity();
        for (int r = 1; r <= S; ++r) {
            double e = model.added_energy(r, contexts[t]);
            for (const InternalEdge& edge : internal) {
                if (edge.a != static_cast<int>(t) && edge.b != static_cast<int>(t)) continue;
                const int ra = edge.a == static_cast<int>(t) ? r : assignment[edge.a];
                const int rb = edge.b == static_cast<int>(t) ? r : assignment[edge.b];
                e += internal_edge_energy(edge, ra, rb, contexts[edge.a], contexts[edge.b], S);
            }
            energies[r] = e;
            min_e = std::min(min_e, e);
        }
        double z = 0.0;
        for (int r = 1; r <= S; ++r) z += std::exp(-(energies[r] - min_e));
        p.predicted = assignment[t];
        p.confidence = std::exp(-(energies[assignment[t]] - min_e)) / z;
        p.fallback = contexts[t].edges.empty() ? FallbackLevel::ContentOnly : FallbackLevel::Full;
        result.predictions.push_back(p);
    }
    return result;
}

Recommender::Recommender(const PnModel& model) : model_(&model) {
    // Trained correlation weights take over from raw similarities.
    if (model.features().correlation) {
        const auto spans = model.params().block_spans();
        const auto w = model.params().weights();
        for (const auto& span : spans) {
            if (span.block != ParamBlock::ItemPair && span.block != ParamBlock::UserPair) continue;
            for (std::size_t k = span.begin; k < span.end && !use_weights_; ++k) {
                if (w[k] != 0.0) use_weights_ = true;
            }
        }
    }
    if (!use_weights_) return;

    const SelectedPairs& sel = model.selected();
    auto build = [&](const std::vector<std::uint64_t>& keys, bool user_kind,
                     std::vector<int>& offsets, std::vector<ScoredNeighbor>& adj) {
        const int count = user_kind ? model.table().user_count() : model.table().item_count();
        std::vector<int> degree(count, 0);
        for (std::uint64_t key : keys) {
            auto [a, b] = SelectedPairs::unpack(key);
            ++degree[a];
            ++degree[b];
        }
        offsets.assign(count + 1, 0);
        for (int k = 0; k < count; ++k) offsets[k + 1] = offsets[k] + degree[k];
        adj.resize(keys.size() * 2);
        std::vector<int> cursor(offsets.begin(), offsets.end() - 1);
        for (std::size_t k = 0; k < keys.size(); ++k) {
            auto [a, b] = SelectedPairs::unpack(keys[k]);
            const double w = user_kind
                                 ? model.params().user_pair_weight(static_cast<int>(k))
                                 : model.params().item_pair_weight(static_cast<int>(k));
            const double score = w >= 0 ? w : -w;
            adj[cursor[a]++] = {b, score};
            adj[cursor[b]++] = {a, score};
        }
        for (int k = 0; k < count; ++k) {
            std::sort(adj.begin() + offsets[k], adj.begin() + offsets[k + 1],
                      [](const ScoredNeighbor& x, const ScoredNeighbor& y) {
                          if (x.score != y.score) return x.score > y.score;
                          return x.other < y.other;
                      });
        }
    };
    build(sel.user_keys(), true, user_adj_offsets_, user_adj_);
    build(sel.item_keys(), false, item_adj_offsets_, item_adj_);
}

std::vector<Recommender::ScoredNeighbor> Recommender::scored_user_neighbors(int user_idx,
                                                                            int K) const {
    const RatingTable& table = model_->table();
    if (K > 0) {
        // Fast path: K strictly-positive scores straight from the sorted
        // index. Unindexed co-rating neighbors all score <= 0, so a full K
        // here is definitive.
        std::vector<ScoredNeighbor> out;
        out.reserve(K);
        if (use_weights_) {
            for (int k = user_adj_offsets_[user_idx];
                 k < user_adj_offsets_[user_idx + 1] && static_cast<int>(out.size()) < K; ++k) {
                if (user_adj_[k].score <= 0.0) break;
                out.push_back(user_adj_[k]);
            }
        } else {
            for (const auto& n : model_->corr().user_sim.neighbors(user_idx)) {
                if (n.value <= 0.0 || static_cast<int>(out.size()) >= K) break;
                out.push_back({n.other, n.value});
            }
        }
        if (static_cast<int>(out.size()) == K) return out;
    }

    // Every co-rating user is a neighbor; weight/similarity only orders them.
    std::vector<std::uint8_t> seen(table.user_count(), 0);
    std::vector<int> found;
    for (const auto& e : table.by_user(user_idx)) {
        for (const auto& f : table.by_item(e.other)) {
            if (f.other == user_idx || seen[f.other]) continue;
            seen[f.other] = 1;
            found.push_back(f.other);
        }
    }
    std::vector<ScoredNeighbor> out;
    out.reserve(found.size());
    for (int v : found) {
        double s = 0.0;
        if (use_weights_) {
            const int pair = model_->selected().user_pair_index(user_idx, v);
            if (pair >= 0) s = std::abs(model_->params().user_pair_weight(pair));
        } else {
            s = model_->corr().user_sim.lookup(user_idx, v);
        }
        out.push_back({v, s});
    }
    std::sort(out.begin(), out.end(), [&](const ScoredNeighbor& x, const ScoredNeighbor& y) {
        if (x.score != y.score) return x.score > y.score;
        return table.user_id(x.other) < table.user_id(y.other);
    });
    if (K > 0 && static_cast<int>(out.size()) > K) out.resize(K);
    return out;
}

std::vector<Recommender::ScoredNeighbor> Recommender::scored_item_neighbors(
    int item_idx, int K, const std::vector<std::uint8_t>& rated) const {
    const RatingTable& table = model_->table();
    if (K > 0) {
        std::vector<ScoredNeighbor> out;
        out.reserve(K);
        if (use_weights_) {
            for (int k = item_adj_offsets_[item_idx];
                 k < item_adj_offsets_[item_idx + 1] && static_cast<int>(out.size()) < K; ++k) {
                if (item_adj_[k].score <= 0.0) break;
                if (!rated[item_adj_[k].other]) out.push_back(item_adj_[k]);
            }
        } else {
            for (const auto& n : model_->corr().item_sim.neighbors(item_idx)) {
                if (n.value <= 0.0 || static_cast<int>(out.size()) >= K) break;
                if (!rated[n.other]) out.push_back({n.other, n.value});
            }
        }
        if (static_cast<int>(out.size()) == K) return out;
    }

    std::vector<std::uint8_t> seen(table.item_count(), 0);
    std::vector<int> found;
    for (const auto& e : table.by_item(item_idx)) {
        for (const auto& f : table.by_user(e.other)) {
            if (f.other == item_idx || seen[f.other] || rated[f.other]) continue;
            seen[f.other] = 1;
            found.push_back(f.other);
        }
    }
    std::vector<ScoredNeighbor> out;
    out.reserve(found.size());
    for (int j : found) {
        double s = 0.0;
        if (use_weights_) {
            const int pair = model_->selected().item_pair_index(item_idx, j);
            if (pair >= 0) s = std::abs(model_->params().item_pair_weight(pair));
        } else {
            s = model_->corr().item_sim.lookup(item_idx, j);
        }
        out.push_back({j, s});
    }
    std::sort(out.begin(), out.end(), [&](const ScoredNeighbor& x, const ScoredNeighbor& y) {
        if (x.score != y.score) return x.score > y.score;
        return table.item_id(x.other) < table.item_id(y.other);
    });
    if (K > 0 && static_cast<int>(out.size()) > K) out.resize(K);
    return out;
}

std::vector<ItemId> Recommender::candidate_set(UserId u, int K, CandidateMode mode) const {
    const RatingTable& table = model_->table();
    const int user_idx = table.user_index(u);
    std::vector<ItemId> out;
    if (user_idx < 0 || table.by_user(user_idx).empty()) {
        // Cold user: everything that has ratings, most popular first.
        std::vector<int> items(table.item_count());
        for (int i = 0; i < table.item_count(); ++i) items[i] = i;
        std::sort(items.begin(), items.end(), [&](int a, int b) {
            if (table.users_who_rated(a) != table.users_who_rated(b))
                return table.users_who_rated(a) > table.users_who_rated(b);
            return table.item_id(a) < table.item_id(b);
        });
        for (int i : items)
            if (table.users_who_rated(i) > 0) out.push_back(table.item_id(i));
        return out;
    }

    std::vector<std::uint8_t> rated(table.item_count(), 0);
    for (const auto& e : table.by_user(user_idx)) rated[e.other] = 1;
    std::vector<std::uint8_t> in_set(table.item_count(), 0);

    if (mode == CandidateMode::UserBased || mode == CandidateMode::Union) {
        for (const auto& neighbor : scored_user_neighbors(user_idx, K)) {
            for (const auto& e : table.by_user(neighbor.other)) {
                if (!rated[e.other]) in_set[e.other] = 1;
            }
        }
    }
    if (mode == CandidateMode::ItemBased || mode == CandidateMode::Union) {
        for (const auto& e : table.by_user(user_idx)) {
            for (const auto& neighbor : scored_item_neighbors(e.other, K, rated)) {
                in_set[neighbor.other] = 1;
            }
        }
    }
    for (int i = 0; i < table.item_count(); ++i) {
        if (in_set[i]) out.push_back(table.item_id(i));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<ScoredCandidate> Recommender::score_candidates(UserId u,
                                                           const TopNConfig& config) const {
    const RatingTable& table = model_->table();
    std::vector<ItemId> cands = candidate_set(u, config.neighbors, config.mode);
    // Trim the pool to C by training popularity.
    if (config.candidates > 0 && static_cast<int>(cands.size()) > config.candidates) {
        std::stable_sort(cands.begin(), cands.end(), [&](ItemId a, ItemId b) {
            const int pa = table.users_who_rated(table.item_index(a));
            const int pb = table.users_who_rated(table.item_index(b));
            if (pa != pb) return pa > pb;
            return a < b;
        });
        cands.resize(config.candidates);
    }

    std::vector<ScoredCandidate> scored;
    scored.reserve(cands.size());
    for (ItemId item : cands) {
        const NodeContext ctx = model_->context_for_prediction(u, item);
        const LocalDistribution dist = model_->local_conditional(ctx);
        const EnergyChange change = model_->energy_change(ctx, dist);
        scored.push_back({item, change.maximal, change.expected, dist.argmax, dist.confidence});
    }
    return scored;
}

RankedRecommendation Recommender::rank(UserId u, std::vector<ScoredCandidate> scored,
                                       RankingVariant variant, int n) const {
    const RatingTable& table = model_->table();
    RankedRecommendation rec;
    rec.user = u;
    rec.ranking = variant;
    rec.entries.reserve(scored.size());
    for (const ScoredCandidate& c : scored) {
        rec.entries.push_back({c.item,
                               variant == RankingVariant::MaximalEnergy ? c.maximal : c.expected,
                               c.predicted, c.confidence});
    }
    std::sort(rec.entries.begin(), rec.entries.end(),
              [&](const RankedEntry& a, const RankedEntry& b) {
                  if (a.score != b.score) return a.score < b.score;
                  if (a.confidence != b.confidence) return a.confidence > b.confidence;
                  const int pa = table.users_who_rated(table.item_index(a.item));
                  const int pb = table.users_who_rated(table.item_index(b.item));
                  if (pa != pb) return pa > pb;
                  return a.item < b.item;
              });
    if (static_cast<int>(rec.entries.size()) > n) {
        rec.entries.resize(n);
    } else if (static_cast<int>(rec.entries.size()) < n) {
        rec.truncated = true;
    }
    return rec;
}

RankedRecommendation Recommender::recommend_top_n(UserId u, const TopNConfig& config) const {
    return rank(u, score_candidates(u, config), config.ranking, config.n);
}

std::vector<ItemId> candidate_set(const PnModel& model, UserId u, int K, CandidateMode mode) {
    return Recommender(model).candidate_set(u, K, mode);
}

RankedRecommendation recommend_top_n(const PnModel& model, UserId u, const TopNConfig& config) {
    return Recommender(model).recommend_top_n(u, config);
}

}  // namespace prefnet
