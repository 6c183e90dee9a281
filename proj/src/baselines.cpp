#include "prefnet/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace prefnet {
namespace {

int round_clamp(double raw, int scale_max) {
    return std::clamp(static_cast<int>(std::floor(raw + 0.5)), 1, scale_max);
}

}  // namespace

BaselinePrediction user_based_predict(const RatingTable& table, const MeanStats& means,
                                      const SimilarityTable& user_sim, UserId u, ItemId i) {
    const int ui = table.user_index(u);
    const int ii = table.item_index(i);
    const double base = means.user_mean_or_global(ui);
    double numer = 0.0;
    double denom = 0.0;
    if (ui >= 0 && ii >= 0) {
        for (const auto& e : table.by_item(ii)) {
            if (e.other == ui) continue;
            const double s = user_sim.lookup(ui, e.other);
            if (s == 0.0) continue;
            numer += s * (e.value - means.user_mean[e.other]);
            denom += std::abs(s);
        }
    }
    const double raw = denom > 0.0 ? base + numer / denom : base;
    return {u, i, raw, round_clamp(raw, table.scale_max())};
}

BaselinePrediction item_based_predict(const RatingTable& table, const MeanStats& means,
                                      const SimilarityTable& item_sim, UserId u, ItemId i) {
    const int ui = table.user_index(u);
    const int ii = table.item_index(i);
    const double base = means.item_mean_or_global(ii);
    double numer = 0.0;
    double denom = 0.0;
    if (ui >= 0 && ii >= 0) {
        for (const auto& e : table.by_user(ui)) {
            if (e.other == ii) continue;
            const double s = item_sim.lookup(ii, e.other);
            if (s == 0.0) continue;
            numer += s * (e.value - means.item_mean[e.other]);
            denom += std::abs(s);
        }
    }
    const double raw = denom > 0.0 ? base + numer / denom : base;
    return {u, i, raw, round_clamp(raw, table.scale_max())};
}

std::vector<TopNItem> user_based_topn(const RatingTable& table, const MeanStats& means,
                                      const SimilarityTable& user_sim, UserId u, int n,
                                      int neighbors) {
    const int ui = table.user_index(u);
    std::vector<TopNItem> out;
    if (n <= 0) return out;

    std::vector<std::uint8_t> rated(table.item_count(), 0);
    std::vector<int> count(table.item_count(), 0);
    if (ui >= 0) {
        for (const auto& e : table.by_user(ui)) rated[e.other] = 1;
        int taken = 0;
        for (const auto& nb : user_sim.neighbors(ui)) {
            if (nb.value <= 0.0 || taken >= neighbors) break;
            ++taken;
            for (const auto& e : table.by_user(nb.other)) {
                if (!rated[e.other]) ++count[e.other];
            }
        }
    }

    std::vector<int> items;
    for (int i = 0; i < table.item_count(); ++i) {
        if (count[i] > 0) items.push_back(i);
    }
    if (items.empty()) {
        // No positively correlated neighborhood: globally popular unseen
        // items, ranked by total rater count.
        for (int i = 0; i < table.item_count(); ++i) {
            if (!rated[i] && table.users_who_rated(i) > 0) {
                items.push_back(i);
                count[i] = table.users_who_rated(i);
            }
        }
    }
    std::sort(items.begin(), items.end(), [&](int a, int b) {
        if (count[a] != count[b]) return count[a] > count[b];
        return table.item_id(a) < table.item_id(b);
    });
    if (static_cast<int>(items.size()) > n) items.resize(n);

    out.reserve(items.size());
    for (int i : items) {
        const ItemId id = table.item_id(i);
        const BaselinePrediction p = user_based_predict(table, means, user_sim, u, id);
        out.push_back({id, count[i], p.rounded, p.raw});
    }
    return out;
}

}  // namespace prefnet
