#include "prefnet/model.hpp"

#include <cmath>
#include <limits>

namespace prefnet {

PnModel::PnModel(const RatingTable& table, const MeanStats& means, const AttributeCatalog& attrs,
                 const CorrelationStats& corr, const ParameterVector& params)
    : table_(&table), means_(&means), attrs_(&attrs), corr_(&corr), params_(&params) {}

void PnModel::append_blanket(NodeContext& ctx, int user_idx, int item_idx) const {
    if (!features().correlation || user_idx < 0 || item_idx < 0) return;
    const SelectedPairs& sel = corr_->selected;
    // Same-item edges to other raters of this item.
    for (const auto& e : table_->by_item(item_idx)) {
        if (e.other == user_idx) continue;
        const int pair = sel.user_pair_index(user_idx, e.other);
        if (pair < 0) continue;
        const int param = params_->user_pair_param_index(pair);
        ctx.edges.push_back({EdgeKind::UserUser, param, params_->at(param),
                             e.value - means_->user_mean[e.other]});
    }
    // Same-user edges to this user's other ratings.
    for (const auto& e : table_->by_user(user_idx)) {
        if (e.other == item_idx) continue;
        const int pair = sel.item_pair_index(item_idx, e.other);
        if (pair < 0) continue;
        const int param = params_->item_pair_param_index(pair);
        ctx.edges.push_back({EdgeKind::ItemItem, param, params_->at(param),
                             e.value - means_->item_mean[e.other]});
    }
}

NodeContext PnModel::context_for_training_node(int user_idx, int item_idx) const {
    return context_impl(user_idx, item_idx, table_->user_id(user_idx), table_->item_id(item_idx));
}

NodeContext PnModel::context_for_prediction(UserId u, ItemId i) const {
    return context_impl(table_->user_index(u), table_->item_index(i), u, i);
}

NodeContext PnModel::context_impl(int user_idx, int item_idx, UserId u, ItemId i) const {
    NodeContext ctx;
    ctx.user_idx = user_idx;
    ctx.item_idx = item_idx;
    ctx.user_mean = means_->user_mean_or_global(user_idx);
    ctx.item_mean = means_->item_mean_or_global(item_idx);
    ctx.user_attrs = attrs_->user(u);
    ctx.item_attrs = attrs_->item(i);
    if (features().identity) {
        ctx.item_dev_coeff += params_->item_identity(item_idx);
        ctx.user_dev_coeff += params_->user_identity(user_idx);
    }
    if (features().content) {
        for (std::size_t d = 0; d < ctx.user_attrs.size(); ++d) {
            if (ctx.user_attrs[d]) ctx.item_dev_coeff += params_->content_user(static_cast<int>(d));
        }
        for (std::size_t d = 0; d < ctx.item_attrs.size(); ++d) {
            if (ctx.item_attrs[d]) ctx.user_dev_coeff += params_->content_item(static_cast<int>(d));
        }
    }
    append_blanket(ctx, user_idx, item_idx);
    return ctx;
}

double PnModel::node_energy(int r, const NodeContext& ctx) const {
    const int S = scale_max();
    const double gi = g(std::abs(r - ctx.item_mean), S);
    const double gu = g(std::abs(r - ctx.user_mean), S);
    return -(ctx.item_dev_coeff * gi + ctx.user_dev_coeff * gu);
}

double PnModel::edge_energy(int r, const NodeContext& ctx, const BlanketEdge& e) const {
    const double own_mean = e.kind == EdgeKind::UserUser ? ctx.user_mean : ctx.item_mean;
    const double diff = (r - own_mean) - e.neighbor_dev;
    return -e.weight * g(diff >= 0 ? diff : -diff, scale_max());
}

double PnModel::added_energy(int r, const NodeContext& ctx) const {
    double energy = node_energy(r, ctx);
    for (const BlanketEdge& e : ctx.edges) energy += edge_energy(r, ctx, e);
    return energy;
}

LocalDistribution PnModel::local_conditional(const NodeContext& ctx) const {
    const int S = scale_max();
    LocalDistribution dist;
    dist.probs.resize(S);
    double min_energy = std::numeric_limits<double>::infinity();
    for (int r = 1; r <= S; ++r) {
        const double e = added_energy(r, ctx);
        dist.probs[r - 1] = e;
        if (e < min_energy) min_energy = e;
    }
    // Log-domain with max-subtraction: P(r) = exp(-(E(r)-Emin)) / Z.
    double z = 0.0;
    for (int r = 1; r <= S; ++r) {
        dist.probs[r - 1] = std::exp(-(dist.probs[r - 1] - min_energy));
        z += dist.probs[r - 1];
    }
    dist.argmax = 1;
    for (int r = 1; r <= S; ++r) {
        dist.probs[r - 1] /= z;
        if (dist.probs[r - 1] > dist.probs[dist.argmax - 1]) dist.argmax = r;
    }
    dist.confidence = dist.probs[dist.argmax - 1];
    return dist;
}

EnergyChange PnModel::energy_change(const NodeContext& ctx) const {
    return energy_change(ctx, local_conditional(ctx));
}

EnergyChange PnModel::energy_change(const NodeContext& ctx, const LocalDistribution& dist) const {
    EnergyChange change;
    for (int r = 1; r <= scale_max(); ++r) {
        const double delta = added_energy(r, ctx);
        if (r == dist.argmax) change.maximal = delta;
        change.expected += dist.probs[r - 1] * delta;
    }
    return change;
}

}  // namespace prefnet
