#pragma once

#include <span>
#include <vector>

#include "prefnet/attributes.hpp"
#include "prefnet/features.hpp"
#include "prefnet/graph.hpp"
#include "prefnet/parameters.hpp"
#include "prefnet/rating_table.hpp"
#include "prefnet/similarity.hpp"

namespace prefnet {

/// Local conditional P(r | N(t), o) over the S rating values.
struct LocalDistribution {
    std::vector<double> probs;  // probs[r-1]
    int argmax = 1;             // lowest value wins ties
    double confidence = 0.0;    // probs[argmax-1]
};

/// Energy delta for adding one rating node: at the predicted value, and in
/// expectation under the local conditional.
struct EnergyChange {
    double maximal = 0.0;
    double expected = 0.0;
};

/// One edge of a node's Markov blanket, reduced to what f_e needs: the
/// neighbor's fixed deviation and the pair weight.
struct BlanketEdge {
    EdgeKind kind;
    int param_index;        // flat slot in the ParameterVector, -1 if untracked
    double weight;
    double neighbor_dev;    // neighbor rating minus its centering mean
};

/// Everything needed to evaluate one node: fallback-resolved means, factored
/// node-energy coefficients and the active blanket.
struct NodeContext {
    int user_idx = -1;  // dense index in the training table, -1 if unseen
    int item_idx = -1;
    double user_mean = 0.0;
    double item_mean = 0.0;
    // Node energy factorizes as -(A*g(|r - item_mean|) + B*g(|r - user_mean|))
    // with A = item identity + content-user dot and B = user identity +
    // content-item dot.
    double item_dev_coeff = 0.0;
    double user_dev_coeff = 0.0;
    std::span<const std::uint8_t> user_attrs;
    std::span<const std::uint8_t> item_attrs;
    std::vector<BlanketEdge> edges;

    bool has_any_signal() const {
        return user_idx >= 0 || item_idx >= 0 || !user_attrs.empty() || !item_attrs.empty();
    }
};

/// The conditional Markov random field over observed ratings: potentials,
/// energies, Markov-blanket conditionals and node-addition energy changes.
class PnModel {
public:
    PnModel(const RatingTable& table, const MeanStats& means, const AttributeCatalog& attrs,
            const CorrelationStats& corr, const ParameterVector& params);

    const RatingTable& table() const { return *table_; }
    const MeanStats& means() const { return *means_; }
    const AttributeCatalog& attrs() const { return *attrs_; }
    const CorrelationStats& corr() const { return *corr_; }
    const SelectedPairs& selected() const { return corr_->selected; }
    const ParameterVector& params() const { return *params_; }
    const FeatureConfig& features() const { return params_->config(); }
    int scale_max() const { return table_->scale_max(); }

    /// Blanket over training ratings for a node that is itself part of the
    /// training table.
    NodeContext context_for_training_node(int user_idx, int item_idx) const;

    /// Blanket over training ratings for a new (test) node; unknown ids get
    /// mean fallbacks and empty attribute spans.
    NodeContext context_for_prediction(UserId u, ItemId i) const;

    /// -w_v . f_v(r): node energy under the factored coefficients.
    double node_energy(int r, const NodeContext& ctx) const;

    /// -w_e . f_e(r, r'): energy of one blanket edge at candidate value r.
    double edge_energy(int r, const NodeContext& ctx, const BlanketEdge& e) const;

    /// Node energy plus all blanket edge energies; the quantity whose
    /// softmax over r gives the local conditional, and the energy change of
    /// adding the node at value r.
    double added_energy(int r, const NodeContext& ctx) const;

    LocalDistribution local_conditional(const NodeContext& ctx) const;

    EnergyChange energy_change(const NodeContext& ctx) const;
    EnergyChange energy_change(const NodeContext& ctx, const LocalDistribution& dist) const;

private:
    NodeContext context_impl(int user_idx, int item_idx, UserId u, ItemId i) const;
    void append_blanket(NodeContext& ctx, int user_idx, int item_idx) const;

    const RatingTable* table_;
    const MeanStats* means_;
    const AttributeCatalog* attrs_;
    const CorrelationStats* corr_;
    const ParameterVector* params_;
};

}  // namespace prefnet
