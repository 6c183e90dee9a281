#include "prefnet/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace prefnet {
namespace {

// Observed-minus-expected feature accumulation for one node's local
// likelihood term. Acc is called as acc(flat_param_index, value).
template <typename Acc>
void accumulate_node_gradient(const PnModel& model, const NodeContext& ctx, int observed,
                              Acc&& acc) {
    const int S = model.scale_max();
    const LocalDistribution dist = model.local_conditional(ctx);
    const ParameterVector& params = model.params();

    double exp_gi = 0.0, exp_gu = 0.0;
    for (int r = 1; r <= S; ++r) {
        exp_gi += dist.probs[r - 1] * g(std::abs(r - ctx.item_mean), S);
        exp_gu += dist.probs[r - 1] * g(std::abs(r - ctx.user_mean), S);
    }
    const double d_gi = g(std::abs(observed - ctx.item_mean), S) - exp_gi;
    const double d_gu = g(std::abs(observed - ctx.user_mean), S) - exp_gu;

    if (model.features().identity) {
        const int ii = params.item_identity_index(ctx.item_idx);
        if (ii >= 0) acc(ii, d_gi);
        const int ui = params.user_identity_index(ctx.user_idx);
        if (ui >= 0) acc(ui, d_gu);
    }
    if (model.features().content) {
        for (std::size_t d = 0; d < ctx.item_attrs.size(); ++d) {
            if (ctx.item_attrs[d]) acc(params.content_item_index(static_cast<int>(d)), d_gu);
        }
        for (std::size_t d = 0; d < ctx.user_attrs.size(); ++d) {
            if (ctx.user_attrs[d]) acc(params.content_user_index(static_cast<int>(d)), d_gi);
        }
    }
    for (const BlanketEdge& e : ctx.edges) {
        if (e.param_index < 0) continue;
        const double own_mean = e.kind == EdgeKind::UserUser ? ctx.user_mean : ctx.item_mean;
        double expected = 0.0;
        for (int r = 1; r <= S; ++r) {
            const double diff = (r - own_mean) - e.neighbor_dev;
            expected += dist.probs[r - 1] * g(diff >= 0 ? diff : -diff, S);
        }
        const double odiff = (observed - own_mean) - e.neighbor_dev;
        acc(e.param_index, g(odiff >= 0 ? odiff : -odiff, S) - expected);
    }
}

// Flat sparse accumulator with stamping so one buffer serves every batch.
class SparseGradient {
public:
    explicit SparseGradient(std::size_t size) : values_(size, 0.0), stamps_(size, 0) {}

    void begin_batch() {
        ++current_;
        touched_.clear();
    }

    void operator()(int index, double value) {
        if (stamps_[index] != current_) {
            stamps_[index] = current_;
            values_[index] = 0.0;
            touched_.push_back(index);
        }
        values_[index] += value;
    }

    const std::vector<int>& touched() const { return touched_; }
    double value(int index) const { return values_[index]; }

private:
    std::vector<double> values_;
    std::vector<std::uint64_t> stamps_;
    std::vector<int> touched_;
    std::uint64_t current_ = 0;
};

double regularizer_value(const ParameterVector& params, const BlockSigmas& sigmas) {
    double penalty = 0.0;
    const auto w = params.weights();
    for (const auto& span : params.block_spans()) {
        const double inv_s2 = 1.0 / (sigmas[span.block] * sigmas[span.block]);
        for (std::size_t k = span.begin; k < span.end; ++k) penalty += w[k] * w[k] * inv_s2;
    }
    return -0.5 * penalty;
}

}  // namespace

double pseudo_log_likelihood(const PreferenceGraph& graph, const MeanStats& means,
                             const AttributeCatalog& attrs, const CorrelationStats& corr,
                             const ParameterVector& params, const BlockSigmas& sigmas) {
    const PnModel model(graph.table(), means, attrs, corr, params);
    double total = 0.0;
    for (std::size_t k = 0; k < graph.node_count(); ++k) {
        const auto& node = graph.node(k);
        const NodeContext ctx = model.context_for_training_node(node.user_idx, node.item_idx);
        const LocalDistribution dist = model.local_conditional(ctx);
        total += std::log(dist.probs[node.value - 1]);
    }
    return total + regularizer_value(params, sigmas);
}

std::vector<double> gradient(const PreferenceGraph& graph, const MeanStats& means,
                             const AttributeCatalog& attrs, const CorrelationStats& corr,
                             const ParameterVector& params, const BlockSigmas& sigmas,
                             std::span<const int> scope) {
    const PnModel model(graph.table(), means, attrs, corr, params);
    std::vector<double> grad(params.size(), 0.0);
    for (int k : scope) {
        const auto& node = graph.node(k);
        const NodeContext ctx = model.context_for_training_node(node.user_idx, node.item_idx);
        accumulate_node_gradient(model, ctx, node.value,
                                 [&](int index, double value) { grad[index] += value; });
    }
    const double scale = graph.node_count() == 0
                             ? 0.0
                             : static_cast<double>(scope.size()) /
                                   static_cast<double>(graph.node_count());
    const auto w = params.weights();
    for (const auto& span : params.block_spans()) {
        const double pull = scale / (sigmas[span.block] * sigmas[span.block]);
        for (std::size_t k = span.begin; k < span.end; ++k) grad[k] -= pull * w[k];
    }
    return grad;
}

std::pair<ParameterVector, TrainReport> train(const PreferenceGraph& graph, const MeanStats& means,
                                              const AttributeCatalog& attrs,
                                              const CorrelationStats& corr, FeatureConfig features,
                                              const TrainConfig& config,
                                              const ParameterVector* initial) {
    const auto start = std::chrono::steady_clock::now();
    const RatingTable& table = graph.table();
    ParameterVector params = initial ? *initial : ParameterVector(table, corr.selected, features);
    TrainReport report;

    const std::size_t n = graph.node_count();
    if (n == 0 || params.size() == 0) {
        report.converged = true;
        return {std::move(params), report};
    }

    double lr = config.learning_rate;
    double previous = pseudo_log_likelihood(graph, means, attrs, corr, params, config.sigmas);

    if (config.full_batch) {
        std::vector<int> scope(n);
        std::iota(scope.begin(), scope.end(), 0);
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            const auto grad = gradient(graph, means, attrs, corr, params, config.sigmas, scope);
            double norm2 = 0.0;
            auto w = params.weights();
            for (std::size_t k = 0; k < w.size(); ++k) {
                w[k] += lr * grad[k];
                norm2 += grad[k] * grad[k];
            }
            const double objective =
                pseudo_log_likelihood(graph, means, attrs, corr, params, config.sigmas);
            report.epoch_objective.push_back(objective);
            report.epoch_grad_norm.push_back(std::sqrt(norm2));
            ++report.epochs_run;
            if (objective < previous - config.divergence_tolerance * (1.0 + std::abs(previous))) {
                throw DivergenceError("objective fell from " + std::to_string(previous) + " to " +
                                      std::to_string(objective) + " at epoch " +
                                      std::to_string(epoch + 1) + "; reduce the learning rate");
            }
            if (config.tolerance > 0.0 && std::abs(objective - previous) < config.tolerance) {
                previous = objective;
                report.converged = true;
                break;
            }
            previous = objective;
            lr *= config.lr_decay;
        }
    } else {
        std::mt19937_64 rng(config.user_order_seed);
        std::vector<int> order(table.user_count());
        std::iota(order.begin(), order.end(), 0);
        SparseGradient sparse(params.size());
        const auto spans = params.block_spans();

        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            // Hand-rolled Fisher-Yates keeps the visit order identical across
            // standard libraries for a given seed.
            for (std::size_t k = order.size(); k > 1; --k) {
                const std::size_t j = rng() % k;
                std::swap(order[k - 1], order[j]);
            }
            double norm2 = 0.0;
            const PnModel model(table, means, attrs, corr, params);
            for (int u : order) {
                const auto& nodes = graph.nodes_of_user(u);
                if (nodes.empty()) continue;
                sparse.begin_batch();
                for (int node_idx : nodes) {
                    const auto& node = graph.node(node_idx);
                    const NodeContext ctx =
                        model.context_for_training_node(node.user_idx, node.item_idx);
                    accumulate_node_gradient(model, ctx, node.value, std::ref(sparse));
                }
                // One full -w/sigma^2 pull per epoch, spread over batches in
                // proportion to batch size.
                const double batch_fraction =
                    static_cast<double>(nodes.size()) / static_cast<double>(n);
                auto w = params.weights();
                for (const auto& span : spans) {
                    const double factor =
                        1.0 - lr * batch_fraction /
                                  (config.sigmas[span.block] * config.sigmas[span.block]);
                    for (std::size_t k = span.begin; k < span.end; ++k) w[k] *= factor;
                }
                for (int index : sparse.touched()) {
                    const double gk = sparse.value(index);
                    w[index] += lr * gk;
                    norm2 += gk * gk;
                }
            }
            const double objective =
                pseudo_log_likelihood(graph, means, attrs, corr, params, config.sigmas);
            report.epoch_objective.push_back(objective);
            report.epoch_grad_norm.push_back(std::sqrt(norm2));
            ++report.epochs_run;
            if (objective < previous - config.divergence_tolerance * (1.0 + std::abs(previous))) {
                throw DivergenceError("objective fell from " + std::to_string(previous) + " to " +
                                      std::to_string(objective) + " at epoch " +
                                      std::to_string(epoch + 1) + "; reduce the learning rate");
            }
            previous = objective;
            lr *= config.lr_decay;
        }
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(params), report};
}

}  // namespace prefnet
