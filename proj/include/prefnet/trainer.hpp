#pragma once

#include <span>
#include <vector>

#include "prefnet/graph.hpp"
#include "prefnet/model.hpp"
#include "prefnet/parameters.hpp"

namespace prefnet {

struct TrainConfig {
    double learning_rate = 0.001;
    BlockSigmas sigmas{1.0};
    int epochs = 3;
    std::uint64_t user_order_seed = 0;
    double lr_decay = 1.0;  // per-epoch multiplier; 1 = fixed rate
    // Abort when the epoch objective drops by more than this fraction of its
    // previous magnitude.
    double divergence_tolerance = 0.02;
    // Full-batch gradient ascent instead of per-user stochastic updates;
    // stops early once the objective improves by less than `tolerance`.
    bool full_batch = false;
    double tolerance = 0.0;
};

struct TrainReport {
    std::vector<double> epoch_objective;  // regularized pseudo-log-likelihood
    std::vector<double> epoch_grad_norm;  // L2 norm of the likelihood gradient
    int epochs_run = 0;
    bool converged = false;
    double wall_seconds = 0.0;  // informational; not serialized into artifacts
};

/// Raised when the epoch objective worsens past the configured tolerance.
struct DivergenceError : std::exception {
    std::string message;
    explicit DivergenceError(std::string msg) : message(std::move(msg)) {}
    const char* what() const noexcept override { return message.c_str(); }
};

/// Sum of log local conditionals over all training nodes minus the Gaussian
/// penalty 0.5 * sum (w_k / sigma_block)^2.
double pseudo_log_likelihood(const PreferenceGraph& graph, const MeanStats& means,
                             const AttributeCatalog& attrs, const CorrelationStats& corr,
                             const ParameterVector& params, const BlockSigmas& sigmas);

/// Dense observed-minus-expected gradient of the objective restricted to
/// `scope` (graph node indexes), with the regularizer pull scaled by
/// |scope| / |T|.
std::vector<double> gradient(const PreferenceGraph& graph, const MeanStats& means,
                             const AttributeCatalog& attrs, const CorrelationStats& corr,
                             const ParameterVector& params, const BlockSigmas& sigmas,
                             std::span<const int> scope);

/// Maximizes the regularized pseudo-log-likelihood. Stochastic mode visits
/// users in a seeded-shuffle order and updates after each user's batch;
/// full-batch mode takes one global step per epoch.
std::pair<ParameterVector, TrainReport> train(const PreferenceGraph& graph, const MeanStats& means,
                                              const AttributeCatalog& attrs,
                                              const CorrelationStats& corr, FeatureConfig features,
                                              const TrainConfig& config,
                                              const ParameterVector* initial = nullptr);

}  // namespace prefnet
