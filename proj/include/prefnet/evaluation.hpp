#pragma once

#include <span>
#include <unordered_map>

#include "prefnet/baselines.hpp"
#include "prefnet/inference.hpp"
#include "prefnet/trainer.hpp"

namespace prefnet {

struct MetricReport {
    double mae = 0.0;
    double zero_one = 0.0;
    std::size_t n = 0;

    bool empty() const { return n == 0; }
};

/// MAE and mean 0/1 error over aligned integer prediction/truth pairs.
MetricReport rating_metrics(std::span<const int> predictions, std::span<const int> truths);

/// Real-valued variant for unrounded baselines: MAE on the raw values, 0/1
/// on their rounded form.
MetricReport rating_metrics_real(std::span<const double> predictions, std::span<const int> truths,
                                 int scale_max);

/// Per-user test ratings keyed by external user id.
using TestSets = std::unordered_map<UserId, std::vector<std::pair<ItemId, int>>>;
TestSets build_test_sets(const RatingTable& test);

/// One user's ranked recommendation list, best rank first. `raw` carries the
/// method's unrounded prediction where one exists (hit MAE is reported both
/// ways).
struct RankedList {
    struct Entry {
        ItemId item = 0;
        int predicted = 0;
        double raw = 0.0;
    };
    UserId user = 0;
    std::vector<Entry> items;
};

struct UtilityReport {
    double aggregate = 0.0;  // R = 100 * sum R_u / sum R_u_max
    double alpha = 5.0;
    double mae_on_hits = 0.0;
    double mae_on_hits_raw = 0.0;
    std::size_t hits = 0;
    std::size_t covered_test_items = 0;  // test items of users with a list
    double recall = 0.0;
};

/// Halflife-discounted utility: a hit at 1-based rank j is worth
/// 2^-((j-1)/(alpha-1)); the ideal list packs the user's test items from
/// rank 1. Users with empty test sets contribute to neither sum.
UtilityReport expected_utility(const std::vector<RankedList>& lists, const TestSets& tests,
                               double alpha);

struct RecallPoint {
    int n = 0;
    double recall = 0.0;
    double utility = 0.0;
    double mae_on_hits = 0.0;
};

/// Evaluates prefixes of the given lists at each N (ascending).
std::vector<RecallPoint> recall_sweep(const std::vector<RankedList>& lists, const TestSets& tests,
                                      double alpha, std::span<const int> n_values);

enum class Method {
    UserBasedRaw,
    UserBasedRounded,
    ItemBasedRaw,
    ItemBasedRounded,
    PnContent,
    PnCorrelation,
    PnHybrid
};

const char* to_string(Method method);
FeatureConfig feature_config_for(Method method);

/// Rating-prediction metrics for one method on a fixed test table.
MetricReport evaluate_pn_ratings(const PnModel& model, const RatingTable& test);
MetricReport evaluate_baseline_ratings(const RatingTable& train, const MeanStats& means,
                                       const SimilarityTable& sim, const RatingTable& test,
                                       Method method);

/// Seeded subsample of `fraction` of the table's ratings, preserving the
/// original insertion order (fraction 1 reproduces the table exactly).
RatingTable subsample_ratings(const RatingTable& table, double fraction, std::uint64_t seed);

struct SweepRow {
    double fraction = 1.0;
    Method method = Method::PnHybrid;
    double mae = 0.0;
    double zero_one = 0.0;
};

/// Retrains every method at each training fraction against the fixed test
/// set.
std::vector<SweepRow> sparsity_sweep(const RatingTable& full_train, const AttributeCatalog& attrs,
                                     const RatingTable& test, std::span<const double> fractions,
                                     std::span<const Method> methods, const TrainConfig& config,
                                     int min_co_user, int min_co_item, std::uint64_t seed);

}  // namespace prefnet
