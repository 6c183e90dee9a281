#include "prefnet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace prefnet {

MetricReport rating_metrics(std::span<const int> predictions, std::span<const int> truths) {
    MetricReport report;
    report.n = predictions.size();
    if (report.n == 0) return report;
    double abs_sum = 0.0;
    std::size_t wrong = 0;
    for (std::size_t k = 0; k < report.n; ++k) {
        abs_sum += std::abs(predictions[k] - truths[k]);
        if (predictions[k] != truths[k]) ++wrong;
    }
    report.mae = abs_sum / static_cast<double>(report.n);
    report.zero_one = static_cast<double>(wrong) / static_cast<double>(report.n);
    return report;
}

MetricReport rating_metrics_real(std::span<const double> predictions, std::span<const int> truths,
                                 int scale_max) {
    MetricReport report;
    report.n = predictions.size();
    if (report.n == 0) return report;
    double abs_sum = 0.0;
    std::size_t wrong = 0;
    for (std::size_t k = 0; k < report.n; ++k) {
        abs_sum += std::abs(predictions[k] - truths[k]);
        const int rounded =
            std::clamp(static_cast<int>(std::floor(predictions[k] + 0.5)), 1, scale_max);
        if (rounded != truths[k]) ++wrong;
    }
    report.mae = abs_sum / static_cast<double>(report.n);
    report.zero_one = static_cast<double>(wrong) / static_cast<double>(report.n);
    return report;
}

TestSets build_test_sets(const RatingTable& test) {
    TestSets sets;
    for (const Rating& r : test.ratings()) sets[r.user].emplace_back(r.item, r.value);
    return sets;
}

namespace {

double rank_discount(int rank, double alpha) {
    return std::pow(2.0, -static_cast<double>(rank - 1) / (alpha - 1.0));
}

}  // namespace

UtilityReport expected_utility(const std::vector<RankedList>& lists, const TestSets& tests,
                               double alpha) {
    UtilityReport report;
    report.alpha = alpha;
    double utility_sum = 0.0;
    double ideal_sum = 0.0;
    double hit_abs_err = 0.0;
    double hit_abs_err_raw = 0.0;
    for (const RankedList& list : lists) {
        auto it = tests.find(list.user);
        if (it == tests.end() || it->second.empty()) continue;
        const auto& test_items = it->second;
        report.covered_test_items += test_items.size();
        for (std::size_t k = 0; k < list.items.size(); ++k) {
            const RankedList::Entry& entry = list.items[k];
            const auto hit = std::find_if(test_items.begin(), test_items.end(),
                                          [&](const auto& t) { return t.first == entry.item; });
            if (hit == test_items.end()) continue;
            ++report.hits;
            utility_sum += rank_discount(static_cast<int>(k) + 1, alpha);
            hit_abs_err += std::abs(entry.predicted - hit->second);
            hit_abs_err_raw += std::abs(entry.raw - hit->second);
        }
        for (std::size_t j = 1; j <= test_items.size(); ++j) {
            ideal_sum += rank_discount(static_cast<int>(j), alpha);
        }
    }
    report.aggregate = ideal_sum > 0.0 ? 100.0 * utility_sum / ideal_sum : 0.0;
    const double hits = static_cast<double>(report.hits);
    report.mae_on_hits = report.hits > 0 ? hit_abs_err / hits : 0.0;
    report.mae_on_hits_raw = report.hits > 0 ? hit_abs_err_raw / hits : 0.0;
    report.recall = report.covered_test_items > 0
                        ? hits / static_cast<double>(report.covered_test_items)
                        : 0.0;
    return report;
}

std::vector<RecallPoint> recall_sweep(const std::vector<RankedList>& lists, const TestSets& tests,
                                      double alpha, std::span<const int> n_values) {
    std::vector<RecallPoint> points;
    points.reserve(n_values.size());
    std::vector<RankedList> truncated = lists;
    for (int n : n_values) {
        for (std::size_t k = 0; k < lists.size(); ++k) {
            const auto& full = lists[k].items;
            truncated[k].items.assign(full.begin(),
                                      full.begin() + std::min<std::size_t>(n, full.size()));
        }
        const UtilityReport report = expected_utility(truncated, tests, alpha);
        points.push_back({n, report.recall, report.aggregate, report.mae_on_hits});
    }
    return points;
}

const char* to_string(Method method) {
    switch (method) {
        case Method::UserBasedRaw: return "user-based";
        case Method::UserBasedRounded: return "user-based-rounded";
        case Method::ItemBasedRaw: return "item-based";
        case Method::ItemBasedRounded: return "item-based-rounded";
        case Method::PnContent: return "pn-content";
        case Method::PnCorrelation: return "pn-correlation";
        default: return "pn-hybrid";
    }
}

FeatureConfig feature_config_for(Method method) {
    FeatureConfig config;
    if (method == Method::PnContent) {
        config.identity = false;
        config.correlation = false;
    } else if (method == Method::PnCorrelation) {
        config.identity = false;
        config.content = false;
    }
    return config;
}

MetricReport evaluate_pn_ratings(const PnModel& model, const RatingTable& test) {
    std::vector<int> predictions;
    std::vector<int> truths;
    predictions.reserve(test.size());
    truths.reserve(test.size());
    for (const Rating& r : test.ratings()) {
        predictions.push_back(predict_rating(model, r.user, r.item).predicted);
        truths.push_back(r.value);
    }
    return rating_metrics(predictions, truths);
}

MetricReport evaluate_baseline_ratings(const RatingTable& train, const MeanStats& means,
                                       const SimilarityTable& sim, const RatingTable& test,
                                       Method method) {
    std::vector<double> raw;
    std::vector<int> rounded;
    std::vector<int> truths;
    raw.reserve(test.size());
    rounded.reserve(test.size());
    truths.reserve(test.size());
    const bool user_kind = method == Method::UserBasedRaw || method == Method::UserBasedRounded;
    for (const Rating& r : test.ratings()) {
        const BaselinePrediction p = user_kind
                                         ? user_based_predict(train, means, sim, r.user, r.item)
                                         : item_based_predict(train, means, sim, r.user, r.item);
        raw.push_back(p.raw);
        rounded.push_back(p.rounded);
        truths.push_back(r.value);
    }
    if (method == Method::UserBasedRaw || method == Method::ItemBasedRaw) {
        return rating_metrics_real(raw, truths, train.scale_max());
    }
    return rating_metrics(rounded, truths);
}

RatingTable subsample_ratings(const RatingTable& table, double fraction, std::uint64_t seed) {
    const std::size_t n = table.size();
    const std::size_t keep =
        std::min(n, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n))));
    std::vector<std::size_t> index(n);
    for (std::size_t k = 0; k < n; ++k) index[k] = k;
    if (keep < n) {
        std::mt19937_64 rng(seed);
        for (std::size_t k = 0; k < keep; ++k) {
            const std::size_t j = k + rng() % (n - k);
            std::swap(index[k], index[j]);
        }
        index.resize(keep);
        // Original order keeps downstream accumulation deterministic and
        // makes fraction 1 bit-identical to no subsampling.
        std::sort(index.begin(), index.end());
    }
    RatingTable out(table.scale_max());
    for (std::size_t k : index) {
        const Rating& r = table.ratings()[k];
        out.add(r.user, r.item, r.value);
    }
    return out;
}

std::vector<SweepRow> sparsity_sweep(const RatingTable& full_train, const AttributeCatalog& attrs,
                                     const RatingTable& test, std::span<const double> fractions,
                                     std::span<const Method> methods, const TrainConfig& config,
                                     int min_co_user, int min_co_item, std::uint64_t seed) {
    std::vector<SweepRow> rows;
    for (std::size_t f = 0; f < fractions.size(); ++f) {
        const double fraction = fractions[f];
        const RatingTable subset = subsample_ratings(full_train, fraction, seed + f);
        const MeanStats means = compute_means(subset);
        const CorrelationStats corr =
            compute_correlation_stats(subset, means, min_co_user, min_co_item);
        for (Method method : methods) {
            MetricReport report;
            switch (method) {
                case Method::UserBasedRaw:
                case Method::UserBasedRounded:
                    report = evaluate_baseline_ratings(subset, means, corr.user_sim, test, method);
                    break;
                case Method::ItemBasedRaw:
                case Method::ItemBasedRounded:
                    report = evaluate_baseline_ratings(subset, means, corr.item_sim, test, method);
                    break;
                default: {
                    const PreferenceGraph graph(subset, corr.selected);
                    auto [params, train_report] = train(graph, means, attrs, corr,
                                                        feature_config_for(method), config);
                    const PnModel model(subset, means, attrs, corr, params);
                    report = evaluate_pn_ratings(model, test);
                    (void)train_report;
                    break;
                }
            }
            rows.push_back({fraction, method, report.mae, report.zero_one});
        }
    }
    return rows;
}

}  // namespace prefnet
