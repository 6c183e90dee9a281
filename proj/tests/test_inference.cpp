#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "prefnet/inference.hpp"
#include "support/instance.hpp"

using namespace prefnet;
using testsupport::Instance;
using testsupport::InstanceSpec;
using testsupport::make_instance;

namespace {

PnModel model_of(const Instance& inst) {
    return PnModel(inst.table, inst.means, inst.attrs, inst.corr, inst.params);
}

RatingTable random_table(std::mt19937_64& rng, int users, int items, double density) {
    RatingTable table(5);
    for (int u = 1; u <= users; ++u) {
        for (int i = 1; i <= items; ++i) {
            if (rng() % 1000 < density * 1000) {
                table.add(u, 100 + i, 1 + static_cast<int>(rng() % 5));
            }
        }
    }
    return table;
}

}  // namespace

TEST_CASE("predict: zero parameters give lowest value with uniform confidence") {
    std::mt19937_64 rng(11);
    InstanceSpec spec;
    spec.scale_max = 5;
    spec.observed_nodes = 5;
    spec.target_nodes = 1;
    spec.randomize_features = false;
    spec.allow_unknown_target_ids = false;
    Instance inst = make_instance(rng, spec);
    for (double& w : inst.params.weights()) w = 0.0;
    const PnModel model = model_of(inst);
    const auto [u, i] = inst.targets[0];
    const Prediction p = predict_rating(model, u, i);
    CHECK(p.predicted == 1);
    CHECK(p.confidence == doctest::Approx(0.2));
}

TEST_CASE("predict: unknown user and item fall back to the rounded global mean") {
    std::mt19937_64 rng(12);
    InstanceSpec spec;
    spec.observed_nodes = 6;
    spec.scale_max = 5;
    spec.randomize_features = false;
    Instance inst = make_instance(rng, spec);
    const PnModel model = model_of(inst);
    const Prediction p = predict_rating(model, 98765, 43210);
    CHECK(p.fallback == FallbackLevel::GlobalMean);
    CHECK(p.predicted ==
          std::clamp(static_cast<int>(std::floor(inst.means.global_mean + 0.5)), 1, 5));
    CHECK(p.confidence == doctest::Approx(0.2));
}

TEST_CASE("predict: no active neighbors reports the content-only path") {
    RatingTable table(5);
    table.add(1, 101, 4);
    table.add(2, 102, 2);
    AttributeCatalog attrs;
    std::mt19937_64 rng(13);
    attrs.set_user(1, testsupport::random_user_attrs(rng));
    attrs.set_user(2, testsupport::random_user_attrs(rng));
    attrs.set_item(101, testsupport::random_item_attrs(rng));
    attrs.set_item(102, testsupport::random_item_attrs(rng));
    MeanStats means = compute_means(table);
    CorrelationStats corr;  // nothing selected
    ParameterVector params(table, corr.selected, FeatureConfig{});
    for (double& w : params.weights()) w = 0.25;
    PnModel model(table, means, attrs, corr, params);
    const Prediction p = predict_rating(model, 1, 102);
    CHECK(p.fallback == FallbackLevel::ContentOnly);
    CHECK(p.confidence > 0.0);
    CHECK(p.confidence < 1.0);
}

TEST_CASE("predict: matches brute-force conditional on toy graphs") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 200; ++trial) {
        InstanceSpec spec;
        spec.scale_max = 2 + static_cast<int>(rng() % 2);
        spec.observed_nodes = 2 + static_cast<int>(rng() % 3);
        spec.target_nodes = 1;
        Instance inst = make_instance(rng, spec);
        const PnModel model = model_of(inst);
        const auto [u, i] = inst.targets[0];
        const Prediction p = predict_rating(model, u, i);
        if (p.fallback == FallbackLevel::GlobalMean) {
            // Fully unknown node: contract is the rounded global mean, not
            // the (uniform) argmax.
            CHECK(p.predicted ==
                  std::clamp(static_cast<int>(std::floor(inst.means.global_mean + 0.5)), 1,
                             inst.table.scale_max()));
            continue;
        }
        const std::vector<double> expected = inst.mirror.local_conditional(inst.table.size());
        int best = 1;
        for (int r = 2; r <= inst.table.scale_max(); ++r) {
            if (expected[r - 1] > expected[best - 1]) best = r;
        }
        CHECK(p.predicted == best);
        CHECK(p.confidence == doctest::Approx(expected[best - 1]).epsilon(1e-10));
    }
}

TEST_CASE("joint: single target equals predict_rating") {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 50; ++trial) {
        InstanceSpec spec;
        spec.observed_nodes = 4;
        spec.target_nodes = 1;
        Instance inst = make_instance(rng, spec);
        const PnModel model = model_of(inst);
        const Prediction single =
            predict_rating(model, inst.targets[0].first, inst.targets[0].second);
        const JointPrediction joint = joint_predict(model, {inst.targets[0]});
        REQUIRE(joint.predictions.size() == 1);
        CHECK(joint.method == JointMethod::Exact);
        CHECK(joint.predictions[0].predicted == single.predicted);
        CHECK(joint.predictions[0].confidence == doctest::Approx(single.confidence));
    }
}

TEST_CASE("joint: exact enumeration matches the brute-force MAP") {
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 150; ++trial) {
        InstanceSpec spec;
        spec.scale_max = 3;
        spec.observed_nodes = 2 + static_cast<int>(rng() % 2);
        spec.target_nodes = 2 + static_cast<int>(rng() % 2);
        spec.max_users = 3;
        spec.max_items = 3;
        Instance inst = make_instance(rng, spec);
        const PnModel model = model_of(inst);
        const JointPrediction joint = joint_predict(model, inst.targets);
        REQUIRE(joint.method == JointMethod::Exact);

        std::vector<std::size_t> target_indexes;
        for (std::size_t t = 0; t < inst.targets.size(); ++t) {
            target_indexes.push_back(inst.table.size() + t);
        }
        const std::vector<int> expected = inst.mirror.joint_map(target_indexes);
        for (std::size_t t = 0; t < inst.targets.size(); ++t) {
            if (joint.predictions[t].fallback == FallbackLevel::GlobalMean) {
                // Featureless targets sit outside the MAP (isolated, flat
                // distribution); they take the global-mean fallback instead.
                CHECK(joint.predictions[t].predicted ==
                      std::clamp(static_cast<int>(std::floor(inst.means.global_mean + 0.5)), 1,
                                 inst.table.scale_max()));
            } else {
                CHECK(joint.predictions[t].predicted == expected[t]);
            }
        }
    }
}

TEST_CASE("joint: disconnected targets factorize into independent predictions") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        InstanceSpec spec;
        spec.observed_nodes = 5;
        spec.target_nodes = 3;
        spec.select_probability = 0.0;  // no correlation pairs at all
        Instance inst = make_instance(rng, spec);
        const PnModel model = model_of(inst);
        const JointPrediction joint = joint_predict(model, inst.targets);
        for (std::size_t t = 0; t < inst.targets.size(); ++t) {
            const Prediction single =
                predict_rating(model, inst.targets[t].first, inst.targets[t].second);
            CHECK(joint.predictions[t].predicted == single.predicted);
        }
    }
}

TEST_CASE("joint: ICM fixed point never beats the exact maximum") {
    // Force the ICM path by exceeding the enumeration budget (S=5, m=9 ->
    // 5^9 ~ 2e6) while the mirror can still enumerate the target block for
    // the exact score.
    std::mt19937_64 rng(18);
    int checked = 0;
    for (int trial = 0; trial < 40 && checked < 8; ++trial) {
        InstanceSpec spec;
        spec.scale_max = 5;
        spec.observed_nodes = 2;
        spec.target_nodes = 9;
        spec.max_users = 4;
        spec.max_items = 4;
        spec.allow_unknown_target_ids = false;
        Instance inst = make_instance(rng, spec);
        const PnModel model = model_of(inst);
        const JointPrediction icm = joint_predict(model, inst.targets);
        if (icm.method != JointMethod::Icm) continue;
        ++checked;

        std::vector<std::size_t> target_indexes;
        for (std::size_t t = 0; t < inst.targets.size(); ++t) {
            target_indexes.push_back(inst.table.size() + t);
        }
        const std::vector<int> exact = inst.mirror.joint_map(target_indexes);

        std::vector<int> assignment = inst.mirror.observed_assignment();
        for (std::size_t t = 0; t < target_indexes.size(); ++t) {
            assignment[target_indexes[t]] = icm.predictions[t].predicted;
        }
        const double icm_logpsi = inst.mirror.log_psi(assignment);
        for (std::size_t t = 0; t < target_indexes.size(); ++t) {
            assignment[target_indexes[t]] = exact[t];
        }
        const double exact_logpsi = inst.mirror.log_psi(assignment);
        CHECK(icm_logpsi <= exact_logpsi + 1e-9);
    }
    REQUIRE(checked > 0);
}

TEST_CASE("candidates: K=1 keeps only the single best correlated user's items") {
    RatingTable table(5);
    // v (user 2) agrees perfectly with u on two items; w (user 3) is
    // anti-correlated. v also rated item 104, w rated 105.
    table.add(1, 101, 5);
    table.add(1, 102, 1);
    table.add(1, 103, 3);
    table.add(2, 101, 5);
    table.add(2, 102, 1);
    table.add(2, 104, 4);
    table.add(3, 101, 1);
    table.add(3, 102, 2);
    table.add(3, 105, 5);
    AttributeCatalog attrs;
    MeanStats means = compute_means(table);
    CorrelationStats corr = compute_correlation_stats(table, means, 2, 2);
    ParameterVector params(table, corr.selected, FeatureConfig{});  // untrained: similarity mode
    PnModel model(table, means, attrs, corr, params);

    const auto cands = candidate_set(model, 1, 1, CandidateMode::UserBased);
    CHECK(cands == std::vector<ItemId>{104});
}

TEST_CASE("candidates: user who rated everything gets an empty set") {
    RatingTable table(5);
    table.add(1, 101, 5);
    table.add(1, 102, 3);
    table.add(2, 101, 4);
    table.add(2, 102, 2);
    AttributeCatalog attrs;
    MeanStats means = compute_means(table);
    CorrelationStats corr = compute_correlation_stats(table, means, 2, 2);
    ParameterVector params(table, corr.selected, FeatureConfig{});
    PnModel model(table, means, attrs, corr, params);
    CHECK(candidate_set(model, 1, -1, CandidateMode::Union).empty());
}

TEST_CASE("candidates: unknown user falls back to popular items") {
    RatingTable table(5);
    table.add(1, 101, 5);
    table.add(2, 101, 4);
    table.add(2, 102, 2);
    AttributeCatalog attrs;
    MeanStats means = compute_means(table);
    CorrelationStats corr = compute_correlation_stats(table, means, 2, 2);
    ParameterVector params(table, corr.selected, FeatureConfig{});
    PnModel model(table, means, attrs, corr, params);
    const auto cands = candidate_set(model, 999, 100, CandidateMode::UserBased);
    REQUIRE(cands.size() == 2);
    CHECK(cands[0] == 101);  // more raters
    CHECK(cands[1] == 102);
}

TEST_CASE("candidates: unlimited K makes user-based and item-based sets identical") {
    std::mt19937_64 rng(19);
    int nonempty = 0;
    for (int trial = 0; trial < 120; ++trial) {
        const RatingTable table = random_table(rng, 10, 10, 0.22);
        if (table.empty() || table.user_count() == 0) continue;
        const MeanStats means = compute_means(table);
        const CorrelationStats corr = compute_correlation_stats(table, means, 2, 2);
        AttributeCatalog attrs;
        const ParameterVector params(table, corr.selected, FeatureConfig{});
        const PnModel model(table, means, attrs, corr, params);
        const Recommender rec(model);
        for (int k = 0; k < table.user_count(); ++k) {
            const UserId u = table.user_id(k);
            const auto user_based = rec.candidate_set(u, -1, CandidateMode::UserBased);
            const auto item_based = rec.candidate_set(u, -1, CandidateMode::ItemBased);
            const auto both = rec.candidate_set(u, -1, CandidateMode::Union);
            CHECK(user_based == item_based);
            CHECK(user_based == both);
            if (!user_based.empty()) ++nonempty;
        }
    }
    REQUIRE(nonempty > 100);
}

TEST_CASE("topn: zero parameters fall to the deterministic tie-break") {
    std::mt19937_64 rng(20);
    InstanceSpec spec;
    spec.observed_nodes = 8;
    spec.max_users = 4;
    spec.max_items = 5;
    spec.randomize_features = false;
    Instance inst = make_instance(rng, spec);
    for (double& w : inst.params.weights()) w = 0.0;
    const PnModel model = model_of(inst);
    const UserId u = inst.table.user_id(0);
    TopNConfig config;
    config.n = 3;
    config.candidates = 10;
    config.neighbors = -1;
    const RankedRecommendation rec = recommend_top_n(model, u, config);
    for (const auto& e : rec.entries) CHECK(e.score == 0.0);
    // All scores and confidences tie: ordering is popularity desc then id.
    for (std::size_t k = 1; k < rec.entries.size(); ++k) {
        const int pa = inst.table.users_who_rated(inst.table.item_index(rec.entries[k - 1].item));
        const int pb = inst.table.users_who_rated(inst.table.item_index(rec.entries[k].item));
        CHECK(pa >= pb);
        if (pa == pb) CHECK(rec.entries[k - 1].item < rec.entries[k].item);
    }
}

TEST_CASE("topn: never recommends training items and respects N") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 40; ++trial) {
        InstanceSpec spec;
        spec.observed_nodes = 10;
        spec.max_users = 5;
        spec.max_items = 6;
        Instance inst = make_instance(rng, spec);
        const PnModel model = model_of(inst);
        const UserId u = inst.table.user_id(rng() % inst.table.user_count());
        TopNConfig config;
        config.n = 3;
        config.candidates = 6;
        config.neighbors = -1;
        config.ranking =
            trial % 2 == 0 ? RankingVariant::MaximalEnergy : RankingVariant::ExpectedEnergy;
        const RankedRecommendation rec = recommend_top_n(model, u, config);
        CHECK(rec.entries.size() <= 3);
        for (const auto& e : rec.entries) {
            CHECK_FALSE(inst.table.value(u, e.item).has_value());
        }
        for (std::size_t k = 1; k < rec.entries.size(); ++k) {
            CHECK(rec.entries[k - 1].score <= rec.entries[k].score + 1e-12);
        }
    }
}

TEST_CASE("topn: lowering a candidate's energy never worsens its rank") {
    std::mt19937_64 rng(22);
    int moved = 0;
    for (int trial = 0; trial < 60; ++trial) {
        InstanceSpec spec;
        spec.observed_nodes = 9;
        spec.max_users = 4;
        spec.max_items = 6;
        spec.randomize_features = false;
        Instance inst = make_instance(rng, spec);
        const UserId u = inst.table.user_id(rng() % inst.table.user_count());
        TopNConfig config;
        config.n = 6;
        config.candidates = 6;
        config.neighbors = -1;
        config.ranking =
            trial % 2 == 0 ? RankingVariant::MaximalEnergy : RankingVariant::ExpectedEnergy;

        const PnModel before = model_of(inst);
        const RankedRecommendation rec_before = recommend_top_n(before, u, config);
        if (rec_before.entries.empty()) continue;
        const ItemId target = rec_before.entries[rec_before.entries.size() / 2].item;
        const auto rank_of = [&](const RankedRecommendation& rec) {
            for (std::size_t k = 0; k < rec.entries.size(); ++k) {
                if (rec.entries[k].item == target) return static_cast<int>(k);
            }
            return static_cast<int>(rec.entries.size());
        };

        // Boost only the target item's identity weight: node features are
        // nonnegative, so its energy change can only drop.
        const int idx = inst.params.item_identity_index(inst.table.item_index(target));
        if (idx < 0) continue;
        inst.params.weights()[idx] += 3.0;
        const PnModel after = model_of(inst);
        const RankedRecommendation rec_after = recommend_top_n(after, u, config);
        CHECK(rank_of(rec_after) <= rank_of(rec_before));
        if (rank_of(rec_after) < rank_of(rec_before)) ++moved;
    }
    CHECK(moved > 0);
}

TEST_CASE("topn: concentrated conditional makes both rankings agree") {
    std::mt19937_64 rng(23);
    InstanceSpec spec;
    spec.observed_nodes = 6;
    spec.max_users = 3;
    spec.max_items = 4;
    spec.randomize_features = false;
    Instance inst = make_instance(rng, spec);
    for (double& w : inst.params.weights()) w = 0.0;
    // Huge identity weights concentrate every local conditional.
    for (int i = 0; i < inst.table.item_count(); ++i) {
        inst.params.weights()[inst.params.item_identity_index(i)] = 60.0;
    }
    const PnModel model = model_of(inst);
    const UserId u = inst.table.user_id(0);
    TopNConfig config;
    config.n = 4;
    config.candidates = 8;
    config.neighbors = -1;
    config.ranking = RankingVariant::MaximalEnergy;
    const RankedRecommendation maximal = recommend_top_n(model, u, config);
    config.ranking = RankingVariant::ExpectedEnergy;
    const RankedRecommendation expected = recommend_top_n(model, u, config);
    REQUIRE(maximal.entries.size() == expected.entries.size());
    for (std::size_t k = 0; k < maximal.entries.size(); ++k) {
        CHECK(maximal.entries[k].item == expected.entries[k].item);
        CHECK(maximal.entries[k].score ==
              doctest::Approx(expected.entries[k].score).epsilon(1e-6));
    }
}

TEST_CASE("topn: fewer candidates than N sets the truncation flag") {
    RatingTable table(5);
    table.add(1, 101, 5);
    table.add(2, 101, 4);
    table.add(2, 102, 2);
    AttributeCatalog attrs;
    MeanStats means = compute_means(table);
    CorrelationStats corr = compute_correlation_stats(table, means, 2, 2);
    ParameterVector params(table, corr.selected, FeatureConfig{});
    PnModel model(table, means, attrs, corr, params);
    TopNConfig config;
    config.n = 10;
    config.candidates = 10;
    config.neighbors = -1;
    const RankedRecommendation rec = recommend_top_n(model, 1, config);
    CHECK(rec.truncated);
    CHECK(rec.entries.size() == 1);  // only item 102 is unseen
}
