#include <doctest.h>

#include <filesystem>
#include <random>

#include "prefnet/features.hpp"
#include "prefnet/parameters.hpp"
#include "support/instance.hpp"

using namespace prefnet;

TEST_CASE("g: normalized deviation map") {
    CHECK(g(0, 5) == doctest::Approx(1.0));
    CHECK(g(4, 5) == doctest::Approx(0.0));
    CHECK(g(2, 5) == doctest::Approx(0.5));
    CHECK(g(1, 2) == doctest::Approx(0.0));
}

TEST_CASE("node features: direct substitution") {
    std::vector<std::uint8_t> a_u(kUserAttrDims, 0);
    std::vector<std::uint8_t> a_i(kItemAttrDims, 0);
    a_i[5] = 1;  // comedy
    a_i[8] = 1;  // drama

    // r=4, item mean 4, user mean 2: f_i = g(0) = 1, f_u = g(2) = 0.5.
    NodeFeatureValue f = node_features(4, 2.0, 4.0, a_u, a_i, 5);
    CHECK(f.item_specific == doctest::Approx(1.0));
    CHECK(f.user_specific == doctest::Approx(0.5));

    // r=3 at the user mean: content-item bits carry g(0)=1 exactly on the mask.
    f = node_features(3, 3.0, 3.0, a_u, a_i, 5);
    for (int d = 0; d < kItemAttrDims; ++d) {
        CHECK(f.content_item[d] == doctest::Approx(d == 5 || d == 8 ? 1.0 : 0.0));
    }

    // r=1 vs item mean 5: f_i = g(4) = 0, so content-user vanishes.
    std::vector<std::uint8_t> a_u2(kUserAttrDims, 1);
    f = node_features(1, 3.0, 5.0, a_u2, a_i, 5);
    CHECK(f.item_specific == doctest::Approx(0.0));
    for (double v : f.content_user) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("edge feature: deviation differences") {
    CHECK(edge_feature(4, 3.0, 5, 4.0, 5) == doctest::Approx(1.0));  // equal deviations
    CHECK(edge_feature(5, 1.0, 1, 1.0, 5) == doctest::Approx(0.0));  // gap of 4
    CHECK(edge_feature(3, 2.0, 3, 4.0, 5) == doctest::Approx(0.5));  // gap of 2
}

TEST_CASE("edge feature: symmetric in its endpoints") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const int S = 2 + static_cast<int>(rng() % 4);
        const int r1 = 1 + static_cast<int>(rng() % S);
        const int r2 = 1 + static_cast<int>(rng() % S);
        const double m1 = 1.0 + (rng() % 1000) / 1000.0 * (S - 1);
        const double m2 = 1.0 + (rng() % 1000) / 1000.0 * (S - 1);
        CHECK(edge_feature(r1, m1, r2, m2, S) == doctest::Approx(edge_feature(r2, m2, r1, m1, S)));
    }
}

TEST_CASE("feature values stay in [0,1] for in-range ratings") {
    std::mt19937_64 rng(88);
    for (int trial = 0; trial < 200; ++trial) {
        const int S = 2 + static_cast<int>(rng() % 4);
        const int r = 1 + static_cast<int>(rng() % S);
        const double user_mean = 1.0 + (rng() % 1000) / 1000.0 * (S - 1);
        const double item_mean = 1.0 + (rng() % 1000) / 1000.0 * (S - 1);
        auto a_u = testsupport::random_user_attrs(rng);
        auto a_i = testsupport::random_item_attrs(rng);
        const NodeFeatureValue f = node_features(r, user_mean, item_mean, a_u, a_i, S);
        CHECK(f.item_specific >= 0.0);
        CHECK(f.item_specific <= 1.0);
        CHECK(f.user_specific >= 0.0);
        CHECK(f.user_specific <= 1.0);
        for (double v : f.content_item) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        for (double v : f.content_user) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("parameters: layout, toggles and tied identity") {
    RatingTable table(5);
    table.add(1, 101, 3);
    table.add(2, 101, 4);
    table.add(2, 102, 5);
    SelectedPairs selected({pack_pair(0, 1)}, {pack_pair(0, 1)});

    ParameterVector full(table, selected, FeatureConfig{});
    CHECK(full.size() == 2u + 2u + kItemAttrDims + kUserAttrDims + 1u + 1u);

    FeatureConfig content_only;
    content_only.identity = false;
    content_only.correlation = false;
    ParameterVector content(table, selected, content_only);
    CHECK(content.size() == static_cast<std::size_t>(kItemAttrDims + kUserAttrDims));
    CHECK(content.item_identity_index(0) == -1);
    CHECK(content.item_identity(0) == 0.0);
    CHECK(content.user_pair_param_index(0) == -1);

    FeatureConfig tied;
    tied.tied_identity = true;
    ParameterVector t(table, selected, tied);
    CHECK(t.item_identity_index(0) == t.item_identity_index(1));
    CHECK(t.user_identity_index(0) == t.user_identity_index(1));

    // Block spans partition the vector.
    std::size_t covered = 0;
    for (const auto& span : full.block_spans()) covered += span.end - span.begin;
    CHECK(covered == full.size());
}

TEST_CASE("parameters: save/load round-trip preserves every weight") {
    std::mt19937_64 rng(4242);
    testsupport::InstanceSpec spec;
    spec.observed_nodes = 6;
    spec.max_users = 4;
    spec.max_items = 4;
    spec.randomize_features = true;
    for (int trial = 0; trial < 10; ++trial) {
        testsupport::Instance inst = testsupport::make_instance(rng, spec);
        const auto path = std::filesystem::temp_directory_path() /
                          ("prefnet_params_" + std::to_string(trial) + ".txt");
        inst.params.save(path, inst.table, inst.corr.selected);
        const ParameterVector loaded = ParameterVector::load(path, inst.table, inst.corr.selected);
        REQUIRE(loaded.size() == inst.params.size());
        const auto a = inst.params.weights();
        const auto b = loaded.weights();
        for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
    }
}
