#pragma once

#include <span>
#include <vector>

#include "prefnet/types.hpp"

namespace prefnet {

/// Deviation-normalizing map g(alpha) = 1 - alpha/(S-1); g(0) = 1 and
/// g(S-1) = 0 for in-range rating deviations.
inline double g(double alpha, int scale_max) {
    return 1.0 - alpha / static_cast<double>(scale_max - 1);
}

/// Which feature families the model carries. `tied_identity` collapses the
/// per-item/per-user identity weights into two shared scalars (ablation
/// switch).
struct FeatureConfig {
    bool identity = true;
    bool content = true;
    bool correlation = true;
    bool tied_identity = false;

    bool any() const { return identity || content || correlation; }
};

/// Node feature blocks for one (rating value, user, item) triple. Content
/// blocks are the attribute masks scaled by the matching deviation feature,
/// so every component sits in [0,1].
struct NodeFeatureValue {
    double item_specific = 0.0;            // g(|r - item mean|)
    double user_specific = 0.0;            // g(|r - user mean|)
    std::vector<double> content_item;      // a_i * user_specific
    std::vector<double> content_user;      // a_u * item_specific
};

NodeFeatureValue node_features(int r, double user_mean, double item_mean,
                               std::span<const std::uint8_t> user_attrs,
                               std::span<const std::uint8_t> item_attrs, int scale_max);

/// Correlation edge feature g(|d1 - d2|) over the two ratings' deviations.
/// Item-item edges centre on item means, user-user edges on user means.
inline double edge_feature(int r1, double mean1, int r2, double mean2, int scale_max) {
    const double d1 = r1 - mean1;
    const double d2 = r2 - mean2;
    return g(d1 >= d2 ? d1 - d2 : d2 - d1, scale_max);
}

}  // namespace prefnet
