#include "prefnet/features.hpp"

#include <cmath>

namespace prefnet {

NodeFeatureValue node_features(int r, double user_mean, double item_mean,
                               std::span<const std::uint8_t> user_attrs,
                               std::span<const std::uint8_t> item_attrs, int scale_max) {
    NodeFeatureValue f;
    f.item_specific = g(std::abs(r - item_mean), scale_max);
    f.user_specific = g(std::abs(r - user_mean), scale_max);
    f.content_item.assign(item_attrs.size(), 0.0);
    for (std::size_t d = 0; d < item_attrs.size(); ++d) {
        if (item_attrs[d]) f.content_item[d] = f.user_specific;
    }
    f.content_user.assign(user_attrs.size(), 0.0);
    for (std::size_t d = 0; d < user_attrs.size(); ++d) {
        if (user_attrs[d]) f.content_user[d] = f.item_specific;
    }
    return f;
}

}  // namespace prefnet
