#pragma once

#include <array>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "prefnet/types.hpp"

namespace prefnet {

// MovieLens-100k vocabulary. 7 age buckets + 2 sexes + 21 occupations = 30
// user dimensions; 19 genre flags per item.
inline constexpr int kAgeBuckets = 7;
inline constexpr int kSexDims = 2;
inline constexpr int kOccupations = 21;
inline constexpr int kUserAttrDims = kAgeBuckets + kSexDims + kOccupations;
inline constexpr int kItemAttrDims = 19;

const std::array<std::string, kOccupations>& occupation_names();
const std::array<std::string, kItemAttrDims>& genre_names();
const std::array<std::string, kUserAttrDims>& user_attr_labels();

/// Age bucket index for buckets: under 18, 18-24, 25-34, 35-44, 45-49,
/// 50-55, 56+.
int age_bucket(int age);

/// Binary user attribute vector with exactly three bits set (age bucket,
/// sex, occupation). Throws ValidationError for an unknown occupation.
std::vector<std::uint8_t> encode_user_attributes(int age, char sex, const std::string& occupation);

/// Binary attribute vectors for every known user and item, plus dimension
/// labels. Entries are keyed by external id; users/items may appear here
/// without appearing in a rating table.
class AttributeCatalog {
public:
    void set_user(UserId u, std::vector<std::uint8_t> vec);
    void set_item(ItemId i, std::vector<std::uint8_t> vec);

    /// Attribute span of a user/item, or an empty span when unknown.
    std::span<const std::uint8_t> user(UserId u) const;
    std::span<const std::uint8_t> item(ItemId i) const;

    bool has_user(UserId u) const { return users_.count(u) > 0; }
    bool has_item(ItemId i) const { return items_.count(i) > 0; }

    std::size_t user_count() const { return users_.size(); }
    std::size_t item_count() const { return items_.size(); }

private:
    std::unordered_map<UserId, std::vector<std::uint8_t>> users_;
    std::unordered_map<ItemId, std::vector<std::uint8_t>> items_;
};

}  // namespace prefnet
