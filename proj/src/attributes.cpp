#include "prefnet/attributes.hpp"

#include <algorithm>

namespace prefnet {

const std::array<std::string, kOccupations>& occupation_names() {
    static const std::array<std::string, kOccupations> names = {
        "administrator", "artist",    "doctor",    "educator",  "engineer", "entertainment",
        "executive",     "healthcare", "homemaker", "lawyer",   "librarian", "marketing",
        "none",          "other",     "programmer", "retired",  "salesman", "scientist",
        "student",       "technician", "writer"};
    return names;
}

const std::array<std::string, kItemAttrDims>& genre_names() {
    static const std::array<std::string, kItemAttrDims> names = {
        "unknown", "action",    "adventure", "animation", "children", "comedy",   "crime",
        "documentary", "drama", "fantasy",   "film-noir", "horror",   "musical",  "mystery",
        "romance", "sci-fi",    "thriller",  "war",       "western"};
    return names;
}

const std::array<std::string, kUserAttrDims>& user_attr_labels() {
    static const std::array<std::string, kUserAttrDims> labels = [] {
        std::array<std::string, kUserAttrDims> out;
        const char* ages[kAgeBuckets] = {"age:under18", "age:18-24", "age:25-34", "age:35-44",
                                         "age:45-49",   "age:50-55", "age:56+"};
        int k = 0;
        for (const char* a : ages) out[k++] = a;
        out[k++] = "sex:M";
        out[k++] = "sex:F";
        for (const auto& occ : occupation_names()) out[k++] = "occupation:" + occ;
        return out;
    }();
    return labels;
}

int age_bucket(int age) {
    if (age < 18) return 0;
    if (age <= 24) return 1;
    if (age <= 34) return 2;
    if (age <= 44) return 3;
    if (age <= 49) return 4;
    if (age <= 55) return 5;
    return 6;
}

std::vector<std::uint8_t> encode_user_attributes(int age, char sex, const std::string& occupation) {
    std::vector<std::uint8_t> vec(kUserAttrDims, 0);
    vec[age_bucket(age)] = 1;
    const char s = static_cast<char>(std::tolower(static_cast<unsigned char>(sex)));
    if (s != 'm' && s != 'f') {
        throw ValidationError(std::string("unknown sex code '") + sex + "'");
    }
    vec[kAgeBuckets + (s == 'm' ? 0 : 1)] = 1;
    const auto& names = occupation_names();
    auto it = std::find(names.begin(), names.end(), occupation);
    if (it == names.end()) {
        throw ValidationError("unknown occupation '" + occupation + "'");
    }
    vec[kAgeBuckets + kSexDims + static_cast<int>(it - names.begin())] = 1;
    return vec;
}

void AttributeCatalog::set_user(UserId u, std::vector<std::uint8_t> vec) {
    users_[u] = std::move(vec);
}

void AttributeCatalog::set_item(ItemId i, std::vector<std::uint8_t> vec) {
    items_[i] = std::move(vec);
}

std::span<const std::uint8_t> AttributeCatalog::user(UserId u) const {
    auto it = users_.find(u);
    if (it == users_.end()) return {};
    return it->second;
}

std::span<const std::uint8_t> AttributeCatalog::item(ItemId i) const {
    auto it = items_.find(i);
    if (it == items_.end()) return {};
    return it->second;
}

}  // namespace prefnet
