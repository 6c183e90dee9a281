#pragma once

#include <filesystem>
#include <string>

#include "prefnet/attributes.hpp"
#include "prefnet/rating_table.hpp"

namespace prefnet {

struct Dataset {
    RatingTable table;
    AttributeCatalog attrs;
};

/// Parses MovieLens-100k format ratings. Lines are
/// `user<TAB>item<TAB>rating<TAB>timestamp`; timestamps are discarded.
RatingTable load_ratings(const std::filesystem::path& path, int scale_max);

/// Parses `id|age|gender|occupation|zip` user lines into the catalog.
void load_user_attributes(const std::filesystem::path& path, AttributeCatalog& attrs);

/// Parses pipe-separated item lines whose trailing 19 fields are binary
/// genre flags. Titles and dates are ignored.
void load_item_attributes(const std::filesystem::path& path, AttributeCatalog& attrs);

/// Loads ratings plus both attribute files. Every rated user/item must have
/// an attribute vector.
Dataset load_dataset(const std::filesystem::path& ratings_path,
                     const std::filesystem::path& users_path,
                     const std::filesystem::path& items_path, int scale_max);

/// Writes a table back in the ratings file format (timestamp column 0).
void save_ratings(const RatingTable& table, const std::filesystem::path& path);

/// FNV-1a over a file's bytes; used to key derived caches to their source.
std::uint64_t file_content_hash(const std::filesystem::path& path);

}  // namespace prefnet
