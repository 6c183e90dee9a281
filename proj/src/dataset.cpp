#include "prefnet/dataset.hpp"

#include <charconv>
#include <fstream>
#include <vector>

namespace prefnet {
namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

int parse_int(std::string_view field, const std::filesystem::path& path, std::size_t line_no) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": expected integer, got '" + std::string(field) + "'");
    }
    return value;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    return in;
}

// Strips a trailing CR so files with Windows line endings parse cleanly.
void chomp(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

RatingTable load_ratings(const std::filesystem::path& path, int scale_max) {
    std::ifstream in = open_or_throw(path);
    RatingTable table(scale_max);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        chomp(line);
        if (line.empty()) continue;
        auto fields = split(line, '\t');
        if (fields.size() < 3) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected user<TAB>item<TAB>rating, got '" + line + "'");
        }
        const int user = parse_int(fields[0], path, line_no);
        const int item = parse_int(fields[1], path, line_no);
        const int value = parse_int(fields[2], path, line_no);
        try {
            table.add(user, item, value);
        } catch (const ValidationError& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.message);
        }
    }
    return table;
}

void load_user_attributes(const std::filesystem::path& path, AttributeCatalog& attrs) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        chomp(line);
        if (line.empty()) continue;
        auto fields = split(line, '|');
        if (fields.size() < 4) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected id|age|gender|occupation|zip");
        }
        const int id = parse_int(fields[0], path, line_no);
        const int age = parse_int(fields[1], path, line_no);
        if (fields[2].size() != 1) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": gender must be a single character");
        }
        try {
            attrs.set_user(id, encode_user_attributes(age, fields[2][0], std::string(fields[3])));
        } catch (const ValidationError& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.message);
        }
    }
}

void load_item_attributes(const std::filesystem::path& path, AttributeCatalog& attrs) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        chomp(line);
        if (line.empty()) continue;
        auto fields = split(line, '|');
        if (fields.size() < kItemAttrDims + 1) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected at least " + std::to_string(kItemAttrDims + 1) +
                             " pipe-separated fields");
        }
        const int id = parse_int(fields[0], path, line_no);
        std::vector<std::uint8_t> genres(kItemAttrDims, 0);
        for (int g = 0; g < kItemAttrDims; ++g) {
            const auto field = fields[fields.size() - kItemAttrDims + g];
            const int flag = parse_int(field, path, line_no);
            if (flag != 0 && flag != 1) {
                throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                      ": genre flag must be 0 or 1");
            }
            genres[g] = static_cast<std::uint8_t>(flag);
        }
        attrs.set_item(id, std::move(genres));
    }
}

Dataset load_dataset(const std::filesystem::path& ratings_path,
                     const std::filesystem::path& users_path,
                     const std::filesystem::path& items_path, int scale_max) {
    Dataset ds;
    ds.table = load_ratings(ratings_path, scale_max);
    load_user_attributes(users_path, ds.attrs);
    load_item_attributes(items_path, ds.attrs);
    for (const Rating& r : ds.table.ratings()) {
        if (!ds.attrs.has_user(r.user)) {
            throw ValidationError("user " + std::to_string(r.user) + " has ratings but no entry in " +
                                  users_path.string());
        }
        if (!ds.attrs.has_item(r.item)) {
            throw ValidationError("item " + std::to_string(r.item) + " has ratings but no entry in " +
                                  items_path.string());
        }
    }
    return ds;
}

void save_ratings(const RatingTable& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path.string());
    for (const Rating& r : table.ratings()) {
        out << r.user << '\t' << r.item << '\t' << r.value << '\t' << 0 << '\n';
    }
}

std::uint64_t file_content_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::uint64_t hash = 1469598103934665603ULL;
    char buffer[1 << 16];
    while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
        for (std::streamsize k = 0; k < in.gcount(); ++k) {
            hash ^= static_cast<unsigned char>(buffer[k]);
            hash *= 1099511628211ULL;
        }
    }
    return hash;
}

}  // namespace prefnet
