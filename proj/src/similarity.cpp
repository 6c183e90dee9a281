#include "prefnet/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace prefnet {
namespace {

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

struct PairAccum {
    std::int64_t stamp = -1;
    int n = 0;
    double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
};

// Accumulates co-event statistics for pairs (anchor, other) with other >
// anchor, reusing one flat buffer across anchors via stamping.
class Accumulator {
public:
    explicit Accumulator(int size) : slots_(size) {}

    void begin(std::int64_t stamp) {
        stamp_ = stamp;
        touched_.clear();
    }

    void add(int other, double x, double y) {
        PairAccum& a = slots_[other];
        if (a.stamp != stamp_) {
            a = {stamp_, 0, 0, 0, 0, 0, 0};
            touched_.push_back(other);
        }
        ++a.n;
        a.sx += x;
        a.sy += y;
        a.sxy += x * y;
        a.sxx += x * x;
        a.syy += y * y;
    }

    const std::vector<int>& touched() const { return touched_; }
    const PairAccum& slot(int other) const { return slots_[other]; }

private:
    std::vector<PairAccum> slots_;
    std::vector<int> touched_;
    std::int64_t stamp_ = -1;
};

// Pearson over the co-rated sample itself: deviations centre on means over
// the intersection, so one co-rating is always degenerate.
double finish_subset_pearson(const PairAccum& a) {
    const double n = a.n;
    const double cov = n * a.sxy - a.sx * a.sy;
    const double var_x = n * a.sxx - a.sx * a.sx;
    const double var_y = n * a.syy - a.sy * a.sy;
    if (var_x <= 0.0 || var_y <= 0.0) return 0.0;
    return clamp_unit(cov / (std::sqrt(var_x) * std::sqrt(var_y)));
}

// Inputs already centred (adjusted cosine).
double finish_centered(const PairAccum& a) {
    if (a.sxx <= 0.0 || a.syy <= 0.0) return 0.0;
    return clamp_unit(a.sxy / (std::sqrt(a.sxx) * std::sqrt(a.syy)));
}

}  // namespace

double pearson_user_similarity(const RatingTable& table, const MeanStats& means, UserId u,
                               UserId v) {
    (void)means;  // the co-rated sample provides its own centering
    const int ui = table.user_index(u);
    const int vi = table.user_index(v);
    if (ui < 0 || vi < 0) return 0.0;
    PairAccum acc;
    acc.stamp = 0;
    for (const auto& e : table.by_user(ui)) {
        const auto rv = table.value_by_index(vi, e.other);
        if (!rv) continue;
        ++acc.n;
        const double x = e.value;
        const double y = *rv;
        acc.sx += x;
        acc.sy += y;
        acc.sxy += x * y;
        acc.sxx += x * x;
        acc.syy += y * y;
    }
    return acc.n == 0 ? 0.0 : finish_subset_pearson(acc);
}

double adjusted_cosine_item_similarity(const RatingTable& table, const MeanStats& means, ItemId i,
                                       ItemId j) {
    const int ii = table.item_index(i);
    const int ji = table.item_index(j);
    if (ii < 0 || ji < 0) return 0.0;
    double sxy = 0, sxx = 0, syy = 0;
    for (const auto& e : table.by_item(ii)) {
        const auto rj = table.value_by_index(e.other, ji);
        if (!rj) continue;
        const double mu = means.user_mean[e.other];
        const double dx = e.value - mu;
        const double dy = *rj - mu;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return clamp_unit(sxy / (std::sqrt(sxx) * std::sqrt(syy)));
}

SimilarityTable::SimilarityTable(std::vector<std::pair<std::uint64_t, double>> pairs,
                                 int node_count) {
    std::sort(pairs.begin(), pairs.end());
    keys_.reserve(pairs.size());
    values_.reserve(pairs.size());
    std::vector<int> degree(node_count, 0);
    for (const auto& [key, value] : pairs) {
        keys_.push_back(key);
        values_.push_back(value);
        ++degree[static_cast<int>(key >> 32)];
        ++degree[static_cast<int>(key & 0xffffffffu)];
    }
    offsets_.assign(node_count + 1, 0);
    for (int a = 0; a < node_count; ++a) offsets_[a + 1] = offsets_[a] + degree[a];
    adjacency_.resize(keys_.size() * 2);
    std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t k = 0; k < keys_.size(); ++k) {
        const int a = static_cast<int>(keys_[k] >> 32);
        const int b = static_cast<int>(keys_[k] & 0xffffffffu);
        adjacency_[cursor[a]++] = {b, values_[k]};
        adjacency_[cursor[b]++] = {a, values_[k]};
    }
    for (int a = 0; a < node_count; ++a) {
        std::sort(adjacency_.begin() + offsets_[a], adjacency_.begin() + offsets_[a + 1],
                  [](const Neighbor& x, const Neighbor& y) {
                      if (x.value != y.value) return x.value > y.value;
                      return x.other < y.other;
                  });
    }
}

double SimilarityTable::lookup(int a, int b) const {
    const std::uint64_t key = pack_pair(a, b);
    auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
    if (it == keys_.end() || *it != key) return 0.0;
    return values_[it - keys_.begin()];
}

std::span<const SimilarityTable::Neighbor> SimilarityTable::neighbors(int a) const {
    if (a < 0 || a + 1 >= static_cast<int>(offsets_.size())) return {};
    return {adjacency_.data() + offsets_[a], adjacency_.data() + offsets_[a + 1]};
}

SelectedPairs::SelectedPairs(std::vector<std::uint64_t> user_keys,
                             std::vector<std::uint64_t> item_keys)
    : user_keys_(std::move(user_keys)), item_keys_(std::move(item_keys)) {
    std::sort(user_keys_.begin(), user_keys_.end());
    std::sort(item_keys_.begin(), item_keys_.end());
}

int SelectedPairs::find(const std::vector<std::uint64_t>& keys, std::uint64_t key) {
    auto it = std::lower_bound(keys.begin(), keys.end(), key);
    if (it == keys.end() || *it != key) return -1;
    return static_cast<int>(it - keys.begin());
}

CorrelationStats compute_correlation_stats(const RatingTable& table, const MeanStats& means,
                                           int min_co_user, int min_co_item) {
    CorrelationStats stats;
    stats.min_co_user = min_co_user;
    stats.min_co_item = min_co_item;

    std::vector<std::pair<std::uint64_t, double>> user_pairs;
    std::vector<std::uint64_t> selected_users;
    {
        Accumulator acc(table.user_count());
        for (int u = 0; u < table.user_count(); ++u) {
            acc.begin(u);
            for (const auto& e : table.by_user(u)) {
                for (const auto& f : table.by_item(e.other)) {
                    if (f.other <= u) continue;
                    acc.add(f.other, e.value, f.value);
                }
            }
            for (int v : acc.touched()) {
                const PairAccum& a = acc.slot(v);
                if (a.n < min_co_user) continue;
                const double sim = finish_subset_pearson(a);
                if (sim == 0.0) continue;
                const std::uint64_t key = pack_pair(u, v);
                user_pairs.emplace_back(key, sim);
                if (sim > 0.0) selected_users.push_back(key);
            }
        }
    }

    std::vector<std::pair<std::uint64_t, double>> item_pairs;
    std::vector<std::uint64_t> selected_items;
    {
        Accumulator acc(table.item_count());
        for (int i = 0; i < table.item_count(); ++i) {
            acc.begin(i);
            for (const auto& e : table.by_item(i)) {
                const double mu = means.user_mean[e.other];
                const double di = e.value - mu;
                for (const auto& f : table.by_user(e.other)) {
                    if (f.other <= i) continue;
                    acc.add(f.other, di, f.value - mu);
                }
            }
            for (int j : acc.touched()) {
                const PairAccum& a = acc.slot(j);
                if (a.n < min_co_item) continue;
                const double sim = finish_centered(a);
                if (sim == 0.0) continue;
                const std::uint64_t key = pack_pair(i, j);
                item_pairs.emplace_back(key, sim);
                if (sim > 0.0) selected_items.push_back(key);
            }
        }
    }

    stats.user_sim = SimilarityTable(std::move(user_pairs), table.user_count());
    stats.item_sim = SimilarityTable(std::move(item_pairs), table.item_count());
    stats.selected = SelectedPairs(std::move(selected_users), std::move(selected_items));
    return stats;
}

namespace {

constexpr std::uint32_t kCacheMagic = 0x504e5331;  // "PNS1"

void write_table(std::ofstream& out, const SimilarityTable& sim,
                 const std::vector<std::int32_t>& ids) {
    const std::uint64_t n = sim.pair_count();
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    for (std::size_t k = 0; k < n; ++k) {
        auto [a, b] = SelectedPairs::unpack(sim.keys()[k]);
        const std::int32_t ea = ids[a];
        const std::int32_t eb = ids[b];
        const double v = sim.values()[k];
        out.write(reinterpret_cast<const char*>(&ea), sizeof(ea));
        out.write(reinterpret_cast<const char*>(&eb), sizeof(eb));
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
}

}  // namespace

void save_correlation_cache(const CorrelationStats& stats, const RatingTable& table,
                            std::uint64_t table_hash, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(&kCacheMagic), sizeof(kCacheMagic));
    out.write(reinterpret_cast<const char*>(&table_hash), sizeof(table_hash));
    const std::int32_t mins[2] = {stats.min_co_user, stats.min_co_item};
    out.write(reinterpret_cast<const char*>(mins), sizeof(mins));
    std::vector<std::int32_t> user_ids(table.user_count());
    for (int u = 0; u < table.user_count(); ++u) user_ids[u] = table.user_id(u);
    std::vector<std::int32_t> item_ids(table.item_count());
    for (int i = 0; i < table.item_count(); ++i) item_ids[i] = table.item_id(i);
    write_table(out, stats.user_sim, user_ids);
    write_table(out, stats.item_sim, item_ids);
}

bool load_correlation_cache(CorrelationStats& stats, const RatingTable& table,
                            std::uint64_t table_hash, int min_co_user, int min_co_item,
                            const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::uint32_t magic = 0;
    std::uint64_t hash = 0;
    std::int32_t mins[2] = {0, 0};
    in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
    in.read(reinterpret_cast<char*>(&hash), sizeof(hash));
    in.read(reinterpret_cast<char*>(mins), sizeof(mins));
    if (!in || magic != kCacheMagic || hash != table_hash || mins[0] != min_co_user ||
        mins[1] != min_co_item) {
        return false;
    }

    auto read_table = [&](bool user_kind, SimilarityTable& out_sim,
                          std::vector<std::uint64_t>& selected) -> bool {
        std::uint64_t n = 0;
        in.read(reinterpret_cast<char*>(&n), sizeof(n));
        if (!in) return false;
        std::vector<std::pair<std::uint64_t, double>> pairs;
        pairs.reserve(n);
        for (std::uint64_t k = 0; k < n; ++k) {
            std::int32_t ea = 0, eb = 0;
            double v = 0;
            in.read(reinterpret_cast<char*>(&ea), sizeof(ea));
            in.read(reinterpret_cast<char*>(&eb), sizeof(eb));
            in.read(reinterpret_cast<char*>(&v), sizeof(v));
            if (!in) return false;
            const int a = user_kind ? table.user_index(ea) : table.item_index(ea);
            const int b = user_kind ? table.user_index(eb) : table.item_index(eb);
            if (a < 0 || b < 0) return false;  // cache built from a different table
            const std::uint64_t key = pack_pair(a, b);
            pairs.emplace_back(key, v);
            if (v > 0.0) selected.push_back(key);
        }
        out_sim = SimilarityTable(std::move(pairs),
                                  user_kind ? table.user_count() : table.item_count());
        return true;
    };

    std::vector<std::uint64_t> selected_users;
    std::vector<std::uint64_t> selected_items;
    if (!read_table(true, stats.user_sim, selected_users)) return false;
    if (!read_table(false, stats.item_sim, selected_items)) return false;
    stats.selected = SelectedPairs(std::move(selected_users), std::move(selected_items));
    stats.min_co_user = min_co_user;
    stats.min_co_item = min_co_item;
    return true;
}

}  // namespace prefnet
