#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "prefnet/attributes.hpp"
#include "prefnet/features.hpp"
#include "prefnet/rating_table.hpp"
#include "prefnet/similarity.hpp"

namespace prefnet {

enum class ParamBlock {
    ItemIdentity,
    UserIdentity,
    ContentItemAttr,
    ContentUserAttr,
    ItemPair,
    UserPair,
    Count
};

/// Per-block Gaussian prior widths. Scalar sigma unless overridden.
struct BlockSigmas {
    double values[static_cast<int>(ParamBlock::Count)];

    explicit BlockSigmas(double sigma = 1.0) {
        for (double& v : values) v = sigma;
    }
    double& operator[](ParamBlock b) { return values[static_cast<int>(b)]; }
    double operator[](ParamBlock b) const { return values[static_cast<int>(b)]; }
};

/// Blocked model weights in one flat array: per-item and per-user identity
/// weights, the two global content weight vectors, and one weight per
/// selected correlation pair. Disabled feature families have no slots at
/// all; their accessors return weight 0 / index -1.
class ParameterVector {
public:
    ParameterVector() = default;
    ParameterVector(const RatingTable& table, const SelectedPairs& selected, FeatureConfig config);

    const FeatureConfig& config() const { return config_; }
    std::size_t size() const { return w_.size(); }
    std::span<double> weights() { return w_; }
    std::span<const double> weights() const { return w_; }

    // Flat slot per feature; -1 when the family is disabled (or the id is
    // unknown to the training table).
    int item_identity_index(int item_idx) const;
    int user_identity_index(int user_idx) const;
    int content_item_index(int dim) const;
    int content_user_index(int dim) const;
    int item_pair_param_index(int pair_idx) const;
    int user_pair_param_index(int pair_idx) const;

    double at(int index) const { return index < 0 ? 0.0 : w_[index]; }

    double item_identity(int item_idx) const { return at(item_identity_index(item_idx)); }
    double user_identity(int user_idx) const { return at(user_identity_index(user_idx)); }
    double content_item(int dim) const { return at(content_item_index(dim)); }
    double content_user(int dim) const { return at(content_user_index(dim)); }
    double item_pair_weight(int pair_idx) const { return at(item_pair_param_index(pair_idx)); }
    double user_pair_weight(int pair_idx) const { return at(user_pair_param_index(pair_idx)); }

    ParamBlock block_of(std::size_t index) const;

    /// Contiguous [begin, end) ranges of the present blocks, in layout order.
    struct BlockSpan {
        ParamBlock block;
        std::size_t begin;
        std::size_t end;
    };
    std::vector<BlockSpan> block_spans() const;

    bool has_nonzero_weights() const;

    /// Versioned flat text checkpoint with named blocks, keyed by external
    /// ids. load() requires a table/selection identical to the one the file
    /// was written from.
    void save(const std::filesystem::path& path, const RatingTable& table,
              const SelectedPairs& selected) const;
    static ParameterVector load(const std::filesystem::path& path, const RatingTable& table,
                                const SelectedPairs& selected);

private:
    FeatureConfig config_;
    int item_count_ = 0;
    int user_count_ = 0;
    // Block offsets; -1 when absent.
    int off_item_identity_ = -1;
    int off_user_identity_ = -1;
    int off_content_item_ = -1;
    int off_content_user_ = -1;
    int off_item_pair_ = -1;
    int off_user_pair_ = -1;
    std::size_t item_pair_count_ = 0;
    std::size_t user_pair_count_ = 0;
    std::vector<double> w_;
};

}  // namespace prefnet
