#include "prefnet/parameters.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace prefnet {

ParameterVector::ParameterVector(const RatingTable& table, const SelectedPairs& selected,
                                 FeatureConfig config)
    : config_(config), item_count_(table.item_count()), user_count_(table.user_count()) {
    int next = 0;
    if (config.identity) {
        off_item_identity_ = next;
        next += config.tied_identity ? 1 : item_count_;
        off_user_identity_ = next;
        next += config.tied_identity ? 1 : user_count_;
    }
    if (config.content) {
        off_content_item_ = next;
        next += kItemAttrDims;
        off_content_user_ = next;
        next += kUserAttrDims;
    }
    if (config.correlation) {
        item_pair_count_ = selected.item_pair_count();
        user_pair_count_ = selected.user_pair_count();
        off_item_pair_ = next;
        next += static_cast<int>(item_pair_count_);
        off_user_pair_ = next;
        next += static_cast<int>(user_pair_count_);
    }
    w_.assign(next, 0.0);
}

int ParameterVector::item_identity_index(int item_idx) const {
    if (off_item_identity_ < 0 || item_idx < 0) return -1;
    return off_item_identity_ + (config_.tied_identity ? 0 : item_idx);
}

int ParameterVector::user_identity_index(int user_idx) const {
    if (off_user_identity_ < 0 || user_idx < 0) return -1;
    return off_user_identity_ + (config_.tied_identity ? 0 : user_idx);
}

int ParameterVector::content_item_index(int dim) const {
    return off_content_item_ < 0 ? -1 : off_content_item_ + dim;
}

int ParameterVector::content_user_index(int dim) const {
    return off_content_user_ < 0 ? -1 : off_content_user_ + dim;
}

int ParameterVector::item_pair_param_index(int pair_idx) const {
    if (off_item_pair_ < 0 || pair_idx < 0) return -1;
    return off_item_pair_ + pair_idx;
}

int ParameterVector::user_pair_param_index(int pair_idx) const {
    if (off_user_pair_ < 0 || pair_idx < 0) return -1;
    return off_user_pair_ + pair_idx;
}

ParamBlock ParameterVector::block_of(std::size_t index) const {
    const auto in = [&](int off, std::size_t count) {
        return off >= 0 && index >= static_cast<std::size_t>(off) &&
               index < static_cast<std::size_t>(off) + count;
    };
    const std::size_t id_items = config_.tied_identity ? 1 : item_count_;
    const std::size_t id_users = config_.tied_identity ? 1 : user_count_;
    if (in(off_item_identity_, id_items)) return ParamBlock::ItemIdentity;
    if (in(off_user_identity_, id_users)) return ParamBlock::UserIdentity;
    if (in(off_content_item_, kItemAttrDims)) return ParamBlock::ContentItemAttr;
    if (in(off_content_user_, kUserAttrDims)) return ParamBlock::ContentUserAttr;
    if (in(off_item_pair_, item_pair_count_)) return ParamBlock::ItemPair;
    return ParamBlock::UserPair;
}

std::vector<ParameterVector::BlockSpan> ParameterVector::block_spans() const {
    std::vector<BlockSpan> spans;
    const auto push = [&](ParamBlock block, int off, std::size_t count) {
        if (off >= 0 && count > 0) {
            spans.push_back({block, static_cast<std::size_t>(off),
                             static_cast<std::size_t>(off) + count});
        }
    };
    push(ParamBlock::ItemIdentity, off_item_identity_,
         config_.tied_identity ? 1 : static_cast<std::size_t>(item_count_));
    push(ParamBlock::UserIdentity, off_user_identity_,
         config_.tied_identity ? 1 : static_cast<std::size_t>(user_count_));
    push(ParamBlock::ContentItemAttr, off_content_item_, kItemAttrDims);
    push(ParamBlock::ContentUserAttr, off_content_user_, kUserAttrDims);
    push(ParamBlock::ItemPair, off_item_pair_, item_pair_count_);
    push(ParamBlock::UserPair, off_user_pair_, user_pair_count_);
    return spans;
}

bool ParameterVector::has_nonzero_weights() const {
    for (double v : w_)
        if (v != 0.0) return true;
    return false;
}

namespace {

void write_weight(std::ofstream& out, double w) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", w);
    out << buf;
}

}  // namespace

void ParameterVector::save(const std::filesystem::path& path, const RatingTable& table,
                           const SelectedPairs& selected) const {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path.string());
    out << "pnparams 1\n";
    out << "features identity=" << int(config_.identity) << " content=" << int(config_.content)
        << " correlation=" << int(config_.correlation) << " tied=" << int(config_.tied_identity)
        << "\n";
    if (config_.identity && config_.tied_identity) {
        out << "block item_identity_global 1\n0 ";
        write_weight(out, w_[off_item_identity_]);
        out << "\nblock user_identity_global 1\n0 ";
        write_weight(out, w_[off_user_identity_]);
        out << "\n";
    } else if (config_.identity) {
        out << "block item_identity " << item_count_ << "\n";
        for (int i = 0; i < item_count_; ++i) {
            out << table.item_id(i) << ' ';
            write_weight(out, w_[off_item_identity_ + i]);
            out << "\n";
        }
        out << "block user_identity " << user_count_ << "\n";
        for (int u = 0; u < user_count_; ++u) {
            out << table.user_id(u) << ' ';
            write_weight(out, w_[off_user_identity_ + u]);
            out << "\n";
        }
    }
    if (config_.content) {
        out << "block content_item_attr " << kItemAttrDims << "\n";
        for (int d = 0; d < kItemAttrDims; ++d) {
            out << d << ' ';
            write_weight(out, w_[off_content_item_ + d]);
            out << "\n";
        }
        out << "block content_user_attr " << kUserAttrDims << "\n";
        for (int d = 0; d < kUserAttrDims; ++d) {
            out << d << ' ';
            write_weight(out, w_[off_content_user_ + d]);
            out << "\n";
        }
    }
    if (config_.correlation) {
        out << "block item_pairs " << item_pair_count_ << "\n";
        for (std::size_t k = 0; k < item_pair_count_; ++k) {
            auto [a, b] = SelectedPairs::unpack(selected.item_keys()[k]);
            out << table.item_id(a) << ' ' << table.item_id(b) << ' ';
            write_weight(out, w_[off_item_pair_ + k]);
            out << "\n";
        }
        out << "block user_pairs " << user_pair_count_ << "\n";
        for (std::size_t k = 0; k < user_pair_count_; ++k) {
            auto [a, b] = SelectedPairs::unpack(selected.user_keys()[k]);
            out << table.user_id(a) << ' ' << table.user_id(b) << ' ';
            write_weight(out, w_[off_user_pair_ + k]);
            out << "\n";
        }
    }
    out << "end\n";
}

ParameterVector ParameterVector::load(const std::filesystem::path& path, const RatingTable& table,
                                      const SelectedPairs& selected) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "pnparams 1") {
        throw ParseError(path.string() + ": not a pnparams v1 file");
    }
    FeatureConfig config;
    {
        int identity = 1, content = 1, correlation = 1, tied = 0;
        if (!std::getline(in, line) ||
            std::sscanf(line.c_str(), "features identity=%d content=%d correlation=%d tied=%d",
                        &identity, &content, &correlation, &tied) != 4) {
            throw ParseError(path.string() + ": bad features line");
        }
        config.identity = identity != 0;
        config.content = content != 0;
        config.correlation = correlation != 0;
        config.tied_identity = tied != 0;
    }
    ParameterVector params(table, selected, config);

    auto fail = [&](const std::string& what) -> ParseError {
        return ParseError(path.string() + ": " + what);
    };
    while (std::getline(in, line)) {
        if (line == "end") return params;
        std::istringstream header(line);
        std::string tag, name;
        std::size_t count = 0;
        header >> tag >> name >> count;
        if (tag != "block") throw fail("expected block header, got '" + line + "'");
        for (std::size_t k = 0; k < count; ++k) {
            if (!std::getline(in, line)) throw fail("truncated block " + name);
            std::istringstream row(line);
            int index = -1;
            if (name == "item_identity_global" || name == "user_identity_global" ||
                name == "content_item_attr" || name == "content_user_attr") {
                int dim = 0;
                double w = 0;
                row >> dim >> w;
                if (name == "item_identity_global") {
                    index = params.item_identity_index(0);
                } else if (name == "user_identity_global") {
                    index = params.user_identity_index(0);
                } else if (name == "content_item_attr") {
                    index = params.content_item_index(dim);
                } else {
                    index = params.content_user_index(dim);
                }
                if (index < 0) throw fail("block " + name + " not present in this configuration");
                params.w_[index] = w;
            } else if (name == "item_identity" || name == "user_identity") {
                int id = 0;
                double w = 0;
                row >> id >> w;
                const int idx =
                    name == "item_identity" ? table.item_index(id) : table.user_index(id);
                if (idx < 0) throw fail("unknown id " + std::to_string(id) + " in " + name);
                index = name == "item_identity" ? params.item_identity_index(idx)
                                                : params.user_identity_index(idx);
                if (index < 0) throw fail("block " + name + " not present in this configuration");
                params.w_[index] = w;
            } else if (name == "item_pairs" || name == "user_pairs") {
                int a = 0, b = 0;
                double w = 0;
                row >> a >> b >> w;
                int pair_idx = -1;
                if (name == "item_pairs") {
                    pair_idx = selected.item_pair_index(table.item_index(a), table.item_index(b));
                    index = params.item_pair_param_index(pair_idx);
                } else {
                    pair_idx = selected.user_pair_index(table.user_index(a), table.user_index(b));
                    index = params.user_pair_param_index(pair_idx);
                }
                if (index < 0) {
                    throw fail("pair (" + std::to_string(a) + "," + std::to_string(b) + ") in " +
                               name + " is not selected for this table");
                }
                params.w_[index] = w;
            } else {
                throw fail("unknown block '" + name + "'");
            }
            if (row.fail()) throw fail("bad row in block " + name + ": '" + line + "'");
        }
    }
    throw fail("missing end marker");
}

}  // namespace prefnet
