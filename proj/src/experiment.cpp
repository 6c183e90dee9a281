#include "prefnet/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "prefnet/dataset.hpp"
#include "prefnet/evaluation.hpp"

namespace prefnet {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v, const char* fmt = "%.10g") {
    char buf[48];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

std::string canonical_config_dump(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "train=" << c.train_path << "\ntest=" << c.test_path << "\nusers=" << c.users_path
        << "\nitems=" << c.items_path << "\nscale=" << c.scale_max << "\nfeatures=";
    for (const auto& f : c.features) out << f << ',';
    out << "\ntied_identity=" << c.tied_identity << "\nlr=" << format_double(c.learning_rate)
        << "\nsigma=" << format_double(c.sigma) << "\nepochs=" << c.epochs
        << "\nlr_decay=" << format_double(c.lr_decay)
        << "\ndivergence_tolerance=" << format_double(c.divergence_tolerance)
        << "\ntopn=" << c.topn << "\ncandidates=" << c.candidates
        << "\nneighbors=" << c.neighbors << "\nranking=" << c.ranking
        << "\ncandidate_mode=" << c.candidate_mode << "\nalpha=" << format_double(c.alpha)
        << "\nmin_co_user=" << c.min_co_user << "\nmin_co_item=" << c.min_co_item
        << "\nseed=" << c.seed << "\nout=" << c.out_dir
        << "\ncheckpoint=" << c.resolved_checkpoint() << "\nsim_cache=" << c.sim_cache
        << "\npredict_input=" << c.predict_input << "\nfractions=";
    for (double f : c.sweep_fractions) out << format_double(f) << ',';
    out << "\nrecall_n=";
    for (int n : c.recall_n) out << n << ',';
    out << "\n";
    return out.str();
}

std::string config_hash_hex(const ExperimentConfig& c) {
    const std::string dump = canonical_config_dump(c);
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char ch : dump) {
        hash ^= ch;
        hash *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

FeatureConfig feature_config_from(const ExperimentConfig& c) {
    FeatureConfig config;
    config.identity = false;
    config.content = false;
    config.correlation = false;
    config.tied_identity = c.tied_identity;
    for (const auto& f : c.features) {
        if (f == "identity") config.identity = true;
        if (f == "content") config.content = true;
        if (f == "correlation") config.correlation = true;
    }
    return config;
}

struct LoadedData {
    Dataset train;
    RatingTable test;
    MeanStats means;
    CorrelationStats corr;
    std::uint64_t train_hash = 0;
    bool corr_from_cache = false;
};

LoadedData load_all(const ExperimentConfig& c, bool need_test, std::ostream& log) {
    LoadedData data;
    data.train = load_dataset(c.train_path, c.users_path, c.items_path, c.scale_max);
    log << "loaded " << data.train.table.size() << " training ratings ("
        << data.train.table.user_count() << " users, " << data.train.table.item_count()
        << " items)\n";
    if (need_test) {
        data.test = load_ratings(c.test_path, c.scale_max);
        log << "loaded " << data.test.size() << " test ratings\n";
    }
    data.means = compute_means(data.train.table);
    data.train_hash = file_content_hash(c.train_path);
    if (!c.sim_cache.empty() &&
        load_correlation_cache(data.corr, data.train.table, data.train_hash, c.min_co_user,
                               c.min_co_item, c.sim_cache)) {
        data.corr_from_cache = true;
        log << "similarity cache hit: " << c.sim_cache << "\n";
    } else {
        data.corr = compute_correlation_stats(data.train.table, data.means, c.min_co_user,
                                              c.min_co_item);
        if (!c.sim_cache.empty()) {
            save_correlation_cache(data.corr, data.train.table, data.train_hash, c.sim_cache);
            log << "similarity cache written: " << c.sim_cache << "\n";
        }
    }
    log << "correlation features: " << data.corr.selected.user_pair_count() << " user pairs, "
        << data.corr.selected.item_pair_count() << " item pairs\n";
    return data;
}

void write_manifest(const std::string& command, const ExperimentConfig& c, const LoadedData& data,
                    const json& extra) {
    json manifest;
    manifest["command"] = command;
    manifest["version"] = kVersion;
    manifest["formats"] = {{"params", 1}, {"sim_cache", 1}, {"reports", 1}};
    manifest["config_hash"] = config_hash_hex(c);
    manifest["seed"] = c.seed;
    manifest["split"] = {
        {"train", c.train_path},
        {"train_hash", data.train_hash},
        {"test", c.test_path},
    };
    manifest["selected_pairs"] = {{"user", data.corr.selected.user_pair_count()},
                                  {"item", data.corr.selected.item_pair_count()}};
    for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();
    std::ofstream out(fs::path(c.out_dir) / ("manifest_" + command + ".json"));
    out << manifest.dump(2) << "\n";
}

RankingVariant ranking_from(const std::string& name) {
    return name == "maximal" ? RankingVariant::MaximalEnergy : RankingVariant::ExpectedEnergy;
}

CandidateMode candidate_mode_from(const std::string& name) {
    if (name == "user") return CandidateMode::UserBased;
    if (name == "item") return CandidateMode::ItemBased;
    return CandidateMode::Union;
}

std::vector<UserId> sorted_test_users(const RatingTable& test) {
    std::set<UserId> users;
    for (const Rating& r : test.ratings()) users.insert(r.user);
    return {users.begin(), users.end()};
}

int run_train(const ExperimentConfig& c, std::ostream& log) {
    LoadedData data = load_all(c, false, log);
    const FeatureConfig features = feature_config_from(c);
    const PreferenceGraph graph(data.train.table, data.corr.selected);

    TrainConfig train_config;
    train_config.learning_rate = c.learning_rate;
    train_config.sigmas = BlockSigmas(c.sigma);
    train_config.epochs = c.epochs;
    train_config.user_order_seed = c.seed;
    train_config.lr_decay = c.lr_decay;
    train_config.divergence_tolerance = c.divergence_tolerance;

    auto [params, report] = train(graph, data.means, data.train.attrs, data.corr, features,
                                  train_config);
    for (int e = 0; e < report.epochs_run; ++e) {
        log << "epoch " << (e + 1) << ": objective " << report.epoch_objective[e]
            << ", grad norm " << report.epoch_grad_norm[e] << "\n";
    }
    log << "trained " << params.size() << " weights in " << report.wall_seconds << "s\n";

    params.save(c.resolved_checkpoint(), data.train.table, data.corr.selected);

    json train_report;
    train_report["epochs_run"] = report.epochs_run;
    train_report["converged"] = report.converged;
    train_report["objective"] = report.epoch_objective;
    train_report["grad_norm"] = report.epoch_grad_norm;
    std::ofstream rep(fs::path(c.out_dir) / "train_report.json");
    rep << train_report.dump(2) << "\n";

    json sidecar;
    sidecar["scale"] = c.scale_max;
    sidecar["train_hash"] = data.train_hash;
    sidecar["min_co_user"] = c.min_co_user;
    sidecar["min_co_item"] = c.min_co_item;
    sidecar["features"] = c.features;
    sidecar["tied_identity"] = c.tied_identity;
    sidecar["lr"] = c.learning_rate;
    sidecar["sigma"] = c.sigma;
    sidecar["epochs"] = c.epochs;
    sidecar["seed"] = c.seed;
    std::ofstream side(c.resolved_checkpoint() + ".meta.json");
    side << sidecar.dump(2) << "\n";

    write_manifest("train", c, data, {{"checkpoint", c.resolved_checkpoint()}});
    return kExitOk;
}

std::vector<std::pair<UserId, ItemId>> read_pair_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::vector<std::pair<UserId, ItemId>> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line == "user,item") continue;
        const char sep = line.find(',') != std::string::npos ? ',' : '\t';
        std::istringstream row(line);
        std::string a, b;
        if (!std::getline(row, a, sep) || !std::getline(row, b, sep)) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected user,item");
        }
        pairs.emplace_back(std::stoi(a), std::stoi(b));
    }
    return pairs;
}

int run_predict(const ExperimentConfig& c, std::ostream& log) {
    LoadedData data = load_all(c, c.predict_input.empty(), log);
    const ParameterVector params =
        ParameterVector::load(c.resolved_checkpoint(), data.train.table, data.corr.selected);
    const PnModel model(data.train.table, data.means, data.train.attrs, data.corr, params);

    std::vector<std::pair<UserId, ItemId>> pairs;
    if (!c.predict_input.empty()) {
        pairs = read_pair_csv(c.predict_input);
    } else {
        for (const Rating& r : data.test.ratings()) pairs.emplace_back(r.user, r.item);
    }

    std::ofstream out(fs::path(c.out_dir) / "predictions.csv");
    out << "# schema: predictions v1\n";
    out << "user,item,predicted,confidence,fallback\n";
    for (const auto& [u, i] : pairs) {
        const Prediction p = predict_rating(model, u, i);
        out << u << ',' << i << ',' << p.predicted << ',' << format_double(p.confidence) << ','
            << to_string(p.fallback) << "\n";
    }
    log << "wrote " << pairs.size() << " predictions\n";
    write_manifest("predict", c, data, {{"pairs", pairs.size()}});
    return kExitOk;
}

int run_recommend(const ExperimentConfig& c, std::ostream& log) {
    LoadedData data = load_all(c, true, log);
    const ParameterVector params =
        ParameterVector::load(c.resolved_checkpoint(), data.train.table, data.corr.selected);
    const PnModel model(data.train.table, data.means, data.train.attrs, data.corr, params);
    const Recommender recommender(model);

    TopNConfig topn;
    topn.n = c.topn;
    topn.candidates = c.candidates;
    topn.neighbors = c.neighbors;
    topn.mode = candidate_mode_from(c.candidate_mode);
    topn.ranking = ranking_from(c.ranking);

    const std::vector<UserId> users = sorted_test_users(data.test);
    std::ofstream out(fs::path(c.out_dir) / "recommendations.csv");
    out << "# schema: recommendations v1\n";
    out << "user,rank,item,score,predicted,confidence\n";
    for (UserId u : users) {
        const RankedRecommendation rec = recommender.recommend_top_n(u, topn);
        for (std::size_t k = 0; k < rec.entries.size(); ++k) {
            const RankedEntry& e = rec.entries[k];
            out << u << ',' << (k + 1) << ',' << e.item << ',' << format_double(e.score, "%.17g")
                << ',' << e.predicted << ',' << format_double(e.confidence) << "\n";
        }
    }
    log << "wrote recommendations for " << users.size() << " users\n";
    write_manifest("recommend", c, data, {{"users", users.size()}});
    return kExitOk;
}

int run_evaluate(const ExperimentConfig& c, std::ostream& log) {
    LoadedData data = load_all(c, true, log);
    const ParameterVector params =
        ParameterVector::load(c.resolved_checkpoint(), data.train.table, data.corr.selected);
    const PnModel model(data.train.table, data.means, data.train.attrs, data.corr, params);
    const RatingTable& train_table = data.train.table;
    const RatingTable& test = data.test;

    // Rating prediction: PN from the checkpoint plus the four baselines.
    json summary;
    {
        std::ofstream out(fs::path(c.out_dir) / "fig4_mae.csv");
        out << "# schema: fig4_mae v1\n";
        out << "method,mae,zero_one,n\n";
        const auto emit = [&](const std::string& name, const MetricReport& m) {
            out << name << ',' << format_double(m.mae) << ',' << format_double(m.zero_one) << ','
                << m.n << "\n";
            summary["rating_metrics"][name] = {{"mae", m.mae}, {"zero_one", m.zero_one}};
            log << "rating " << name << ": mae " << m.mae << ", 0/1 " << m.zero_one << "\n";
        };
        emit("pn", evaluate_pn_ratings(model, test));
        emit("user-based", evaluate_baseline_ratings(train_table, data.means, data.corr.user_sim,
                                                     test, Method::UserBasedRaw));
        emit("user-based-rounded",
             evaluate_baseline_ratings(train_table, data.means, data.corr.user_sim, test,
                                       Method::UserBasedRounded));
        emit("item-based", evaluate_baseline_ratings(train_table, data.means, data.corr.item_sim,
                                                     test, Method::ItemBasedRaw));
        emit("item-based-rounded",
             evaluate_baseline_ratings(train_table, data.means, data.corr.item_sim, test,
                                       Method::ItemBasedRounded));
    }

    // Top-N: PN under both rankings, user-based baseline, plus recall sweeps.
    {
        const TestSets tests = build_test_sets(test);
        const std::vector<UserId> users = sorted_test_users(test);
        const Recommender recommender(model);

        int max_n = c.topn;
        for (int n : c.recall_n) max_n = std::max(max_n, n);

        TopNConfig topn;
        topn.n = max_n;
        topn.candidates = c.candidates;
        topn.neighbors = c.neighbors;
        topn.mode = candidate_mode_from(c.candidate_mode);

        std::vector<RankedList> pn_maximal;
        std::vector<RankedList> pn_expected;
        pn_maximal.reserve(users.size());
        pn_expected.reserve(users.size());
        for (UserId u : users) {
            const auto scored = recommender.score_candidates(u, topn);
            const auto to_list = [&](const RankedRecommendation& rec) {
                RankedList list;
                list.user = u;
                list.items.reserve(rec.entries.size());
                for (const auto& e : rec.entries) {
                    list.items.push_back({e.item, e.predicted, static_cast<double>(e.predicted)});
                }
                return list;
            };
            pn_maximal.push_back(
                to_list(recommender.rank(u, scored, RankingVariant::MaximalEnergy, max_n)));
            pn_expected.push_back(
                to_list(recommender.rank(u, scored, RankingVariant::ExpectedEnergy, max_n)));
        }
        std::vector<RankedList> baseline;
        baseline.reserve(users.size());
        for (UserId u : users) {
            RankedList list;
            list.user = u;
            for (const TopNItem& t :
                 user_based_topn(train_table, data.means, data.corr.user_sim, u, max_n,
                                 c.neighbors)) {
                list.items.push_back({t.item, t.predicted, t.raw});
            }
            baseline.push_back(std::move(list));
        }

        const auto truncate = [](const std::vector<RankedList>& lists, int n) {
            std::vector<RankedList> out = lists;
            for (auto& list : out) {
                if (static_cast<int>(list.items.size()) > n) list.items.resize(n);
            }
            return out;
        };

        std::ofstream out(fs::path(c.out_dir) / "table1.csv");
        out << "# schema: table1 v1\n";
        out << "method,mae_on_hits,mae_on_hits_raw,expected_utility,recall,hits\n";
        const auto emit = [&](const std::string& name, const std::vector<RankedList>& lists) {
            const UtilityReport r = expected_utility(truncate(lists, c.topn), tests, c.alpha);
            out << name << ',' << format_double(r.mae_on_hits) << ','
                << format_double(r.mae_on_hits_raw) << ',' << format_double(r.aggregate) << ','
                << format_double(r.recall) << ',' << r.hits << "\n";
            summary["topn"][name] = {{"mae_on_hits", r.mae_on_hits},
                                     {"mae_on_hits_raw", r.mae_on_hits_raw},
                                     {"expected_utility", r.aggregate},
                                     {"recall", r.recall},
                                     {"hits", r.hits}};
            log << "top-" << c.topn << " " << name << ": mae-on-hits " << r.mae_on_hits
                << ", utility " << r.aggregate << "\n";
        };
        emit("user-based", baseline);
        emit("pn-maximal-energy", pn_maximal);
        emit("pn-expected-energy", pn_expected);

        std::ofstream fig6(fs::path(c.out_dir) / "fig6_utility_vs_recall.csv");
        fig6 << "# schema: fig6_utility_vs_recall v1\n";
        fig6 << "method,n,recall,utility\n";
        std::ofstream fig7(fs::path(c.out_dir) / "fig7_maehits_vs_recall.csv");
        fig7 << "# schema: fig7_maehits_vs_recall v1\n";
        fig7 << "method,n,recall,mae_on_hits\n";
        const auto sweep = [&](const std::string& name, const std::vector<RankedList>& lists) {
            for (const RecallPoint& p : recall_sweep(lists, tests, c.alpha, c.recall_n)) {
                fig6 << name << ',' << p.n << ',' << format_double(p.recall) << ','
                     << format_double(p.utility) << "\n";
                fig7 << name << ',' << p.n << ',' << format_double(p.recall) << ','
                     << format_double(p.mae_on_hits) << "\n";
                summary["recall_sweep"][name].push_back({{"n", p.n},
                                                         {"recall", p.recall},
                                                         {"utility", p.utility},
                                                         {"mae_on_hits", p.mae_on_hits}});
            }
        };
        sweep("user-based", baseline);
        sweep("pn-expected-energy", pn_expected);
    }

    std::ofstream sum(fs::path(c.out_dir) / "summary.json");
    sum << summary.dump(2) << "\n";
    write_manifest("evaluate", c, data, {{"checkpoint", c.resolved_checkpoint()}});
    return kExitOk;
}

int run_sweep(const ExperimentConfig& c, std::ostream& log) {
    LoadedData data = load_all(c, true, log);

    TrainConfig train_config;
    train_config.learning_rate = c.learning_rate;
    train_config.sigmas = BlockSigmas(c.sigma);
    train_config.epochs = c.epochs;
    train_config.user_order_seed = c.seed;
    train_config.lr_decay = c.lr_decay;
    train_config.divergence_tolerance = c.divergence_tolerance;

    const std::vector<Method> methods = {
        Method::UserBasedRaw, Method::UserBasedRounded, Method::ItemBasedRaw,
        Method::ItemBasedRounded, Method::PnContent, Method::PnCorrelation, Method::PnHybrid};
    const std::vector<SweepRow> rows =
        sparsity_sweep(data.train.table, data.train.attrs, data.test, c.sweep_fractions, methods,
                       train_config, c.min_co_user, c.min_co_item, c.seed);

    std::ofstream out(fs::path(c.out_dir) / "fig5_mae_vs_size.csv");
    out << "# schema: fig5_mae_vs_size v1\n";
    out << "fraction,method,mae,zero_one\n";
    for (const SweepRow& row : rows) {
        out << format_double(row.fraction) << ',' << to_string(row.method) << ','
            << format_double(row.mae) << ',' << format_double(row.zero_one) << "\n";
        log << "fraction " << row.fraction << " " << to_string(row.method) << ": mae " << row.mae
            << "\n";
    }
    write_manifest("sweep", c, data, {{"rows", rows.size()}});
    return kExitOk;
}

}  // namespace

std::vector<std::string> validate_config(const std::string& command,
                                         const ExperimentConfig& c) {
    std::vector<std::string> errors;
    const auto require_file = [&](const std::string& path, const std::string& flag) {
        if (path.empty()) {
            errors.push_back("missing required path: " + flag);
        } else if (!fs::exists(path)) {
            errors.push_back(flag + " does not exist: " + path);
        }
    };

    static const std::set<std::string> commands = {"train", "predict", "recommend", "evaluate",
                                                   "sweep"};
    if (!commands.count(command)) {
        errors.push_back("unknown command '" + command + "'");
        return errors;
    }

    require_file(c.train_path, "--train");
    require_file(c.users_path, "--users");
    require_file(c.items_path, "--items");
    const bool needs_test = command == "evaluate" || command == "sweep" ||
                            command == "recommend" ||
                            (command == "predict" && c.predict_input.empty());
    if (needs_test) require_file(c.test_path, "--test");
    if (!c.predict_input.empty()) require_file(c.predict_input, "--input");

    if (command != "train" && command != "sweep") {
        if (!fs::exists(c.resolved_checkpoint())) {
            errors.push_back("checkpoint not found: " + c.resolved_checkpoint() +
                             " (run `train` first or pass --checkpoint)");
        }
    }

    if (c.scale_max < 2) errors.push_back("--scale must be at least 2");
    if (c.learning_rate <= 0) errors.push_back("--lr must be positive");
    if (c.sigma <= 0) errors.push_back("--sigma must be positive");
    if (c.epochs < 1) errors.push_back("--epochs must be at least 1");
    if (c.lr_decay <= 0) errors.push_back("--lr-decay must be positive");
    if (c.topn < 1) errors.push_back("--topn must be at least 1");
    if (c.candidates < c.topn) errors.push_back("--candidates must be at least --topn");
    if (c.neighbors == 0) errors.push_back("--neighbors must be positive (or negative for all)");
    if (c.alpha <= 1) errors.push_back("--alpha must exceed 1");
    if (c.min_co_user < 1 || c.min_co_item < 1) {
        errors.push_back("minimum co-rating thresholds must be at least 1");
    }

    FeatureConfig features = feature_config_from(c);
    if (!features.any()) {
        errors.push_back("--features must enable at least one of identity, content, correlation");
    }
    for (const auto& f : c.features) {
        if (f != "identity" && f != "content" && f != "correlation") {
            errors.push_back("unknown feature toggle '" + f + "'");
        }
    }
    if (c.ranking != "expected" && c.ranking != "maximal") {
        errors.push_back("--ranking must be 'expected' or 'maximal'");
    }
    if (c.candidate_mode != "user" && c.candidate_mode != "item" && c.candidate_mode != "union") {
        errors.push_back("--candidate-mode must be 'user', 'item' or 'union'");
    }
    for (double f : c.sweep_fractions) {
        if (f <= 0.0 || f > 1.0) {
            errors.push_back("sweep fraction " + format_double(f) + " outside (0, 1]");
        }
    }
    for (int n : c.recall_n) {
        if (n < 1) errors.push_back("recall N values must be positive");
    }
    return errors;
}

int run_command(const std::string& command, const ExperimentConfig& config, std::ostream& log) {
    const std::vector<std::string> errors = validate_config(command, config);
    if (!errors.empty()) {
        for (const auto& e : errors) log << "config error: " << e << "\n";
        return kExitValidation;
    }
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) {
        log << "cannot create output directory " << config.out_dir << ": " << ec.message() << "\n";
        return kExitRuntime;
    }
    try {
        if (command == "train") return run_train(config, log);
        if (command == "predict") return run_predict(config, log);
        if (command == "recommend") return run_recommend(config, log);
        if (command == "evaluate") return run_evaluate(config, log);
        return run_sweep(config, log);
    } catch (const DivergenceError& e) {
        log << "training diverged: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace prefnet
