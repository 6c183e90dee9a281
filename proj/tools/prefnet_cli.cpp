#include <iostream>

#include <CLI11.hpp>

#include "prefnet/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"prefnet: preference-network recommender (conditional Markov random field over "
                 "ratings) with collaborative-filtering baselines"};
    app.set_config("--config", "", "Key-value config file; command-line flags win");

    prefnet::ExperimentConfig config;
    std::string features_csv = "identity,content,correlation";
    std::string fractions_csv;
    std::string recall_csv;

    app.add_option("--train", config.train_path, "Training ratings file (user<TAB>item<TAB>rating<TAB>ts)");
    app.add_option("--test", config.test_path, "Test ratings file");
    app.add_option("--users", config.users_path, "User attribute file (id|age|gender|occupation|zip)");
    app.add_option("--items", config.items_path, "Item attribute file with 19 trailing genre flags");
    app.add_option("--scale", config.scale_max, "Rating scale maximum S");
    app.add_option("--features", features_csv, "Comma list of identity,content,correlation");
    app.add_flag("--tied-identity", config.tied_identity, "Collapse identity weights to two globals");
    app.add_option("--lr", config.learning_rate, "Learning rate");
    app.add_option("--sigma", config.sigma, "Gaussian prior width");
    app.add_option("--epochs", config.epochs, "Training epochs");
    app.add_option("--lr-decay", config.lr_decay, "Per-epoch learning-rate multiplier");
    app.add_option("--topn", config.topn, "Recommendation list length N");
    app.add_option("--candidates", config.candidates, "Candidate pool size C");
    app.add_option("--neighbors", config.neighbors, "Correlated neighbors K consulted per side");
    app.add_option("--ranking", config.ranking, "Energy ranking: expected | maximal");
    app.add_option("--candidate-mode", config.candidate_mode, "Candidate source: user | item | union");
    app.add_option("--alpha", config.alpha, "Viewing halflife for expected utility");
    app.add_option("--min-co-user", config.min_co_user, "Min co-rated items per user pair");
    app.add_option("--min-co-item", config.min_co_item, "Min co-raters per item pair");
    app.add_option("--seed", config.seed, "Seed for user order and subsampling");
    app.add_option("--out", config.out_dir, "Output directory for artifacts");
    app.add_option("--checkpoint", config.checkpoint, "Checkpoint path (default <out>/params.txt)");
    app.add_option("--sim-cache", config.sim_cache, "Similarity cache file keyed by the training file");
    app.add_option("--input", config.predict_input, "CSV of user,item pairs for `predict`");
    app.add_option("--fractions", fractions_csv, "Comma list of training fractions for `sweep`");
    app.add_option("--recall-at", recall_csv, "Comma list of N values for recall sweeps");

    std::string command;
    for (const char* name : {"train", "predict", "recommend", "evaluate", "sweep"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->fallthrough();
        sub->callback([&command, name] { command = name; });
    }
    app.require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    const auto parse_csv = [](const std::string& csv) {
        std::vector<std::string> out;
        std::size_t start = 0;
        while (start <= csv.size()) {
            const std::size_t pos = csv.find(',', start);
            const std::string field = csv.substr(start, pos - start);
            if (!field.empty()) out.push_back(field);
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        return out;
    };
    config.features = parse_csv(features_csv);
    if (!fractions_csv.empty()) {
        config.sweep_fractions.clear();
        for (const auto& f : parse_csv(fractions_csv)) config.sweep_fractions.push_back(std::stod(f));
    }
    if (!recall_csv.empty()) {
        config.recall_n.clear();
        for (const auto& f : parse_csv(recall_csv)) config.recall_n.push_back(std::stoi(f));
    }

    return prefnet::run_command(command, config, std::cerr);
}
