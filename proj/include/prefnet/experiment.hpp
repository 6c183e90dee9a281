#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace prefnet {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes shared by the CLI and the in-process runner.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitDivergence = 3;

/// Resolved experiment settings: file-config values overridden by flags.
struct ExperimentConfig {
    std::string train_path;
    std::string test_path;
    std::string users_path;
    std::string items_path;
    int scale_max = 5;
    std::vector<std::string> features = {"identity", "content", "correlation"};
    bool tied_identity = false;
    double learning_rate = 0.001;
    double sigma = 1.0;
    int epochs = 3;
    double lr_decay = 1.0;
    double divergence_tolerance = 0.02;
    int topn = 20;
    int candidates = 500;
    int neighbors = 100;
    std::string ranking = "expected";  // or "maximal"
    std::string candidate_mode = "union";
    double alpha = 5.0;
    int min_co_user = 2;
    int min_co_item = 2;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::string checkpoint;    // defaults to <out>/params.txt
    std::string sim_cache;     // optional similarity cache file
    std::string predict_input; // optional (user,item) CSV for `predict`
    std::vector<double> sweep_fractions = {0.1, 0.25, 0.5, 1.0};
    std::vector<int> recall_n = {1, 2, 5, 10, 20, 50, 100};

    std::string resolved_checkpoint() const {
        return checkpoint.empty() ? out_dir + "/params.txt" : checkpoint;
    }
};

/// All validation failures for the command, empty when runnable.
std::vector<std::string> validate_config(const std::string& command,
                                         const ExperimentConfig& config);

/// Executes one of train | predict | recommend | evaluate | sweep, writing
/// artifacts under config.out_dir. Progress goes to `log`. Returns an exit
/// code.
int run_command(const std::string& command, const ExperimentConfig& config, std::ostream& log);

}  // namespace prefnet
