#ifndef SIGVER_CONFIG_HPP
#define SIGVER_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sigver/error.hpp"
#include "sigver/imageprep.hpp"
#include "sigver/svm.hpp"
#include "sigver/training.hpp"

namespace sigver {

// Flat key = value configuration, '#' starts a comment. Unknown keys are
// rejected so typos fail loudly.
struct RunConfig {
    std::string corpus_root;
    std::string work_dir = "work";
    std::uint64_t seed = 0;

    PrepConfig prep;
    std::string network_spec_path;
    int exploitation_users = 0;
    int wi_train_genuine = 14; // genuine per dev user fed to the cnn

    TrainConfig train;
    SvmConfig svm;
    std::vector<double> grid_c;     // empty = built-in default grid
    std::vector<double> grid_gamma;

    std::string wd_style = "gpds"; // or "brazilian"
    int wd_train_genuine = 14;
};

RunConfig load_run_config(const std::string& path);

// Same parser over an in-memory string (configs assembled by tests).
RunConfig parse_run_config(const std::string& text, const std::string& origin);

// Digest of the effective configuration (after any command-line overrides):
// fnv-1a over a canonical sorted key=value rendering.
std::uint64_t config_digest(const RunConfig& cfg);

std::string digest_hex(std::uint64_t digest);

} // namespace sigver

#endif
