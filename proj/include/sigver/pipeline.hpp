#ifndef SIGVER_PIPELINE_HPP
#define SIGVER_PIPELINE_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "sigver/config.hpp"
#include "sigver/metrics.hpp"
#include "sigver/protocol.hpp"
#include "sigver/svm.hpp"
#include "sigver/training.hpp"

namespace sigver {

// On-disk layout under the configured work directory.
struct StagePaths {
    std::string manifest;
    std::string preprocessed;
    std::string network_model;
    std::string train_log;
    std::string checkpoints_dir;
    std::string features;
    std::string feature_index;
    std::string wd_dir;
    std::string wd_diagnostics;
    std::string gridsearch_result;
    std::string report_csv;
    std::string report_txt;

    std::string wd_model(std::uint32_t user_id) const;
};

StagePaths stage_paths(const RunConfig& cfg);

// Every stage consumes the previous stage's artifacts from disk, so the CLI
// subcommands and the end-to-end tests drive the exact same code.
void stage_preprocess(const RunConfig& cfg, std::ostream* console);
std::vector<EpochStats> stage_train_wi(const RunConfig& cfg, std::ostream* console);
void stage_extract(const RunConfig& cfg, std::ostream* console);
void stage_train_wd(const RunConfig& cfg, std::ostream* console);
GridSearchResult stage_gridsearch(const RunConfig& cfg, std::ostream* console);
EvalReport stage_evaluate(const RunConfig& cfg, std::ostream* console);

// The WD protocol selected by the config.
WdProtocol protocol_from_config(const RunConfig& cfg);

} // namespace sigver

#endif
