#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "sigver/config.hpp"
#include "sigver/gradcheck.hpp"
#include "sigver/pipeline.hpp"
#include "sigver/protocol.hpp"

namespace fs = std::filesystem;

namespace {

// Exit codes: 0 success, 1 validation/configuration error, 2 runtime or
// training error, 3 gradient check failure.
constexpr int kOk = 0;
constexpr int kValidationError = 1;
constexpr int kRuntimeError = 2;
constexpr int kCheckFailed = 3;

struct CommonOpts {
    std::string config_path;
    bool has_seed = false;
    std::uint64_t seed = 0;
};

sigver::RunConfig load_config(const CommonOpts& opts) {
    sigver::RunConfig cfg = sigver::load_run_config(opts.config_path);
    if (opts.has_seed) {
        cfg.seed = opts.seed;
        cfg.train.seed = opts.seed;
    }
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "run configuration file")->required();
    auto* seed = cmd->add_option("--seed", opts.seed, "override the config seed");
    cmd->callback([&opts, seed]() { opts.has_seed = seed->count() > 0; });
}

int classify_error(const std::exception& e) {
    if (dynamic_cast<const sigver::TrainingError*>(&e)) return kRuntimeError;
    if (dynamic_cast<const sigver::DegenerateImageError*>(&e)) return kRuntimeError;
    if (dynamic_cast<const sigver::Error*>(&e)) return kValidationError;
    return kRuntimeError;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"offline signature verification pipeline"};
    app.require_subcommand(1);

    // datagen
    auto* datagen = app.add_subcommand("datagen", "generate a synthetic signature corpus");
    std::string out_dir;
    sigver::SynthConfig synth;
    bool force = false;
    datagen->add_option("--out", out_dir, "corpus output directory")->required();
    datagen->add_option("--users", synth.n_users, "number of users")->required();
    datagen->add_option("--genuine", synth.n_genuine, "genuine signatures per user")->required();
    datagen->add_option("--skilled", synth.n_skilled, "skilled forgeries per user")->required();
    datagen->add_option("--simple", synth.n_simple, "simple forgeries per user");
    datagen->add_option("--height", synth.height, "image height in pixels");
    datagen->add_option("--width", synth.width, "image width in pixels");
    datagen->add_option("--seed", synth.seed, "corpus seed")->required();
    datagen->add_flag("--force", force, "overwrite an existing non-empty directory");

    CommonOpts preprocess_opts, train_wi_opts, extract_opts, train_wd_opts, gridsearch_opts,
        evaluate_opts;
    auto* preprocess = app.add_subcommand("preprocess", "normalize corpus images into tensors");
    add_common(preprocess, preprocess_opts);
    auto* train_wi = app.add_subcommand("train-wi", "train the writer-independent network");
    add_common(train_wi, train_wi_opts);
    auto* extract = app.add_subcommand("extract", "extract feature vectors for all signatures");
    add_common(extract, extract_opts);
    auto* train_wd = app.add_subcommand("train-wd", "train per-user svm classifiers");
    add_common(train_wd, train_wd_opts);
    auto* gridsearch =
        app.add_subcommand("gridsearch", "select svm hyperparameters on development users");
    add_common(gridsearch, gridsearch_opts);
    auto* evaluate = app.add_subcommand("evaluate", "score test sets and write the report");
    add_common(evaluate, evaluate_opts);

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference checks of all layers");
    int gc_seeds = 20;
    double gc_tolerance = 1e-4;
    std::uint64_t gc_seed = 1;
    gradcheck->add_option("--seeds", gc_seeds, "random configurations per layer");
    gradcheck->add_option("--tolerance", gc_tolerance, "max relative error allowed");
    gradcheck->add_option("--seed", gc_seed, "base seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (datagen->parsed()) {
            if (fs::exists(out_dir) && !fs::is_empty(out_dir) && !force) {
                std::cerr << "error: " << out_dir
                          << " exists and is not empty; pass --force to overwrite\n";
                return kValidationError;
            }
            sigver::Corpus corpus = sigver::generate_synthetic_corpus(out_dir, synth);
            std::size_t files = 0;
            for (const auto& u : corpus.users)
                files += u.genuine.size() + u.simple.size() + u.skilled.size();
            std::cout << "wrote " << files << " images for " << corpus.users.size()
                      << " users under " << out_dir << "\n";
            return kOk;
        }
        if (preprocess->parsed()) {
            sigver::stage_preprocess(load_config(preprocess_opts), &std::cout);
            return kOk;
        }
        if (train_wi->parsed()) {
            sigver::stage_train_wi(load_config(train_wi_opts), &std::cout);
            return kOk;
        }
        if (extract->parsed()) {
            sigver::stage_extract(load_config(extract_opts), &std::cout);
            return kOk;
        }
        if (train_wd->parsed()) {
            sigver::stage_train_wd(load_config(train_wd_opts), &std::cout);
            return kOk;
        }
        if (gridsearch->parsed()) {
            sigver::stage_gridsearch(load_config(gridsearch_opts), &std::cout);
            return kOk;
        }
        if (evaluate->parsed()) {
            sigver::stage_evaluate(load_config(evaluate_opts), &std::cout);
            return kOk;
        }
        if (gradcheck->parsed()) {
            sigver::GradCheckReport report =
                sigver::run_gradient_checks(gc_seeds, gc_tolerance, gc_seed);
            for (const auto& e : report.entries)
                std::printf("%-13s max rel err %.3e over %d seeds  %s\n", e.layer.c_str(),
                            e.max_rel_err, e.seeds,
                            e.max_rel_err < report.tolerance ? "ok" : "FAIL");
            return report.all_passed() ? kOk : kCheckFailed;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify_error(e);
    }
    return kValidationError;
}
