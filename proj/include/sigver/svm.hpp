#ifndef SIGVER_SVM_HPP
#define SIGVER_SVM_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sigver/error.hpp"

namespace sigver {

using FeatureVec = std::vector<float>;

enum class KernelKind { Linear, Rbf };

struct SvmConfig {
    KernelKind kernel = KernelKind::Rbf;
    double C = 1.0;
    double gamma = 0.000244140625; // 2^-12
    double tolerance = 1e-3;
    long max_passes = 20'000'000; // SMO pair-update budget
};

// Per-user training set: genuine signatures vs random forgeries.
struct WdTrainSet {
    std::vector<FeatureVec> positives;
    std::vector<FeatureVec> negatives;
};

struct SvmModel {
    KernelKind kernel = KernelKind::Rbf;
    double gamma = 0.0;
    std::vector<std::vector<double>> support_vectors; // standardized space
    std::vector<double> coef;                         // alpha_i * y_i
    double bias = 0.0;
    std::vector<double> feature_scale; // per-dimension std of the training set
};

// Per-dimension population std over the whole training set; zero-variance
// dimensions get scale 1 so they pass through unchanged.
std::vector<double> standardize_fit(const WdTrainSet& train);

std::vector<double> standardize_apply(const FeatureVec& v, const std::vector<double>& scale);
std::vector<double> standardize_apply(const std::vector<double>& v,
                                      const std::vector<double>& scale);

// Class balancing as per-class C weighting: the positive class is upweighted
// by n_neg/n_pos, equivalent to duplicating the genuine samples.
std::pair<double, double> balance_classes(int n_pos, int n_neg, double C);

struct SmoDiagnostics {
    long iterations = 0;
    double kkt_gap = 0.0;           // final m - M
    double max_kkt_violation = 0.0; // over all training samples
    int support_count = 0;
};

// Maximal-violating-pair SMO on the soft-margin dual with per-sample C.
// X is standardized; y entries are +1/-1. Throws TrainingError if the
// pair-update budget is exhausted before the KKT gap reaches tolerance.
SvmModel smo_solve(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                   const std::vector<double>& c_bound, const SvmConfig& cfg,
                   SmoDiagnostics* diag = nullptr);

// SMO on an already-standardized WdTrainSet, with class balancing applied.
// The returned model's feature_scale is all-ones.
SvmModel smo_train(const WdTrainSet& train, const SvmConfig& cfg, SmoDiagnostics* diag = nullptr);

// Full WD training for raw features: fit standardization, balance classes,
// solve, and package the scale into the model.
SvmModel train_wd_classifier(const WdTrainSet& train, const SvmConfig& cfg,
                             SmoDiagnostics* diag = nullptr);

// Signed decision value for a feature already standardized with the model's
// scale; score >= 0 classifies genuine.
double decide(const SvmModel& model, const std::vector<double>& standardized);

// Convenience: applies the model's stored scale first.
double decide_raw(const SvmModel& model, const FeatureVec& raw);

// One grid-search problem: a dev user's training set plus held-out genuine
// and skilled-forgery features for error measurement.
struct WdProblem {
    WdTrainSet train;
    std::vector<FeatureVec> eval_genuine;
    std::vector<FeatureVec> eval_skilled;
};

struct GridSearchResult {
    double C = 0.0;
    double gamma = 0.0;
    double mean_error = 0.0;
};

// Minimizes the mean genuine-vs-skilled classification error across the dev
// problems; ties broken by smaller C, then smaller gamma.
GridSearchResult grid_search(const std::vector<WdProblem>& problems,
                             const std::vector<double>& c_grid,
                             const std::vector<double>& gamma_grid, KernelKind kernel,
                             const SvmConfig& base);

// C in {2^-2 .. 2^6} and gamma in {2^-16 .. 2^-4}, both stepping x4.
std::vector<double> default_c_grid();
std::vector<double> default_gamma_grid();

// "SGSV" container with the same framing conventions as the network format.
void save_svm_model(const std::string& path, const SvmModel& model, std::uint32_t user_id,
                    std::uint64_t config_digest);

struct LoadedSvmModel {
    SvmModel model;
    std::uint32_t user_id = 0;
    std::uint64_t config_digest = 0;
};

LoadedSvmModel load_svm_model(const std::string& path);

} // namespace sigver

#endif
