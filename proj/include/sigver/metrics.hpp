#ifndef SIGVER_METRICS_HPP
#define SIGVER_METRICS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sigver/error.hpp"

namespace sigver {

// Score orientation throughout: higher = more genuine, acceptance is
// score >= t. Scores come straight from the svm decision values.

struct UserScores {
    std::uint32_t user_id = 0;
    std::vector<double> genuine;
    std::vector<double> random;  // empty = not evaluated by the protocol
    std::vector<double> simple;
    std::vector<double> skilled;
};

struct FarFrr {
    double frr = 0.0;
    std::optional<double> far; // absent when the forgery list is empty
};

FarFrr far_frr_at_threshold(const std::vector<double>& genuine,
                            const std::vector<double>& forgery, double t);

struct RocPoint {
    double far = 0.0;
    double frr = 0.0;
    double threshold = 0.0;
};

// Sweeps every distinct score as a threshold plus -inf/+inf sentinels;
// points come back sorted by FAR ascending.
std::vector<RocPoint> roc_curve(const std::vector<double>& genuine,
                                const std::vector<double>& forgery);

// Equal error rate with linear interpolation between the bracketing ROC
// points; exact when some point has FAR == FRR.
double eer(const std::vector<double>& genuine, const std::vector<double>& forgery);

// Rank statistic: fraction of (genuine, forgery) pairs with genuine above
// forgery, ties counted half. Computed with integer pair counts.
double auc(const std::vector<double>& genuine, const std::vector<double>& forgery);

// Which score lists the protocol promises for every user.
struct ReportSpec {
    bool expect_random = false;
    bool expect_simple = false;
    bool expect_skilled = true;
    double global_threshold = 0.0;
};

struct UserReport {
    std::uint32_t user_id = 0;
    double frr = 0.0; // at the global threshold
    std::optional<double> far_random;
    std::optional<double> far_simple;
    std::optional<double> far_skilled;
    double eer = 0.0; // genuine vs skilled, user-specific threshold
    double auc = 0.0; // genuine vs skilled
};

struct EvalReport {
    std::vector<UserReport> users;
    double global_threshold = 0.0;
    double mean_frr = 0.0;
    std::optional<double> mean_far_random;
    std::optional<double> mean_far_simple;
    std::optional<double> mean_far_skilled;
    double mean_eer = 0.0;
    double mean_auc = 0.0;
    std::optional<double> aer;                  // needs all four error rates
    std::optional<double> aer_genuine_skilled;  // (FRR + FAR_skilled) / 2
};

// Per-user metrics plus aggregate means. EER and AUC are always genuine vs
// skilled. Throws ReportError when a user is missing scores the spec
// promises or when a genuine list is empty.
EvalReport aggregate(const std::vector<UserScores>& scores, const ReportSpec& spec);

// Decimal half-up formatting used by the text report: rates as percent with
// two decimals, AUC as a plain fraction with four.
std::string format_percent2(double rate);
std::string format_auc4(double value);

// One row per user plus labeled aggregate rows, full double precision.
// provenance, when nonempty, is recorded as a config_digest row.
void write_report_csv(const std::string& path, const EvalReport& report,
                      const std::string& provenance = "");

// Table-style summary with percent columns.
std::string render_report_text(const EvalReport& report, const std::string& provenance = "");

} // namespace sigver

#endif
