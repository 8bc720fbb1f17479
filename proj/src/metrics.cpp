#include "sigver/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace sigver {

FarFrr far_frr_at_threshold(const std::vector<double>& genuine,
                            const std::vector<double>& forgery, double t) {
    if (genuine.empty()) throw ReportError("genuine score list is empty");
    long rejected = 0;
    for (double s : genuine)
        if (s < t) rejected++;
    FarFrr out;
    out.frr = (double)rejected / (double)genuine.size();
    if (!forgery.empty()) {
        long accepted = 0;
        for (double s : forgery)
            if (s >= t) accepted++;
        out.far = (double)accepted / (double)forgery.size();
    }
    return out;
}

std::vector<RocPoint> roc_curve(const std::vector<double>& genuine,
                                const std::vector<double>& forgery) {
    if (genuine.empty() || forgery.empty())
        throw ReportError("roc curve needs nonempty genuine and forgery score lists");
    std::vector<double> thresholds;
    thresholds.reserve(genuine.size() + forgery.size() + 2);
    thresholds.insert(thresholds.end(), genuine.begin(), genuine.end());
    thresholds.insert(thresholds.end(), forgery.begin(), forgery.end());
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    thresholds.insert(thresholds.begin(), -std::numeric_limits<double>::infinity());
    thresholds.push_back(std::numeric_limits<double>::infinity());

    std::vector<RocPoint> curve;
    curve.reserve(thresholds.size());
    // Descending threshold gives FAR ascending and FRR descending.
    for (std::size_t k = thresholds.size(); k-- > 0;) {
        double t = thresholds[k];
        FarFrr e = far_frr_at_threshold(genuine, forgery, t);
        curve.push_back({*e.far, e.frr, t});
    }
    std::stable_sort(curve.begin(), curve.end(),
                     [](const RocPoint& a, const RocPoint& b) { return a.far < b.far; });
    return curve;
}

double eer(const std::vector<double>& genuine, const std::vector<double>& forgery) {
    std::vector<RocPoint> curve = roc_curve(genuine, forgery);
    // Along the curve FAR-FRR runs from -1 up to +1; find the sign change.
    for (std::size_t i = 0; i < curve.size(); i++) {
        double d = curve[i].far - curve[i].frr;
        if (d == 0.0) return curve[i].far;
        if (d > 0.0) {
            if (i == 0) return curve[i].far; // cannot happen with the -inf sentinel
            const RocPoint& a = curve[i - 1];
            const RocPoint& b = curve[i];
            double da = a.far - a.frr;
            double db = b.far - b.frr;
            double s = -da / (db - da);
            return a.far + s * (b.far - a.far);
        }
    }
    return curve.back().far;
}

double auc(const std::vector<double>& genuine, const std::vector<double>& forgery) {
    if (genuine.empty() || forgery.empty())
        throw ReportError("auc needs nonempty genuine and forgery score lists");
    std::vector<double> f = forgery;
    std::sort(f.begin(), f.end());
    long long wins2 = 0; // twice the win count plus ties
    for (double g : genuine) {
        auto lo = std::lower_bound(f.begin(), f.end(), g) - f.begin();
        auto hi = std::upper_bound(f.begin(), f.end(), g) - f.begin();
        wins2 += 2 * (long long)lo + (long long)(hi - lo);
    }
    return (double)wins2 / (2.0 * (double)genuine.size() * (double)forgery.size());
}

EvalReport aggregate(const std::vector<UserScores>& scores, const ReportSpec& spec) {
    if (scores.empty()) throw ReportError("no users to aggregate");
    if (!spec.expect_skilled)
        throw ReportError("report needs skilled forgeries for eer and auc");
    EvalReport rep;
    rep.global_threshold = spec.global_threshold;
    double sum_frr = 0.0, sum_rand = 0.0, sum_simple = 0.0, sum_skilled = 0.0;
    double sum_eer = 0.0, sum_auc = 0.0;
    for (const UserScores& u : scores) {
        if (u.genuine.empty())
            throw ReportError("user " + std::to_string(u.user_id) + " has no genuine scores");
        if (u.skilled.empty())
            throw ReportError("user " + std::to_string(u.user_id) + " has no skilled scores");
        if (spec.expect_random && u.random.empty())
            throw ReportError("user " + std::to_string(u.user_id) + " has no random scores");
        if (spec.expect_simple && u.simple.empty())
            throw ReportError("user " + std::to_string(u.user_id) + " has no simple scores");

        UserReport ur;
        ur.user_id = u.user_id;
        ur.frr = far_frr_at_threshold(u.genuine, {}, spec.global_threshold).frr;
        if (spec.expect_random)
            ur.far_random = *far_frr_at_threshold(u.genuine, u.random, spec.global_threshold).far;
        if (spec.expect_simple)
            ur.far_simple = *far_frr_at_threshold(u.genuine, u.simple, spec.global_threshold).far;
        ur.far_skilled = *far_frr_at_threshold(u.genuine, u.skilled, spec.global_threshold).far;
        ur.eer = eer(u.genuine, u.skilled);
        ur.auc = auc(u.genuine, u.skilled);

        sum_frr += ur.frr;
        if (ur.far_random) sum_rand += *ur.far_random;
        if (ur.far_simple) sum_simple += *ur.far_simple;
        sum_skilled += *ur.far_skilled;
        sum_eer += ur.eer;
        sum_auc += ur.auc;
        rep.users.push_back(ur);
    }
    double n = (double)scores.size();
    rep.mean_frr = sum_frr / n;
    rep.mean_far_skilled = sum_skilled / n;
    if (spec.expect_random) rep.mean_far_random = sum_rand / n;
    if (spec.expect_simple) rep.mean_far_simple = sum_simple / n;
    rep.mean_eer = sum_eer / n;
    rep.mean_auc = sum_auc / n;
    rep.aer_genuine_skilled = (rep.mean_frr + *rep.mean_far_skilled) / 2.0;
    if (spec.expect_random && spec.expect_simple) {
        rep.aer = (rep.mean_frr + *rep.mean_far_random + *rep.mean_far_simple +
                   *rep.mean_far_skilled) /
                  4.0;
    }
    return rep;
}

std::string format_percent2(double rate) {
    // Decimal half-up on the percent value: snap to micro-percent first so
    // values that are decimal in spirit (7.585) do not round by their binary
    // representation (7.58499...).
    long long micro = std::llround(rate * 100.0 * 1e6);
    long long hundredths = (micro + 5000) / 10000;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld.%02lld", hundredths / 100,
                  hundredths >= 0 ? hundredths % 100 : -(hundredths % 100));
    return buf;
}

std::string format_auc4(double value) {
    long long micro = std::llround(value * 1e6);
    long long tenk = (micro + 50) / 100;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld.%04lld", tenk / 10000,
                  tenk >= 0 ? tenk % 10000 : -(tenk % 10000));
    return buf;
}

namespace {

std::string full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string opt_full(const std::optional<double>& v) { return v ? full(*v) : std::string(); }

} // namespace

void write_report_csv(const std::string& path, const EvalReport& report,
                      const std::string& provenance) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot create report file: " + path);
    out << "user,frr,far_random,far_simple,far_skilled,eer,auc\n";
    for (const UserReport& u : report.users) {
        out << u.user_id << ',' << full(u.frr) << ',' << opt_full(u.far_random) << ','
            << opt_full(u.far_simple) << ',' << opt_full(u.far_skilled) << ',' << full(u.eer)
            << ',' << full(u.auc) << '\n';
    }
    out << "mean," << full(report.mean_frr) << ',' << opt_full(report.mean_far_random) << ','
        << opt_full(report.mean_far_simple) << ',' << opt_full(report.mean_far_skilled) << ','
        << full(report.mean_eer) << ',' << full(report.mean_auc) << '\n';
    if (report.aer) out << "aer," << full(*report.aer) << ",,,,,\n";
    if (report.aer_genuine_skilled)
        out << "aer_genuine_skilled," << full(*report.aer_genuine_skilled) << ",,,,,\n";
    out << "global_threshold," << full(report.global_threshold) << ",,,,,\n";
    if (!provenance.empty()) out << "config_digest," << provenance << ",,,,,\n";
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

std::string render_report_text(const EvalReport& report, const std::string& provenance) {
    std::string s;
    char line[256];
    std::snprintf(line, sizeof line, "users %zu, global threshold %s\n", report.users.size(),
                  full(report.global_threshold).c_str());
    s += line;
    s += "metric values are percentages except auc\n\n";
    s += "user        frr  far_rand  far_simp  far_skill    eer_gs     auc_gs\n";
    auto pct = [](const std::optional<double>& v) {
        return v ? format_percent2(*v) : std::string("-");
    };
    for (const UserReport& u : report.users) {
        std::snprintf(line, sizeof line, "%-8u %6s %9s %9s %10s %9s %10s\n", u.user_id,
                      format_percent2(u.frr).c_str(), pct(u.far_random).c_str(),
                      pct(u.far_simple).c_str(), pct(u.far_skilled).c_str(),
                      format_percent2(u.eer).c_str(), format_auc4(u.auc).c_str());
        s += line;
    }
    std::snprintf(line, sizeof line, "%-8s %6s %9s %9s %10s %9s %10s\n", "mean",
                  format_percent2(report.mean_frr).c_str(), pct(report.mean_far_random).c_str(),
                  pct(report.mean_far_simple).c_str(), pct(report.mean_far_skilled).c_str(),
                  format_percent2(report.mean_eer).c_str(),
                  format_auc4(report.mean_auc).c_str());
    s += line;
    s += '\n';
    if (report.aer) {
        std::snprintf(line, sizeof line, "aer %s\n", format_percent2(*report.aer).c_str());
        s += line;
    }
    if (report.aer_genuine_skilled) {
        std::snprintf(line, sizeof line, "aer_genuine+skilled %s\n",
                      format_percent2(*report.aer_genuine_skilled).c_str());
        s += line;
    }
    if (!provenance.empty()) {
        std::snprintf(line, sizeof line, "config_digest %s\n", provenance.c_str());
        s += line;
    }
    return s;
}

} // namespace sigver
