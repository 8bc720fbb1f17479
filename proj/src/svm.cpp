#include "sigver/svm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "sigver/binio.hpp"

namespace sigver {

std::vector<double> standardize_fit(const WdTrainSet& train) {
    if (train.positives.empty())
        throw ConfigError("wd training set has no genuine samples");
    if (train.negatives.empty())
        throw ConfigError("wd training set has no negative samples");
    const std::size_t dim = train.positives[0].size();
    auto check = [&](const FeatureVec& v) {
        if (v.size() != dim)
            throw ShapeError("feature dimension mismatch in wd training set");
    };
    std::size_t count = 0;
    std::vector<double> mean(dim, 0.0);
    for (const auto* group : {&train.positives, &train.negatives}) {
        for (const auto& v : *group) {
            check(v);
            for (std::size_t d = 0; d < dim; d++) mean[d] += v[d];
            count++;
        }
    }
    for (std::size_t d = 0; d < dim; d++) mean[d] /= (double)count;
    std::vector<double> var(dim, 0.0);
    for (const auto* group : {&train.positives, &train.negatives}) {
        for (const auto& v : *group) {
            for (std::size_t d = 0; d < dim; d++) {
                double diff = v[d] - mean[d];
                var[d] += diff * diff;
            }
        }
    }
    std::vector<double> scale(dim, 1.0);
    for (std::size_t d = 0; d < dim; d++) {
        double s = std::sqrt(var[d] / (double)count);
        if (s > 0.0) scale[d] = s;
    }
    return scale;
}

std::vector<double> standardize_apply(const FeatureVec& v, const std::vector<double>& scale) {
    if (v.size() != scale.size())
        throw ShapeError("feature dimension does not match standardization scale");
    std::vector<double> out(v.size());
    for (std::size_t d = 0; d < v.size(); d++) out[d] = (double)v[d] / scale[d];
    return out;
}

std::vector<double> standardize_apply(const std::vector<double>& v,
                                      const std::vector<double>& scale) {
    if (v.size() != scale.size())
        throw ShapeError("feature dimension does not match standardization scale");
    std::vector<double> out(v.size());
    for (std::size_t d = 0; d < v.size(); d++) out[d] = v[d] / scale[d];
    return out;
}

std::pair<double, double> balance_classes(int n_pos, int n_neg, double C) {
    if (n_pos < 1 || n_neg < 1) throw ConfigError("class balancing needs samples in both classes");
    if (C <= 0.0) throw ConfigError("svm C must be positive");
    return {C * (double)n_neg / (double)n_pos, C};
}

namespace {

double kernel_eval(KernelKind kind, double gamma, const std::vector<double>& a,
                   const std::vector<double>& b) {
    if (kind == KernelKind::Linear) {
        double s = 0.0;
        for (std::size_t d = 0; d < a.size(); d++) s += a[d] * b[d];
        return s;
    }
    double sq = 0.0;
    for (std::size_t d = 0; d < a.size(); d++) {
        double diff = a[d] - b[d];
        sq += diff * diff;
    }
    return std::exp(-gamma * sq);
}

// Caches kernel rows up to a fixed element budget; evicts in FIFO order.
class KernelCache {
  public:
    KernelCache(const std::vector<std::vector<double>>& X, KernelKind kind, double gamma)
        : x_(X), kind_(kind), gamma_(gamma), n_((int)X.size()) {
        std::size_t budget = 16u * 1024u * 1024u; // elements
        max_rows_ = (int)std::max<std::size_t>(2, budget / (std::size_t)n_);
        rows_.assign(n_, {});
        diag_.resize(n_);
        for (int i = 0; i < n_; i++) diag_[i] = kernel_eval(kind_, gamma_, x_[i], x_[i]);
    }

    const std::vector<double>& row(int i) {
        if (rows_[i].empty()) {
            if ((int)order_.size() >= max_rows_) {
                rows_[order_.front()].clear();
                rows_[order_.front()].shrink_to_fit();
                order_.erase(order_.begin());
            }
            rows_[i].resize(n_);
            for (int j = 0; j < n_; j++) rows_[i][j] = kernel_eval(kind_, gamma_, x_[i], x_[j]);
            order_.push_back(i);
        }
        return rows_[i];
    }

    double diag(int i) const { return diag_[i]; }

  private:
    const std::vector<std::vector<double>>& x_;
    KernelKind kind_;
    double gamma_;
    int n_;
    int max_rows_;
    std::vector<std::vector<double>> rows_;
    std::vector<int> order_;
    std::vector<double> diag_;
};

double kkt_violation(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                     const std::vector<double>& alpha, const std::vector<double>& c_bound,
                     const SvmModel& model) {
    double worst = 0.0;
    for (std::size_t i = 0; i < X.size(); i++) {
        double f = decide(model, X[i]);
        double yf = (double)y[i] * f;
        double eps = 1e-12 * (1.0 + c_bound[i]);
        double v;
        if (alpha[i] <= eps)
            v = std::max(0.0, 1.0 - yf);
        else if (alpha[i] >= c_bound[i] - eps)
            v = std::max(0.0, yf - 1.0);
        else
            v = std::fabs(yf - 1.0);
        worst = std::max(worst, v);
    }
    return worst;
}

} // namespace

SvmModel smo_solve(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                   const std::vector<double>& c_bound, const SvmConfig& cfg,
                   SmoDiagnostics* diag) {
    const int n = (int)X.size();
    if (n < 2) throw ConfigError("smo needs at least two samples");
    if ((int)y.size() != n || (int)c_bound.size() != n)
        throw ShapeError("smo label/bound arrays do not match sample count");
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; i++) {
        if (y[i] == 1)
            has_pos = true;
        else if (y[i] == -1)
            has_neg = true;
        else
            throw ConfigError("smo labels must be +1 or -1");
        if (c_bound[i] <= 0.0) throw ConfigError("smo per-sample C must be positive");
    }
    if (!has_pos || !has_neg) throw ConfigError("smo needs both classes present");
    if (cfg.tolerance <= 0.0) throw ConfigError("smo tolerance must be positive");

    KernelCache cache(X, cfg.kernel, cfg.gamma);
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0); // G_i = (Q alpha)_i - 1
    const double tau = 1e-12;

    long iter = 0;
    double gap = std::numeric_limits<double>::infinity();
    while (true) {
        // Maximal violating pair: i maximizes -y_i G_i over samples that can
        // grow along +y_i, j minimizes it over samples that can shrink.
        int sel_i = -1, sel_j = -1;
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        for (int t = 0; t < n; t++) {
            double v = -(double)y[t] * grad[t];
            bool in_up = (y[t] == 1) ? (alpha[t] < c_bound[t]) : (alpha[t] > 0.0);
            bool in_low = (y[t] == -1) ? (alpha[t] < c_bound[t]) : (alpha[t] > 0.0);
            if (in_up && v > m_up) {
                m_up = v;
                sel_i = t;
            }
            if (in_low && v < m_low) {
                m_low = v;
                sel_j = t;
            }
        }
        gap = m_up - m_low;
        if (gap <= cfg.tolerance) break;
        if (iter >= cfg.max_passes) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "smo failed to converge: %ld updates, kkt gap %.6g (tolerance %.6g), "
                          "%d samples",
                          iter, gap, cfg.tolerance, n);
            throw TrainingError(buf);
        }
        int i = sel_i, j = sel_j;
        const std::vector<double>& ki = cache.row(i);
        const std::vector<double>& kj = cache.row(j);

        double old_ai = alpha[i], old_aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = cache.diag(i) + cache.diag(j) - 2.0 * ki[j];
            if (quad <= 0.0) quad = tau;
            double delta = (-grad[i] - grad[j]) / quad;
            double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else {
                if (alpha[i] < 0.0) {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
            }
            if (diff > c_bound[i] - c_bound[j]) {
                if (alpha[i] > c_bound[i]) {
                    alpha[i] = c_bound[i];
                    alpha[j] = c_bound[i] - diff;
                }
            } else {
                if (alpha[j] > c_bound[j]) {
                    alpha[j] = c_bound[j];
                    alpha[i] = c_bound[j] + diff;
                }
            }
        } else {
            double quad = cache.diag(i) + cache.diag(j) - 2.0 * ki[j];
            if (quad <= 0.0) quad = tau;
            double delta = (grad[i] - grad[j]) / quad;
            double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c_bound[i]) {
                if (alpha[i] > c_bound[i]) {
                    alpha[i] = c_bound[i];
                    alpha[j] = sum - c_bound[i];
                }
            } else {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
            }
            if (sum > c_bound[j]) {
                if (alpha[j] > c_bound[j]) {
                    alpha[j] = c_bound[j];
                    alpha[i] = sum - c_bound[j];
                }
            } else {
                if (alpha[i] < 0.0) {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }

        double dai = alpha[i] - old_ai;
        double daj = alpha[j] - old_aj;
        if (dai != 0.0 || daj != 0.0) {
            double yi = (double)y[i], yj = (double)y[j];
            for (int t = 0; t < n; t++) {
                double yt = (double)y[t];
                grad[t] += yt * (yi * ki[t] * dai + yj * kj[t] * daj);
            }
        }
        iter++;
    }

    // Bias from the midpoint of the final violating-pair bounds.
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; t++) {
        double v = -(double)y[t] * grad[t];
        bool in_up = (y[t] == 1) ? (alpha[t] < c_bound[t]) : (alpha[t] > 0.0);
        bool in_low = (y[t] == -1) ? (alpha[t] < c_bound[t]) : (alpha[t] > 0.0);
        if (in_up) m_up = std::max(m_up, v);
        if (in_low) m_low = std::min(m_low, v);
    }
    double bias = (m_up + m_low) / 2.0;

    SvmModel model;
    model.kernel = cfg.kernel;
    model.gamma = cfg.gamma;
    model.bias = bias;
    model.feature_scale.assign(X[0].size(), 1.0);
    for (int i = 0; i < n; i++) {
        if (alpha[i] > 0.0) {
            model.support_vectors.push_back(X[i]);
            model.coef.push_back(alpha[i] * (double)y[i]);
        }
    }

    if (diag) {
        diag->iterations = iter;
        diag->kkt_gap = gap;
        diag->support_count = (int)model.support_vectors.size();
        diag->max_kkt_violation = kkt_violation(X, y, alpha, c_bound, model);
    }
    return model;
}

SvmModel smo_train(const WdTrainSet& train, const SvmConfig& cfg, SmoDiagnostics* diag) {
    if (train.positives.empty() || train.negatives.empty())
        throw ConfigError("wd training set needs samples in both classes");
    const int n_pos = (int)train.positives.size();
    const int n_neg = (int)train.negatives.size();
    auto [c_pos, c_neg] = balance_classes(n_pos, n_neg, cfg.C);

    std::vector<std::vector<double>> X;
    std::vector<int> y;
    std::vector<double> c_bound;
    X.reserve(n_pos + n_neg);
    for (const auto& v : train.positives) {
        X.emplace_back(v.begin(), v.end());
        y.push_back(1);
        c_bound.push_back(c_pos);
    }
    for (const auto& v : train.negatives) {
        X.emplace_back(v.begin(), v.end());
        y.push_back(-1);
        c_bound.push_back(c_neg);
    }
    return smo_solve(X, y, c_bound, cfg, diag);
}

SvmModel train_wd_classifier(const WdTrainSet& train, const SvmConfig& cfg,
                             SmoDiagnostics* diag) {
    std::vector<double> scale = standardize_fit(train);
    WdTrainSet std_set;
    std_set.positives.reserve(train.positives.size());
    std_set.negatives.reserve(train.negatives.size());
    for (const auto& v : train.positives) {
        std::vector<double> s = standardize_apply(v, scale);
        std_set.positives.emplace_back(s.begin(), s.end());
    }
    for (const auto& v : train.negatives) {
        std::vector<double> s = standardize_apply(v, scale);
        std_set.negatives.emplace_back(s.begin(), s.end());
    }
    SvmModel model = smo_train(std_set, cfg, diag);
    model.feature_scale = scale;
    return model;
}

double decide(const SvmModel& model, const std::vector<double>& standardized) {
    double s = model.bias;
    for (std::size_t i = 0; i < model.support_vectors.size(); i++) {
        if (model.support_vectors[i].size() != standardized.size())
            throw ShapeError("feature dimension does not match svm support vectors");
        s += model.coef[i] * kernel_eval(model.kernel, model.gamma, model.support_vectors[i],
                                         standardized);
    }
    return s;
}

double decide_raw(const SvmModel& model, const FeatureVec& raw) {
    return decide(model, standardize_apply(raw, model.feature_scale));
}

GridSearchResult grid_search(const std::vector<WdProblem>& problems,
                             const std::vector<double>& c_grid,
                             const std::vector<double>& gamma_grid, KernelKind kernel,
                             const SvmConfig& base) {
    if (problems.empty()) throw ConfigError("grid search needs at least one problem");
    if (c_grid.empty() || gamma_grid.empty()) throw ConfigError("grid search grids are empty");

    // Standardization does not depend on C or gamma, so fit once per problem.
    struct Prepared {
        WdTrainSet train; // standardized
        std::vector<std::vector<double>> eval_genuine;
        std::vector<std::vector<double>> eval_skilled;
    };
    std::vector<Prepared> prep;
    prep.reserve(problems.size());
    for (const auto& p : problems) {
        if (p.eval_genuine.empty() && p.eval_skilled.empty())
            throw ConfigError("grid search problem has no evaluation samples");
        Prepared q;
        std::vector<double> scale = standardize_fit(p.train);
        for (const auto& v : p.train.positives) {
            std::vector<double> s = standardize_apply(v, scale);
            q.train.positives.emplace_back(s.begin(), s.end());
        }
        for (const auto& v : p.train.negatives) {
            std::vector<double> s = standardize_apply(v, scale);
            q.train.negatives.emplace_back(s.begin(), s.end());
        }
        for (const auto& v : p.eval_genuine) q.eval_genuine.push_back(standardize_apply(v, scale));
        for (const auto& v : p.eval_skilled) q.eval_skilled.push_back(standardize_apply(v, scale));
        prep.push_back(std::move(q));
    }

    GridSearchResult best;
    bool first = true;
    for (double C : c_grid) {
        for (double gamma : gamma_grid) {
            SvmConfig cfg = base;
            cfg.kernel = kernel;
            cfg.C = C;
            cfg.gamma = gamma;
            double err_sum = 0.0;
            for (const auto& q : prep) {
                SvmModel model = smo_train(q.train, cfg);
                long wrong = 0, total = 0;
                for (const auto& v : q.eval_genuine) {
                    if (decide(model, v) < 0.0) wrong++;
                    total++;
                }
                for (const auto& v : q.eval_skilled) {
                    if (decide(model, v) >= 0.0) wrong++;
                    total++;
                }
                err_sum += (double)wrong / (double)total;
            }
            double mean_error = err_sum / (double)prep.size();
            bool better = first || mean_error < best.mean_error ||
                          (mean_error == best.mean_error &&
                           (C < best.C || (C == best.C && gamma < best.gamma)));
            if (better) {
                best.C = C;
                best.gamma = gamma;
                best.mean_error = mean_error;
                first = false;
            }
        }
    }
    return best;
}

std::vector<double> default_c_grid() {
    std::vector<double> g;
    for (double c = 0.25; c <= 64.0 * 1.0001; c *= 4.0) g.push_back(c);
    return g;
}

std::vector<double> default_gamma_grid() {
    std::vector<double> g;
    double lo = std::pow(2.0, -16);
    double hi = std::pow(2.0, -4);
    for (double v = lo; v <= hi * 1.0001; v *= 4.0) g.push_back(v);
    return g;
}

void save_svm_model(const std::string& path, const SvmModel& model, std::uint32_t user_id,
                    std::uint64_t config_digest) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot create svm model file: " + path);
    write_magic(out, "SGSV");
    write_u32(out, 1); // version
    write_u64(out, config_digest);
    write_u32(out, user_id);
    write_u32(out, model.kernel == KernelKind::Linear ? 0u : 1u);
    write_f64(out, model.gamma);
    write_f64(out, model.bias);
    write_u32(out, (std::uint32_t)model.feature_scale.size());
    write_u32(out, (std::uint32_t)model.support_vectors.size());
    for (double s : model.feature_scale) write_f64(out, s);
    for (double c : model.coef) write_f64(out, c);
    for (const auto& sv : model.support_vectors) {
        if (sv.size() != model.feature_scale.size())
            throw IoError("svm model support vector dimension mismatch");
        for (double v : sv) write_f64(out, v);
    }
    out.flush();
    if (!out)
        throw IoError("write failed: " + path);
}

LoadedSvmModel load_svm_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open svm model file: " + path +
                      " (has the train-wd stage been run?)");
    expect_magic(in, "SGSV", path);
    expect_version(in, 1, path);
    LoadedSvmModel out;
    out.config_digest = read_u64(in);
    out.user_id = read_u32(in);
    std::uint32_t kind = read_u32(in);
    if (kind > 1)
        throw IoError(path + ": unknown kernel tag " + std::to_string(kind));
    out.model.kernel = kind == 0 ? KernelKind::Linear : KernelKind::Rbf;
    out.model.gamma = read_f64(in);
    out.model.bias = read_f64(in);
    std::uint32_t dim = read_u32(in);
    std::uint32_t n_sv = read_u32(in);
    out.model.feature_scale.resize(dim);
    for (auto& s : out.model.feature_scale) s = read_f64(in);
    out.model.coef.resize(n_sv);
    for (auto& c : out.model.coef) c = read_f64(in);
    out.model.support_vectors.assign(n_sv, std::vector<double>(dim));
    for (auto& sv : out.model.support_vectors)
        for (auto& v : sv) v = read_f64(in);
    return out;
}

} // namespace sigver
