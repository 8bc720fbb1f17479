#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "oracles.hpp"
#include "sigver/rng.hpp"
#include "sigver/svm.hpp"

using namespace sigver;

namespace {

FeatureVec fv(std::initializer_list<float> v) { return FeatureVec(v); }

std::vector<double> dv(std::initializer_list<double> v) { return std::vector<double>(v); }

struct RandomProblem {
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    std::vector<double> c_bound;
    SvmConfig cfg;
};

RandomProblem make_problem(Rng& rng, bool force_kernel_mix, int index) {
    RandomProblem p;
    const int n = 2 + (int)rng.below(7);
    const int dim = 1 + (int)rng.below(4);
    p.X.resize((std::size_t)n);
    p.y.resize((std::size_t)n);
    // at least one of each class
    for (int i = 0; i < n; i++) {
        p.y[(std::size_t)i] = (i < 2) ? (i == 0 ? 1 : -1) : (rng.below(2) ? 1 : -1);
        p.X[(std::size_t)i].resize((std::size_t)dim);
        for (int d = 0; d < dim; d++) {
            const double center = p.y[(std::size_t)i] > 0 ? 0.6 : -0.6;
            p.X[(std::size_t)i][(std::size_t)d] = center + rng.uniform(-1.0, 1.0);
        }
    }
    const double C = rng.uniform(0.5, 4.0);
    p.c_bound.assign((std::size_t)n, C);
    p.cfg.kernel = (force_kernel_mix && index % 2 == 0) ? KernelKind::Linear : KernelKind::Rbf;
    p.cfg.gamma = rng.uniform(0.05, 1.0);
    p.cfg.C = C;
    p.cfg.tolerance = 1e-5; // solve tighter than the agreement threshold
    return p;
}

double oracle_decide(const RandomProblem& p, const oracles::QpOracle& q,
                     const std::vector<double>& x) {
    double s = q.bias;
    for (std::size_t i = 0; i < p.X.size(); i++)
        s += q.alpha[i] * p.y[i] *
             oracles::qp_kernel(p.cfg.kernel == KernelKind::Rbf, p.cfg.gamma, p.X[i], x);
    return s;
}

} // namespace

TEST_CASE("standardization scales by per-dimension population std") {
    WdTrainSet t;
    t.positives = {fv({0.0f, 0.0f, 5.0f}), fv({2.0f, 20.0f, 5.0f})};
    t.negatives = {fv({0.0f, 0.0f, 5.0f}), fv({2.0f, 20.0f, 5.0f})};
    std::vector<double> scale = standardize_fit(t);
    REQUIRE(scale.size() == 3);
    CHECK(scale[0] == doctest::Approx(1.0).epsilon(1e-12));  // std of {0,2,0,2}
    CHECK(scale[1] == doctest::Approx(10.0).epsilon(1e-12)); // std of {0,20,0,20}
    CHECK(scale[2] == doctest::Approx(1.0).epsilon(1e-12));  // constant dim passes through

    std::vector<double> z = standardize_apply(t.positives[1], scale);
    CHECK(z[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(z[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(z[2] == doctest::Approx(5.0).epsilon(1e-12));

    WdTrainSet missing;
    missing.positives = {fv({1.0f})};
    CHECK_THROWS_AS(standardize_fit(missing), ConfigError);

    WdTrainSet ragged;
    ragged.positives = {fv({1.0f, 2.0f})};
    ragged.negatives = {fv({1.0f})};
    CHECK_THROWS_AS(standardize_fit(ragged), ShapeError);

    CHECK_THROWS_AS(standardize_apply(t.positives[0], dv({1.0, 1.0})), ShapeError);
}

TEST_CASE("class balancing upweights the genuine class by the count ratio") {
    auto [cp0, cn0] = balance_classes(10, 10, 2.0);
    CHECK(cp0 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(cn0 == doctest::Approx(2.0).epsilon(1e-12));

    auto [cp1, cn1] = balance_classes(14, 10094, 1.0);
    CHECK(cp1 == doctest::Approx(721.0).epsilon(1e-12));
    CHECK(cn1 == doctest::Approx(1.0).epsilon(1e-12));

    auto [cp2, cn2] = balance_classes(30, 3240, 1.0);
    CHECK(cp2 == doctest::Approx(108.0).epsilon(1e-12));
    CHECK(cn2 == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(balance_classes(0, 5, 1.0), ConfigError);
    CHECK_THROWS_AS(balance_classes(5, 0, 1.0), ConfigError);
}

TEST_CASE("linear SMO on separated 1-d points recovers the midpoint boundary") {
    std::vector<std::vector<double>> X = {{1.0}, {-1.0}};
    std::vector<int> y = {1, -1};
    SvmConfig cfg;
    cfg.kernel = KernelKind::Linear;
    cfg.tolerance = 1e-6;
    std::vector<double> c = {100.0, 100.0};
    SmoDiagnostics diag;
    SvmModel m = smo_solve(X, y, c, cfg, &diag);
    CHECK(std::fabs(decide(m, dv({0.0}))) < 1e-6);
    CHECK(decide(m, dv({1.0})) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(decide(m, dv({-1.0})) == doctest::Approx(-1.0).epsilon(1e-4));
    CHECK(decide(m, dv({2.0})) > decide(m, dv({0.5})));
    CHECK(diag.support_count == 2);
    CHECK(diag.kkt_gap <= cfg.tolerance);

    // degenerate inputs
    CHECK_THROWS_AS(smo_solve({{1.0}}, {1}, {1.0}, cfg), ConfigError);
    CHECK_THROWS_AS(smo_solve(X, {1, 1}, c, cfg), ConfigError);
    CHECK_THROWS_AS(smo_solve(X, {1, 2}, c, cfg), ConfigError);
}

TEST_CASE("rbf decision of a hand-built model uses K(x,x) = 1") {
    SvmModel m;
    m.kernel = KernelKind::Rbf;
    m.gamma = 0.5;
    m.support_vectors = {dv({1.0, 2.0})};
    m.coef = {1.0};
    m.bias = 0.0;
    m.feature_scale = dv({1.0, 1.0});
    CHECK(decide(m, dv({1.0, 2.0})) == doctest::Approx(1.0).epsilon(1e-12));
    // distance 1 in standardized space
    CHECK(decide(m, dv({2.0, 2.0})) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("SMO agrees with a projected-gradient QP oracle") {
    Rng rng(derive_seed(61, "smo-oracle"));
    int checked_points = 0;
    for (int t = 0; t < 50; t++) {
        // Decision values are only unique when some support vector is free:
        // with every alpha at a bound, any bias between the kkt bounds is
        // optimal and two correct solvers may pick different ones. Redraw
        // until the oracle finds a free SV.
        RandomProblem p;
        oracles::QpOracle q;
        for (int attempt = 0;; attempt++) {
            p = make_problem(rng, true, t);
            q = oracles::qp_solve(p.X, p.y, p.c_bound, p.cfg.kernel == KernelKind::Rbf,
                                  p.cfg.gamma);
            bool free_sv = false;
            for (std::size_t i = 0; i < q.alpha.size(); i++)
                free_sv = free_sv || (q.alpha[i] > 1e-2 * p.c_bound[i] &&
                                      q.alpha[i] < (1.0 - 1e-2) * p.c_bound[i]);
            if (free_sv || attempt >= 40) break;
        }
        SvmModel m = smo_solve(p.X, p.y, p.c_bound, p.cfg);

        for (const auto& x : p.X) {
            const double ours = decide(m, x);
            const double ref = oracle_decide(p, q, x);
            INFO("problem " << t << " n=" << p.X.size());
            CHECK(std::fabs(ours - ref) <= 1e-3);
            checked_points++;
        }
        for (int k = 0; k < 4; k++) {
            std::vector<double> x(p.X[0].size());
            for (auto& v : x) v = rng.uniform(-2.0, 2.0);
            CHECK(std::fabs(decide(m, x) - oracle_decide(p, q, x)) <= 1e-3);
            checked_points++;
        }
    }
    CHECK(checked_points > 200);
}

TEST_CASE("per-class C weighting matches explicit sample duplication") {
    Rng rng(derive_seed(62, "dup-equiv"));
    for (int t = 0; t < 20; t++) {
        const int n_pos = 1 + (int)rng.below(3);
        const int k = 2 + (int)rng.below(4); // duplication factor
        const int n_neg = n_pos * k;
        const int dim = 1 + (int)rng.below(3);
        WdTrainSet train;
        for (int i = 0; i < n_pos; i++) {
            FeatureVec v((std::size_t)dim);
            for (auto& x : v) x = (float)(0.7 + rng.uniform(-0.8, 0.8));
            train.positives.push_back(v);
        }
        for (int i = 0; i < n_neg; i++) {
            FeatureVec v((std::size_t)dim);
            for (auto& x : v) x = (float)(-0.7 + rng.uniform(-0.8, 0.8));
            train.negatives.push_back(v);
        }

        SvmConfig cfg;
        cfg.kernel = (t % 2 == 0) ? KernelKind::Linear : KernelKind::Rbf;
        cfg.gamma = 0.3;
        cfg.C = 1.5;
        cfg.tolerance = 1e-7;

        // weighted: balance_classes gives C_pos = C * n_neg/n_pos = C * k
        SvmModel weighted = smo_train(train, cfg);

        // duplicated: each positive k times, all samples at plain C, in the
        // same raw space smo_train consumes
        std::vector<std::vector<double>> X;
        std::vector<int> y;
        for (const auto& v : train.positives)
            for (int r = 0; r < k; r++) {
                X.emplace_back(v.begin(), v.end());
                y.push_back(1);
            }
        for (const auto& v : train.negatives) {
            X.emplace_back(v.begin(), v.end());
            y.push_back(-1);
        }
        std::vector<double> c(X.size(), cfg.C);
        SvmModel dup = smo_solve(X, y, c, cfg);

        for (int q = 0; q < 6; q++) {
            std::vector<double> x((std::size_t)dim);
            for (auto& v : x) v = rng.uniform(-2.0, 2.0);
            INFO("problem " << t << " query " << q);
            CHECK(std::fabs(decide(weighted, x) - decide(dup, x)) <= 1e-3);
        }
    }
}

TEST_CASE("decision function is invariant to support-vector order") {
    Rng rng(63);
    RandomProblem p = make_problem(rng, false, 1);
    SvmModel m = smo_solve(p.X, p.y, p.c_bound, p.cfg);
    REQUIRE(m.support_vectors.size() >= 2);

    SvmModel rev = m;
    std::reverse(rev.support_vectors.begin(), rev.support_vectors.end());
    std::reverse(rev.coef.begin(), rev.coef.end());
    for (int q = 0; q < 8; q++) {
        std::vector<double> x(p.X[0].size());
        for (auto& v : x) v = rng.uniform(-2.0, 2.0);
        CHECK(decide(m, x) == doctest::Approx(decide(rev, x)).epsilon(1e-12));
    }
}

TEST_CASE("free support vectors sit on the margin") {
    Rng rng(derive_seed(64, "free-sv"));
    int found = 0;
    for (int t = 0; t < 12 && found < 4; t++) {
        RandomProblem p = make_problem(rng, false, t);
        p.cfg.tolerance = 1e-8;
        SmoDiagnostics diag;
        SvmModel m = smo_solve(p.X, p.y, p.c_bound, p.cfg, &diag);
        CHECK(diag.max_kkt_violation <= 1e-6);

        // recover alpha_i = |coef| and match support vectors back to X rows
        for (std::size_t s = 0; s < m.support_vectors.size(); s++) {
            const double a = std::fabs(m.coef[s]);
            const double C = p.c_bound[0];
            if (a > 1e-6 * C && a < (1.0 - 1e-6) * C) {
                const double yv = m.coef[s] > 0 ? 1.0 : -1.0;
                CHECK(std::fabs(yv * decide(m, m.support_vectors[s]) - 1.0) <= 2e-3);
                found++;
            }
        }
    }
    CHECK(found > 0);
}

TEST_CASE("grid search picks the lowest mean error with deterministic ties") {
    // one easy problem: training positives around +1, negatives around -1
    Rng rng(65);
    WdProblem prob;
    for (int i = 0; i < 6; i++) {
        FeatureVec pos(2), neg(2);
        for (int d = 0; d < 2; d++) {
            pos[(std::size_t)d] = (float)(1.0 + rng.uniform(-0.3, 0.3));
            neg[(std::size_t)d] = (float)(-1.0 + rng.uniform(-0.3, 0.3));
        }
        prob.train.positives.push_back(pos);
        prob.train.negatives.push_back(neg);
        prob.eval_genuine.push_back(pos);
        prob.eval_skilled.push_back(neg);
    }
    SvmConfig base;
    base.tolerance = 1e-6;

    GridSearchResult single =
        grid_search({prob}, {2.0}, {0.25}, KernelKind::Rbf, base);
    CHECK(single.C == 2.0);
    CHECK(single.gamma == 0.25);
    CHECK(single.mean_error == doctest::Approx(0.0));

    // an unsorted grid where everything achieves zero error: the tie must go
    // to the smallest C, then the smallest gamma
    GridSearchResult tie = grid_search({prob}, {4.0, 0.5, 2.0}, {0.5, 0.125},
                                       KernelKind::Rbf, base);
    CHECK(tie.C == 0.5);
    CHECK(tie.gamma == 0.125);
    CHECK(tie.mean_error == doctest::Approx(0.0));

    // gamma is inert for the linear kernel, so every cell ties at zero error
    // and the tie-break drains to the smallest C and gamma
    GridSearchResult lin =
        grid_search({prob}, {4.0, 1.0}, {0.5, 0.25}, KernelKind::Linear, base);
    CHECK(lin.C == 1.0);
    CHECK(lin.gamma == 0.25);

    CHECK_THROWS_AS(grid_search({prob}, {}, {0.5}, KernelKind::Rbf, base), ConfigError);
    CHECK_THROWS_AS(grid_search({prob}, {1.0}, {}, KernelKind::Rbf, base), ConfigError);
    WdProblem no_eval;
    no_eval.train = prob.train;
    CHECK_THROWS_AS(grid_search({no_eval}, {1.0}, {0.5}, KernelKind::Rbf, base), ConfigError);
    CHECK_THROWS_AS(grid_search({}, {1.0}, {0.5}, KernelKind::Rbf, base), ConfigError);
}

TEST_CASE("default grids match the documented ranges") {
    std::vector<double> cg = default_c_grid();
    std::vector<double> gg = default_gamma_grid();
    REQUIRE(cg.size() == 5);
    CHECK(cg.front() == 0.25);
    CHECK(cg.back() == 64.0);
    REQUIRE(gg.size() == 7);
    CHECK(gg.front() == std::ldexp(1.0, -16));
    CHECK(gg.back() == std::ldexp(1.0, -4));
    // the canonical operating point is on the grid exactly
    bool has_c1 = false, has_g12 = false;
    for (double c : cg) has_c1 = has_c1 || c == 1.0;
    for (double g : gg) has_g12 = has_g12 || g == 0.000244140625;
    CHECK(has_c1);
    CHECK(has_g12);
    for (std::size_t i = 1; i < cg.size(); i++)
        CHECK(cg[i] == doctest::Approx(cg[i - 1] * 4.0).epsilon(1e-12));
    for (std::size_t i = 1; i < gg.size(); i++)
        CHECK(gg[i] == doctest::Approx(gg[i - 1] * 4.0).epsilon(1e-12));
}

TEST_CASE("train_wd_classifier folds standardization into the model") {
    Rng rng(66);
    WdTrainSet train;
    for (int i = 0; i < 8; i++) {
        FeatureVec pos(3), neg(3);
        for (int d = 0; d < 3; d++) {
            const double s = d == 0 ? 10.0 : 1.0; // one wide dimension
            pos[(std::size_t)d] = (float)(s * (1.0 + rng.uniform(-0.4, 0.4)));
            neg[(std::size_t)d] = (float)(s * (-1.0 + rng.uniform(-0.4, 0.4)));
        }
        train.positives.push_back(pos);
        train.negatives.push_back(neg);
    }
    SvmConfig cfg;
    cfg.kernel = KernelKind::Rbf;
    cfg.gamma = 0.25;
    SmoDiagnostics diag;
    SvmModel m = train_wd_classifier(train, cfg, &diag);
    CHECK(diag.support_count == (int)m.support_vectors.size());
    int ok = 0;
    for (const auto& v : train.positives) ok += decide_raw(m, v) >= 0.0;
    for (const auto& v : train.negatives) ok += decide_raw(m, v) < 0.0;
    CHECK(ok == 16);
}

TEST_CASE("svm model files round-trip exactly") {
    namespace fs = std::filesystem;
    Rng rng(67);
    RandomProblem p = make_problem(rng, false, 0);
    SvmModel m = smo_solve(p.X, p.y, p.c_bound, p.cfg);
    m.feature_scale = dv({1.25, 0.5});
    m.feature_scale.resize(p.X[0].size(), 2.0);

    const fs::path dir = fs::temp_directory_path() / "sigver_svm_rt";
    fs::create_directories(dir);
    const std::string path = (dir / "user_001.sgsv").string();
    save_svm_model(path, m, 17, 0x0123456789abcdefull);
    LoadedSvmModel back = load_svm_model(path);
    CHECK(back.user_id == 17);
    CHECK(back.config_digest == 0x0123456789abcdefull);
    CHECK(back.model.kernel == m.kernel);
    CHECK(back.model.gamma == m.gamma);
    CHECK(back.model.bias == m.bias);
    CHECK(back.model.coef == m.coef);
    CHECK(back.model.support_vectors == m.support_vectors);
    CHECK(back.model.feature_scale == m.feature_scale);

    // truncation must be detected
    {
        std::ifstream in(path, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), {});
        std::ofstream out((dir / "trunc.sgsv").string(), std::ios::binary);
        out.write(bytes.data(), (std::streamsize)(bytes.size() / 2));
    }
    CHECK_THROWS_AS(load_svm_model((dir / "trunc.sgsv").string()), IoError);
    CHECK_THROWS_AS(load_svm_model((dir / "absent.sgsv").string()), IoError);
    fs::remove_all(dir);
}
