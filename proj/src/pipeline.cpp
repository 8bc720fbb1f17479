#include "sigver/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <unordered_map>

#include "sigver/artifacts.hpp"
#include "sigver/imageprep.hpp"
#include "sigver/model_io.hpp"
#include "sigver/png_io.hpp"
#include "sigver/rng.hpp"

namespace sigver {

namespace fs = std::filesystem;

std::string StagePaths::wd_model(std::uint32_t user_id) const {
    char buf[48];
    std::snprintf(buf, sizeof buf, "user_%03u.sgsv", user_id);
    return (fs::path(wd_dir) / buf).string();
}

StagePaths stage_paths(const RunConfig& cfg) {
    StagePaths p;
    fs::path work(cfg.work_dir);
    p.manifest = (fs::path(cfg.corpus_root) / "manifest.txt").string();
    p.preprocessed = (work / "preprocessed.bin").string();
    p.network_model = (work / "network.sgnt").string();
    p.train_log = (work / "train_log.csv").string();
    p.checkpoints_dir = (work / "checkpoints").string();
    p.features = (work / "features.bin").string();
    p.feature_index = (work / "features.txt").string();
    p.wd_dir = (work / "wd_models").string();
    p.wd_diagnostics = (work / "wd_models" / "diagnostics.txt").string();
    p.gridsearch_result = (work / "gridsearch.txt").string();
    p.report_csv = (work / "report.csv").string();
    p.report_txt = (work / "report.txt").string();
    return p;
}

WdProtocol protocol_from_config(const RunConfig& cfg) {
    if (cfg.wd_style == "gpds") return gpds_protocol(cfg.wd_train_genuine);
    return brazilian_protocol(cfg.wd_train_genuine);
}

namespace {

Split load_split(const RunConfig& cfg, const StagePaths& paths, Corpus* corpus_out = nullptr) {
    Corpus corpus = read_manifest(paths.manifest);
    if (cfg.exploitation_users < 1)
        throw ConfigError("config key exploitation_users must be set for this stage");
    Split sp = split(corpus, {cfg.exploitation_users});
    if (corpus_out) *corpus_out = std::move(corpus);
    return sp;
}

// The images the cnn trains on: first wi_train_genuine genuine per dev user.
std::vector<std::pair<std::uint32_t, std::string>> wi_train_list(const Split& sp,
                                                                 const RunConfig& cfg) {
    std::vector<std::pair<std::uint32_t, std::string>> list;
    for (const CorpusUser& u : sp.dev) {
        if ((int)u.genuine.size() < cfg.wi_train_genuine)
            throw ProtocolError("development user " + std::to_string(u.user_id) + " has " +
                                std::to_string(u.genuine.size()) +
                                " genuine signatures, wi training needs " +
                                std::to_string(cfg.wi_train_genuine));
        for (int i = 0; i < cfg.wi_train_genuine; i++) list.emplace_back(u.user_id, u.genuine[i]);
    }
    return list;
}

Tensor to_tensor(const GrayImage& img) {
    Tensor t({1, img.height, img.width});
    t.data = img.pixels;
    return t;
}

} // namespace

void stage_preprocess(const RunConfig& cfg, std::ostream* console) {
    StagePaths paths = stage_paths(cfg);
    Corpus corpus;
    Split sp = load_split(cfg, paths, &corpus);
    fs::create_directories(cfg.work_dir);

    // Preprocess everything up to the normalization stage first; the dataset
    // std is measured on the development wi-training images at that stage and
    // then applied uniformly.
    auto train_list = wi_train_list(sp, cfg);
    std::unordered_map<std::string, bool> is_train;
    for (const auto& [uid, path] : train_list) is_train[path] = true;

    TensorArchive archive;
    std::vector<GrayImage> unnormalized;
    std::vector<GrayImage> std_pool;
    for (const CorpusUser& u : corpus.users) {
        auto run = [&](const std::vector<std::string>& files, SigLabel label) {
            for (const std::string& rel : files) {
                GrayImage raw = load_png_gray((fs::path(corpus.root) / rel).string());
                GrayImage prep = preprocess_unnormalized(raw, cfg.prep);
                if (is_train.count(rel)) std_pool.push_back(prep);
                TensorRecord rec;
                rec.path = rel;
                rec.user_id = u.user_id;
                rec.label = label;
                archive.records.push_back(std::move(rec));
                unnormalized.push_back(std::move(prep));
            }
        };
        run(u.genuine, SigLabel::Genuine);
        run(u.simple, SigLabel::Simple);
        run(u.skilled, SigLabel::Skilled);
    }
    const double dataset_std = compute_dataset_std(std_pool);
    std_pool.clear();

    for (std::size_t i = 0; i < archive.records.size(); i++) {
        GrayImage norm = normalize_std(unnormalized[i], dataset_std);
        archive.records[i].tensor = to_tensor(norm);
    }
    archive.dataset_std = dataset_std;
    archive.config_digest = config_digest(cfg);
    save_tensor_archive(paths.preprocessed, archive);
    if (console)
        *console << "preprocessed " << archive.records.size() << " images ("
                 << sp.dev.size() << " dev / " << sp.exploit.size()
                 << " exploitation users), dataset std " << dataset_std << ", config "
                 << digest_hex(archive.config_digest) << "\n";
}

std::vector<EpochStats> stage_train_wi(const RunConfig& cfg, std::ostream* console) {
    StagePaths paths = stage_paths(cfg);
    Split sp = load_split(cfg, paths);
    TensorArchive archive = load_tensor_archive(paths.preprocessed);

    std::unordered_map<std::string, const TensorRecord*> by_path;
    for (const TensorRecord& r : archive.records) by_path[r.path] = &r;

    auto train_list = wi_train_list(sp, cfg);
    std::unordered_map<std::uint32_t, int> class_of;
    for (const CorpusUser& u : sp.dev) {
        int next = (int)class_of.size();
        class_of[u.user_id] = next;
    }

    const TensorRecord* first = by_path.count(train_list[0].second)
                                    ? by_path[train_list[0].second]
                                    : nullptr;
    if (!first)
        throw ProtocolError("preprocessed archive is missing " + train_list[0].second +
                            " (rerun the preprocess stage)");
    const int ch = first->tensor.dim(0), h = first->tensor.dim(1), w = first->tensor.dim(2);

    WiDataset data;
    data.num_classes = (int)sp.dev.size();
    data.images = Tensor({(int)train_list.size(), ch, h, w});
    data.labels.resize(train_list.size());
    for (std::size_t i = 0; i < train_list.size(); i++) {
        auto it = by_path.find(train_list[i].second);
        if (it == by_path.end())
            throw ProtocolError("preprocessed archive is missing " + train_list[i].second +
                                " (rerun the preprocess stage)");
        const Tensor& t = it->second->tensor;
        if (t.dim(0) != ch || t.dim(1) != h || t.dim(2) != w)
            throw ShapeError("preprocessed tensors have mixed shapes");
        std::copy(t.data.begin(), t.data.end(),
                  data.images.data.begin() + (std::ptrdiff_t)(i * t.size()));
        data.labels[i] = class_of[train_list[i].first];
    }

    if (cfg.network_spec_path.empty())
        throw ConfigError("config key network_spec must be set for the train-wi stage");
    NetworkSpec spec = load_network_spec(cfg.network_spec_path, data.num_classes);
    if (spec.in_channels != ch || spec.in_h != h || spec.in_w != w)
        throw ShapeError("network input " + std::to_string(spec.in_channels) + "x" +
                         std::to_string(spec.in_h) + "x" + std::to_string(spec.in_w) +
                         " does not match preprocessed images " + std::to_string(ch) + "x" +
                         std::to_string(h) + "x" + std::to_string(w));

    Rng init_rng(derive_seed(cfg.seed, "wi-init"));
    Network net = init_network(spec, init_rng);

    TrainConfig tcfg = cfg.train;
    tcfg.seed = derive_seed(cfg.seed, "wi-train");
    const std::uint64_t digest = config_digest(cfg);

    CheckpointFn checkpoint;
    if (tcfg.checkpoint_every > 0) {
        fs::create_directories(paths.checkpoints_dir);
        checkpoint = [&paths, digest](int epoch, const Network& n) {
            char buf[48];
            std::snprintf(buf, sizeof buf, "epoch_%03d.sgnt", epoch);
            save_network((fs::path(paths.checkpoints_dir) / buf).string(), n, digest);
        };
    }

    if (console)
        *console << "wi training: " << data.count() << " images, " << data.num_classes
                 << " classes, " << net.num_params() << " parameters, config "
                 << digest_hex(digest) << "\n";
    std::vector<EpochStats> log = train_wi(net, data, tcfg, console, checkpoint);

    std::ofstream log_out(paths.train_log);
    if (!log_out) throw IoError("cannot create training log: " + paths.train_log);
    log_out << "epoch,lr,mean_loss,accuracy\n";
    char row[160];
    for (const EpochStats& e : log) {
        std::snprintf(row, sizeof row, "%d,%.17g,%.17g,%.17g\n", e.epoch, e.lr, e.mean_loss,
                      e.accuracy);
        log_out << row;
    }
    log_out.flush();
    if (!log_out) throw IoError("write failed: " + paths.train_log);

    save_network(paths.network_model, net, digest);
    return log;
}

void stage_extract(const RunConfig& cfg, std::ostream* console) {
    StagePaths paths = stage_paths(cfg);
    TensorArchive tensors = load_tensor_archive(paths.preprocessed);
    LoadedNetwork loaded = load_network(paths.network_model);

    FeatureArchive features;
    features.config_digest = config_digest(cfg);
    if (console && loaded.config_digest != features.config_digest)
        *console << "note: network was trained under config " << digest_hex(loaded.config_digest)
                 << ", current config is " << digest_hex(features.config_digest) << "\n";

    features.records.reserve(tensors.records.size());
    for (const TensorRecord& r : tensors.records) {
        FeatureRecord f;
        f.path = r.path;
        f.user_id = r.user_id;
        f.label = r.label;
        f.features = extract_features(loaded.net, r.tensor);
        features.records.push_back(std::move(f));
    }
    save_feature_archive(paths.features, features);
    write_feature_index(paths.feature_index, features);
    if (console)
        *console << "extracted " << features.records.size() << " feature vectors of length "
                 << loaded.net.feature_dim() << "\n";
}

namespace {

class FeatureLookup {
  public:
    explicit FeatureLookup(const FeatureArchive& archive) {
        for (const FeatureRecord& r : archive.records) map_[r.path] = &r;
    }

    const FeatureVec& get(const SignatureRef& ref) const {
        auto it = map_.find(ref.path);
        if (it == map_.end())
            throw ProtocolError("no extracted features for " + ref.path +
                                " (rerun the extract stage)");
        return it->second->features;
    }

    std::vector<FeatureVec> get_all(const std::vector<SignatureRef>& refs) const {
        std::vector<FeatureVec> out;
        out.reserve(refs.size());
        for (const SignatureRef& r : refs) out.push_back(get(r));
        return out;
    }

  private:
    std::unordered_map<std::string, const FeatureRecord*> map_;
};

} // namespace

void stage_train_wd(const RunConfig& cfg, std::ostream* console) {
    StagePaths paths = stage_paths(cfg);
    Split sp = load_split(cfg, paths);
    FeatureArchive archive = load_feature_archive(paths.features);
    FeatureLookup lookup(archive);
    WdProtocol proto = protocol_from_config(cfg);
    const std::uint64_t digest = config_digest(cfg);

    fs::create_directories(paths.wd_dir);
    std::ofstream diag_out(paths.wd_diagnostics);
    if (!diag_out) throw IoError("cannot create diagnostics file: " + paths.wd_diagnostics);
    diag_out << "user iterations kkt_gap max_kkt_violation support_count\n";

    for (const CorpusUser& u : sp.exploit) {
        WdSets sets = build_wd_sets(u.user_id, sp.dev, sp.exploit, proto, cfg.seed);
        WdTrainSet train;
        train.positives = lookup.get_all(sets.train_positive);
        train.negatives = lookup.get_all(sets.train_negative);
        SmoDiagnostics diag;
        SvmModel model = train_wd_classifier(train, cfg.svm, &diag);
        save_svm_model(paths.wd_model(u.user_id), model, u.user_id, digest);
        char row[192];
        std::snprintf(row, sizeof row, "%u %ld %.17g %.17g %d\n", u.user_id, diag.iterations,
                      diag.kkt_gap, diag.max_kkt_violation, diag.support_count);
        diag_out << row;
        if (console)
            *console << "user " << u.user_id << ": " << train.positives.size() << "+"
                     << train.negatives.size() << " samples, " << diag.support_count
                     << " support vectors, " << diag.iterations << " smo updates\n";
    }
    diag_out.flush();
    if (!diag_out) throw IoError("write failed: " + paths.wd_diagnostics);
}

GridSearchResult stage_gridsearch(const RunConfig& cfg, std::ostream* console) {
    StagePaths paths = stage_paths(cfg);
    Split sp = load_split(cfg, paths);
    FeatureArchive archive = load_feature_archive(paths.features);
    FeatureLookup lookup(archive);
    WdProtocol proto = protocol_from_config(cfg);

    // Hyperparameters are selected on development users only: each dev user
    // becomes a mock wd problem with the remaining dev users as negatives.
    std::vector<WdProblem> problems;
    for (std::size_t i = 0; i < sp.dev.size(); i++) {
        const CorpusUser& u = sp.dev[i];
        const int need = proto.n_genuine_train + proto.n_genuine_test;
        if ((int)u.genuine.size() < need)
            throw ProtocolError("development user " + std::to_string(u.user_id) + " has " +
                                std::to_string(u.genuine.size()) +
                                " genuine signatures, grid search needs " + std::to_string(need));
        if ((int)u.skilled.size() < 1)
            throw ProtocolError("development user " + std::to_string(u.user_id) +
                                " has no skilled forgeries for grid search");
        WdProblem p;
        for (int g = 0; g < proto.n_genuine_train; g++)
            p.train.positives.push_back(lookup.get({u.user_id, u.genuine[g], SigLabel::Genuine}));
        for (std::size_t j = 0; j < sp.dev.size(); j++) {
            if (j == i) continue;
            const CorpusUser& o = sp.dev[j];
            const int take = std::min((int)o.genuine.size(), proto.n_neg_per_dev_user);
            for (int g = 0; g < take; g++)
                p.train.negatives.push_back(
                    lookup.get({o.user_id, o.genuine[g], SigLabel::Genuine}));
        }
        for (int g = proto.n_genuine_train; g < need; g++)
            p.eval_genuine.push_back(lookup.get({u.user_id, u.genuine[g], SigLabel::Genuine}));
        const int n_sk = std::min((int)u.skilled.size(), proto.n_skilled_test);
        for (int s = 0; s < n_sk; s++)
            p.eval_skilled.push_back(lookup.get({u.user_id, u.skilled[s], SigLabel::Skilled}));
        problems.push_back(std::move(p));
    }

    std::vector<double> c_grid = cfg.grid_c.empty() ? default_c_grid() : cfg.grid_c;
    std::vector<double> gamma_grid = cfg.grid_gamma.empty() ? default_gamma_grid() : cfg.grid_gamma;
    if (cfg.svm.kernel == KernelKind::Linear) gamma_grid = {cfg.svm.gamma};

    GridSearchResult best = grid_search(problems, c_grid, gamma_grid, cfg.svm.kernel, cfg.svm);

    std::ofstream out(paths.gridsearch_result);
    if (!out) throw IoError("cannot create gridsearch result: " + paths.gridsearch_result);
    char buf[192];
    std::snprintf(buf, sizeof buf, "c %.17g\ngamma %.17g\nmean_error %.17g\n", best.C, best.gamma,
                  best.mean_error);
    out << buf;
    out.flush();
    if (!out) throw IoError("write failed: " + paths.gridsearch_result);
    if (console)
        *console << "grid search over " << problems.size() << " dev users: c " << best.C
                 << ", gamma " << best.gamma << ", mean error " << best.mean_error << "\n";
    return best;
}

EvalReport stage_evaluate(const RunConfig& cfg, std::ostream* console) {
    StagePaths paths = stage_paths(cfg);
    Split sp = load_split(cfg, paths);
    FeatureArchive archive = load_feature_archive(paths.features);
    FeatureLookup lookup(archive);
    WdProtocol proto = protocol_from_config(cfg);

    std::vector<UserScores> all_scores;
    for (const CorpusUser& u : sp.exploit) {
        WdSets sets = build_wd_sets(u.user_id, sp.dev, sp.exploit, proto, cfg.seed);
        LoadedSvmModel loaded = load_svm_model(paths.wd_model(u.user_id));
        if (loaded.user_id != u.user_id)
            throw IoError(paths.wd_model(u.user_id) + " holds user " +
                          std::to_string(loaded.user_id) + ", expected " +
                          std::to_string(u.user_id));
        auto score_all = [&](const std::vector<SignatureRef>& refs) {
            std::vector<double> out;
            out.reserve(refs.size());
            for (const SignatureRef& r : refs) out.push_back(decide_raw(loaded.model, lookup.get(r)));
            return out;
        };
        UserScores us;
        us.user_id = u.user_id;
        us.genuine = score_all(sets.test.genuine);
        us.random = score_all(sets.test.random);
        us.simple = score_all(sets.test.simple);
        us.skilled = score_all(sets.test.skilled);
        all_scores.push_back(std::move(us));
    }

    ReportSpec rspec;
    rspec.expect_random = proto.n_random_test > 0;
    rspec.expect_simple = proto.n_simple_test > 0;
    rspec.expect_skilled = true;
    rspec.global_threshold = 0.0;
    EvalReport report = aggregate(all_scores, rspec);

    const std::string provenance = digest_hex(config_digest(cfg));
    write_report_csv(paths.report_csv, report, provenance);
    std::string text = render_report_text(report, provenance);
    std::ofstream txt(paths.report_txt);
    if (!txt) throw IoError("cannot create report: " + paths.report_txt);
    txt << text;
    txt.flush();
    if (!txt) throw IoError("write failed: " + paths.report_txt);
    if (console) *console << text;
    return report;
}

} // namespace sigver
