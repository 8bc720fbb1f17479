#include "sigver/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "sigver/rng.hpp"

namespace sigver {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as a number");
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long long i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as an integer");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        unsigned long long i = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + v +
                          "' as an unsigned integer");
    }
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::istringstream ss(v);
    std::string tok;
    while (ss >> tok) out.push_back(parse_double(key, tok));
    return out;
}

} // namespace

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        if (kv.count(key))
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key +
                              "'");
        kv[key] = value;
    }

    RunConfig cfg;
    bool have_seed = false;
    for (const auto& [key, value] : kv) {
        if (key == "corpus_root") cfg.corpus_root = value;
        else if (key == "work_dir") cfg.work_dir = value;
        else if (key == "seed") { cfg.seed = parse_u64(key, value); have_seed = true; }
        else if (key == "prep_mode") {
            if (value == "resize") cfg.prep.mode = PrepMode::ResizeOnly;
            else if (value == "canvas") cfg.prep.mode = PrepMode::CanvasThenResize;
            else throw ConfigError("prep_mode must be 'resize' or 'canvas', got '" + value + "'");
        }
        else if (key == "canvas_height") cfg.prep.canvas_h = (int)parse_int(key, value);
        else if (key == "canvas_width") cfg.prep.canvas_w = (int)parse_int(key, value);
        else if (key == "target_height") cfg.prep.target_h = (int)parse_int(key, value);
        else if (key == "target_width") cfg.prep.target_w = (int)parse_int(key, value);
        else if (key == "network_spec") cfg.network_spec_path = value;
        else if (key == "exploitation_users") cfg.exploitation_users = (int)parse_int(key, value);
        else if (key == "wi_train_genuine") cfg.wi_train_genuine = (int)parse_int(key, value);
        else if (key == "train_lr") cfg.train.initial_lr = parse_double(key, value);
        else if (key == "train_lr_decay_factor") cfg.train.lr_decay_factor = parse_double(key, value);
        else if (key == "train_lr_decay_every") cfg.train.lr_decay_every = (int)parse_int(key, value);
        else if (key == "train_momentum") cfg.train.momentum = parse_double(key, value);
        else if (key == "train_weight_decay") cfg.train.weight_decay = parse_double(key, value);
        else if (key == "train_batch") cfg.train.batch_size = (int)parse_int(key, value);
        else if (key == "train_epochs") cfg.train.epochs = (int)parse_int(key, value);
        else if (key == "train_checkpoint_every") cfg.train.checkpoint_every = (int)parse_int(key, value);
        else if (key == "svm_kernel") {
            if (value == "rbf") cfg.svm.kernel = KernelKind::Rbf;
            else if (value == "linear") cfg.svm.kernel = KernelKind::Linear;
            else throw ConfigError("svm_kernel must be 'rbf' or 'linear', got '" + value + "'");
        }
        else if (key == "svm_c") cfg.svm.C = parse_double(key, value);
        else if (key == "svm_gamma") cfg.svm.gamma = parse_double(key, value);
        else if (key == "svm_tolerance") cfg.svm.tolerance = parse_double(key, value);
        else if (key == "grid_c") cfg.grid_c = parse_double_list(key, value);
        else if (key == "grid_gamma") cfg.grid_gamma = parse_double_list(key, value);
        else if (key == "wd_style") {
            if (value != "gpds" && value != "brazilian")
                throw ConfigError("wd_style must be 'gpds' or 'brazilian', got '" + value + "'");
            cfg.wd_style = value;
        }
        else if (key == "wd_train_genuine") cfg.wd_train_genuine = (int)parse_int(key, value);
        else throw ConfigError(origin + ": unknown config key '" + key + "'");
    }
    if (!have_seed) throw ConfigError(origin + ": missing mandatory key 'seed'");

    if (cfg.prep.target_h < 1 || cfg.prep.target_w < 1)
        throw ConfigError("target image size must be positive");
    if (cfg.prep.canvas_h < 1 || cfg.prep.canvas_w < 1)
        throw ConfigError("canvas size must be positive");
    if (cfg.train.initial_lr <= 0.0) throw ConfigError("train_lr must be positive");
    if (cfg.train.lr_decay_factor <= 0.0) throw ConfigError("train_lr_decay_factor must be positive");
    if (cfg.train.lr_decay_every < 1) throw ConfigError("train_lr_decay_every must be at least 1");
    if (cfg.train.momentum < 0.0 || cfg.train.momentum >= 1.0)
        throw ConfigError("train_momentum must be in [0, 1)");
    if (cfg.train.weight_decay < 0.0) throw ConfigError("train_weight_decay must be nonnegative");
    if (cfg.train.batch_size < 1) throw ConfigError("train_batch must be at least 1");
    if (cfg.train.epochs < 1) throw ConfigError("train_epochs must be at least 1");
    if (cfg.train.checkpoint_every < 0) throw ConfigError("train_checkpoint_every must be nonnegative");
    if (cfg.svm.C <= 0.0) throw ConfigError("svm_c must be positive");
    if (cfg.svm.gamma <= 0.0) throw ConfigError("svm_gamma must be positive");
    if (cfg.svm.tolerance <= 0.0) throw ConfigError("svm_tolerance must be positive");
    if (cfg.wd_train_genuine < 1) throw ConfigError("wd_train_genuine must be at least 1");
    if (cfg.wi_train_genuine < 1) throw ConfigError("wi_train_genuine must be at least 1");
    for (double c : cfg.grid_c)
        if (c <= 0.0) throw ConfigError("grid_c entries must be positive");
    for (double g : cfg.grid_gamma)
        if (g <= 0.0) throw ConfigError("grid_gamma entries must be positive");
    cfg.train.seed = cfg.seed;
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path);
}

std::uint64_t config_digest(const RunConfig& cfg) {
    char buf[64];
    std::string s;
    auto add = [&](const char* key, const std::string& v) {
        s += key;
        s += '=';
        s += v;
        s += '\n';
    };
    auto addf = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        add(key, buf);
    };
    auto addi = [&](const char* key, long long v) { add(key, std::to_string(v)); };
    add("corpus_root", cfg.corpus_root);
    add("work_dir", cfg.work_dir);
    add("seed", std::to_string(cfg.seed));
    add("prep_mode", cfg.prep.mode == PrepMode::ResizeOnly ? "resize" : "canvas");
    addi("canvas_height", cfg.prep.canvas_h);
    addi("canvas_width", cfg.prep.canvas_w);
    addi("target_height", cfg.prep.target_h);
    addi("target_width", cfg.prep.target_w);
    add("network_spec", cfg.network_spec_path);
    addi("exploitation_users", cfg.exploitation_users);
    addi("wi_train_genuine", cfg.wi_train_genuine);
    addf("train_lr", cfg.train.initial_lr);
    addf("train_lr_decay_factor", cfg.train.lr_decay_factor);
    addi("train_lr_decay_every", cfg.train.lr_decay_every);
    addf("train_momentum", cfg.train.momentum);
    addf("train_weight_decay", cfg.train.weight_decay);
    addi("train_batch", cfg.train.batch_size);
    addi("train_epochs", cfg.train.epochs);
    addi("train_checkpoint_every", cfg.train.checkpoint_every);
    add("svm_kernel", cfg.svm.kernel == KernelKind::Rbf ? "rbf" : "linear");
    addf("svm_c", cfg.svm.C);
    addf("svm_gamma", cfg.svm.gamma);
    addf("svm_tolerance", cfg.svm.tolerance);
    std::string list;
    for (double c : cfg.grid_c) {
        std::snprintf(buf, sizeof buf, "%.17g ", c);
        list += buf;
    }
    add("grid_c", list);
    list.clear();
    for (double g : cfg.grid_gamma) {
        std::snprintf(buf, sizeof buf, "%.17g ", g);
        list += buf;
    }
    add("grid_gamma", list);
    add("wd_style", cfg.wd_style);
    addi("wd_train_genuine", cfg.wd_train_genuine);
    return fnv1a64(s);
}

std::string digest_hex(std::uint64_t digest) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)digest);
    return buf;
}

} // namespace sigver
