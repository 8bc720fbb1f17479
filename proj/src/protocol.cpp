#include "sigver/protocol.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sigver/rng.hpp"

namespace sigver {

const char* sig_label_name(SigLabel label) {
    switch (label) {
    case SigLabel::Genuine: return "genuine";
    case SigLabel::Random: return "random";
    case SigLabel::Simple: return "simple";
    case SigLabel::Skilled: return "skilled";
    }
    throw ConfigError("bad signature label value");
}

SigLabel sig_label_from_name(const std::string& name) {
    if (name == "genuine") return SigLabel::Genuine;
    if (name == "random") return SigLabel::Random;
    if (name == "simple") return SigLabel::Simple;
    if (name == "skilled") return SigLabel::Skilled;
    throw ConfigError("unknown signature label: " + name);
}

Split split(const Corpus& corpus, const SplitSpec& spec) {
    const int total = (int)corpus.users.size();
    if (spec.exploitation_user_count < 1)
        throw ConfigError("exploitation user count must be at least 1");
    if (spec.exploitation_user_count >= total)
        throw ConfigError("exploitation user count " +
                          std::to_string(spec.exploitation_user_count) +
                          " leaves no development users (corpus has " + std::to_string(total) +
                          ")");
    Split s;
    s.exploit.assign(corpus.users.begin(), corpus.users.begin() + spec.exploitation_user_count);
    s.dev.assign(corpus.users.begin() + spec.exploitation_user_count, corpus.users.end());
    return s;
}

WdProtocol gpds_protocol(int n_genuine_train) {
    if (n_genuine_train < 1) throw ConfigError("training genuine count must be at least 1");
    WdProtocol p;
    p.n_genuine_train = n_genuine_train;
    p.n_neg_per_dev_user = 14;
    p.n_genuine_test = 10;
    p.n_random_test = 0;
    p.n_simple_test = 0;
    p.n_skilled_test = 30;
    return p;
}

WdProtocol brazilian_protocol(int n_genuine_train) {
    if (n_genuine_train < 1) throw ConfigError("training genuine count must be at least 1");
    WdProtocol p;
    p.n_genuine_train = n_genuine_train;
    p.n_neg_per_dev_user = 30;
    p.n_genuine_test = 10;
    p.n_random_test = 10;
    p.n_simple_test = 10;
    p.n_skilled_test = 10;
    return p;
}

WdSets build_wd_sets(std::uint32_t user_id, const std::vector<CorpusUser>& dev,
                     const std::vector<CorpusUser>& exploit, const WdProtocol& proto,
                     std::uint64_t seed) {
    const CorpusUser* user = nullptr;
    for (const CorpusUser& u : exploit)
        if (u.user_id == user_id) {
            user = &u;
            break;
        }
    if (!user)
        throw ProtocolError("user " + std::to_string(user_id) +
                            " is not in the exploitation set");
    if (dev.empty()) throw ProtocolError("development set is empty");

    const int n_train = proto.n_genuine_train;
    const int n_test = proto.n_genuine_test;
    if ((int)user->genuine.size() < n_train + n_test)
        throw ProtocolError("user " + std::to_string(user_id) + " has " +
                            std::to_string(user->genuine.size()) + " genuine signatures, needs " +
                            std::to_string(n_train + n_test));

    WdSets sets;
    for (int i = 0; i < n_train; i++)
        sets.train_positive.push_back({user->user_id, user->genuine[i], SigLabel::Genuine});
    for (int i = n_train; i < n_train + n_test; i++)
        sets.test.genuine.push_back({user->user_id, user->genuine[i], SigLabel::Genuine});

    for (const CorpusUser& d : dev) {
        if ((int)d.genuine.size() < proto.n_neg_per_dev_user)
            throw ProtocolError("development user " + std::to_string(d.user_id) + " has " +
                                std::to_string(d.genuine.size()) +
                                " genuine signatures, negatives need " +
                                std::to_string(proto.n_neg_per_dev_user));
        for (int i = 0; i < proto.n_neg_per_dev_user; i++)
            sets.train_negative.push_back({d.user_id, d.genuine[i], SigLabel::Genuine});
    }

    if ((int)user->skilled.size() < proto.n_skilled_test)
        throw ProtocolError("user " + std::to_string(user_id) + " has " +
                            std::to_string(user->skilled.size()) +
                            " skilled forgeries, protocol needs " +
                            std::to_string(proto.n_skilled_test));
    for (int i = 0; i < proto.n_skilled_test; i++)
        sets.test.skilled.push_back({user->user_id, user->skilled[i], SigLabel::Skilled});

    if (proto.n_simple_test > 0) {
        if ((int)user->simple.size() < proto.n_simple_test)
            throw ProtocolError("user " + std::to_string(user_id) + " has " +
                                std::to_string(user->simple.size()) +
                                " simple forgeries, protocol needs " +
                                std::to_string(proto.n_simple_test));
        for (int i = 0; i < proto.n_simple_test; i++)
            sets.test.simple.push_back({user->user_id, user->simple[i], SigLabel::Simple});
    }

    if (proto.n_random_test > 0) {
        std::vector<const CorpusUser*> others;
        for (const CorpusUser& e : exploit)
            if (e.user_id != user_id) others.push_back(&e);
        if ((int)others.size() < proto.n_random_test)
            throw ProtocolError("random-forgery test needs " +
                                std::to_string(proto.n_random_test) +
                                " other exploitation users, only " +
                                std::to_string(others.size()) + " available");
        Rng rng(derive_seed(seed, "wd-random-forgeries", user_id));
        // One genuine each from seeded-random distinct other users, avoiding
        // signatures those users train on themselves.
        std::vector<std::uint64_t> order(others.size());
        for (std::size_t i = 0; i < order.size(); i++) order[i] = i;
        rng.shuffle(order);
        for (int k = 0; k < proto.n_random_test; k++) {
            const CorpusUser& o = *others[order[k]];
            if ((int)o.genuine.size() <= n_train)
                throw ProtocolError("user " + std::to_string(o.user_id) +
                                    " has no genuine signatures outside its training range");
            std::uint64_t span = o.genuine.size() - n_train;
            std::uint64_t pick = n_train + rng.below(span);
            sets.test.random.push_back({user->user_id, o.genuine[pick], SigLabel::Random});
        }
    }
    return sets;
}

void write_manifest(const std::string& path, const Corpus& corpus) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot create manifest: " + path);
    for (const CorpusUser& u : corpus.users) {
        for (const std::string& p : u.genuine)
            out << p << ' ' << u.user_id << " genuine\n";
        for (const std::string& p : u.simple)
            out << p << ' ' << u.user_id << " simple\n";
        for (const std::string& p : u.skilled)
            out << p << ' ' << u.user_id << " skilled\n";
    }
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

Corpus read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open manifest: " + path + " (has the datagen stage been run?)");
    Corpus corpus;
    corpus.root = std::filesystem::path(path).parent_path().string();
    if (corpus.root.empty()) corpus.root = ".";

    std::vector<CorpusUser> users;
    auto user_slot = [&](std::uint32_t id) -> CorpusUser& {
        for (CorpusUser& u : users)
            if (u.user_id == id) return u;
        users.push_back({});
        users.back().user_id = id;
        return users.back();
    };

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string rel, label;
        long long id = -1;
        if (!(ss >> rel >> id >> label) || id < 0)
            throw IoError(path + ":" + std::to_string(line_no) + ": bad manifest record");
        std::filesystem::path fp = std::filesystem::path(corpus.root) / rel;
        if (!std::filesystem::exists(fp))
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": referenced file missing: " + fp.string());
        CorpusUser& u = user_slot((std::uint32_t)id);
        switch (sig_label_from_name(label)) {
        case SigLabel::Genuine: u.genuine.push_back(rel); break;
        case SigLabel::Simple: u.simple.push_back(rel); break;
        case SigLabel::Skilled: u.skilled.push_back(rel); break;
        case SigLabel::Random:
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": manifest label 'random' is a test-time role, not a corpus label");
        }
    }
    std::sort(users.begin(), users.end(),
              [](const CorpusUser& a, const CorpusUser& b) { return a.user_id < b.user_id; });
    for (CorpusUser& u : users) {
        std::sort(u.genuine.begin(), u.genuine.end());
        std::sort(u.simple.begin(), u.simple.end());
        std::sort(u.skilled.begin(), u.skilled.end());
        if (u.genuine.empty())
            throw IoError(path + ": user " + std::to_string(u.user_id) +
                          " has no genuine signatures");
    }
    if (users.empty()) throw IoError(path + ": manifest is empty");
    corpus.users = std::move(users);
    return corpus;
}

} // namespace sigver
