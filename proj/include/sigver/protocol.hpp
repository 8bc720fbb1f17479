#ifndef SIGVER_PROTOCOL_HPP
#define SIGVER_PROTOCOL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sigver/error.hpp"

namespace sigver {

enum class SigLabel : std::uint8_t { Genuine = 0, Random = 1, Simple = 2, Skilled = 3 };

const char* sig_label_name(SigLabel label);
SigLabel sig_label_from_name(const std::string& name);

// File lists are relative to the corpus root and kept filename-sorted, so
// "first n" selections are reproducible.
struct CorpusUser {
    std::uint32_t user_id = 0;
    std::vector<std::string> genuine;
    std::vector<std::string> simple;
    std::vector<std::string> skilled;
};

struct Corpus {
    std::string root;
    std::vector<CorpusUser> users; // sorted by user_id
};

// Development / exploitation partition: E is the first
// exploitation_user_count users, D the remainder.
struct SplitSpec {
    int exploitation_user_count = 0;
};

struct Split {
    std::vector<CorpusUser> dev;
    std::vector<CorpusUser> exploit;
};

Split split(const Corpus& corpus, const SplitSpec& spec);

struct WdProtocol {
    int n_genuine_train = 14;
    int n_neg_per_dev_user = 14;
    int n_genuine_test = 10;
    int n_random_test = 0; // 0 disables that forgery type in testing
    int n_simple_test = 0;
    int n_skilled_test = 30;
};

// Train n genuine + 14 negatives per dev user; test 10 genuine + 30 skilled.
WdProtocol gpds_protocol(int n_genuine_train);
// Train n genuine + 30 negatives per dev user; test 10 genuine + 10 random
// + 10 simple + 10 skilled.
WdProtocol brazilian_protocol(int n_genuine_train);

struct SignatureRef {
    std::uint32_t user_id = 0;
    std::string path; // relative to corpus root
    SigLabel label = SigLabel::Genuine;
};

struct WdEvalSet {
    std::vector<SignatureRef> genuine;
    std::vector<SignatureRef> random;
    std::vector<SignatureRef> simple;
    std::vector<SignatureRef> skilled;
};

struct WdSets {
    std::vector<SignatureRef> train_positive;
    std::vector<SignatureRef> train_negative;
    WdEvalSet test;
};

// Deterministic per (inputs, seed). Training positives are the user's first
// n genuine; negatives are the first n_neg genuine of every dev user; test
// genuine are the next 10 after training; random-forgery test samples are
// one genuine each from seeded-random other exploitation users, drawn from
// signatures outside those users' own training ranges.
WdSets build_wd_sets(std::uint32_t user_id, const std::vector<CorpusUser>& dev,
                     const std::vector<CorpusUser>& exploit, const WdProtocol& proto,
                     std::uint64_t seed);

// Manifest: one record per line, "path user_id label", paths relative to the
// manifest's directory.
void write_manifest(const std::string& path, const Corpus& corpus);
Corpus read_manifest(const std::string& path);

// Synthetic corpus: per-user stroke models (random cubic curves), genuine
// samples with small jitter, skilled forgeries re-drawn from the target's
// model with larger jitter, simple forgeries from an unrelated model.
struct SynthConfig {
    int n_users = 0;
    int n_genuine = 0;
    int n_skilled = 0;
    int n_simple = 0;
    int height = 110;
    int width = 160;
    std::uint64_t seed = 1;
};

// Writes PNGs under root/userNNN/ plus root/manifest.txt and returns the
// corpus description.
Corpus generate_synthetic_corpus(const std::string& root, const SynthConfig& cfg);

} // namespace sigver

#endif
