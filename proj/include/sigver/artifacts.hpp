#ifndef SIGVER_ARTIFACTS_HPP
#define SIGVER_ARTIFACTS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sigver/protocol.hpp"
#include "sigver/svm.hpp"
#include "sigver/tensor.hpp"

namespace sigver {

// Preprocessed images, one archive per preprocess run ("SGTA").
struct TensorRecord {
    std::string path; // corpus-relative source image
    std::uint32_t user_id = 0;
    SigLabel label = SigLabel::Genuine;
    Tensor tensor;
};

struct TensorArchive {
    std::uint64_t config_digest = 0;
    double dataset_std = 1.0; // pixel std used for normalization
    std::vector<TensorRecord> records;
};

void save_tensor_archive(const std::string& path, const TensorArchive& archive);
TensorArchive load_tensor_archive(const std::string& path);

// Extracted feature vectors ("SGFA") plus a plain-text index so the WD stage
// stays independent of the network stage.
struct FeatureRecord {
    std::string path;
    std::uint32_t user_id = 0;
    SigLabel label = SigLabel::Genuine;
    FeatureVec features;
};

struct FeatureArchive {
    std::uint64_t config_digest = 0;
    std::vector<FeatureRecord> records;
};

void save_feature_archive(const std::string& path, const FeatureArchive& archive);
FeatureArchive load_feature_archive(const std::string& path);

// Index lines: "path user_id label dim".
void write_feature_index(const std::string& path, const FeatureArchive& archive);

} // namespace sigver

#endif
