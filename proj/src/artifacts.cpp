#include "sigver/artifacts.hpp"

#include <fstream>

#include "sigver/binio.hpp"

namespace sigver {

namespace {

void write_string(std::ostream& out, const std::string& s) {
    write_u32(out, (std::uint32_t)s.size());
    write_bytes(out, s.data(), s.size());
}

std::string read_string(std::istream& in) {
    std::uint32_t n = read_u32(in);
    if (n > 1u << 20) throw IoError("unreasonable string length in archive");
    std::string s(n, '\0');
    read_bytes(in, s.data(), n);
    return s;
}

} // namespace

void save_tensor_archive(const std::string& path, const TensorArchive& archive) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot create tensor archive: " + path);
    write_magic(out, "SGTA");
    write_u32(out, 1);
    write_u64(out, archive.config_digest);
    write_f64(out, archive.dataset_std);
    write_u32(out, (std::uint32_t)archive.records.size());
    for (const TensorRecord& r : archive.records) {
        write_string(out, r.path);
        write_u32(out, r.user_id);
        write_u8(out, (std::uint8_t)r.label);
        write_u32(out, (std::uint32_t)r.tensor.ndim());
        for (int d = 0; d < r.tensor.ndim(); d++) write_u32(out, (std::uint32_t)r.tensor.dim(d));
        write_f32_array(out, r.tensor.data.data(), r.tensor.data.size());
    }
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

TensorArchive load_tensor_archive(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open tensor archive: " + path +
                      " (has the preprocess stage been run?)");
    expect_magic(in, "SGTA", path);
    expect_version(in, 1, path);
    TensorArchive archive;
    archive.config_digest = read_u64(in);
    archive.dataset_std = read_f64(in);
    std::uint32_t count = read_u32(in);
    archive.records.reserve(count);
    for (std::uint32_t i = 0; i < count; i++) {
        TensorRecord r;
        r.path = read_string(in);
        r.user_id = read_u32(in);
        std::uint8_t label = read_u8(in);
        if (label > 3) throw IoError(path + ": bad label byte");
        r.label = (SigLabel)label;
        std::uint32_t ndim = read_u32(in);
        if (ndim < 1 || ndim > 4) throw IoError(path + ": bad tensor rank");
        std::vector<int> shape(ndim);
        for (auto& d : shape) d = (int)read_u32(in);
        r.tensor = Tensor(shape);
        read_f32_array(in, r.tensor.data.data(), r.tensor.data.size());
        archive.records.push_back(std::move(r));
    }
    return archive;
}

void save_feature_archive(const std::string& path, const FeatureArchive& archive) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot create feature archive: " + path);
    const std::uint32_t dim =
        archive.records.empty() ? 0 : (std::uint32_t)archive.records[0].features.size();
    write_magic(out, "SGFA");
    write_u32(out, 1);
    write_u64(out, archive.config_digest);
    write_u32(out, dim);
    write_u32(out, (std::uint32_t)archive.records.size());
    for (const FeatureRecord& r : archive.records) {
        if (r.features.size() != dim)
            throw IoError("feature archive has mixed vector lengths");
        write_string(out, r.path);
        write_u32(out, r.user_id);
        write_u8(out, (std::uint8_t)r.label);
        write_f32_array(out, r.features.data(), r.features.size());
    }
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

FeatureArchive load_feature_archive(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open feature archive: " + path +
                      " (has the extract stage been run?)");
    expect_magic(in, "SGFA", path);
    expect_version(in, 1, path);
    FeatureArchive archive;
    archive.config_digest = read_u64(in);
    std::uint32_t dim = read_u32(in);
    std::uint32_t count = read_u32(in);
    archive.records.reserve(count);
    for (std::uint32_t i = 0; i < count; i++) {
        FeatureRecord r;
        r.path = read_string(in);
        r.user_id = read_u32(in);
        std::uint8_t label = read_u8(in);
        if (label > 3) throw IoError(path + ": bad label byte");
        r.label = (SigLabel)label;
        r.features.resize(dim);
        read_f32_array(in, r.features.data(), dim);
        archive.records.push_back(std::move(r));
    }
    return archive;
}

void write_feature_index(const std::string& path, const FeatureArchive& archive) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot create feature index: " + path);
    for (const FeatureRecord& r : archive.records)
        out << r.path << ' ' << r.user_id << ' ' << sig_label_name(r.label) << ' '
            << r.features.size() << '\n';
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

} // namespace sigver
