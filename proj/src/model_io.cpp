#include "sigver/model_io.hpp"

#include <fstream>

#include "sigver/binio.hpp"

namespace sigver {

namespace {

constexpr char kMagic[4] = {'S', 'G', 'N', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_tensor(std::ostream& out, const Tensor& t) {
    write_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape)
        write_u32(out, static_cast<std::uint32_t>(d));
    write_f32_array(out, t.ptr(), t.size());
}

Tensor read_tensor(std::istream& in) {
    const std::uint32_t ndim = read_u32(in);
    if (ndim > 8)
        throw IoError("model file: implausible tensor rank");
    std::vector<int> shape(ndim);
    for (auto& d : shape)
        d = static_cast<int>(read_u32(in));
    Tensor t(shape);
    read_f32_array(in, t.ptr(), t.size());
    return t;
}

} // namespace

void save_network(std::ostream& out, const Network& net, std::uint64_t config_digest) {
    write_magic(out, kMagic);
    write_u32(out, kVersion);
    write_u64(out, config_digest);
    write_u32(out, static_cast<std::uint32_t>(net.spec.in_channels));
    write_u32(out, static_cast<std::uint32_t>(net.spec.in_h));
    write_u32(out, static_cast<std::uint32_t>(net.spec.in_w));
    write_u32(out, static_cast<std::uint32_t>(net.spec.layers.size()));
    for (std::size_t i = 0; i < net.spec.layers.size(); ++i) {
        const auto& layer = net.spec.layers[i];
        write_u32(out, static_cast<std::uint32_t>(layer.kind));
        switch (layer.kind) {
        case LayerKind::Conv:
            write_u32(out, static_cast<std::uint32_t>(layer.filters));
            write_u32(out, static_cast<std::uint32_t>(layer.kernel_h));
            write_u32(out, static_cast<std::uint32_t>(layer.kernel_w));
            write_u32(out, static_cast<std::uint32_t>(layer.stride));
            write_u32(out, static_cast<std::uint32_t>(layer.pad));
            break;
        case LayerKind::Lrn:
            write_f64(out, layer.lrn.alpha);
            write_f64(out, layer.lrn.beta);
            write_f64(out, layer.lrn.k);
            write_u32(out, static_cast<std::uint32_t>(layer.lrn.n));
            break;
        case LayerKind::MaxPool:
            write_u32(out, static_cast<std::uint32_t>(layer.kernel_h));
            write_u32(out, static_cast<std::uint32_t>(layer.kernel_w));
            write_u32(out, static_cast<std::uint32_t>(layer.stride));
            break;
        case LayerKind::Fc:
            write_u32(out, static_cast<std::uint32_t>(layer.filters));
            break;
        case LayerKind::Dropout:
            write_f64(out, layer.dropout_p);
            break;
        case LayerKind::Relu:
        case LayerKind::Softmax:
            break;
        }
        if (layer.kind == LayerKind::Conv || layer.kind == LayerKind::Fc) {
            write_tensor(out, net.weights[i]);
            write_tensor(out, net.biases[i]);
        }
    }
}

void save_network(const std::string& path, const Network& net, std::uint64_t config_digest) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot create model file: " + path);
    save_network(out, net, config_digest);
}

LoadedNetwork load_network(std::istream& in) {
    expect_magic(in, kMagic, "model file");
    expect_version(in, kVersion, "model file");
    LoadedNetwork loaded;
    loaded.config_digest = read_u64(in);
    loaded.net.spec.in_channels = static_cast<int>(read_u32(in));
    loaded.net.spec.in_h = static_cast<int>(read_u32(in));
    loaded.net.spec.in_w = static_cast<int>(read_u32(in));
    const std::uint32_t n_layers = read_u32(in);
    if (n_layers == 0 || n_layers > 1024)
        throw IoError("model file: implausible layer count");
    loaded.net.weights.resize(n_layers);
    loaded.net.biases.resize(n_layers);
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        LayerSpec layer;
        const std::uint32_t kind = read_u32(in);
        if (kind > static_cast<std::uint32_t>(LayerKind::Softmax))
            throw IoError("model file: unknown layer kind tag");
        layer.kind = static_cast<LayerKind>(kind);
        switch (layer.kind) {
        case LayerKind::Conv:
            layer.filters = static_cast<int>(read_u32(in));
            layer.kernel_h = static_cast<int>(read_u32(in));
            layer.kernel_w = static_cast<int>(read_u32(in));
            layer.stride = static_cast<int>(read_u32(in));
            layer.pad = static_cast<int>(read_u32(in));
            break;
        case LayerKind::Lrn:
            layer.lrn.alpha = read_f64(in);
            layer.lrn.beta = read_f64(in);
            layer.lrn.k = read_f64(in);
            layer.lrn.n = static_cast<int>(read_u32(in));
            break;
        case LayerKind::MaxPool:
            layer.kernel_h = static_cast<int>(read_u32(in));
            layer.kernel_w = static_cast<int>(read_u32(in));
            layer.stride = static_cast<int>(read_u32(in));
            break;
        case LayerKind::Fc:
            layer.filters = static_cast<int>(read_u32(in));
            break;
        case LayerKind::Dropout:
            layer.dropout_p = read_f64(in);
            break;
        case LayerKind::Relu:
        case LayerKind::Softmax:
            break;
        }
        loaded.net.spec.layers.push_back(layer);
        if (layer.kind == LayerKind::Conv || layer.kind == LayerKind::Fc) {
            loaded.net.weights[i] = read_tensor(in);
            loaded.net.biases[i] = read_tensor(in);
        }
    }
    infer_shapes(loaded.net.spec);
    return loaded;
}

LoadedNetwork load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open model file: " + path +
                      " (has the train-wi stage been run?)");
    return load_network(in);
}

} // namespace sigver
