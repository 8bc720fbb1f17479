#include "sigver/network.hpp"

#include <fstream>
#include <sstream>

namespace sigver {

std::string layer_kind_name(LayerKind k) {
    switch (k) {
    case LayerKind::Conv: return "conv";
    case LayerKind::Lrn: return "lrn";
    case LayerKind::MaxPool: return "maxpool";
    case LayerKind::Fc: return "fc";
    case LayerKind::Dropout: return "dropout";
    case LayerKind::Relu: return "relu";
    case LayerKind::Softmax: return "softmax";
    }
    return "?";
}

NetworkSpec parse_network_spec(const std::string& text, int num_classes) {
    NetworkSpec spec;
    bool have_input = false;
    std::istringstream stream(text);
    std::string line;
    int lineno = 0;
    while (std::getline(stream, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok))
            continue;

        auto fail = [&](const std::string& msg) -> ConfigError {
            return ConfigError("network spec line " + std::to_string(lineno) + ": " + msg);
        };

        if (tok == "input") {
            if (!(ls >> spec.in_channels >> spec.in_h >> spec.in_w))
                throw fail("expected: input <channels> <height> <width>");
            if (spec.in_channels < 1 || spec.in_h < 1 || spec.in_w < 1)
                throw fail("input extents must be >= 1");
            have_input = true;
            continue;
        }

        LayerSpec layer;
        if (tok == "conv") {
            layer.kind = LayerKind::Conv;
            std::string kw1, kw2;
            if (!(ls >> layer.filters >> layer.kernel_h >> layer.kernel_w >> kw1 >>
                  layer.stride >> kw2 >> layer.pad) ||
                kw1 != "stride" || kw2 != "pad")
                throw fail("expected: conv <filters> <kh> <kw> stride <s> pad <p>");
            if (layer.filters < 1 || layer.kernel_h < 1 || layer.kernel_w < 1 ||
                layer.stride < 1 || layer.pad < 0)
                throw fail("bad conv parameters");
        } else if (tok == "lrn") {
            layer.kind = LayerKind::Lrn;
            std::string ka, kb, kk, kn;
            if (!(ls >> ka >> layer.lrn.alpha >> kb >> layer.lrn.beta >> kk >> layer.lrn.k >>
                  kn >> layer.lrn.n) ||
                ka != "alpha" || kb != "beta" || kk != "k" || kn != "n")
                throw fail("expected: lrn alpha <a> beta <b> k <k> n <n>");
            if (layer.lrn.n < 1 || layer.lrn.k <= 0.0)
                throw fail("bad lrn parameters");
        } else if (tok == "maxpool") {
            layer.kind = LayerKind::MaxPool;
            std::string kw;
            if (!(ls >> layer.kernel_h >> layer.kernel_w >> kw >> layer.stride) || kw != "stride")
                throw fail("expected: maxpool <kh> <kw> stride <s>");
            if (layer.kernel_h < 1 || layer.kernel_w < 1 || layer.stride < 1)
                throw fail("bad maxpool parameters");
        } else if (tok == "fc") {
            layer.kind = LayerKind::Fc;
            std::string width;
            if (!(ls >> width))
                throw fail("expected: fc <width|classes>");
            if (width == "classes") {
                if (num_classes < 1)
                    throw fail("spec uses 'fc classes' but no class count was provided");
                layer.filters = num_classes;
            } else {
                layer.filters = std::stoi(width);
            }
            if (layer.filters < 1)
                throw fail("fc width must be >= 1");
        } else if (tok == "dropout") {
            layer.kind = LayerKind::Dropout;
            if (!(ls >> layer.dropout_p))
                throw fail("expected: dropout <p>");
            if (layer.dropout_p < 0.0 || layer.dropout_p >= 1.0)
                throw fail("dropout rate must be in [0, 1)");
        } else if (tok == "relu") {
            layer.kind = LayerKind::Relu;
        } else if (tok == "softmax") {
            layer.kind = LayerKind::Softmax;
        } else {
            throw fail("unknown layer kind '" + tok + "'");
        }
        spec.layers.push_back(layer);
    }

    if (!have_input)
        throw ConfigError("network spec: missing 'input' line");
    if (spec.layers.empty())
        throw ConfigError("network spec: no layers");
    for (std::size_t i = 0; i < spec.layers.size(); ++i)
        if (spec.layers[i].kind == LayerKind::Softmax && i + 1 != spec.layers.size())
            throw ConfigError("network spec: softmax must be the final layer");
    infer_shapes(spec); // validates layer-by-layer shape consistency
    return spec;
}

NetworkSpec load_network_spec(const std::string& path, int num_classes) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open network spec: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_network_spec(ss.str(), num_classes);
}

std::vector<std::vector<int>> infer_shapes(const NetworkSpec& spec) {
    std::vector<std::vector<int>> shapes;
    std::vector<int> cur = {spec.in_channels, spec.in_h, spec.in_w};
    shapes.push_back(cur);
    for (const auto& layer : spec.layers) {
        switch (layer.kind) {
        case LayerKind::Conv: {
            if (cur.size() != 3)
                throw ShapeError("conv layer after flattening fc stage");
            const int oh = conv_out_extent(cur[1], layer.kernel_h, layer.stride, layer.pad);
            const int ow = conv_out_extent(cur[2], layer.kernel_w, layer.stride, layer.pad);
            cur = {layer.filters, oh, ow};
            break;
        }
        case LayerKind::MaxPool: {
            if (cur.size() != 3)
                throw ShapeError("maxpool layer after flattening fc stage");
            if (layer.kernel_h > cur[1] || layer.kernel_w > cur[2])
                throw ShapeError("maxpool window larger than input " + shape_str(cur));
            cur = {cur[0], (cur[1] - layer.kernel_h) / layer.stride + 1,
                   (cur[2] - layer.kernel_w) / layer.stride + 1};
            break;
        }
        case LayerKind::Lrn:
            if (cur.size() != 3)
                throw ShapeError("lrn layer needs a channel dimension");
            break;
        case LayerKind::Fc: {
            int flat = 1;
            for (int d : cur)
                flat *= d;
            cur = {layer.filters};
            (void)flat;
            break;
        }
        case LayerKind::Dropout:
        case LayerKind::Relu:
        case LayerKind::Softmax:
            break;
        }
        shapes.push_back(cur);
    }
    return shapes;
}

long long Network::num_params() const {
    long long n = 0;
    for (std::size_t i = 0; i < spec.layers.size(); ++i)
        n += (long long)weights[i].data.size() + (long long)biases[i].data.size();
    return n;
}

int Network::final_fc_index() const {
    for (int i = static_cast<int>(spec.layers.size()) - 1; i >= 0; --i)
        if (spec.layers[i].kind == LayerKind::Fc)
            return i;
    throw ShapeError("network has no fc layer");
}

int Network::feature_dim() const {
    const auto shapes = infer_shapes(spec);
    const auto& s = shapes[static_cast<std::size_t>(final_fc_index())];
    int n = 1;
    for (int d : s)
        n *= d;
    return n;
}

Network init_network(const NetworkSpec& spec, Rng& rng) {
    Network net;
    net.spec = spec;
    const auto shapes = infer_shapes(spec);
    net.weights.resize(spec.layers.size());
    net.biases.resize(spec.layers.size());
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const auto& layer = spec.layers[i];
        if (layer.kind == LayerKind::Conv) {
            const int in_c = shapes[i][0];
            net.weights[i] =
                glorot_init<float>({layer.filters, in_c, layer.kernel_h, layer.kernel_w}, rng);
            net.biases[i] = Tensor({layer.filters});
        } else if (layer.kind == LayerKind::Fc) {
            int in_w = 1;
            for (int d : shapes[i])
                in_w *= d;
            net.weights[i] = glorot_init<float>({layer.filters, in_w}, rng);
            net.biases[i] = Tensor({layer.filters});
        }
    }
    return net;
}

namespace {

Tensor flatten_to_2d(const Tensor& t) {
    Tensor out = t;
    const int n = t.dim(0);
    out.shape = {n, static_cast<int>(t.size()) / n};
    return out;
}

} // namespace

Tensor forward(const Network& net, const Tensor& batch, RunMode mode, Rng& rng,
               ForwardState* state) {
    if (batch.ndim() != 4 || batch.dim(1) != net.spec.in_channels ||
        batch.dim(2) != net.spec.in_h || batch.dim(3) != net.spec.in_w)
        throw ShapeError("forward: batch shape " + shape_str(batch.shape) +
                         " does not match network input (" +
                         std::to_string(net.spec.in_channels) + "," +
                         std::to_string(net.spec.in_h) + "," + std::to_string(net.spec.in_w) + ")");
    if (state) {
        state->inputs.assign(net.spec.layers.size(), Tensor());
        state->pool_argmax.assign(net.spec.layers.size(), {});
        state->dropout_masks.assign(net.spec.layers.size(), Tensor());
    }

    Tensor cur = batch;
    for (std::size_t i = 0; i < net.spec.layers.size(); ++i) {
        const auto& layer = net.spec.layers[i];
        if (state)
            state->inputs[i] = cur;
        switch (layer.kind) {
        case LayerKind::Conv:
            cur = conv2d_forward(cur, net.weights[i], net.biases[i], layer.stride, layer.pad);
            break;
        case LayerKind::Lrn:
            cur = lrn_forward(cur, layer.lrn);
            break;
        case LayerKind::MaxPool: {
            auto res = maxpool_forward(cur, layer.kernel_h, layer.kernel_w, layer.stride);
            if (state)
                state->pool_argmax[i] = std::move(res.argmax);
            cur = std::move(res.output);
            break;
        }
        case LayerKind::Fc:
            cur = fc_forward(flatten_to_2d(cur), net.weights[i], net.biases[i]);
            break;
        case LayerKind::Relu:
            cur = relu_forward(cur);
            break;
        case LayerKind::Dropout: {
            auto res = dropout_forward(cur, layer.dropout_p, mode, rng);
            if (state)
                state->dropout_masks[i] = std::move(res.mask);
            cur = std::move(res.output);
            break;
        }
        case LayerKind::Softmax:
            // loss boundary: forward yields logits
            break;
        }
    }
    return cur;
}

ParamGrads backward(const Network& net, const ForwardState& state, const Tensor& grad_logits) {
    ParamGrads grads;
    grads.weights.resize(net.spec.layers.size());
    grads.biases.resize(net.spec.layers.size());

    Tensor grad = grad_logits;
    for (int i = static_cast<int>(net.spec.layers.size()) - 1; i >= 0; --i) {
        const auto& layer = net.spec.layers[static_cast<std::size_t>(i)];
        const Tensor& input = state.inputs[static_cast<std::size_t>(i)];
        switch (layer.kind) {
        case LayerKind::Conv: {
            auto g = conv2d_backward(grad, input, net.weights[static_cast<std::size_t>(i)],
                                     layer.stride, layer.pad);
            grads.weights[static_cast<std::size_t>(i)] = std::move(g.weights);
            grads.biases[static_cast<std::size_t>(i)] = std::move(g.bias);
            grad = std::move(g.input);
            break;
        }
        case LayerKind::Lrn:
            grad = lrn_backward(grad, input, layer.lrn);
            break;
        case LayerKind::MaxPool:
            grad = maxpool_backward(grad, state.pool_argmax[static_cast<std::size_t>(i)],
                                    input.shape);
            break;
        case LayerKind::Fc: {
            auto g = fc_backward(grad, flatten_to_2d(input),
                                 net.weights[static_cast<std::size_t>(i)]);
            grads.weights[static_cast<std::size_t>(i)] = std::move(g.weights);
            grads.biases[static_cast<std::size_t>(i)] = std::move(g.bias);
            grad = std::move(g.input);
            grad.shape = input.shape;
            break;
        }
        case LayerKind::Relu:
            grad = relu_backward(grad, input);
            break;
        case LayerKind::Dropout:
            grad = dropout_backward(grad, state.dropout_masks[static_cast<std::size_t>(i)]);
            break;
        case LayerKind::Softmax:
            break;
        }
    }
    return grads;
}

std::vector<float> extract_features(const Network& net, const Tensor& image) {
    const int tap = net.final_fc_index();
    Tensor cur = image;
    if (cur.ndim() == 3)
        cur.shape = {1, cur.dim(0), cur.dim(1), cur.dim(2)};
    Rng rng(0); // inference mode consumes no randomness
    for (int i = 0; i < tap; ++i) {
        const auto& layer = net.spec.layers[static_cast<std::size_t>(i)];
        switch (layer.kind) {
        case LayerKind::Conv:
            cur = conv2d_forward(cur, net.weights[static_cast<std::size_t>(i)],
                                 net.biases[static_cast<std::size_t>(i)], layer.stride, layer.pad);
            break;
        case LayerKind::Lrn:
            cur = lrn_forward(cur, layer.lrn);
            break;
        case LayerKind::MaxPool:
            cur = maxpool_forward(cur, layer.kernel_h, layer.kernel_w, layer.stride).output;
            break;
        case LayerKind::Fc:
            cur = fc_forward(flatten_to_2d(cur), net.weights[static_cast<std::size_t>(i)],
                             net.biases[static_cast<std::size_t>(i)]);
            break;
        case LayerKind::Relu:
            cur = relu_forward(cur);
            break;
        case LayerKind::Dropout:
            cur = dropout_forward(cur, layer.dropout_p, RunMode::Inference, rng).output;
            break;
        case LayerKind::Softmax:
            break;
        }
    }
    return std::vector<float>(cur.data.begin(), cur.data.end());
}

} // namespace sigver
