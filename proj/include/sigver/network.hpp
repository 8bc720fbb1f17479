#ifndef SIGVER_NETWORK_HPP
#define SIGVER_NETWORK_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sigver/layers.hpp"
#include "sigver/tensor.hpp"

namespace sigver {

enum class LayerKind { Conv, Lrn, MaxPool, Fc, Dropout, Relu, Softmax };

std::string layer_kind_name(LayerKind k);

struct LayerSpec {
    LayerKind kind = LayerKind::Relu;
    int filters = 0;  // conv filter count / fc width
    int kernel_h = 0; // conv and pool window
    int kernel_w = 0;
    int stride = 1;
    int pad = 0;
    LrnParams lrn;
    double dropout_p = 0.5;
};

struct NetworkSpec {
    int in_channels = 1;
    int in_h = 0;
    int in_w = 0;
    std::vector<LayerSpec> layers;
};

// Text format, one layer per line:
//   input <channels> <height> <width>
//   conv <filters> <kh> <kw> stride <s> pad <p>
//   relu
//   lrn alpha <a> beta <b> k <k> n <n>
//   maxpool <kh> <kw> stride <s>
//   fc <width|classes>
//   dropout <p>
//   softmax
// "fc classes" takes its width from the class count at instantiation time.
NetworkSpec parse_network_spec(const std::string& text, int num_classes);
NetworkSpec load_network_spec(const std::string& path, int num_classes);

// Per-layer activation shapes (channels-first, excluding batch), starting
// with the input shape. Entry i+1 is the output of layer i.
std::vector<std::vector<int>> infer_shapes(const NetworkSpec& spec);

struct Network {
    NetworkSpec spec;
    std::vector<Tensor> weights; // empty tensor for layers without parameters
    std::vector<Tensor> biases;

    long long num_params() const;
    // index of the final fc layer; features are tapped at its input
    int final_fc_index() const;
    int feature_dim() const;
};

// Glorot-uniform weights, zero biases.
Network init_network(const NetworkSpec& spec, Rng& rng);

// Everything backward needs from a training-mode forward pass.
struct ForwardState {
    std::vector<Tensor> inputs; // input tensor of each layer
    std::vector<std::vector<std::int64_t>> pool_argmax;
    std::vector<Tensor> dropout_masks;
};

// Forward through all layers up to the logits (the softmax layer is the loss
// boundary and is not applied). rng is only consumed by dropout in train mode.
Tensor forward(const Network& net, const Tensor& batch, RunMode mode, Rng& rng,
               ForwardState* state = nullptr);

struct ParamGrads {
    std::vector<Tensor> weights;
    std::vector<Tensor> biases;
};

ParamGrads backward(const Network& net, const ForwardState& state, const Tensor& grad_logits);

// phi(X): inference-mode activations entering the final fc layer, flattened.
// Post-ReLU for the canonical stack, hence non-negative.
std::vector<float> extract_features(const Network& net, const Tensor& image);

} // namespace sigver

#endif
