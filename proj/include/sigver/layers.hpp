#ifndef SIGVER_LAYERS_HPP
#define SIGVER_LAYERS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sigver/rng.hpp"
#include "sigver/tensor.hpp"

// Layer math for the conv/lrn/pool/fc/relu/dropout/softmax stack. Everything
// is templated on the scalar type: the network trains in float, gradient
// checks instantiate double. Convolution is cross-correlation (no kernel
// flip) and all output extents follow the floor rule
// floor((in + 2*pad - kernel) / stride) + 1.

namespace sigver {

inline int conv_out_extent(int in, int kernel, int stride, int pad) {
    const int span = in + 2 * pad - kernel;
    if (span < 0)
        throw ShapeError("kernel larger than padded input");
    return span / stride + 1;
}

template <typename T>
TensorT<T> conv2d_forward(const TensorT<T>& input, const TensorT<T>& weights,
                          const TensorT<T>& bias, int stride, int pad) {
    if (input.ndim() != 4 || weights.ndim() != 4)
        throw ShapeError("conv2d_forward: expects 4-d input and weights");
    const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    const int f = weights.dim(0), kh = weights.dim(2), kw = weights.dim(3);
    if (weights.dim(1) != c)
        throw ShapeError("conv2d_forward: channel mismatch " + shape_str(input.shape) + " vs " +
                         shape_str(weights.shape));
    if (bias.ndim() != 1 || bias.dim(0) != f)
        throw ShapeError("conv2d_forward: bias must have one entry per filter");
    const int oh = conv_out_extent(h, kh, stride, pad);
    const int ow = conv_out_extent(w, kw, stride, pad);

    TensorT<T> out({n, f, oh, ow});
    const T* in_p = input.ptr();
    const T* w_p = weights.ptr();
    T* out_p = out.ptr();
    for (int bi = 0; bi < n; ++bi)
        for (int fi = 0; fi < f; ++fi) {
            T* o_plane = out_p + (static_cast<std::size_t>(bi) * f + fi) * oh * ow;
            std::fill(o_plane, o_plane + static_cast<std::size_t>(oh) * ow, bias.data[fi]);
            for (int ci = 0; ci < c; ++ci) {
                const T* i_plane = in_p + (static_cast<std::size_t>(bi) * c + ci) * h * w;
                const T* k_plane = w_p + (static_cast<std::size_t>(fi) * c + ci) * kh * kw;
                for (int ky = 0; ky < kh; ++ky)
                    for (int kx = 0; kx < kw; ++kx) {
                        const T wv = k_plane[ky * kw + kx];
                        for (int oy = 0; oy < oh; ++oy) {
                            const int iy = oy * stride + ky - pad;
                            if (iy < 0 || iy >= h)
                                continue;
                            const T* i_row = i_plane + static_cast<std::size_t>(iy) * w;
                            T* o_row = o_plane + static_cast<std::size_t>(oy) * ow;
                            for (int ox = 0; ox < ow; ++ox) {
                                const int ix = ox * stride + kx - pad;
                                if (ix < 0 || ix >= w)
                                    continue;
                                o_row[ox] += wv * i_row[ix];
                            }
                        }
                    }
            }
        }
    return out;
}

template <typename T>
struct ConvGrads {
    TensorT<T> input;
    TensorT<T> weights;
    TensorT<T> bias;
};

template <typename T>
ConvGrads<T> conv2d_backward(const TensorT<T>& grad_out, const TensorT<T>& input,
                             const TensorT<T>& weights, int stride, int pad) {
    const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    const int f = weights.dim(0), kh = weights.dim(2), kw = weights.dim(3);
    const int oh = conv_out_extent(h, kh, stride, pad);
    const int ow = conv_out_extent(w, kw, stride, pad);
    if (grad_out.shape != std::vector<int>{n, f, oh, ow})
        throw ShapeError("conv2d_backward: grad_out shape " + shape_str(grad_out.shape) +
                         " inconsistent with forward output");

    ConvGrads<T> g{TensorT<T>(input.shape), TensorT<T>(weights.shape),
                   TensorT<T>(std::vector<int>{f})};
    const T* go_p = grad_out.ptr();
    const T* in_p = input.ptr();
    const T* w_p = weights.ptr();
    for (int bi = 0; bi < n; ++bi)
        for (int fi = 0; fi < f; ++fi) {
            const T* go_plane = go_p + (static_cast<std::size_t>(bi) * f + fi) * oh * ow;
            T gb = T(0);
            for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i)
                gb += go_plane[i];
            g.bias.data[fi] += gb;
            for (int ci = 0; ci < c; ++ci) {
                const T* i_plane = in_p + (static_cast<std::size_t>(bi) * c + ci) * h * w;
                T* gi_plane = g.input.ptr() + (static_cast<std::size_t>(bi) * c + ci) * h * w;
                const T* k_plane = w_p + (static_cast<std::size_t>(fi) * c + ci) * kh * kw;
                T* gw_plane = g.weights.ptr() + (static_cast<std::size_t>(fi) * c + ci) * kh * kw;
                for (int ky = 0; ky < kh; ++ky)
                    for (int kx = 0; kx < kw; ++kx) {
                        const T wv = k_plane[ky * kw + kx];
                        T gw = T(0);
                        for (int oy = 0; oy < oh; ++oy) {
                            const int iy = oy * stride + ky - pad;
                            if (iy < 0 || iy >= h)
                                continue;
                            const T* i_row = i_plane + static_cast<std::size_t>(iy) * w;
                            T* gi_row = gi_plane + static_cast<std::size_t>(iy) * w;
                            const T* go_row = go_plane + static_cast<std::size_t>(oy) * ow;
                            for (int ox = 0; ox < ow; ++ox) {
                                const int ix = ox * stride + kx - pad;
                                if (ix < 0 || ix >= w)
                                    continue;
                                const T gv = go_row[ox];
                                gw += gv * i_row[ix];
                                gi_row[ix] += gv * wv;
                            }
                        }
                        gw_plane[ky * kw + kx] += gw;
                    }
            }
        }
    return g;
}

struct LrnParams {
    double alpha = 1e-4;
    double beta = 0.75;
    double k = 2.0;
    int n = 5; // window size in channels
};

// Window of n channels centered at c, truncated at the edges. For even n the
// extra channel goes to the high side.
inline void lrn_window(int c, int channels, int n, int& lo, int& hi) {
    lo = std::max(0, c - (n - 1) / 2);
    hi = std::min(channels - 1, c + n / 2);
}

template <typename T>
TensorT<T> lrn_forward(const TensorT<T>& input, const LrnParams& p) {
    if (input.ndim() != 4)
        throw ShapeError("lrn_forward: expects 4-d input");
    const int n = input.dim(0), c = input.dim(1);
    const std::size_t plane = static_cast<std::size_t>(input.dim(2)) * input.dim(3);

    TensorT<T> out(input.shape);
    std::vector<T> sumsq(plane);
    for (int bi = 0; bi < n; ++bi) {
        const T* in_b = input.ptr() + static_cast<std::size_t>(bi) * c * plane;
        T* out_b = out.ptr() + static_cast<std::size_t>(bi) * c * plane;
        for (int ci = 0; ci < c; ++ci) {
            int lo, hi;
            lrn_window(ci, c, p.n, lo, hi);
            std::fill(sumsq.begin(), sumsq.end(), T(0));
            for (int j = lo; j <= hi; ++j) {
                const T* a = in_b + static_cast<std::size_t>(j) * plane;
                for (std::size_t i = 0; i < plane; ++i)
                    sumsq[i] += a[i] * a[i];
            }
            const T* a = in_b + static_cast<std::size_t>(ci) * plane;
            T* b = out_b + static_cast<std::size_t>(ci) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                const T scale = static_cast<T>(p.k) + static_cast<T>(p.alpha) * sumsq[i];
                b[i] = a[i] * static_cast<T>(std::pow(static_cast<double>(scale), -p.beta));
            }
        }
    }
    return out;
}

template <typename T>
TensorT<T> lrn_backward(const TensorT<T>& grad_out, const TensorT<T>& input, const LrnParams& p) {
    if (grad_out.shape != input.shape)
        throw ShapeError("lrn_backward: grad_out shape mismatch");
    const int n = input.dim(0), c = input.dim(1);
    const std::size_t plane = static_cast<std::size_t>(input.dim(2)) * input.dim(3);

    TensorT<T> grad_in(input.shape);
    // per-channel-plane buffers: s_c^-beta and t_c = g_c * a_c * s_c^-(beta+1)
    std::vector<T> sumsq(plane), spowm(plane * c), tbuf(plane * c);
    for (int bi = 0; bi < n; ++bi) {
        const T* in_b = input.ptr() + static_cast<std::size_t>(bi) * c * plane;
        const T* go_b = grad_out.ptr() + static_cast<std::size_t>(bi) * c * plane;
        T* gi_b = grad_in.ptr() + static_cast<std::size_t>(bi) * c * plane;
        for (int ci = 0; ci < c; ++ci) {
            int lo, hi;
            lrn_window(ci, c, p.n, lo, hi);
            std::fill(sumsq.begin(), sumsq.end(), T(0));
            for (int j = lo; j <= hi; ++j) {
                const T* a = in_b + static_cast<std::size_t>(j) * plane;
                for (std::size_t i = 0; i < plane; ++i)
                    sumsq[i] += a[i] * a[i];
            }
            const T* a = in_b + static_cast<std::size_t>(ci) * plane;
            const T* g = go_b + static_cast<std::size_t>(ci) * plane;
            T* sp = spowm.data() + static_cast<std::size_t>(ci) * plane;
            T* t = tbuf.data() + static_cast<std::size_t>(ci) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                const double scale = p.k + p.alpha * static_cast<double>(sumsq[i]);
                sp[i] = static_cast<T>(std::pow(scale, -p.beta));
                t[i] = static_cast<T>(g[i] * a[i] * std::pow(scale, -p.beta - 1.0));
            }
        }
        // d b_c / d a_i couples channel i to every window containing it:
        // c in [i - n/2, i + (n-1)/2]
        for (int ci = 0; ci < c; ++ci) {
            const int lo = std::max(0, ci - p.n / 2);
            const int hi = std::min(c - 1, ci + (p.n - 1) / 2);
            const T* a = in_b + static_cast<std::size_t>(ci) * plane;
            const T* g = go_b + static_cast<std::size_t>(ci) * plane;
            const T* sp = spowm.data() + static_cast<std::size_t>(ci) * plane;
            T* gi = gi_b + static_cast<std::size_t>(ci) * plane;
            const T coef = static_cast<T>(2.0 * p.alpha * p.beta);
            for (std::size_t i = 0; i < plane; ++i)
                gi[i] = g[i] * sp[i];
            for (int j = lo; j <= hi; ++j) {
                const T* t = tbuf.data() + static_cast<std::size_t>(j) * plane;
                for (std::size_t i = 0; i < plane; ++i)
                    gi[i] -= coef * a[i] * t[i];
            }
        }
    }
    return grad_in;
}

template <typename T>
struct PoolResult {
    TensorT<T> output;
    std::vector<std::int64_t> argmax; // flat input index per output element
};

template <typename T>
PoolResult<T> maxpool_forward(const TensorT<T>& input, int pool_h, int pool_w, int stride) {
    if (input.ndim() != 4)
        throw ShapeError("maxpool_forward: expects 4-d input");
    const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    if (pool_h > h || pool_w > w)
        throw ShapeError("maxpool_forward: window larger than input");
    const int oh = (h - pool_h) / stride + 1;
    const int ow = (w - pool_w) / stride + 1;

    PoolResult<T> res{TensorT<T>({n, c, oh, ow}), {}};
    res.argmax.resize(res.output.size());
    const T* in_p = input.ptr();
    T* out_p = res.output.ptr();
    std::size_t oi = 0;
    for (int bi = 0; bi < n; ++bi)
        for (int ci = 0; ci < c; ++ci) {
            const std::size_t base = (static_cast<std::size_t>(bi) * c + ci) * h * w;
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox, ++oi) {
                    const int iy0 = oy * stride, ix0 = ox * stride;
                    T best = in_p[base + static_cast<std::size_t>(iy0) * w + ix0];
                    std::int64_t best_idx = static_cast<std::int64_t>(base) + iy0 * w + ix0;
                    for (int ky = 0; ky < pool_h; ++ky)
                        for (int kx = 0; kx < pool_w; ++kx) {
                            const std::size_t idx = base + static_cast<std::size_t>(iy0 + ky) * w + (ix0 + kx);
                            if (in_p[idx] > best) { // strict: first max wins ties
                                best = in_p[idx];
                                best_idx = static_cast<std::int64_t>(idx);
                            }
                        }
                    out_p[oi] = best;
                    res.argmax[oi] = best_idx;
                }
        }
    return res;
}

template <typename T>
TensorT<T> maxpool_backward(const TensorT<T>& grad_out, const std::vector<std::int64_t>& argmax,
                            const std::vector<int>& input_shape) {
    if (grad_out.size() != argmax.size())
        throw ShapeError("maxpool_backward: grad_out/argmax size mismatch");
    TensorT<T> grad_in(input_shape);
    for (std::size_t i = 0; i < argmax.size(); ++i)
        grad_in.data[static_cast<std::size_t>(argmax[i])] += grad_out.data[i];
    return grad_in;
}

// Fully connected: out = W * in + b with W of shape [out, in]. Inputs with
// more than 2 dims are treated as [batch, rest-flattened].
template <typename T>
TensorT<T> fc_forward(const TensorT<T>& input, const TensorT<T>& weights, const TensorT<T>& bias) {
    const int n = input.dim(0);
    const std::size_t in_w = input.size() / static_cast<std::size_t>(n);
    const int out_w = weights.dim(0);
    if (weights.ndim() != 2 || static_cast<std::size_t>(weights.dim(1)) != in_w)
        throw ShapeError("fc_forward: weight shape " + shape_str(weights.shape) +
                         " does not match input width " + std::to_string(in_w));
    if (bias.dim(0) != out_w)
        throw ShapeError("fc_forward: bias width mismatch");

    TensorT<T> out({n, out_w});
    for (int bi = 0; bi < n; ++bi) {
        const T* x = input.ptr() + static_cast<std::size_t>(bi) * in_w;
        T* y = out.ptr() + static_cast<std::size_t>(bi) * out_w;
        for (int o = 0; o < out_w; ++o) {
            const T* wrow = weights.ptr() + static_cast<std::size_t>(o) * in_w;
            T acc = bias.data[o];
            for (std::size_t i = 0; i < in_w; ++i)
                acc += wrow[i] * x[i];
            y[o] = acc;
        }
    }
    return out;
}

template <typename T>
struct FcGrads {
    TensorT<T> input;
    TensorT<T> weights;
    TensorT<T> bias;
};

template <typename T>
FcGrads<T> fc_backward(const TensorT<T>& grad_out, const TensorT<T>& input,
                       const TensorT<T>& weights) {
    const int n = input.dim(0);
    const std::size_t in_w = input.size() / static_cast<std::size_t>(n);
    const int out_w = weights.dim(0);
    if (grad_out.shape != std::vector<int>{n, out_w})
        throw ShapeError("fc_backward: grad_out shape mismatch");

    FcGrads<T> g{TensorT<T>(input.shape), TensorT<T>(weights.shape), TensorT<T>({out_w})};
    for (int bi = 0; bi < n; ++bi) {
        const T* x = input.ptr() + static_cast<std::size_t>(bi) * in_w;
        const T* go = grad_out.ptr() + static_cast<std::size_t>(bi) * out_w;
        T* gx = g.input.ptr() + static_cast<std::size_t>(bi) * in_w;
        for (int o = 0; o < out_w; ++o) {
            const T gv = go[o];
            const T* wrow = weights.ptr() + static_cast<std::size_t>(o) * in_w;
            T* gwrow = g.weights.ptr() + static_cast<std::size_t>(o) * in_w;
            g.bias.data[o] += gv;
            for (std::size_t i = 0; i < in_w; ++i) {
                gx[i] += gv * wrow[i];
                gwrow[i] += gv * x[i];
            }
        }
    }
    return g;
}

template <typename T>
TensorT<T> relu_forward(const TensorT<T>& input) {
    TensorT<T> out = input;
    for (T& v : out.data)
        if (v < T(0))
            v = T(0);
    return out;
}

template <typename T>
TensorT<T> relu_backward(const TensorT<T>& grad_out, const TensorT<T>& input) {
    if (grad_out.shape != input.shape)
        throw ShapeError("relu_backward: shape mismatch");
    TensorT<T> grad_in = grad_out;
    for (std::size_t i = 0; i < grad_in.size(); ++i)
        if (input.data[i] <= T(0))
            grad_in.data[i] = T(0);
    return grad_in;
}

enum class RunMode { Train, Inference };

template <typename T>
struct DropoutResult {
    TensorT<T> output;
    TensorT<T> mask; // 0 for dropped units, 1/(1-p) for survivors
};

// Inverted dropout: train-time scaling by 1/(1-p), identity at inference.
template <typename T>
DropoutResult<T> dropout_forward(const TensorT<T>& input, double p, RunMode mode, Rng& rng) {
    if (p < 0.0 || p >= 1.0)
        throw ConfigError("dropout: rate must be in [0, 1)");
    DropoutResult<T> res{input, TensorT<T>(input.shape, T(1))};
    if (mode == RunMode::Inference || p == 0.0)
        return res;
    const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
    for (std::size_t i = 0; i < input.size(); ++i) {
        if (rng.uniform() < p) {
            res.mask.data[i] = T(0);
            res.output.data[i] = T(0);
        } else {
            res.mask.data[i] = keep_scale;
            res.output.data[i] = input.data[i] * keep_scale;
        }
    }
    return res;
}

template <typename T>
TensorT<T> dropout_backward(const TensorT<T>& grad_out, const TensorT<T>& mask) {
    if (grad_out.shape != mask.shape)
        throw ShapeError("dropout_backward: shape mismatch");
    TensorT<T> grad_in = grad_out;
    for (std::size_t i = 0; i < grad_in.size(); ++i)
        grad_in.data[i] *= mask.data[i];
    return grad_in;
}

template <typename T>
struct XentResult {
    double loss = 0.0;    // mean over the batch
    TensorT<T> grad;      // d(loss)/d(logits)
    int correct = 0;      // argmax == label count
};

// Softmax + cross-entropy on logits [batch, classes], max-subtraction for
// stability. Gradient is (softmax - onehot) / batch.
template <typename T>
XentResult<T> softmax_xent(const TensorT<T>& logits, const std::vector<int>& labels) {
    if (logits.ndim() != 2)
        throw ShapeError("softmax_xent: expects [batch, classes] logits");
    const int n = logits.dim(0), k = logits.dim(1);
    if (static_cast<int>(labels.size()) != n)
        throw ShapeError("softmax_xent: label count mismatch");

    XentResult<T> res{0.0, TensorT<T>(logits.shape), 0};
    for (int bi = 0; bi < n; ++bi) {
        const int y = labels[bi];
        if (y < 0 || y >= k)
            throw ShapeError("softmax_xent: label out of range");
        const T* z = logits.ptr() + static_cast<std::size_t>(bi) * k;
        T* g = res.grad.ptr() + static_cast<std::size_t>(bi) * k;
        double zmax = z[0];
        int argmax = 0;
        for (int j = 1; j < k; ++j)
            if (z[j] > zmax) {
                zmax = z[j];
                argmax = j;
            }
        double sum = 0.0;
        for (int j = 0; j < k; ++j)
            sum += std::exp(static_cast<double>(z[j]) - zmax);
        const double logsum = std::log(sum);
        res.loss += -(static_cast<double>(z[y]) - zmax - logsum);
        if (argmax == y)
            res.correct++;
        for (int j = 0; j < k; ++j) {
            const double p = std::exp(static_cast<double>(z[j]) - zmax - logsum);
            g[j] = static_cast<T>((p - (j == y ? 1.0 : 0.0)) / n);
        }
    }
    res.loss /= n;
    return res;
}

template <typename T>
TensorT<T> softmax_probs(const TensorT<T>& logits) {
    const int n = logits.dim(0), k = logits.dim(1);
    TensorT<T> out(logits.shape);
    for (int bi = 0; bi < n; ++bi) {
        const T* z = logits.ptr() + static_cast<std::size_t>(bi) * k;
        T* p = out.ptr() + static_cast<std::size_t>(bi) * k;
        double zmax = z[0];
        for (int j = 1; j < k; ++j)
            zmax = std::max(zmax, static_cast<double>(z[j]));
        double sum = 0.0;
        for (int j = 0; j < k; ++j)
            sum += std::exp(static_cast<double>(z[j]) - zmax);
        for (int j = 0; j < k; ++j)
            p[j] = static_cast<T>(std::exp(static_cast<double>(z[j]) - zmax) / sum);
    }
    return out;
}

// Glorot/Bengio normalized uniform initialization on [-L, L],
// L = sqrt(6 / (fan_in + fan_out)). Conv fans include the kernel area.
template <typename T>
TensorT<T> glorot_init(const std::vector<int>& shape, Rng& rng) {
    double fan_in, fan_out;
    if (shape.size() == 4) {
        fan_in = static_cast<double>(shape[1]) * shape[2] * shape[3];
        fan_out = static_cast<double>(shape[0]) * shape[2] * shape[3];
    } else if (shape.size() == 2) {
        fan_in = shape[1];
        fan_out = shape[0];
    } else {
        throw ShapeError("glorot_init: expects 2-d or 4-d shape");
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    TensorT<T> out(shape);
    for (T& v : out.data)
        v = static_cast<T>(rng.uniform(-limit, limit));
    return out;
}

} // namespace sigver

#endif
