#include "sigver/gradcheck.hpp"

#include <cmath>
#include <functional>

#include "sigver/layers.hpp"
#include "sigver/rng.hpp"
#include "sigver/tensor.hpp"

namespace sigver {

namespace {

using DTensor = TensorT<double>;

DTensor random_tensor(Rng& rng, const std::vector<int>& shape, double lo, double hi) {
    DTensor t(shape);
    for (auto& v : t.data) v = rng.uniform(lo, hi);
    return t;
}

double rel_err(double a, double b) {
    double denom = std::max({1e-3, std::fabs(a), std::fabs(b)});
    return std::fabs(a - b) / denom;
}

// loss(inputs) = sum(proj * fwd(inputs)); analytic gradients come from the
// layer's backward with grad_out = proj. Every element of every input tensor
// is perturbed centrally.
double check_against_fd(const std::function<DTensor(const std::vector<DTensor>&)>& fwd,
                        const std::vector<std::vector<double>>& analytic,
                        std::vector<DTensor> inputs, const DTensor& proj, double step) {
    auto loss = [&](const std::vector<DTensor>& in) {
        DTensor out = fwd(in);
        double s = 0.0;
        for (std::size_t i = 0; i < out.data.size(); i++) s += proj.data[i] * out.data[i];
        return s;
    };
    double worst = 0.0;
    for (std::size_t t = 0; t < inputs.size(); t++) {
        for (std::size_t e = 0; e < inputs[t].data.size(); e++) {
            double keep = inputs[t].data[e];
            inputs[t].data[e] = keep + step;
            double up = loss(inputs);
            inputs[t].data[e] = keep - step;
            double down = loss(inputs);
            inputs[t].data[e] = keep;
            double numeric = (up - down) / (2.0 * step);
            worst = std::max(worst, rel_err(analytic[t][e], numeric));
        }
    }
    return worst;
}

double check_conv(Rng& rng) {
    const int n = 1 + (int)rng.below(2);
    const int c = 1 + (int)rng.below(3);
    const int f = 1 + (int)rng.below(3);
    const int k = 1 + (int)rng.below(3);
    const int stride = 1 + (int)rng.below(2);
    const int pad = (int)rng.below(3);
    int h = k, w = k;
    h += (int)rng.below(5);
    w += (int)rng.below(5);
    DTensor input = random_tensor(rng, {n, c, h, w}, -1.0, 1.0);
    DTensor weights = random_tensor(rng, {f, c, k, k}, -1.0, 1.0);
    DTensor bias = random_tensor(rng, {f}, -0.5, 0.5);
    DTensor out = conv2d_forward(input, weights, bias, stride, pad);
    DTensor proj = random_tensor(rng, out.shape, 0.5, 1.5);
    ConvGrads<double> g = conv2d_backward(proj, input, weights, stride, pad);
    auto fwd = [&](const std::vector<DTensor>& in) {
        return conv2d_forward(in[0], in[1], in[2], stride, pad);
    };
    return check_against_fd(fwd, {g.input.data, g.weights.data, g.bias.data},
                            {input, weights, bias}, proj, 1e-3);
}

double check_lrn(Rng& rng) {
    LrnParams p;
    p.alpha = 1e-4 + rng.uniform() * 0.5; // exercise far beyond the canonical value
    p.beta = 0.5 + rng.uniform() * 0.5;
    p.k = 1.0 + rng.uniform();
    p.n = 1 + (int)rng.below(7);
    const int n = 1 + (int)rng.below(2);
    const int c = 1 + (int)rng.below(8);
    const int h = 2 + (int)rng.below(4);
    const int w = 2 + (int)rng.below(4);
    DTensor input = random_tensor(rng, {n, c, h, w}, -1.5, 1.5);
    DTensor out = lrn_forward(input, p);
    DTensor proj = random_tensor(rng, out.shape, 0.5, 1.5);
    DTensor g = lrn_backward(proj, input, p);
    auto fwd = [&](const std::vector<DTensor>& in) { return lrn_forward(in[0], p); };
    return check_against_fd(fwd, {g.data}, {input}, proj, 1e-4);
}

double check_maxpool(Rng& rng) {
    const int n = 1 + (int)rng.below(2);
    const int c = 1 + (int)rng.below(3);
    const int k = 2 + (int)rng.below(2);
    const int stride = 1 + (int)rng.below(2);
    const int h = k + (int)rng.below(5);
    const int w = k + (int)rng.below(5);
    const double step = 1e-5;
    DTensor input;
    // Redraw until every pool window is free of near-ties, so the finite
    // difference cannot flip an argmax.
    for (int attempt = 0;; attempt++) {
        input = random_tensor(rng, {n, c, h, w}, -1.0, 1.0);
        const int oh = (h - k) / stride + 1;
        const int ow = (w - k) / stride + 1;
        bool ok = true;
        for (int ni = 0; ni < n && ok; ni++)
            for (int ci = 0; ci < c && ok; ci++)
                for (int oy = 0; oy < oh && ok; oy++)
                    for (int ox = 0; ox < ow && ok; ox++) {
                        double vals[16];
                        int cnt = 0;
                        for (int ky = 0; ky < k; ky++)
                            for (int kx = 0; kx < k; kx++) {
                                int iy = oy * stride + ky, ix = ox * stride + kx;
                                vals[cnt++] = input.data[(((std::size_t)ni * c + ci) * h + iy) * w +
                                                         ix];
                            }
                        for (int a = 0; a < cnt && ok; a++)
                            for (int b = a + 1; b < cnt; b++)
                                if (std::fabs(vals[a] - vals[b]) < 10.0 * step) {
                                    ok = false;
                                    break;
                                }
                    }
        if (ok) break;
        if (attempt > 200) throw TrainingError("maxpool gradcheck could not find tie-free input");
    }
    PoolResult<double> res = maxpool_forward(input, k, k, stride);
    DTensor proj = random_tensor(rng, res.output.shape, 0.5, 1.5);
    DTensor g = maxpool_backward(proj, res.argmax, input.shape);
    auto fwd = [&](const std::vector<DTensor>& in) {
        return maxpool_forward(in[0], k, k, stride).output;
    };
    return check_against_fd(fwd, {g.data}, {input}, proj, step);
}

double check_fc(Rng& rng) {
    const int n = 1 + (int)rng.below(3);
    const int in_w = 1 + (int)rng.below(8);
    const int out_w = 1 + (int)rng.below(6);
    DTensor input = random_tensor(rng, {n, in_w}, -1.0, 1.0);
    DTensor weights = random_tensor(rng, {out_w, in_w}, -1.0, 1.0);
    DTensor bias = random_tensor(rng, {out_w}, -0.5, 0.5);
    DTensor out = fc_forward(input, weights, bias);
    DTensor proj = random_tensor(rng, out.shape, 0.5, 1.5);
    FcGrads<double> g = fc_backward(proj, input, weights);
    auto fwd = [&](const std::vector<DTensor>& in) { return fc_forward(in[0], in[1], in[2]); };
    return check_against_fd(fwd, {g.input.data, g.weights.data, g.bias.data},
                            {input, weights, bias}, proj, 1e-3);
}

double check_relu(Rng& rng) {
    const int n = 1 + (int)rng.below(3);
    const int c = 1 + (int)rng.below(4);
    const int h = 1 + (int)rng.below(6);
    const int w = 1 + (int)rng.below(6);
    const double step = 1e-5;
    DTensor input;
    for (int attempt = 0;; attempt++) {
        input = random_tensor(rng, {n, c, h, w}, -1.0, 1.0);
        bool ok = true;
        for (double v : input.data)
            if (std::fabs(v) < 10.0 * step) {
                ok = false;
                break;
            }
        if (ok) break;
        if (attempt > 200) throw TrainingError("relu gradcheck could not find kink-free input");
    }
    DTensor out = relu_forward(input);
    DTensor proj = random_tensor(rng, out.shape, 0.5, 1.5);
    DTensor g = relu_backward(proj, input);
    auto fwd = [&](const std::vector<DTensor>& in) { return relu_forward(in[0]); };
    return check_against_fd(fwd, {g.data}, {input}, proj, step);
}

double check_dropout(Rng& rng) {
    const int n = 1 + (int)rng.below(3);
    const int c = 2 + (int)rng.below(6);
    const double p = 0.2 + rng.uniform() * 0.6;
    DTensor input = random_tensor(rng, {n, c}, -1.0, 1.0);
    Rng mask_rng(rng.next_u64());
    DropoutResult<double> res = dropout_forward(input, p, RunMode::Train, mask_rng);
    // The mask is held fixed: the sampled function is linear and its gradient
    // must be exactly the mask scaling.
    DTensor proj = random_tensor(rng, res.output.shape, 0.5, 1.5);
    DTensor g = dropout_backward(proj, res.mask);
    auto fwd = [&](const std::vector<DTensor>& in) {
        DTensor out = in[0];
        for (std::size_t i = 0; i < out.data.size(); i++) out.data[i] *= res.mask.data[i];
        return out;
    };
    return check_against_fd(fwd, {g.data}, {input}, proj, 1e-3);
}

double check_softmax_xent(Rng& rng) {
    const int n = 1 + (int)rng.below(4);
    const int k = 2 + (int)rng.below(6);
    DTensor logits = random_tensor(rng, {n, k}, -2.0, 2.0);
    std::vector<int> labels(n);
    for (auto& l : labels) l = (int)rng.below((std::uint64_t)k);
    XentResult<double> res = softmax_xent(logits, labels);
    double worst = 0.0;
    const double step = 1e-4;
    DTensor work = logits;
    for (std::size_t e = 0; e < work.data.size(); e++) {
        double keep = work.data[e];
        work.data[e] = keep + step;
        double up = softmax_xent(work, labels).loss;
        work.data[e] = keep - step;
        double down = softmax_xent(work, labels).loss;
        work.data[e] = keep;
        double numeric = (up - down) / (2.0 * step);
        worst = std::max(worst, rel_err(res.grad.data[e], numeric));
    }
    return worst;
}

} // namespace

GradCheckReport run_gradient_checks(int seeds_per_layer, double tolerance, std::uint64_t seed) {
    GradCheckReport report;
    report.tolerance = tolerance;
    struct Layer {
        const char* name;
        double (*check)(Rng&);
    };
    const Layer layers[] = {
        {"conv", check_conv},       {"lrn", check_lrn},
        {"maxpool", check_maxpool}, {"fc", check_fc},
        {"relu", check_relu},       {"dropout", check_dropout},
        {"softmax-xent", check_softmax_xent},
    };
    for (const Layer& layer : layers) {
        GradCheckEntry entry;
        entry.layer = layer.name;
        entry.seeds = seeds_per_layer;
        for (int s = 0; s < seeds_per_layer; s++) {
            Rng rng(derive_seed(seed, layer.name, (std::uint64_t)s));
            entry.max_rel_err = std::max(entry.max_rel_err, layer.check(rng));
        }
        report.entries.push_back(entry);
    }
    return report;
}

} // namespace sigver
