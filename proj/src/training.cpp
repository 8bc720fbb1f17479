#include "sigver/training.hpp"

#include <cmath>
#include <cstring>
#include <numeric>
#include <ostream>

namespace sigver {

void nesterov_step(Tensor& param, const Tensor& grad, Tensor& velocity, double lr, double mu,
                   double lambda) {
    if (!same_shape(param, grad) || !same_shape(param, velocity))
        throw ShapeError("nesterov_step: param/grad/velocity shape mismatch");
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad.data[i] + lambda * param.data[i];
        const double v = mu * velocity.data[i] - lr * g;
        velocity.data[i] = static_cast<float>(v);
        param.data[i] = static_cast<float>(param.data[i] + v);
    }
}

double lr_schedule(int epoch, const TrainConfig& cfg) {
    if (epoch < 0)
        throw ConfigError("lr_schedule: epoch must be >= 0");
    const int steps = epoch / cfg.lr_decay_every;
    return cfg.initial_lr * std::pow(cfg.lr_decay_factor, steps);
}

std::vector<int> loss_trend_violations(const std::vector<double>& epoch_losses,
                                       int first_phase_end, int window) {
    std::vector<int> bad;
    const int last = std::min<int>(static_cast<int>(epoch_losses.size()), first_phase_end);
    for (int e = 0; e + window < last; ++e)
        if (epoch_losses[static_cast<std::size_t>(e + window)] >
            epoch_losses[static_cast<std::size_t>(e)])
            bad.push_back(e);
    return bad;
}

namespace {

Tensor gather_batch(const Tensor& images, const std::vector<int>& order, int begin, int end) {
    const int c = images.dim(1), h = images.dim(2), w = images.dim(3);
    const std::size_t plane = static_cast<std::size_t>(c) * h * w;
    Tensor batch({end - begin, c, h, w});
    for (int i = begin; i < end; ++i)
        std::memcpy(batch.ptr() + static_cast<std::size_t>(i - begin) * plane,
                    images.ptr() + static_cast<std::size_t>(order[static_cast<std::size_t>(i)]) * plane,
                    plane * sizeof(float));
    return batch;
}

} // namespace

std::vector<EpochStats> train_wi(Network& net, const WiDataset& data, const TrainConfig& cfg,
                                 std::ostream* console, const CheckpointFn& checkpoint) {
    if (data.count() < 1)
        throw ConfigError("train_wi: empty dataset");
    if (cfg.batch_size < 1)
        throw ConfigError("train_wi: batch_size must be >= 1");
    if (cfg.epochs < 0 || cfg.lr_decay_every < 1)
        throw ConfigError("train_wi: bad epoch/schedule configuration");
    if (static_cast<int>(data.labels.size()) != data.count())
        throw ConfigError("train_wi: label count mismatch");
    for (int y : data.labels)
        if (y < 0 || y >= data.num_classes)
            throw ConfigError("train_wi: label outside [0, num_classes)");

    Rng rng(cfg.seed);

    const std::size_t n_layers = net.spec.layers.size();
    // master parameters; the network tensors hold the lookahead point during
    // gradient evaluation
    std::vector<Tensor> w(n_layers), b(n_layers);
    OptimizerState state;
    state.weight_velocity.resize(n_layers);
    state.bias_velocity.resize(n_layers);
    for (std::size_t i = 0; i < n_layers; ++i) {
        if (net.weights[i].data.empty())
            continue;
        w[i] = net.weights[i];
        b[i] = net.biases[i];
        state.weight_velocity[i] = Tensor(w[i].shape);
        state.bias_velocity[i] = Tensor(b[i].shape);
    }

    auto set_lookahead = [&] {
        for (std::size_t i = 0; i < n_layers; ++i) {
            if (w[i].data.empty())
                continue;
            for (std::size_t j = 0; j < w[i].size(); ++j)
                net.weights[i].data[j] = static_cast<float>(
                    w[i].data[j] + cfg.momentum * state.weight_velocity[i].data[j]);
            for (std::size_t j = 0; j < b[i].size(); ++j)
                net.biases[i].data[j] = static_cast<float>(
                    b[i].data[j] + cfg.momentum * state.bias_velocity[i].data[j]);
        }
    };

    std::vector<int> order(static_cast<std::size_t>(data.count()));
    std::iota(order.begin(), order.end(), 0);

    std::vector<EpochStats> log;
    std::vector<double> epoch_losses;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = lr_schedule(epoch, cfg);
        rng.shuffle(order);

        double loss_sum = 0.0;
        int correct = 0;
        for (int begin = 0; begin < data.count(); begin += cfg.batch_size) {
            const int end = std::min(begin + cfg.batch_size, data.count());
            Tensor batch = gather_batch(data.images, order, begin, end);
            std::vector<int> labels(static_cast<std::size_t>(end - begin));
            for (int i = begin; i < end; ++i)
                labels[static_cast<std::size_t>(i - begin)] =
                    data.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];

            set_lookahead();
            ForwardState fwd;
            const Tensor logits = forward(net, batch, RunMode::Train, rng, &fwd);
            const auto xent = softmax_xent(logits, labels);
            const ParamGrads grads = backward(net, fwd, xent.grad);

            for (std::size_t i = 0; i < n_layers; ++i) {
                if (w[i].data.empty())
                    continue;
                nesterov_step(w[i], grads.weights[i], state.weight_velocity[i], lr, cfg.momentum,
                              cfg.weight_decay);
                nesterov_step(b[i], grads.biases[i], state.bias_velocity[i], lr, cfg.momentum,
                              0.0); // no decay on biases
            }

            loss_sum += xent.loss * (end - begin);
            correct += xent.correct;
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.lr = lr;
        stats.mean_loss = loss_sum / data.count();
        stats.accuracy = static_cast<double>(correct) / data.count();
        log.push_back(stats);
        epoch_losses.push_back(stats.mean_loss);

        if (checkpoint && cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0) {
            // checkpoints hold the true parameters, not the lookahead point
            for (std::size_t i = 0; i < n_layers; ++i) {
                if (w[i].data.empty())
                    continue;
                net.weights[i] = w[i];
                net.biases[i] = b[i];
            }
            checkpoint(epoch, net);
        }
    }

    for (std::size_t i = 0; i < n_layers; ++i) {
        if (w[i].data.empty())
            continue;
        net.weights[i] = std::move(w[i]);
        net.biases[i] = std::move(b[i]);
    }

    if (console) {
        const auto bad = loss_trend_violations(epoch_losses, cfg.lr_decay_every);
        for (int e : bad)
            *console << "warning: mean training loss rose between epochs " << e << " and "
                     << e + 10 << "\n";
    }
    return log;
}

} // namespace sigver
