#ifndef SIGVER_TRAINING_HPP
#define SIGVER_TRAINING_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "sigver/network.hpp"

namespace sigver {

struct TrainConfig {
    double initial_lr = 0.01;
    double lr_decay_factor = 0.1;
    int lr_decay_every = 20; // epochs
    double momentum = 0.9;
    double weight_decay = 0.0005;
    int batch_size = 100;
    int epochs = 60;
    std::uint64_t seed = 0;
    int checkpoint_every = 0; // 0 = no checkpoints
};

struct OptimizerState {
    std::vector<Tensor> weight_velocity;
    std::vector<Tensor> bias_velocity;
};

// One Nesterov-momentum update:
//   v <- mu * v - lr * (grad + lambda * w)
//   w <- w + v
// The caller evaluates grad at the lookahead point w + mu * v.
void nesterov_step(Tensor& param, const Tensor& grad, Tensor& velocity, double lr, double mu,
                   double lambda);

// Step decay: initial_lr * decay_factor^floor(epoch / decay_every).
double lr_schedule(int epoch, const TrainConfig& cfg);

struct WiDataset {
    Tensor images; // [count, channels, h, w]
    std::vector<int> labels;
    int num_classes = 0;

    int count() const { return images.dim(0); }
};

struct EpochStats {
    int epoch = 0;
    double lr = 0.0;
    double mean_loss = 0.0;
    double accuracy = 0.0;
};

// Epochs e..e+window within the first schedule phase where the mean loss
// failed to decrease across the window. Soft diagnostic only.
std::vector<int> loss_trend_violations(const std::vector<double>& epoch_losses, int first_phase_end,
                                       int window = 10);

using CheckpointFn = std::function<void(int epoch, const Network&)>;

// Writer-independent training: shuffled mini-batches of softmax cross-entropy
// over the development users, Nesterov momentum with L2 decay on weights
// (not biases). Deterministic for a fixed cfg.seed. The final partial batch
// is used. Returns the per-epoch log.
std::vector<EpochStats> train_wi(Network& net, const WiDataset& data, const TrainConfig& cfg,
                                 std::ostream* console = nullptr,
                                 const CheckpointFn& checkpoint = nullptr);

} // namespace sigver

#endif
