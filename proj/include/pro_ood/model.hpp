#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pro_ood/autodiff.hpp"
#include "pro_ood/tensor.hpp"

namespace pro_ood {

struct Dataset;  // datasets.hpp

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    Tensor W;  // [out x in], row-major
    Tensor b;  // [out]
};

struct ReluLayer {};
struct TanhLayer {};

using Layer = std::variant<DenseLayer, ReluLayer, TanhLayer>;

/// Feed-forward classifier: dense and activation layers mapping a D-vector to
/// C logits. Differentiable w.r.t. both input and weights through a Tape.
class Classifier {
public:
    Classifier() = default;
    Classifier(std::size_t input_dim, std::size_t class_count, std::vector<Layer> layers);

    // Dense stack input_dim -> hidden[0] -> ... -> class_count with the given
    // activation between dense layers. Weights ~ N(0, 1/in), biases zero.
    static Classifier random(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                             std::size_t class_count, std::uint64_t seed,
                             bool tanh_activation = true);

    std::size_t input_dim() const { return input_dim_; }
    std::size_t class_count() const { return class_count_; }
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    // Forward without a tape; used where no gradients are needed.
    Tensor logits(const Tensor& x) const;

private:
    void validate() const;

    std::size_t input_dim_ = 0;
    std::size_t class_count_ = 0;
    std::vector<Layer> layers_;
};

/// One recorded forward computation: the tape plus handles to the input, the
/// logits and every dense layer's parameters (for weight gradients).
struct ForwardPass {
    Tape tape;
    Var input;
    Var logits;
    struct ParamVars {
        std::size_t layer_index;
        Var W;
        Var b;
    };
    std::vector<ParamVars> params;
};

ForwardPass forward(const Classifier& net, const Tensor& x);

// Cross-entropy of the recorded logits against a hard label, appended to the
// same tape: logsumexp(z) - z[label].
Var cross_entropy(ForwardPass& fp, std::size_t label);

// Convenience: d(score)/d(input) for a scalar score node on fp's tape.
Tensor input_gradient(const ForwardPass& fp, Var scalar);

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 64;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;
    bool adversarial = false;
    // Inner maximization settings (adversarial mode only).
    double eps_adv = 0.1;
    std::size_t pgd_steps = 5;
    double pgd_step_size = 0.04;

    void validate() const;
};

struct TrainResult {
    Classifier net;
    // Mean cross-entropy over the final epoch. In adversarial mode this is
    // the mean of the PGD-maximized loss, i.e. the empirical robust loss.
    double final_train_loss = 0.0;
    std::vector<double> epoch_losses;
};

// Plain SGD on cross-entropy; in adversarial mode each sample is replaced by
// its PGD attack before the gradient step. Batch order is shuffled by a
// stream keyed on (seed, epoch). Throws NumericError naming the epoch if the
// loss goes non-finite.
TrainResult train(const Dataset& data, const TrainConfig& cfg,
                  const std::vector<std::size_t>& hidden = {32, 32}, bool tanh_activation = true);

// Continue training an existing classifier (used by train() internally and by
// tests that need custom initializations).
TrainResult train_from(Classifier net, const Dataset& data, const TrainConfig& cfg);

// L-infinity PGD ascent on cross-entropy, starting from the clean sample.
// Returns the best candidate seen (the start included), so the loss at the
// result is never below the loss at x. The iterate is clamped to the
// eps_adv-ball around x after every step; there is no data-domain clamp.
Tensor pgd_attack(const Classifier& net, const Tensor& x, std::size_t label, double eps_adv,
                  std::size_t steps, double step_size);

double mean_cross_entropy(const Classifier& net, const Dataset& data);
double accuracy(const Classifier& net, const Dataset& data);

// UTF-8 JSON weight file; save -> load -> save is byte-identical.
void save_weights(const Classifier& net, const std::filesystem::path& path);
Classifier load_weights(const std::filesystem::path& path);

}  // namespace pro_ood
