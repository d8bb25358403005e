#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pro_ood/model.hpp"
#include "pro_ood/scores.hpp"
#include "pro_ood/tensor.hpp"

namespace pro_ood {

struct Dataset;

enum class PerturbDirection { minimize, maximize };

/// Settings for the iterative signed-gradient perturbation. k = 0 is the
/// degenerate configuration that evaluates only the unperturbed score.
struct ProConfig {
    double eps = 0.001;     // per-step L-infinity length
    std::size_t k = 3;      // step count; k+1 score evaluations
    PerturbDirection direction = PerturbDirection::minimize;
    std::optional<std::pair<double, double>> clamp;  // per-feature domain box

    void validate() const;
};

/// Score record of one perturbation run: scores[0] is the unperturbed score,
/// scores[t] the score after t steps. Inputs are kept only when requested.
struct Trajectory {
    std::vector<double> scores;   // length k + 1
    std::vector<Tensor> inputs;   // length k + 1 when recorded, else empty
};

struct ProResult {
    double g_star = 0.0;  // min over the trajectory
    Trajectory trajectory;
};

// Score builders extend a tape from the logits node to a scalar. ScoreFn
// provides one; tests inject custom linear scores the same way.
using ScoreBuilder = std::function<Var(Tape&, Var)>;

// Adversarial score: starting from x, repeat k times
//   x <- x - eps * sign(d score / d x)       (minimize)
// scoring before every step and once more at the end, then return the
// minimum of the k+1 recorded scores. sign(0) is 0, so flat coordinates do
// not move. With a clamp box, every intermediate input is projected into the
// box after each step. Throws NumericError naming the step if a score goes
// non-finite.
ProResult pro_score(const Classifier& net, const ScoreBuilder& score, const Tensor& x,
                    const ProConfig& cfg, bool record_inputs = false);
ProResult pro_score(const Classifier& net, const ScoreFn& score, const Tensor& x,
                    const ProConfig& cfg, bool record_inputs = false);

// Single confidence-raising step x + eps * sign(grad), returning the score at
// the perturbed point. No minimum tracking; this is the opposite direction of
// pro_score and serves as the contrast baseline.
double odin_preprocess_score(const Classifier& net, const ScoreBuilder& score, const Tensor& x,
                             double eps);
double odin_preprocess_score(const Classifier& net, const ScoreFn& score, const Tensor& x,
                             double eps);

// |g(x) - g(x_s)| where x_s is reached by `steps` signed-gradient descent
// steps of length eps. A one-step lower bound on the true maximum score
// change within the eps-ball (the exact box-constrained maximum is not
// computed).
double delta_z(const Classifier& net, const ScoreBuilder& score, const Tensor& x, double eps,
               std::size_t steps = 1);
double delta_z(const Classifier& net, const ScoreFn& score, const Tensor& x, double eps,
               std::size_t steps = 1);

struct RobustnessGap {
    double mean_dz_ind = 0.0;
    double mean_dz_ood = 0.0;
    double gap = 0.0;  // mean_dz_ood - mean_dz_ind
    std::vector<double> dz_ind;
    std::vector<double> dz_ood;
};

// Mean one-step score-shift magnitudes on both sets and their difference.
RobustnessGap robustness_gap(const Classifier& net, const ScoreFn& score, const Dataset& ind_set,
                             const Dataset& ood_set, double eps);

// Score value and its input gradient in one backward pass.
std::pair<double, Tensor> score_with_grad(const Classifier& net, const ScoreBuilder& score,
                                          const Tensor& x);

}  // namespace pro_ood
