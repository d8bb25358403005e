#include "pro_ood/pro.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pro_ood/datasets.hpp"
#include "pro_ood/errors.hpp"
#include "pro_ood/parallel.hpp"

namespace pro_ood {

void ProConfig::validate() const {
    if (eps <= 0.0) throw ValueError("pro: eps must be positive");
    // k == 0 is the degenerate no-perturbation case (a single unperturbed
    // evaluation); sweeps reject it, the library accepts it.
    if (k > 64) throw ValueError("pro: k must be at most 64");
    if (clamp && clamp->first > clamp->second) {
        throw ValueError("pro: clamp box is empty (lo > hi)");
    }
}

namespace {

ScoreBuilder as_builder(const ScoreFn& fn) {
    return [fn](Tape& tape, Var logits) { return fn.apply(tape, logits); };
}

void clamp_into(Tensor& x, const std::optional<std::pair<double, double>>& box) {
    if (!box) return;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], box->first, box->second);
}

// One signed-gradient step of length eps; +1 ascends, -1 descends.
Tensor signed_step(const Tensor& x, const Tensor& grad, double eps, double direction) {
    Tensor out = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (grad[i] > 0.0) {
            out[i] += direction * eps;
        } else if (grad[i] < 0.0) {
            out[i] -= direction * eps;
        }
        // sign(0) == 0: flat coordinates stay put
    }
    return out;
}

}  // namespace

std::pair<double, Tensor> score_with_grad(const Classifier& net, const ScoreBuilder& score,
                                          const Tensor& x) {
    ForwardPass fp = forward(net, x);
    Var s = score(fp.tape, fp.logits);
    const double value = fp.tape.value(s).scalar_value();
    return {value, input_gradient(fp, s)};
}

ProResult pro_score(const Classifier& net, const ScoreBuilder& score, const Tensor& x,
                    const ProConfig& cfg, bool record_inputs) {
    cfg.validate();
    if (cfg.direction != PerturbDirection::minimize) {
        throw ValueError("pro_score: direction must be minimize; use odin_preprocess_score "
                         "for the confidence-raising direction");
    }

    ProResult res;
    res.trajectory.scores.reserve(cfg.k + 1);
    Tensor current = x;
    clamp_into(current, cfg.clamp);

    for (std::size_t t = 0; t <= cfg.k; ++t) {
        if (record_inputs) res.trajectory.inputs.push_back(current);
        if (t == cfg.k) {
            // Final evaluation: no step follows, so skip the backward pass.
            ForwardPass fp = forward(net, current);
            Var s = score(fp.tape, fp.logits);
            res.trajectory.scores.push_back(fp.tape.value(s).scalar_value());
        } else {
            auto [value, grad] = score_with_grad(net, score, current);
            res.trajectory.scores.push_back(value);
            current = signed_step(current, grad, cfg.eps, -1.0);
            clamp_into(current, cfg.clamp);
        }
        if (!std::isfinite(res.trajectory.scores.back())) {
            throw NumericError("pro: non-finite score at step " + std::to_string(t));
        }
    }

    res.g_star = *std::min_element(res.trajectory.scores.begin(), res.trajectory.scores.end());
    return res;
}

ProResult pro_score(const Classifier& net, const ScoreFn& score, const Tensor& x,
                    const ProConfig& cfg, bool record_inputs) {
    return pro_score(net, as_builder(score), x, cfg, record_inputs);
}

double odin_preprocess_score(const Classifier& net, const ScoreBuilder& score, const Tensor& x,
                             double eps) {
    if (eps < 0.0) throw ValueError("odin: eps must be nonnegative");
    auto [value, grad] = score_with_grad(net, score, x);
    if (eps == 0.0) return value;
    const Tensor moved = signed_step(x, grad, eps, +1.0);
    ForwardPass fp = forward(net, moved);
    Var s = score(fp.tape, fp.logits);
    const double out = fp.tape.value(s).scalar_value();
    if (!std::isfinite(out)) throw NumericError("odin: non-finite score after perturbation");
    return out;
}

double odin_preprocess_score(const Classifier& net, const ScoreFn& score, const Tensor& x,
                             double eps) {
    return odin_preprocess_score(net, as_builder(score), x, eps);
}

double delta_z(const Classifier& net, const ScoreBuilder& score, const Tensor& x, double eps,
               std::size_t steps) {
    if (eps < 0.0) throw ValueError("delta_z: eps must be nonnegative");
    if (steps < 1) throw ValueError("delta_z: steps must be at least 1");
    auto [start, grad] = score_with_grad(net, score, x);
    if (eps == 0.0) return 0.0;
    Tensor current = signed_step(x, grad, eps, -1.0);
    for (std::size_t s = 1; s < steps; ++s) {
        auto [value, g] = score_with_grad(net, score, current);
        (void)value;
        current = signed_step(current, g, eps, -1.0);
    }
    ForwardPass fp = forward(net, current);
    Var sv = score(fp.tape, fp.logits);
    const double end = fp.tape.value(sv).scalar_value();
    if (!std::isfinite(end)) throw NumericError("delta_z: non-finite score after perturbation");
    return std::abs(start - end);
}

double delta_z(const Classifier& net, const ScoreFn& score, const Tensor& x, double eps,
               std::size_t steps) {
    return delta_z(net, as_builder(score), x, eps, steps);
}

RobustnessGap robustness_gap(const Classifier& net, const ScoreFn& score, const Dataset& ind_set,
                             const Dataset& ood_set, double eps) {
    ind_set.validate();
    ood_set.validate();

    RobustnessGap out;
    out.dz_ind.resize(ind_set.n());
    out.dz_ood.resize(ood_set.n());
    const ScoreBuilder builder = as_builder(score);

    parallel_for(ind_set.n(), [&](std::size_t i) {
        out.dz_ind[i] = delta_z(net, builder, ind_set.row_tensor(i), eps);
    });
    parallel_for(ood_set.n(), [&](std::size_t i) {
        out.dz_ood[i] = delta_z(net, builder, ood_set.row_tensor(i), eps);
    });

    for (double v : out.dz_ind) out.mean_dz_ind += v;
    out.mean_dz_ind /= static_cast<double>(out.dz_ind.size());
    for (double v : out.dz_ood) out.mean_dz_ood += v;
    out.mean_dz_ood /= static_cast<double>(out.dz_ood.size());
    out.gap = out.mean_dz_ood - out.mean_dz_ind;
    return out;
}

}  // namespace pro_ood
