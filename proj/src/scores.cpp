#include "pro_ood/scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pro_ood/errors.hpp"

namespace pro_ood {

namespace {

void check_logits(const Tensor& logits, std::size_t min_classes = 2) {
    if (logits.rank() != 1) throw DimensionError("score: logits must be a rank-1 tensor");
    if (logits.size() < min_classes) {
        throw DimensionError("score: need at least " + std::to_string(min_classes) + " classes");
    }
    logits.require_finite("logits");
}

double stable_logsumexp(std::span<const double> z) {
    double m = z[0];
    for (double v : z) m = std::max(m, v);
    double acc = 0.0;
    for (double v : z) acc += std::exp(v - m);
    return m + std::log(acc);
}

// Softmax probabilities via log-space for stability.
std::vector<double> softmax(const Tensor& logits, double temperature) {
    std::vector<double> scaled(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) scaled[i] = logits[i] / temperature;
    const double lse = stable_logsumexp(scaled);
    std::vector<double> p(scaled.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(scaled[i] - lse);
    return p;
}

}  // namespace

std::string score_kind_name(ScoreKind k) {
    switch (k) {
        case ScoreKind::msp: return "msp";
        case ScoreKind::msp_t: return "msp-t";
        case ScoreKind::ent: return "ent";
        case ScoreKind::gen: return "gen";
        case ScoreKind::ebo: return "ebo";
    }
    return "?";
}

double msp_score(const Tensor& logits, double temperature) {
    check_logits(logits);
    if (temperature <= 0.0) throw ValueError("msp: temperature must be positive");
    // Multiply by the reciprocal, matching the tape route bit for bit.
    const double inv_t = 1.0 / temperature;
    std::vector<double> scaled(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) scaled[i] = logits[i] * inv_t;
    double m = scaled[0];
    for (double v : scaled) m = std::max(m, v);
    return std::exp(m - stable_logsumexp(scaled));
}

double neg_entropy_score(const Tensor& logits) {
    check_logits(logits);
    std::vector<double> scaled(logits.data().begin(), logits.data().end());
    const double lse = stable_logsumexp(scaled);
    double acc = 0.0;
    for (double z : scaled) {
        const double logp = z - lse;  // <= 0, finite
        const double p = std::exp(logp);
        acc += p * logp;  // p == 0 gives 0 * finite == 0
    }
    return acc;
}

double gen_score(const Tensor& logits, double gamma, std::size_t top_m) {
    check_logits(logits);
    if (gamma <= 0.0) throw ValueError("gen: gamma must be positive");
    if (top_m < 1 || top_m > logits.size()) {
        throw ValueError("gen: top_m must be in [1, class_count]");
    }
    std::vector<double> p = softmax(logits, 1.0);
    std::sort(p.begin(), p.end(), std::greater<double>());
    double acc = 0.0;
    for (std::size_t j = 0; j < top_m; ++j) {
        const double pj = p[j];
        if (pj <= 0.0 || pj >= 1.0) continue;  // p^g (1-p)^g vanishes at 0 and 1
        acc += std::exp(gamma * (std::log(pj) + std::log1p(-pj)));
    }
    return -acc;
}

double ebo_score(const Tensor& logits, double temperature) {
    check_logits(logits);
    if (temperature <= 0.0) throw ValueError("ebo: temperature must be positive");
    const double inv_t = 1.0 / temperature;
    std::vector<double> scaled(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) scaled[i] = logits[i] * inv_t;
    return temperature * stable_logsumexp(scaled);
}

double ScoreFn::operator()(const Tensor& logits) const {
    switch (kind) {
        case ScoreKind::msp: return msp_score(logits, 1.0);
        case ScoreKind::msp_t: return msp_score(logits, temperature);
        case ScoreKind::ent: return neg_entropy_score(logits);
        case ScoreKind::gen: return gen_score(logits, gamma, top_m);
        case ScoreKind::ebo: return ebo_score(logits, temperature);
    }
    throw ValueError("unknown score kind");
}

Var ScoreFn::apply(Tape& tape, Var logits) const {
    const Tensor& z = tape.value(logits);
    check_logits(z);
    switch (kind) {
        case ScoreKind::msp:
        case ScoreKind::msp_t: {
            const double t = kind == ScoreKind::msp ? 1.0 : temperature;
            if (t <= 0.0) throw ValueError("msp: temperature must be positive");
            Var scaled = tape.affine(logits, 1.0 / t, 0.0);
            return tape.exp(tape.sub(tape.max(scaled), tape.logsumexp(scaled)));
        }
        case ScoreKind::ent: {
            Var logp = tape.sub_scalar(logits, tape.logsumexp(logits));
            return tape.sum(tape.mul(tape.exp(logp), logp));
        }
        case ScoreKind::gen: {
            if (gamma <= 0.0) throw ValueError("gen: gamma must be positive");
            if (top_m < 1 || top_m > z.size()) {
                throw ValueError("gen: top_m must be in [1, class_count]");
            }
            // Softmax is monotone in the logits, so the top-M probabilities
            // are the components with the top-M logits.
            std::vector<std::size_t> order(z.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t i, std::size_t j) { return z[i] > z[j]; });
            order.resize(top_m);

            Var logp = tape.sub_scalar(logits, tape.logsumexp(logits));
            Var p = tape.gather(tape.exp(logp), order);
            Var q = tape.affine(p, -1.0, 1.0);  // 1 - p, in [0, 1]
            Var terms = tape.pow_const(tape.mul(p, q), gamma);
            return tape.affine(tape.sum(terms), -1.0, 0.0);
        }
        case ScoreKind::ebo: {
            if (temperature <= 0.0) throw ValueError("ebo: temperature must be positive");
            Var scaled = tape.affine(logits, 1.0 / temperature, 0.0);
            return tape.affine(tape.logsumexp(scaled), temperature, 0.0);
        }
    }
    throw ValueError("unknown score kind");
}

bool score_increases_with_margin(const ScoreFn& fn, std::size_t class_count,
                                 std::size_t grid_points) {
    if (class_count < 2) throw ValueError("need at least 2 classes");
    double prev = 0.0;
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double margin = 8.0 * static_cast<double>(i) / static_cast<double>(grid_points - 1);
        std::vector<double> z(class_count, 0.0);
        z[0] = margin;
        const double s = fn(Tensor::vector(std::move(z)));
        if (i > 0 && s <= prev) return false;
        prev = s;
    }
    return true;
}

}  // namespace pro_ood
