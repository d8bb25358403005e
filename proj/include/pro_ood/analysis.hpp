#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pro_ood/datasets.hpp"
#include "pro_ood/eval.hpp"
#include "pro_ood/model.hpp"
#include "pro_ood/scores.hpp"

namespace pro_ood {

/// Score surface over a 2-D random slice of input space:
/// z[i][j] = g(x + alpha_i * d1 + beta_j * d2). The direction vectors are
/// i.i.d. standard normal rescaled to unit L-infinity norm, so alpha and beta
/// carry the same units as the perturbation step length. The grid is odd so
/// the exact center cell is g(x).
struct LandscapeGrid {
    std::vector<double> alpha_values;
    std::vector<double> beta_values;
    std::vector<std::vector<double>> z;  // z[i][j], i over alpha, j over beta
    Tensor d1;
    Tensor d2;
    std::uint64_t seed = 0;
};

LandscapeGrid landscape(const Classifier& net, const ScoreFn& fn, const Tensor& x,
                        double half_range, std::size_t grid_n, std::uint64_t seed);

// CSV with corner cell "alpha\beta", beta values across the first row, one
// row per alpha.
std::string landscape_csv(const LandscapeGrid& grid);

/// Signed one-step score shifts g(x + delta) - g(x) with
/// delta = -eps * sign(grad), per sample set and per step length.
struct ShiftSamples {
    std::string set_name;
    double eps = 0.0;
    std::vector<double> shifts;
};

struct NamedSet {
    std::string name;
    const Dataset* data;
};

std::vector<ShiftSamples> shift_histogram(const Classifier& net, const ScoreFn& fn,
                                          const std::vector<NamedSet>& sets,
                                          const std::vector<double>& eps_list);

struct Histogram {
    std::vector<double> edges;               // bin_count + 1 edges
    std::vector<std::string> set_names;
    std::vector<std::vector<std::size_t>> counts;  // per set, per bin
};

// 61 uniform bins on [-1, 1] for probability-valued scores (msp, msp-t);
// otherwise bins span the data range.
Histogram bin_shifts(const std::vector<const ShiftSamples*>& samples, ScoreKind kind);

std::string histogram_csv(const Histogram& hist);
std::string shifts_raw_csv(const std::vector<ShiftSamples>& samples);

/// Paired score vectors (base detector vs its PRO variant) per sample set,
/// for distribution overlays.
struct ScoreDistribution {
    std::string set_name;
    std::string detector;
    std::vector<double> scores;
};

std::vector<ScoreDistribution> score_distributions(
    const Classifier& net, const std::vector<std::pair<Detector, Detector>>& detector_pairs,
    const std::vector<NamedSet>& sets);

std::string score_distributions_csv(const std::vector<ScoreDistribution>& dists);

// exp(-E): the lower bound that a mean adversarial cross-entropy E puts on
// the expected worst-case-perturbed MSP of in-distribution data.
double msp_bound(double e_hat);

// h(exp(-E)) with h(p) = p log p + (1-p) log(1-p) + p log(C-1) - log(C-1):
// the corresponding bound on the expected perturbed negative entropy. Valid
// only while exp(-E) >= 1/C, where h is nondecreasing; below that the bound
// is undefined and this throws.
double entropy_bound(double e_hat, std::size_t class_count);

// The h above, exposed for direct evaluation; p in [0, 1].
double entropy_bound_h(double p, std::size_t class_count);

struct Claim1Report {
    double e_hat = 0.0;         // mean PGD-maximized cross-entropy
    double mean_min_msp = 0.0;  // mean trajectory-minimized MSP, same budget
    double bound = 0.0;         // exp(-e_hat)
    bool holds = false;
};

// Empirical check of the adversarial-training bound on the desk model. The
// PGD estimate under-approximates the inner maximum, so e_hat is itself a
// lower bound and the report carries both numbers rather than a verdict
// alone. eps = 0 degenerates to clean loss vs clean MSP (the pure Jensen
// instance). The minimization budget matches the attack: steps of length
// eps/steps keep every probe inside the eps-ball.
Claim1Report claim1_check(const Classifier& net, const Dataset& ind_test, double eps,
                          std::size_t pgd_steps);

}  // namespace pro_ood
