#include "pro_ood/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pro_ood/errors.hpp"

namespace pro_ood {

namespace {

void check_scores(std::span<const double> ind, std::span<const double> ood) {
    if (ind.empty()) throw ValueError("metric: empty IND score set");
    if (ood.empty()) throw ValueError("metric: empty OOD score set");
    for (double v : ind) {
        if (!std::isfinite(v)) throw NumericError("metric: non-finite IND score");
    }
    for (double v : ood) {
        if (!std::isfinite(v)) throw NumericError("metric: non-finite OOD score");
    }
}

}  // namespace

double auroc(std::span<const double> ind_scores, std::span<const double> ood_scores) {
    check_scores(ind_scores, ood_scores);
    const std::size_t n_i = ind_scores.size();
    const std::size_t n_o = ood_scores.size();

    struct Entry {
        double score;
        bool is_ind;
    };
    std::vector<Entry> all;
    all.reserve(n_i + n_o);
    for (double v : ind_scores) all.push_back({v, true});
    for (double v : ood_scores) all.push_back({v, false});
    std::sort(all.begin(), all.end(),
              [](const Entry& a, const Entry& b) { return a.score < b.score; });

    // Average ranks over tie groups (1-based ranks). Rank values are dyadic
    // rationals, so the sums below are exact in doubles.
    double ind_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of i+1 .. j
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].is_ind) ind_rank_sum += avg_rank;
        }
        i = j;
    }

    const double u = ind_rank_sum - 0.5 * static_cast<double>(n_i) * static_cast<double>(n_i + 1);
    return u / (static_cast<double>(n_i) * static_cast<double>(n_o));
}

double fpr_at_tpr(std::span<const double> ind_scores, std::span<const double> ood_scores,
                  double q) {
    check_scores(ind_scores, ood_scores);
    if (q <= 0.0 || q > 1.0) throw ValueError("fpr_at_tpr: q must be in (0, 1]");
    const std::size_t n_i = ind_scores.size();

    // k-th smallest IND score with k = ceil((1-q) n). The 1e-9 slack undoes
    // the binary representation error of q (0.05 * 100 must give k = 5, not
    // 6); it is far below the 1/n granularity of any usable score set.
    const double raw = (1.0 - q) * static_cast<double>(n_i);
    std::size_t k = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    k = std::clamp<std::size_t>(k, 1, n_i);

    std::vector<double> sorted(ind_scores.begin(), ind_scores.end());
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     sorted.end());
    const double tau = sorted[k - 1];

    std::size_t fp = 0;
    for (double v : ood_scores) {
        if (v >= tau) ++fp;
    }
    return static_cast<double>(fp) / static_cast<double>(ood_scores.size());
}

}  // namespace pro_ood
