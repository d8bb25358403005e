#pragma once

#include <span>

namespace pro_ood {

// Probability that a random IND score ranks above a random OOD score, via the
// rank-sum formulation with average ranks for ties:
//   AUROC = (sum of IND ranks - n_i (n_i + 1) / 2) / (n_i * n_o).
// Agrees exactly with pairwise counting (wins + ties/2). IND is the positive
// class throughout.
double auroc(std::span<const double> ind_scores, std::span<const double> ood_scores);

// False positive rate at q true positive rate. The threshold is the
// ceil((1-q) * n_i)-th smallest IND score and both rates count scores >= tau,
// which guarantees TPR >= q. No interpolation.
double fpr_at_tpr(std::span<const double> ind_scores, std::span<const double> ood_scores,
                  double q = 0.95);

}  // namespace pro_ood
