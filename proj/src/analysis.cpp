#include "pro_ood/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pro_ood/errors.hpp"
#include "pro_ood/metrics.hpp"
#include "pro_ood/parallel.hpp"
#include "pro_ood/pro.hpp"
#include "pro_ood/rng.hpp"

namespace pro_ood {

namespace {

Tensor random_unit_linf_direction(Rng& rng, std::size_t dim) {
    Tensor d({dim});
    double max_abs = 0.0;
    do {
        max_abs = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            d[i] = rng.normal();
            max_abs = std::max(max_abs, std::abs(d[i]));
        }
    } while (max_abs == 0.0);
    for (std::size_t i = 0; i < dim; ++i) d[i] /= max_abs;
    return d;
}

std::string fmt_g(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

LandscapeGrid landscape(const Classifier& net, const ScoreFn& fn, const Tensor& x,
                        double half_range, std::size_t grid_n, std::uint64_t seed) {
    if (grid_n < 3) throw ValueError("landscape: grid_n must be at least 3");
    if (grid_n % 2 == 0) throw ValueError("landscape: grid_n must be odd so a center cell exists");
    if (half_range <= 0.0) throw ValueError("landscape: half_range must be positive");
    if (x.rank() != 1 || x.size() != net.input_dim()) {
        throw DimensionError("landscape: x does not match the network input dimension");
    }

    LandscapeGrid grid;
    grid.seed = seed;
    Rng rng = Rng::keyed(seed, 0x1a9dULL);
    grid.d1 = random_unit_linf_direction(rng, x.size());
    grid.d2 = random_unit_linf_direction(rng, x.size());

    grid.alpha_values.resize(grid_n);
    grid.beta_values.resize(grid_n);
    const std::size_t center = grid_n / 2;
    for (std::size_t i = 0; i < grid_n; ++i) {
        const double t = (static_cast<double>(i) - static_cast<double>(center)) /
                         static_cast<double>(center);
        grid.alpha_values[i] = t * half_range;
        grid.beta_values[i] = t * half_range;
    }
    // The center is exactly 0, so z[center][center] evaluates g at x itself.
    grid.alpha_values[center] = 0.0;
    grid.beta_values[center] = 0.0;

    grid.z.assign(grid_n, std::vector<double>(grid_n, 0.0));
    parallel_for(grid_n * grid_n, [&](std::size_t cell) {
        const std::size_t i = cell / grid_n;
        const std::size_t j = cell % grid_n;
        Tensor probe = x;
        for (std::size_t d = 0; d < probe.size(); ++d) {
            probe[d] += grid.alpha_values[i] * grid.d1[d] + grid.beta_values[j] * grid.d2[d];
        }
        grid.z[i][j] = fn(net.logits(probe));
    });
    return grid;
}

std::string landscape_csv(const LandscapeGrid& grid) {
    std::ostringstream out;
    out << "alpha\\beta";
    for (double b : grid.beta_values) out << ',' << fmt_g(b);
    out << '\n';
    for (std::size_t i = 0; i < grid.alpha_values.size(); ++i) {
        out << fmt_g(grid.alpha_values[i]);
        for (double v : grid.z[i]) out << ',' << fmt_g(v);
        out << '\n';
    }
    return out.str();
}

std::vector<ShiftSamples> shift_histogram(const Classifier& net, const ScoreFn& fn,
                                          const std::vector<NamedSet>& sets,
                                          const std::vector<double>& eps_list) {
    if (sets.empty()) throw ValueError("shift_histogram: no sample sets");
    if (eps_list.empty()) throw ValueError("shift_histogram: empty eps list");
    for (double e : eps_list) {
        if (e < 0.0) throw ValueError("shift_histogram: eps must be nonnegative");
    }

    std::vector<ShiftSamples> out;
    const ScoreBuilder builder = [fn](Tape& tape, Var logits) { return fn.apply(tape, logits); };
    for (double eps : eps_list) {
        for (const NamedSet& set : sets) {
            set.data->validate();
            ShiftSamples s;
            s.set_name = set.name;
            s.eps = eps;
            s.shifts.resize(set.data->n());
            parallel_for(set.data->n(), [&](std::size_t i) {
                const Tensor x = set.data->row_tensor(i);
                auto [start, grad] = score_with_grad(net, builder, x);
                if (eps == 0.0) {
                    s.shifts[i] = 0.0;
                    return;
                }
                Tensor moved = x;
                for (std::size_t d = 0; d < moved.size(); ++d) {
                    if (grad[d] > 0.0) {
                        moved[d] -= eps;
                    } else if (grad[d] < 0.0) {
                        moved[d] += eps;
                    }
                }
                s.shifts[i] = fn(net.logits(moved)) - start;
            });
            out.push_back(std::move(s));
        }
    }
    return out;
}

Histogram bin_shifts(const std::vector<const ShiftSamples*>& samples, ScoreKind kind) {
    if (samples.empty()) throw ValueError("bin_shifts: no shift sets");
    const std::size_t bins = 61;
    double lo = -1.0, hi = 1.0;
    if (kind != ScoreKind::msp && kind != ScoreKind::msp_t) {
        lo = samples[0]->shifts.empty() ? 0.0 : samples[0]->shifts[0];
        hi = lo;
        for (const ShiftSamples* s : samples) {
            for (double v : s->shifts) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        }
    }

    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    }
    for (const ShiftSamples* s : samples) {
        h.set_names.push_back(s->set_name);
        std::vector<std::size_t> counts(bins, 0);
        for (double v : s->shifts) {
            if (v < lo || v > hi) continue;
            std::size_t b = static_cast<std::size_t>((v - lo) / (hi - lo) * bins);
            if (b >= bins) b = bins - 1;
            ++counts[b];
        }
        h.counts.push_back(std::move(counts));
    }
    return h;
}

std::string histogram_csv(const Histogram& hist) {
    std::ostringstream out;
    out << "bin_lo,bin_hi";
    for (const std::string& name : hist.set_names) out << ",count_" << name;
    out << '\n';
    const std::size_t bins = hist.edges.size() - 1;
    for (std::size_t b = 0; b < bins; ++b) {
        out << fmt_g(hist.edges[b]) << ',' << fmt_g(hist.edges[b + 1]);
        for (const auto& counts : hist.counts) out << ',' << counts[b];
        out << '\n';
    }
    return out.str();
}

std::string shifts_raw_csv(const std::vector<ShiftSamples>& samples) {
    std::ostringstream out;
    out << "set,eps,shift\n";
    for (const ShiftSamples& s : samples) {
        for (double v : s.shifts) {
            out << s.set_name << ',' << fmt_g(s.eps) << ',' << fmt_g(v) << '\n';
        }
    }
    return out.str();
}

std::vector<ScoreDistribution> score_distributions(
    const Classifier& net, const std::vector<std::pair<Detector, Detector>>& detector_pairs,
    const std::vector<NamedSet>& sets) {
    std::vector<ScoreDistribution> out;
    for (const auto& [base, enhanced] : detector_pairs) {
        for (const NamedSet& set : sets) {
            set.data->validate();
            out.push_back({set.name, base.name, base.score_set(net, *set.data)});
            out.push_back({set.name, enhanced.name, enhanced.score_set(net, *set.data)});
        }
    }
    return out;
}

std::string score_distributions_csv(const std::vector<ScoreDistribution>& dists) {
    std::ostringstream out;
    out << "dataset,detector,sample_index,score\n";
    for (const ScoreDistribution& d : dists) {
        for (std::size_t i = 0; i < d.scores.size(); ++i) {
            out << d.set_name << ',' << d.detector << ',' << i << ',' << fmt_g(d.scores[i])
                << '\n';
        }
    }
    return out.str();
}

double msp_bound(double e_hat) {
    if (e_hat < 0.0) throw ValueError("msp_bound: loss must be nonnegative");
    return std::exp(-e_hat);
}

double entropy_bound_h(double p, std::size_t class_count) {
    if (class_count < 2) throw ValueError("entropy_bound: need at least 2 classes");
    if (p < 0.0 || p > 1.0) throw ValueError("entropy_bound: p must be in [0, 1]");
    const double c1 = static_cast<double>(class_count - 1);
    double acc = -std::log(c1);
    if (p > 0.0) acc += p * std::log(p) + p * std::log(c1);  // p log p := 0 at p == 0
    if (p < 1.0) acc += (1.0 - p) * std::log1p(-p);          // and at p == 1
    return acc;
}

double entropy_bound(double e_hat, std::size_t class_count) {
    if (e_hat < 0.0) throw ValueError("entropy_bound: loss must be nonnegative");
    const double p = std::exp(-e_hat);
    const double floor = 1.0 / static_cast<double>(class_count);
    if (p < floor) {
        throw ValueError("entropy_bound: exp(-loss) is below 1/C; the bound only holds on "
                         "[1/C, 1] where h is nondecreasing");
    }
    return entropy_bound_h(p, class_count);
}

Claim1Report claim1_check(const Classifier& net, const Dataset& ind_test, double eps,
                          std::size_t pgd_steps) {
    ind_test.validate();
    if (!ind_test.labeled()) throw ValueError("claim1_check: IND set must be labeled");
    if (eps < 0.0) throw ValueError("claim1_check: eps must be nonnegative");
    if (pgd_steps < 1) throw ValueError("claim1_check: pgd_steps must be at least 1");

    Claim1Report report;
    const std::size_t n = ind_test.n();
    std::vector<double> losses(n), min_msps(n);

    if (eps == 0.0) {
        parallel_for(n, [&](std::size_t i) {
            const Tensor x = ind_test.row_tensor(i);
            const Tensor z = net.logits(x);
            double m = z[0];
            for (std::size_t c = 0; c < z.size(); ++c) m = std::max(m, z[c]);
            double acc = 0.0;
            for (std::size_t c = 0; c < z.size(); ++c) acc += std::exp(z[c] - m);
            losses[i] = m + std::log(acc) - z[ind_test.y[i]];
            min_msps[i] = msp_score(z);
        });
    } else {
        const double step_size = 2.5 * eps / static_cast<double>(pgd_steps);
        ProConfig cfg;
        cfg.eps = eps / static_cast<double>(pgd_steps);
        cfg.k = pgd_steps;
        parallel_for(n, [&](std::size_t i) {
            const Tensor x = ind_test.row_tensor(i);
            const Tensor adv = pgd_attack(net, x, ind_test.y[i], eps, pgd_steps, step_size);
            const Tensor z = net.logits(adv);
            double m = z[0];
            for (std::size_t c = 0; c < z.size(); ++c) m = std::max(m, z[c]);
            double acc = 0.0;
            for (std::size_t c = 0; c < z.size(); ++c) acc += std::exp(z[c] - m);
            losses[i] = m + std::log(acc) - z[ind_test.y[i]];
            min_msps[i] = pro_score(net, ScoreFn::msp(), x, cfg).g_star;
        });
    }

    for (double v : losses) report.e_hat += v;
    report.e_hat /= static_cast<double>(n);
    for (double v : min_msps) report.mean_min_msp += v;
    report.mean_min_msp /= static_cast<double>(n);
    report.bound = std::exp(-report.e_hat);
    report.holds = report.mean_min_msp >= report.bound;
    return report;
}

}  // namespace pro_ood
