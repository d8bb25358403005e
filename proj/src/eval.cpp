#include "pro_ood/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pro_ood/errors.hpp"
#include "pro_ood/metrics.hpp"
#include "pro_ood/parallel.hpp"

namespace pro_ood {

std::vector<double> plain_scores(const Classifier& net, const ScoreFn& fn, const Dataset& data) {
    std::vector<double> out(data.n());
    parallel_for(data.n(), [&](std::size_t i) { out[i] = fn(net.logits(data.row_tensor(i))); });
    return out;
}

std::vector<double> pro_scores(const Classifier& net, const ScoreFn& fn, const Dataset& data,
                               const ProConfig& cfg) {
    std::vector<double> out(data.n());
    parallel_for(data.n(),
                 [&](std::size_t i) { out[i] = pro_score(net, fn, data.row_tensor(i), cfg).g_star; });
    return out;
}

std::vector<double> odin_scores(const Classifier& net, const ScoreFn& fn, const Dataset& data,
                                double eps) {
    std::vector<double> out(data.n());
    parallel_for(data.n(), [&](std::size_t i) {
        out[i] = odin_preprocess_score(net, fn, data.row_tensor(i), eps);
    });
    return out;
}

Preset preset_cifar10_like() {
    return Preset{"cifar10-like", {0.0003, 3}, {0.001, 5}, 1000.0, {0.001, 1},
                  {0.001, 5},     0.1,         10};
}

Preset preset_cifar100_like() {
    return Preset{"cifar100-like", {0.001, 5}, {0.001, 5}, 10.0, {0.0005, 7},
                  {0.0008, 5},     0.01,       100};
}

Preset preset_imagenet_like() {
    return Preset{"imagenet-like", {0.0005, 3}, {1e-5, 1}, 10.0, {5e-5, 7},
                  {0.0003, 1},     0.1,         100};
}

Preset preset_by_name(const std::string& name) {
    if (name == "cifar10-like") return preset_cifar10_like();
    if (name == "cifar100-like") return preset_cifar100_like();
    if (name == "imagenet-like") return preset_imagenet_like();
    throw ValueError("unknown preset '" + name +
                     "' (valid: cifar10-like, cifar100-like, imagenet-like)");
}

namespace {

Detector make_plain(const std::string& name, const ScoreFn& fn, DetectorParams params) {
    return Detector{name,
                    [fn](const Classifier& net, const Dataset& d) {
                        return plain_scores(net, fn, d);
                    },
                    std::move(params)};
}

Detector make_pro(const std::string& name, const ScoreFn& fn, const ProHyper& h,
                  const std::optional<std::pair<double, double>>& clamp, DetectorParams params) {
    ProConfig cfg;
    cfg.eps = h.eps;
    cfg.k = h.k;
    cfg.clamp = clamp;
    params.eps = h.eps;
    params.k = h.k;
    return Detector{name,
                    [fn, cfg](const Classifier& net, const Dataset& d) {
                        return pro_scores(net, fn, d, cfg);
                    },
                    std::move(params)};
}

}  // namespace

std::vector<Detector> default_registry(std::size_t class_count, const RegistryOptions& opts) {
    const Preset& p = opts.preset;
    const std::size_t gen_m = std::min<std::size_t>(p.gen_m, class_count);
    const ScoreFn gen_fn = ScoreFn::gen(p.gen_gamma, gen_m);
    const ScoreFn msp_t_fn = ScoreFn::msp_t(p.msp_t_temp);

    DetectorParams t_params;
    t_params.temperature = p.msp_t_temp;
    DetectorParams gen_params;
    gen_params.gamma = p.gen_gamma;
    gen_params.m = gen_m;
    DetectorParams ebo_params;
    ebo_params.temperature = opts.ebo_temp;
    DetectorParams odin_params;
    odin_params.eps = opts.odin_eps;
    odin_params.temperature = opts.odin_temp;

    std::vector<Detector> out;
    out.push_back(make_plain("msp", ScoreFn::msp(), {}));
    out.push_back(make_plain("msp-t", msp_t_fn, t_params));
    out.push_back(make_plain("ent", ScoreFn::ent(), {}));
    out.push_back(make_plain("gen", gen_fn, gen_params));
    out.push_back(make_plain("ebo", ScoreFn::ebo(opts.ebo_temp), ebo_params));

    const ScoreFn odin_fn = ScoreFn::msp_t(opts.odin_temp);
    const double odin_eps = opts.odin_eps;
    out.push_back(Detector{"odin",
                           [odin_fn, odin_eps](const Classifier& net, const Dataset& d) {
                               return odin_scores(net, odin_fn, d, odin_eps);
                           },
                           odin_params});

    out.push_back(make_pro("pro-msp", ScoreFn::msp(), p.msp, opts.clamp, {}));
    out.push_back(make_pro("pro-msp-t", msp_t_fn, p.msp_t, opts.clamp, t_params));
    out.push_back(make_pro("pro-ent", ScoreFn::ent(), p.ent, opts.clamp, {}));
    out.push_back(make_pro("pro-gen", gen_fn, p.gen, opts.clamp, gen_params));
    return out;
}

Detector detector_by_name(const std::string& name, std::size_t class_count,
                          const RegistryOptions& opts) {
    std::vector<Detector> all = default_registry(class_count, opts);
    for (auto& d : all) {
        if (d.name == name) return std::move(d);
    }
    std::string valid;
    for (const auto& d : all) {
        if (!valid.empty()) valid += ", ";
        valid += d.name;
    }
    throw ValueError("unknown detector '" + name + "' (valid: " + valid + ")");
}

std::vector<EvalRow> evaluate_detector(const Classifier& net, const Detector& detector,
                                       const OodSuite& suite) {
    const std::vector<double> ind = detector.score_set(net, suite.ind_test);

    std::vector<EvalRow> rows;
    for (const auto& entry : suite.ood_sets) {
        const std::vector<double> ood = detector.score_set(net, entry.data);
        EvalRow row;
        row.detector = detector.name;
        row.dataset = entry.name;
        row.group = entry.tag == OodTag::near ? "near" : "far";
        row.auroc = auroc(ind, ood);
        row.fpr95 = fpr_at_tpr(ind, ood, 0.95);
        row.params = detector.params;
        row.n_ind = ind.size();
        row.n_ood = ood.size();
        rows.push_back(std::move(row));
    }

    // Unweighted per-group means.
    for (const char* group : {"near", "far"}) {
        double a = 0.0, f = 0.0;
        std::size_t count = 0, n_ood = 0;
        for (const EvalRow& r : rows) {
            if (r.group == group && r.dataset != "average") {
                a += r.auroc;
                f += r.fpr95;
                n_ood += r.n_ood;
                ++count;
            }
        }
        if (count == 0) continue;
        EvalRow avg;
        avg.detector = detector.name;
        avg.dataset = "average";
        avg.group = group;
        avg.auroc = a / static_cast<double>(count);
        avg.fpr95 = f / static_cast<double>(count);
        avg.params = detector.params;
        avg.n_ind = ind.size();
        avg.n_ood = n_ood;
        rows.push_back(std::move(avg));
    }
    return rows;
}

EvalReport evaluate_all(const Classifier& net, const std::vector<Detector>& detectors,
                        const OodSuite& suite) {
    EvalReport report;
    for (const Detector& d : detectors) {
        auto rows = evaluate_detector(net, d, suite);
        report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    }
    return report;
}

namespace {

std::string fmt6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string opt6(const std::optional<double>& v) { return v ? fmt6(*v) : std::string(); }

std::string opt_u(const std::optional<std::size_t>& v) {
    return v ? std::to_string(*v) : std::string();
}

}  // namespace

std::string report_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "detector,dataset,group,auroc,fpr95,eps,k,t,gamma,m,n_ind,n_ood\n";
    for (const EvalRow& r : report.rows) {
        out << r.detector << ',' << r.dataset << ',' << r.group << ',' << fmt6(r.auroc) << ','
            << fmt6(r.fpr95) << ',' << opt6(r.params.eps) << ',' << opt_u(r.params.k) << ','
            << opt6(r.params.temperature) << ',' << opt6(r.params.gamma) << ','
            << opt_u(r.params.m) << ',' << r.n_ind << ',' << r.n_ood << '\n';
    }
    return out.str();
}

std::string report_table(const EvalReport& report) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-12s %-12s %-5s %9s %9s\n", "detector", "dataset", "group",
                  "auroc", "fpr95");
    out << buf;
    for (const EvalRow& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%-12s %-12s %-5s %9.4f %9.4f\n", r.detector.c_str(),
                      r.dataset.c_str(), r.group.c_str(), r.auroc, r.fpr95);
        out << buf;
    }
    return out.str();
}

SweepGrid SweepGrid::defaults(ScoreKind kind, std::size_t class_count) {
    SweepGrid g;
    g.eps_list = {5e-5, 2e-4, 1e-3, 3e-3, 1e-2};
    g.k_list = {1, 3, 5, 7};
    if (kind == ScoreKind::msp_t) g.t_list = {10.0, 1000.0};
    if (kind == ScoreKind::gen) {
        g.gamma_list = {0.01, 0.1};
        g.m_list = {std::min<std::size_t>(10, class_count), class_count};
        std::sort(g.m_list.begin(), g.m_list.end());
        g.m_list.erase(std::unique(g.m_list.begin(), g.m_list.end()), g.m_list.end());
    }
    return g;
}

namespace {

// Validation AUROC for every K in k_list from a single trajectory of
// max(k_list) steps per sample: the K-step score is the prefix minimum.
std::vector<std::vector<double>> prefix_min_scores(const Classifier& net, const ScoreFn& fn,
                                                   const Dataset& data, double eps,
                                                   const std::vector<std::size_t>& k_list) {
    const std::size_t max_k = *std::max_element(k_list.begin(), k_list.end());
    ProConfig cfg;
    cfg.eps = eps;
    cfg.k = max_k;

    std::vector<std::vector<double>> per_k(k_list.size(), std::vector<double>(data.n()));
    std::vector<std::vector<double>> trajectories(data.n());
    parallel_for(data.n(), [&](std::size_t i) {
        trajectories[i] = pro_score(net, fn, data.row_tensor(i), cfg).trajectory.scores;
    });
    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto& traj = trajectories[i];
        for (std::size_t kk = 0; kk < k_list.size(); ++kk) {
            double m = traj[0];
            for (std::size_t t = 1; t <= k_list[kk]; ++t) m = std::min(m, traj[t]);
            per_k[kk][i] = m;
        }
    }
    return per_k;
}

bool better(const SweepRow& a, const SweepRow& b) {
    if (a.val_auroc != b.val_auroc) return a.val_auroc > b.val_auroc;
    if (a.params.k != b.params.k) return a.params.k < b.params.k;
    if (a.params.eps != b.params.eps) return a.params.eps < b.params.eps;
    if (a.params.temperature != b.params.temperature) {
        return a.params.temperature < b.params.temperature;
    }
    if (a.params.gamma != b.params.gamma) return a.params.gamma < b.params.gamma;
    return a.params.m < b.params.m;
}

}  // namespace

SweepResult sweep(const Classifier& net, ScoreKind base, const SweepGrid& grid,
                  const Dataset& ind_val, const Dataset& ood_val) {
    ind_val.validate();
    ood_val.validate();
    if (grid.eps_list.empty()) throw ValueError("sweep: empty eps list");
    if (grid.k_list.empty()) throw ValueError("sweep: empty K list");
    for (double e : grid.eps_list) {
        if (e <= 0.0) throw ValueError("sweep: eps values must be positive");
    }
    for (std::size_t k : grid.k_list) {
        if (k < 1) throw ValueError("sweep: K values must be at least 1");
        if (k > 64) throw ValueError("sweep: K values must be at most 64");
    }

    // Unused-axis lists collapse to a single placeholder entry.
    std::vector<double> t_list = grid.t_list;
    std::vector<double> gamma_list = grid.gamma_list;
    std::vector<std::size_t> m_list = grid.m_list;
    const bool uses_t = base == ScoreKind::msp_t;
    const bool uses_gen = base == ScoreKind::gen;
    if (!uses_t) t_list = {0.0};
    if (uses_t && t_list.empty()) throw ValueError("sweep: msp-t needs a temperature list");
    if (!uses_gen) {
        gamma_list = {0.0};
        m_list = {0};
    }
    if (uses_gen && (gamma_list.empty() || m_list.empty())) {
        throw ValueError("sweep: gen needs gamma and M lists");
    }

    SweepResult res;
    bool have_best = false;
    for (double t : t_list) {
        for (double gamma : gamma_list) {
            for (std::size_t m : m_list) {
                ScoreFn fn = ScoreFn::msp();
                switch (base) {
                    case ScoreKind::msp: fn = ScoreFn::msp(); break;
                    case ScoreKind::msp_t: fn = ScoreFn::msp_t(t); break;
                    case ScoreKind::ent: fn = ScoreFn::ent(); break;
                    case ScoreKind::gen: fn = ScoreFn::gen(gamma, m); break;
                    case ScoreKind::ebo: fn = ScoreFn::ebo(t > 0 ? t : 1.0); break;
                }
                for (double eps : grid.eps_list) {
                    auto ind_per_k = prefix_min_scores(net, fn, ind_val, eps, grid.k_list);
                    auto ood_per_k = prefix_min_scores(net, fn, ood_val, eps, grid.k_list);
                    for (std::size_t kk = 0; kk < grid.k_list.size(); ++kk) {
                        SweepRow row;
                        row.params.eps = eps;
                        row.params.k = grid.k_list[kk];
                        if (uses_t) row.params.temperature = t;
                        if (uses_gen) {
                            row.params.gamma = gamma;
                            row.params.m = m;
                        }
                        row.val_auroc = auroc(ind_per_k[kk], ood_per_k[kk]);
                        if (!have_best || better(row, {res.best, res.best_val_auroc})) {
                            res.best = row.params;
                            res.best_val_auroc = row.val_auroc;
                            have_best = true;
                        }
                        res.rows.push_back(std::move(row));
                    }
                }
            }
        }
    }
    return res;
}

std::string sweep_rows_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "eps,k,t,gamma,m,val_auroc\n";
    for (const SweepRow& r : rows) {
        out << opt6(r.params.eps) << ',' << opt_u(r.params.k) << ','
            << opt6(r.params.temperature) << ',' << opt6(r.params.gamma) << ','
            << opt_u(r.params.m) << ',' << fmt6(r.val_auroc) << '\n';
    }
    return out.str();
}

}  // namespace pro_ood
