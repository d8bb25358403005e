#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pro_ood/datasets.hpp"
#include "pro_ood/model.hpp"
#include "pro_ood/pro.hpp"
#include "pro_ood/scores.hpp"

namespace pro_ood {

/// Hyperparameters a detector actually used; echoed in every report row.
struct DetectorParams {
    std::optional<double> eps;
    std::optional<std::size_t> k;
    std::optional<double> temperature;
    std::optional<double> gamma;
    std::optional<std::size_t> m;
};

/// A named scoring rule over a sample set. score_set returns one score per
/// row; higher means more IND.
struct Detector {
    std::string name;
    std::function<std::vector<double>(const Classifier&, const Dataset&)> score_set;
    DetectorParams params;
};

std::vector<double> plain_scores(const Classifier& net, const ScoreFn& fn, const Dataset& data);
std::vector<double> pro_scores(const Classifier& net, const ScoreFn& fn, const Dataset& data,
                               const ProConfig& cfg);
std::vector<double> odin_scores(const Classifier& net, const ScoreFn& fn, const Dataset& data,
                                double eps);

/// Per-variant perturbation settings mirroring the shipped example
/// hyperparameter tables. The gen top-M is clamped to the class count when a
/// preset made for a larger model runs against a smaller one.
struct ProHyper {
    double eps;
    std::size_t k;
};

struct Preset {
    std::string name;
    ProHyper msp;
    ProHyper msp_t;
    double msp_t_temp;
    ProHyper ent;
    ProHyper gen;
    double gen_gamma;
    std::size_t gen_m;
};

Preset preset_cifar10_like();
Preset preset_cifar100_like();
Preset preset_imagenet_like();
Preset preset_by_name(const std::string& name);

struct RegistryOptions {
    Preset preset = preset_cifar10_like();
    double odin_eps = 0.0014;
    double odin_temp = 1000.0;
    double ebo_temp = 1.0;
    std::optional<std::pair<double, double>> clamp;  // PRO detectors only
};

// All standard detectors: msp, msp-t, ent, gen, ebo, odin, pro-msp,
// pro-msp-t, pro-ent, pro-gen.
std::vector<Detector> default_registry(std::size_t class_count, const RegistryOptions& opts);

// Registry lookup by name; throws ValueError listing valid names.
Detector detector_by_name(const std::string& name, std::size_t class_count,
                          const RegistryOptions& opts);

struct EvalRow {
    std::string detector;
    std::string dataset;  // OOD set name, or "average"
    std::string group;    // "near" | "far"
    double auroc = 0.0;
    double fpr95 = 0.0;
    DetectorParams params;
    std::size_t n_ind = 0;
    std::size_t n_ood = 0;
};

struct EvalReport {
    std::vector<EvalRow> rows;
};

// Rows for one detector across every OOD set in the suite, plus unweighted
// near/far average rows. IND scores are computed once and reused.
std::vector<EvalRow> evaluate_detector(const Classifier& net, const Detector& detector,
                                       const OodSuite& suite);

EvalReport evaluate_all(const Classifier& net, const std::vector<Detector>& detectors,
                        const OodSuite& suite);

// Machine CSV: detector,dataset,group,auroc,fpr95,eps,k,t,gamma,m,n_ind,n_ood
// with floats at 6 decimal places and empty fields for unused parameters.
std::string report_csv(const EvalReport& report);

// Plain-text table for the console.
std::string report_table(const EvalReport& report);

/// Hyperparameter grid for the validation-set search. Defaults keep eps in
/// [5e-5, 1e-2] and K in {1, 3, 5, 7}.
struct SweepGrid {
    std::vector<double> eps_list;
    std::vector<std::size_t> k_list;
    std::vector<double> t_list;       // msp-t only
    std::vector<double> gamma_list;   // gen only
    std::vector<std::size_t> m_list;  // gen only

    static SweepGrid defaults(ScoreKind kind, std::size_t class_count);
};

struct SweepRow {
    DetectorParams params;
    double val_auroc = 0.0;
};

struct SweepResult {
    DetectorParams best;
    double best_val_auroc = 0.0;
    std::vector<SweepRow> rows;
};

// Exhaustive grid search maximizing validation AUROC of the PRO variant of
// `base` on (ind_val, ood_val). Ties prefer smaller K, then smaller eps (and
// then smaller T, gamma, M) for the cheapest inference. K = 0 in the grid is
// a parameter error.
SweepResult sweep(const Classifier& net, ScoreKind base, const SweepGrid& grid,
                  const Dataset& ind_val, const Dataset& ood_val);

std::string sweep_rows_csv(const std::vector<SweepRow>& rows);

}  // namespace pro_ood
