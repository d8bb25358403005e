#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pro_ood/analysis.hpp"
#include "pro_ood/datasets.hpp"
#include "pro_ood/errors.hpp"
#include "pro_ood/eval.hpp"
#include "pro_ood/metrics.hpp"
#include "pro_ood/model.hpp"
#include "pro_ood/pro.hpp"
#include "pro_ood/scores.hpp"
#include "pro_ood/svg.hpp"
#include "pro_ood/version.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace pro_ood;

namespace {

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << content;
    if (!f) throw IoError("write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void require_file(const fs::path& path) {
    if (!fs::exists(path)) throw IoError("no such file: " + path.string());
}

// Every command echoes its resolved configuration so a run can be reproduced
// from its output directory alone.
void write_manifest(const fs::path& dir, const std::string& command, const ordered_json& config) {
    ordered_json m;
    m["tool"] = "pro-ood";
    m["version"] = kVersion;
    m["command"] = command;
    m["config"] = config;
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

ScoreKind parse_score_kind(const std::string& name) {
    if (name == "msp") return ScoreKind::msp;
    if (name == "msp-t") return ScoreKind::msp_t;
    if (name == "ent") return ScoreKind::ent;
    if (name == "gen") return ScoreKind::gen;
    if (name == "ebo") return ScoreKind::ebo;
    throw ValueError("unknown score '" + name + "' (valid: msp, msp-t, ent, gen, ebo)");
}

// ---- suite files ----------------------------------------------------------

struct SuitePaths {
    fs::path dir;
    OodSuite load() const;
};

OodSuite SuitePaths::load() const {
    const fs::path manifest = dir / "suite.json";
    require_file(manifest);
    std::ifstream f(manifest);
    ordered_json j;
    try {
        j = ordered_json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("suite.json: ") + e.what(), e.byte);
    }
    OodSuite suite;
    suite.ind_train = load_dataset(dir / j.at("ind_train").get<std::string>());
    suite.ind_val = load_dataset(dir / j.at("ind_val").get<std::string>());
    suite.ind_test = load_dataset(dir / j.at("ind_test").get<std::string>());
    suite.ood_val = load_dataset(dir / j.at("ood_val").get<std::string>());
    for (const auto& entry : j.at("ood_sets")) {
        OodSuite::Entry e;
        e.name = entry.at("name").get<std::string>();
        const std::string tag = entry.at("tag").get<std::string>();
        if (tag != "near" && tag != "far") throw SchemaError("suite.json: bad tag " + tag);
        e.tag = tag == "near" ? OodTag::near : OodTag::far;
        e.data = load_dataset(dir / entry.at("file").get<std::string>());
        suite.ood_sets.push_back(std::move(e));
    }
    return suite;
}

// ---- gen-data --------------------------------------------------------------

struct GenDataArgs {
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    std::string preset = "desk";
    bool csv = false;
    DeskPreset desk;
};

int cmd_gen_data(const GenDataArgs& a) {
    if (a.preset != "desk") throw ValueError("unknown data preset '" + a.preset + "' (valid: desk)");
    ensure_dir(a.out_dir);
    const OodSuite suite = gen_desk_suite(a.desk, a.seed);

    const fs::path dir(a.out_dir);
    save_dataset(suite.ind_train, dir / "ind_train.bin");
    save_dataset(suite.ind_val, dir / "ind_val.bin");
    save_dataset(suite.ind_test, dir / "ind_test.bin");
    save_dataset(suite.ood_val, dir / "ood_val.bin");

    ordered_json sets = ordered_json::array();
    for (const auto& entry : suite.ood_sets) {
        std::string file = "ood_" + entry.name + ".bin";
        for (char& c : file) {
            if (c == '-') c = '_';
        }
        save_dataset(entry.data, dir / file);
        sets.push_back({{"name", entry.name},
                        {"tag", entry.tag == OodTag::near ? "near" : "far"},
                        {"file", file}});
    }

    ordered_json sj;
    sj["ind_train"] = "ind_train.bin";
    sj["ind_val"] = "ind_val.bin";
    sj["ind_test"] = "ind_test.bin";
    sj["ood_val"] = "ood_val.bin";
    sj["ood_sets"] = sets;
    write_text(dir / "suite.json", sj.dump(2) + "\n");

    if (a.csv) {
        export_csv(suite.ind_train, dir / "ind_train.csv");
        export_csv(suite.ind_test, dir / "ind_test.csv");
        for (const auto& entry : suite.ood_sets) {
            std::string file = "ood_" + entry.name + ".csv";
            for (char& c : file) {
                if (c == '-') c = '_';
            }
            export_csv(entry.data, dir / file);
        }
    }

    ordered_json cfg;
    cfg["seed"] = a.seed;
    cfg["preset"] = a.preset;
    cfg["class_count"] = a.desk.class_count;
    cfg["dim"] = a.desk.dim;
    cfg["margin"] = a.desk.margin;
    cfg["train_per_class"] = a.desk.train_per_class;
    cfg["val_per_class"] = a.desk.val_per_class;
    cfg["test_per_class"] = a.desk.test_per_class;
    cfg["ood_n"] = a.desk.ood_n;
    cfg["ood_val_n"] = a.desk.ood_val_n;
    cfg["near_shift"] = a.desk.near_shift;
    cfg["ring_radius"] = a.desk.ring_radius;
    cfg["ring_width"] = a.desk.ring_width;
    cfg["cube_half_extent"] = a.desk.cube_half_extent;
    cfg["csv"] = a.csv;
    write_manifest(dir, "gen-data", cfg);
    std::cout << "wrote suite to " << a.out_dir << "\n";
    return 0;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
    std::string data_path;
    std::string out_dir = "out";
    std::string mode = "standard";
    std::string arch = "32,32";
    std::string activation = "tanh";
    TrainConfig cfg;
};

std::vector<std::size_t> parse_arch(const std::string& s) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t next = s.find(',', pos);
        if (next == std::string::npos) next = s.size();
        const std::string tok = s.substr(pos, next - pos);
        if (!tok.empty()) {
            const long v = std::strtol(tok.c_str(), nullptr, 10);
            if (v < 1) throw ValueError("bad hidden width '" + tok + "'");
            out.push_back(static_cast<std::size_t>(v));
        }
        pos = next + 1;
    }
    return out;
}

int cmd_train(TrainArgs a) {
    require_file(a.data_path);
    if (a.mode != "standard" && a.mode != "adversarial") {
        throw ValueError("mode must be standard or adversarial");
    }
    if (a.activation != "tanh" && a.activation != "relu") {
        throw ValueError("activation must be tanh or relu");
    }
    a.cfg.adversarial = a.mode == "adversarial";
    ensure_dir(a.out_dir);

    const Dataset data = load_dataset(a.data_path);
    const TrainResult result = train(data, a.cfg, parse_arch(a.arch), a.activation == "tanh");

    const fs::path dir(a.out_dir);
    save_weights(result.net, dir / "weights.json");

    std::ostringstream log;
    for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
        log << "epoch " << e << " loss " << result.epoch_losses[e] << "\n";
    }
    log << "final_train_loss " << result.final_train_loss << "\n";
    log << "train_accuracy " << accuracy(result.net, data) << "\n";
    write_text(dir / "train_log.txt", log.str());

    ordered_json cfg;
    cfg["data"] = a.data_path;
    cfg["mode"] = a.mode;
    cfg["arch"] = a.arch;
    cfg["activation"] = a.activation;
    cfg["epochs"] = a.cfg.epochs;
    cfg["batch_size"] = a.cfg.batch_size;
    cfg["learning_rate"] = a.cfg.learning_rate;
    cfg["seed"] = a.cfg.seed;
    cfg["eps_adv"] = a.cfg.eps_adv;
    cfg["pgd_steps"] = a.cfg.pgd_steps;
    cfg["pgd_step_size"] = a.cfg.pgd_step_size;
    write_manifest(dir, "train", cfg);
    std::cout << "final_train_loss " << result.final_train_loss << "\n";
    return 0;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
    std::string weights;
    std::string suite_dir;
    std::string out_dir = "out";
    std::string preset = "cifar10-like";
    std::string params_file;
    std::string detectors;  // comma list; empty = all
    std::optional<double> eps;
    std::optional<std::size_t> k;
    std::optional<double> temp;
    std::optional<double> gamma;
    std::optional<std::size_t> m_top;
    double odin_eps = 0.0014;
    std::vector<double> clamp;
};

void apply_params_file(Preset& p, const fs::path& file) {
    require_file(file);
    std::ifstream f(file);
    ordered_json j;
    try {
        j = ordered_json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("params file: ") + e.what(), e.byte);
    }
    auto hyper = [&](const char* name, ProHyper& h) {
        if (!j.contains(name)) return;
        const auto& d = j.at(name);
        h.eps = d.at("eps").get<double>();
        h.k = d.at("k").get<std::size_t>();
        if (d.contains("t")) p.msp_t_temp = d.at("t").get<double>();
        if (d.contains("gamma")) p.gen_gamma = d.at("gamma").get<double>();
        if (d.contains("m")) p.gen_m = d.at("m").get<std::size_t>();
    };
    hyper("pro-msp", p.msp);
    hyper("pro-msp-t", p.msp_t);
    hyper("pro-ent", p.ent);
    hyper("pro-gen", p.gen);
}

int cmd_eval(const EvalArgs& a) {
    require_file(a.weights);
    const Classifier net = load_weights(a.weights);
    const OodSuite suite = SuitePaths{a.suite_dir}.load();

    RegistryOptions opts;
    opts.preset = preset_by_name(a.preset);
    if (!a.params_file.empty()) apply_params_file(opts.preset, a.params_file);
    // Explicit flags have the last word.
    if (a.eps) {
        opts.preset.msp.eps = opts.preset.msp_t.eps = opts.preset.ent.eps = opts.preset.gen.eps =
            *a.eps;
    }
    if (a.k) {
        opts.preset.msp.k = opts.preset.msp_t.k = opts.preset.ent.k = opts.preset.gen.k = *a.k;
    }
    if (a.temp) opts.preset.msp_t_temp = *a.temp;
    if (a.gamma) opts.preset.gen_gamma = *a.gamma;
    if (a.m_top) opts.preset.gen_m = *a.m_top;
    opts.odin_eps = a.odin_eps;
    if (!a.clamp.empty()) {
        if (a.clamp.size() != 2) throw ValueError("--clamp needs exactly two values: lo hi");
        opts.clamp = {a.clamp[0], a.clamp[1]};
    }

    std::vector<Detector> detectors;
    if (a.detectors.empty()) {
        detectors = default_registry(net.class_count(), opts);
    } else {
        std::size_t pos = 0;
        while (pos < a.detectors.size()) {
            std::size_t next = a.detectors.find(',', pos);
            if (next == std::string::npos) next = a.detectors.size();
            const std::string name = a.detectors.substr(pos, next - pos);
            if (!name.empty()) {
                detectors.push_back(detector_by_name(name, net.class_count(), opts));
            }
            pos = next + 1;
        }
        if (detectors.empty()) throw ValueError("--detectors parsed to an empty list");
    }

    const EvalReport report = evaluate_all(net, detectors, suite);
    ensure_dir(a.out_dir);
    const fs::path dir(a.out_dir);
    write_text(dir / "report.csv", report_csv(report));
    write_text(dir / "report.txt", report_table(report));

    ordered_json cfg;
    cfg["weights"] = a.weights;
    cfg["suite"] = a.suite_dir;
    cfg["preset"] = a.preset;
    cfg["params_file"] = a.params_file;
    cfg["detectors"] = a.detectors.empty() ? "all" : a.detectors;
    cfg["odin_eps"] = a.odin_eps;
    if (a.eps) cfg["eps"] = *a.eps;
    if (a.k) cfg["k"] = *a.k;
    if (a.temp) cfg["temp"] = *a.temp;
    if (a.gamma) cfg["gamma"] = *a.gamma;
    if (a.m_top) cfg["m_top"] = *a.m_top;
    if (opts.clamp) cfg["clamp"] = {opts.clamp->first, opts.clamp->second};
    write_manifest(dir, "eval", cfg);
    std::cout << report_table(report);
    return 0;
}

// ---- sweep ------------------------------------------------------------------

struct SweepArgs {
    std::string weights;
    std::string suite_dir;
    std::string out_dir = "out";
    std::string score = "all";
    std::vector<double> eps_list;
    std::vector<std::size_t> k_list;
    std::vector<double> t_list;
    std::vector<double> gamma_list;
    std::vector<std::size_t> m_list;
};

int cmd_sweep(const SweepArgs& a) {
    require_file(a.weights);
    const Classifier net = load_weights(a.weights);
    const OodSuite suite = SuitePaths{a.suite_dir}.load();
    ensure_dir(a.out_dir);
    const fs::path dir(a.out_dir);

    std::vector<ScoreKind> kinds;
    if (a.score == "all") {
        kinds = {ScoreKind::msp, ScoreKind::msp_t, ScoreKind::ent, ScoreKind::gen};
    } else {
        kinds = {parse_score_kind(a.score)};
        if (kinds[0] == ScoreKind::ebo) throw ValueError("sweep: ebo has no PRO variant to tune");
    }

    ordered_json best;
    for (ScoreKind kind : kinds) {
        SweepGrid grid = SweepGrid::defaults(kind, net.class_count());
        if (!a.eps_list.empty()) grid.eps_list = a.eps_list;
        if (!a.k_list.empty()) grid.k_list = a.k_list;
        if (!a.t_list.empty()) grid.t_list = a.t_list;
        if (!a.gamma_list.empty()) grid.gamma_list = a.gamma_list;
        if (!a.m_list.empty()) grid.m_list = a.m_list;

        const SweepResult result = sweep(net, kind, grid, suite.ind_val, suite.ood_val);
        const std::string name = "pro-" + score_kind_name(kind);
        ordered_json b;
        b["eps"] = *result.best.eps;
        b["k"] = *result.best.k;
        if (result.best.temperature) b["t"] = *result.best.temperature;
        if (result.best.gamma) b["gamma"] = *result.best.gamma;
        if (result.best.m) b["m"] = *result.best.m;
        b["val_auroc"] = result.best_val_auroc;
        best[name] = std::move(b);

        std::string file = "grid_" + score_kind_name(kind) + ".csv";
        write_text(dir / file, sweep_rows_csv(result.rows));
    }
    write_text(dir / "best.json", best.dump(2) + "\n");

    ordered_json cfg;
    cfg["weights"] = a.weights;
    cfg["suite"] = a.suite_dir;
    cfg["score"] = a.score;
    cfg["eps_list"] = a.eps_list;
    cfg["k_list"] = a.k_list;
    cfg["t_list"] = a.t_list;
    cfg["gamma_list"] = a.gamma_list;
    cfg["m_list"] = a.m_list;
    write_manifest(dir, "sweep", cfg);
    std::cout << best.dump(2) << "\n";
    return 0;
}

// ---- landscape --------------------------------------------------------------

struct LandscapeArgs {
    std::string weights;
    std::string data_path;
    std::size_t index = 0;
    std::string score = "msp";
    double temp = 1000.0;
    double gamma = 0.1;
    std::size_t m_top = 10;
    double half_range = 0.05;
    std::size_t grid_n = 41;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    bool svg = false;
};

ScoreFn make_score(const std::string& name, double temp, double gamma, std::size_t m_top,
                   std::size_t class_count) {
    switch (parse_score_kind(name)) {
        case ScoreKind::msp: return ScoreFn::msp();
        case ScoreKind::msp_t: return ScoreFn::msp_t(temp);
        case ScoreKind::ent: return ScoreFn::ent();
        case ScoreKind::gen: return ScoreFn::gen(gamma, std::min(m_top, class_count));
        case ScoreKind::ebo: return ScoreFn::ebo(temp);
    }
    throw ValueError("unknown score");
}

int cmd_landscape(const LandscapeArgs& a) {
    require_file(a.weights);
    require_file(a.data_path);
    const Classifier net = load_weights(a.weights);
    const Dataset data = load_dataset(a.data_path);
    if (a.index >= data.n()) {
        throw ValueError("--index " + std::to_string(a.index) + " out of range (n=" +
                         std::to_string(data.n()) + ")");
    }
    const ScoreFn fn = make_score(a.score, a.temp, a.gamma, a.m_top, net.class_count());
    const LandscapeGrid grid =
        landscape(net, fn, data.row_tensor(a.index), a.half_range, a.grid_n, a.seed);

    ensure_dir(a.out_dir);
    const fs::path dir(a.out_dir);
    write_text(dir / "landscape.csv", landscape_csv(grid));
    if (a.svg) write_text(dir / "landscape.svg", landscape_svg(grid));

    ordered_json cfg;
    cfg["weights"] = a.weights;
    cfg["data"] = a.data_path;
    cfg["index"] = a.index;
    cfg["score"] = a.score;
    cfg["half_range"] = a.half_range;
    cfg["grid_n"] = a.grid_n;
    cfg["seed"] = a.seed;
    cfg["svg"] = a.svg;
    write_manifest(dir, "landscape", cfg);
    return 0;
}

// ---- shift ------------------------------------------------------------------

struct ShiftArgs {
    std::string weights;
    std::string suite_dir;
    std::string score = "msp";
    double temp = 1000.0;
    double gamma = 0.1;
    std::size_t m_top = 10;
    std::vector<double> eps_list = {0.001, 0.01};
    std::string out_dir = "out";
    bool svg = false;
};

int cmd_shift(const ShiftArgs& a) {
    require_file(a.weights);
    const Classifier net = load_weights(a.weights);
    const OodSuite suite = SuitePaths{a.suite_dir}.load();
    const ScoreFn fn = make_score(a.score, a.temp, a.gamma, a.m_top, net.class_count());

    std::vector<NamedSet> sets;
    sets.push_back({"ind", &suite.ind_test});
    for (const auto& entry : suite.ood_sets) sets.push_back({entry.name, &entry.data});

    const std::vector<ShiftSamples> shifts = shift_histogram(net, fn, sets, a.eps_list);

    ensure_dir(a.out_dir);
    const fs::path dir(a.out_dir);
    write_text(dir / "shifts_raw.csv", shifts_raw_csv(shifts));
    for (double eps : a.eps_list) {
        std::vector<const ShiftSamples*> group;
        for (const ShiftSamples& s : shifts) {
            if (s.eps == eps) group.push_back(&s);
        }
        const Histogram hist = bin_shifts(group, fn.kind);
        char name[64];
        std::snprintf(name, sizeof name, "hist_eps%g.csv", eps);
        write_text(dir / name, histogram_csv(hist));
        if (a.svg) {
            std::snprintf(name, sizeof name, "hist_eps%g.svg", eps);
            write_text(dir / name, histogram_svg(hist));
        }
    }

    ordered_json cfg;
    cfg["weights"] = a.weights;
    cfg["suite"] = a.suite_dir;
    cfg["score"] = a.score;
    cfg["eps_list"] = a.eps_list;
    cfg["svg"] = a.svg;
    write_manifest(dir, "shift", cfg);
    return 0;
}

// ---- bound-check --------------------------------------------------------------

struct BoundCheckArgs {
    std::string weights;
    std::string data_path;
    double eps = 0.1;
    std::size_t pgd_steps = 5;
    std::string out_dir = "out";
};

int cmd_bound_check(const BoundCheckArgs& a) {
    require_file(a.weights);
    require_file(a.data_path);
    const Classifier net = load_weights(a.weights);
    const Dataset data = load_dataset(a.data_path);
    const Claim1Report report = claim1_check(net, data, a.eps, a.pgd_steps);

    ensure_dir(a.out_dir);
    ordered_json j;
    j["eps"] = a.eps;
    j["pgd_steps"] = a.pgd_steps;
    j["e_hat"] = report.e_hat;
    j["mean_min_msp"] = report.mean_min_msp;
    j["bound"] = report.bound;
    j["holds"] = report.holds;
    write_text(fs::path(a.out_dir) / "bound.json", j.dump(2) + "\n");

    ordered_json cfg;
    cfg["weights"] = a.weights;
    cfg["data"] = a.data_path;
    cfg["eps"] = a.eps;
    cfg["pgd_steps"] = a.pgd_steps;
    write_manifest(a.out_dir, "bound-check", cfg);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Perturbation-rectified OOD detection toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("pro-ood ") + kVersion);

    GenDataArgs gd;
    auto* gen = app.add_subcommand("gen-data", "generate an IND/OOD suite");
    gen->add_option("--out-dir", gd.out_dir, "output directory");
    gen->add_option("--seed", gd.seed, "generator seed");
    gen->add_option("--preset", gd.preset, "suite preset (desk)");
    gen->add_option("--classes", gd.desk.class_count, "IND class count");
    gen->add_option("--dim", gd.desk.dim, "feature dimension");
    gen->add_option("--margin", gd.desk.margin, "nearest-mean distance");
    gen->add_option("--train-per-class", gd.desk.train_per_class, "train samples per class");
    gen->add_option("--val-per-class", gd.desk.val_per_class, "val samples per class");
    gen->add_option("--test-per-class", gd.desk.test_per_class, "test samples per class");
    gen->add_option("--ood-n", gd.desk.ood_n, "samples per OOD set");
    gen->add_option("--ood-val-n", gd.desk.ood_val_n, "validation OOD samples");
    gen->add_option("--near-shift", gd.desk.near_shift, "near-OOD mean translation");
    gen->add_option("--ring-radius", gd.desk.ring_radius, "far-OOD ring radius");
    gen->add_flag("--csv", gd.csv, "also export CSV");

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "train a classifier");
    train_cmd->add_option("--data", tr.data_path, "labeled dataset file")->required();
    train_cmd->add_option("--out-dir", tr.out_dir, "output directory");
    train_cmd->add_option("--mode", tr.mode, "standard | adversarial");
    train_cmd->add_option("--arch", tr.arch, "hidden widths, comma separated");
    train_cmd->add_option("--activation", tr.activation, "tanh | relu");
    train_cmd->add_option("--epochs", tr.cfg.epochs, "training epochs");
    train_cmd->add_option("--batch-size", tr.cfg.batch_size, "batch size");
    train_cmd->add_option("--lr", tr.cfg.learning_rate, "learning rate");
    train_cmd->add_option("--seed", tr.cfg.seed, "seed");
    train_cmd->add_option("--eps-adv", tr.cfg.eps_adv, "adversarial L-inf radius");
    train_cmd->add_option("--pgd-steps", tr.cfg.pgd_steps, "PGD steps");
    train_cmd->add_option("--pgd-step-size", tr.cfg.pgd_step_size, "PGD step size");

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate all detectors");
    eval_cmd->add_option("--weights", ev.weights, "weight file")->required();
    eval_cmd->add_option("--suite", ev.suite_dir, "suite directory")->required();
    eval_cmd->add_option("--out-dir", ev.out_dir, "output directory");
    eval_cmd->add_option("--preset", ev.preset,
                         "hyperparameter preset (cifar10-like | cifar100-like | imagenet-like)");
    eval_cmd->add_option("--params", ev.params_file, "tuned parameters from sweep (best.json)");
    eval_cmd->add_option("--detectors", ev.detectors, "comma list, default all");
    double ev_eps = 0, ev_temp = 0, ev_gamma = 0;
    std::size_t ev_k = 0, ev_m = 0;
    auto* o_eps = eval_cmd->add_option("--eps", ev_eps, "PRO step length override");
    auto* o_k = eval_cmd->add_option("--k", ev_k, "PRO step count override");
    auto* o_temp = eval_cmd->add_option("--temp", ev_temp, "temperature override");
    auto* o_gamma = eval_cmd->add_option("--gamma", ev_gamma, "GEN gamma override");
    auto* o_m = eval_cmd->add_option("--m-top", ev_m, "GEN top-M override");
    eval_cmd->add_option("--odin-eps", ev.odin_eps, "ODIN ascent step length");
    eval_cmd->add_option("--clamp", ev.clamp, "domain box lo hi")->expected(2);

    SweepArgs sw;
    auto* sweep_cmd = app.add_subcommand("sweep", "hyperparameter search on the validation sets");
    sweep_cmd->add_option("--weights", sw.weights, "weight file")->required();
    sweep_cmd->add_option("--suite", sw.suite_dir, "suite directory")->required();
    sweep_cmd->add_option("--out-dir", sw.out_dir, "output directory");
    sweep_cmd->add_option("--score", sw.score, "msp | msp-t | ent | gen | all");
    sweep_cmd->add_option("--eps-list", sw.eps_list, "step lengths");
    sweep_cmd->add_option("--k-list", sw.k_list, "step counts");
    sweep_cmd->add_option("--t-list", sw.t_list, "temperatures (msp-t)");
    sweep_cmd->add_option("--gamma-list", sw.gamma_list, "gamma values (gen)");
    sweep_cmd->add_option("--m-list", sw.m_list, "top-M values (gen)");

    LandscapeArgs ls;
    auto* land_cmd = app.add_subcommand("landscape", "score surface on a random 2-D slice");
    land_cmd->add_option("--weights", ls.weights, "weight file")->required();
    land_cmd->add_option("--data", ls.data_path, "dataset file")->required();
    land_cmd->add_option("--index", ls.index, "sample row");
    land_cmd->add_option("--score", ls.score, "msp | msp-t | ent | gen | ebo");
    land_cmd->add_option("--temp", ls.temp, "temperature (msp-t, ebo)");
    land_cmd->add_option("--gamma", ls.gamma, "gamma (gen)");
    land_cmd->add_option("--m-top", ls.m_top, "top-M (gen)");
    land_cmd->add_option("--half-range", ls.half_range, "half extent of alpha/beta");
    land_cmd->add_option("--grid-n", ls.grid_n, "odd grid size");
    land_cmd->add_option("--seed", ls.seed, "direction seed");
    land_cmd->add_option("--out-dir", ls.out_dir, "output directory");
    land_cmd->add_flag("--svg", ls.svg, "also render SVG");

    ShiftArgs sh;
    auto* shift_cmd = app.add_subcommand("shift", "one-step score-shift distributions");
    shift_cmd->add_option("--weights", sh.weights, "weight file")->required();
    shift_cmd->add_option("--suite", sh.suite_dir, "suite directory")->required();
    shift_cmd->add_option("--score", sh.score, "msp | msp-t | ent | gen | ebo");
    shift_cmd->add_option("--temp", sh.temp, "temperature (msp-t, ebo)");
    shift_cmd->add_option("--gamma", sh.gamma, "gamma (gen)");
    shift_cmd->add_option("--m-top", sh.m_top, "top-M (gen)");
    shift_cmd->add_option("--eps-list", sh.eps_list, "step lengths");
    shift_cmd->add_option("--out-dir", sh.out_dir, "output directory");
    shift_cmd->add_flag("--svg", sh.svg, "also render SVG");

    BoundCheckArgs bc;
    auto* bound_cmd = app.add_subcommand("bound-check", "adversarial-loss MSP bound check");
    bound_cmd->add_option("--weights", bc.weights, "weight file")->required();
    bound_cmd->add_option("--data", bc.data_path, "labeled IND dataset file")->required();
    bound_cmd->add_option("--eps", bc.eps, "perturbation ball radius");
    bound_cmd->add_option("--pgd-steps", bc.pgd_steps, "PGD steps");
    bound_cmd->add_option("--out-dir", bc.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: validation: " << e.what() << "\n";
        return 2;
    }

    if (*o_eps) ev.eps = ev_eps;
    if (*o_k) ev.k = ev_k;
    if (*o_temp) ev.temp = ev_temp;
    if (*o_gamma) ev.gamma = ev_gamma;
    if (*o_m) ev.m_top = ev_m;

    if (gen->parsed()) return cmd_gen_data(gd);
    if (train_cmd->parsed()) return cmd_train(tr);
    if (eval_cmd->parsed()) return cmd_eval(ev);
    if (sweep_cmd->parsed()) return cmd_sweep(sw);
    if (land_cmd->parsed()) return cmd_landscape(ls);
    if (shift_cmd->parsed()) return cmd_shift(sh);
    if (bound_cmd->parsed()) return cmd_bound_check(bc);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const ValueError& e) {
        std::cerr << "error: validation: " << e.what() << "\n";
        return 2;
    } catch (const SchemaError& e) {
        std::cerr << "error: validation: " << e.what() << "\n";
        return 2;
    } catch (const DimensionError& e) {
        std::cerr << "error: validation: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: numeric: " << e.what() << "\n";
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "error: io: " << e.what() << "\n";
        return 4;
    } catch (const IoError& e) {
        std::cerr << "error: io: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
}
