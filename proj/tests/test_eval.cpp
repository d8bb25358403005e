#include <set>
#include <sstream>

#include <doctest.h>

#include "fixture.hpp"
#include "pro_ood/errors.hpp"
#include "pro_ood/eval.hpp"
#include "pro_ood/metrics.hpp"

using namespace pro_ood;

namespace {

// Membership-peeking stub: scores 1 for rows that appear in the IND test set
// and 0 otherwise.
Detector oracle_stub(const Dataset& ind_test) {
    std::set<std::vector<double>> members;
    for (std::size_t i = 0; i < ind_test.n(); ++i) {
        auto row = ind_test.row(i);
        members.insert(std::vector<double>(row.begin(), row.end()));
    }
    return Detector{"oracle-stub",
                    [members](const Classifier&, const Dataset& d) {
                        std::vector<double> out(d.n());
                        for (std::size_t i = 0; i < d.n(); ++i) {
                            auto row = d.row(i);
                            out[i] = members.count(
                                         std::vector<double>(row.begin(), row.end()))
                                         ? 1.0
                                         : 0.0;
                        }
                        return out;
                    },
                    {}};
}

Detector constant_stub() {
    return Detector{"constant",
                    [](const Classifier&, const Dataset& d) {
                        return std::vector<double>(d.n(), 0.25);
                    },
                    {}};
}

}  // namespace

TEST_CASE("label-peeking oracle detector scores a perfect AUROC everywhere") {
    const auto& f = test_fixture::desk();
    const auto rows = evaluate_detector(f.net, oracle_stub(f.suite.ind_test), f.suite);
    for (const EvalRow& r : rows) {
        CHECK(r.auroc == 1.0);
        CHECK(r.fpr95 == 0.0);
    }
}

TEST_CASE("constant detector sits at chance") {
    const auto& f = test_fixture::desk();
    const auto rows = evaluate_detector(f.net, constant_stub(), f.suite);
    for (const EvalRow& r : rows) CHECK(r.auroc == 0.5);
}

TEST_CASE("msp separates far OOD on the trained desk model") {
    // The reduced fixture model clears 0.85 here; the full-scale desk run in
    // the acceptance suite holds the ring above 0.9.
    const auto& f = test_fixture::desk();
    const Detector msp = detector_by_name("msp", f.net.class_count(), RegistryOptions{});
    const auto rows = evaluate_detector(f.net, msp, f.suite);
    bool seen = false;
    for (const EvalRow& r : rows) {
        if (r.group == "far" && r.dataset != "average") {
            CHECK(r.auroc > 0.85);
            seen = true;
        }
    }
    CHECK(seen);
}

TEST_CASE("average rows are the unweighted means of their group") {
    const auto& f = test_fixture::desk();
    const Detector msp = detector_by_name("msp", f.net.class_count(), RegistryOptions{});
    const auto rows = evaluate_detector(f.net, msp, f.suite);

    double far_sum = 0.0;
    std::size_t far_n = 0;
    const EvalRow* far_avg = nullptr;
    for (const EvalRow& r : rows) {
        if (r.group != "far") continue;
        if (r.dataset == "average") {
            far_avg = &r;
        } else {
            far_sum += r.auroc;
            ++far_n;
        }
    }
    REQUIRE(far_avg != nullptr);
    REQUIRE(far_n == 2);
    CHECK(far_avg->auroc == doctest::Approx(far_sum / 2.0).epsilon(1e-15));
}

TEST_CASE("registry carries the full detector list and rejects unknown names") {
    const auto all = default_registry(4, RegistryOptions{});
    std::vector<std::string> names;
    for (const auto& d : all) names.push_back(d.name);
    const std::vector<std::string> expect = {"msp",  "msp-t",   "ent",       "gen",     "ebo",
                                             "odin", "pro-msp", "pro-msp-t", "pro-ent", "pro-gen"};
    CHECK(names == expect);

    try {
        detector_by_name("nope", 4, RegistryOptions{});
        FAIL("expected ValueError");
    } catch (const ValueError& e) {
        // The message must list the valid names.
        CHECK(std::string(e.what()).find("pro-msp") != std::string::npos);
    }
}

TEST_CASE("gen preset top-M is clamped to the class count") {
    const auto all = default_registry(3, RegistryOptions{});
    for (const auto& d : all) {
        if (d.name == "gen" || d.name == "pro-gen") {
            REQUIRE(d.params.m.has_value());
            CHECK(*d.params.m == 3);
        }
    }
}

TEST_CASE("report csv layout") {
    EvalReport report;
    EvalRow row;
    row.detector = "msp";
    row.dataset = "far-ring";
    row.group = "far";
    row.auroc = 0.987654321;
    row.fpr95 = 0.05;
    row.params.eps = 0.0003;
    row.params.k = 3;
    row.n_ind = 10;
    row.n_ood = 20;
    report.rows.push_back(row);

    const std::string csv = report_csv(report);
    std::istringstream in(csv);
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "detector,dataset,group,auroc,fpr95,eps,k,t,gamma,m,n_ind,n_ood");
    std::getline(in, line);
    CHECK(line == "msp,far-ring,far,0.987654,0.050000,0.000300,3,,,,10,20");
}

TEST_CASE("singleton sweep grid returns that config") {
    const auto& f = test_fixture::desk();
    SweepGrid grid;
    grid.eps_list = {0.001};
    grid.k_list = {3};
    const SweepResult res = sweep(f.net, ScoreKind::msp, grid, f.suite.ind_val, f.suite.ood_val);
    REQUIRE(res.rows.size() == 1);
    CHECK(*res.best.eps == 0.001);
    CHECK(*res.best.k == 3);
    CHECK(res.best_val_auroc == res.rows[0].val_auroc);
}

TEST_CASE("sweep rejects K = 0") {
    const auto& f = test_fixture::desk();
    SweepGrid grid;
    grid.eps_list = {0.001};
    grid.k_list = {0};
    CHECK_THROWS_AS(sweep(f.net, ScoreKind::msp, grid, f.suite.ind_val, f.suite.ood_val),
                    ValueError);
}

TEST_CASE("sweep best is optimal over its own rows with the stated tie-break") {
    const auto& f = test_fixture::desk();
    SweepGrid grid = SweepGrid::defaults(ScoreKind::msp, f.net.class_count());
    grid.eps_list = {2e-4, 1e-3, 1e-2};
    const SweepResult res = sweep(f.net, ScoreKind::msp, grid, f.suite.ind_val, f.suite.ood_val);
    REQUIRE(res.rows.size() == 12);

    for (const SweepRow& row : res.rows) {
        CHECK(row.val_auroc <= res.best_val_auroc);
        if (row.val_auroc == res.best_val_auroc) {
            // The winner is the cheapest among ties.
            const bool not_cheaper = std::make_pair(*res.best.k, *res.best.eps) <=
                                     std::make_pair(*row.params.k, *row.params.eps);
            CHECK(not_cheaper);
        }
    }
}

TEST_CASE("a K-step sweep row equals a direct pro evaluation") {
    // The prefix-minimum shortcut inside sweep must agree with running
    // pro_score at that K directly.
    const auto& f = test_fixture::desk();
    SweepGrid grid;
    grid.eps_list = {0.003};
    grid.k_list = {2, 5};
    const SweepResult res = sweep(f.net, ScoreKind::msp, grid, f.suite.ind_val, f.suite.ood_val);

    ProConfig cfg;
    cfg.eps = 0.003;
    cfg.k = 2;
    const std::vector<double> ind = pro_scores(f.net, ScoreFn::msp(), f.suite.ind_val, cfg);
    const std::vector<double> ood = pro_scores(f.net, ScoreFn::msp(), f.suite.ood_val, cfg);
    const double expect = auroc(ind, ood);
    bool found = false;
    for (const SweepRow& row : res.rows) {
        if (*row.params.k == 2) {
            CHECK(row.val_auroc == expect);
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("tuned pro-msp does not lose to plain msp on the desk suite") {
    const auto& f = test_fixture::desk();
    SweepGrid grid = SweepGrid::defaults(ScoreKind::msp, f.net.class_count());
    const SweepResult res = sweep(f.net, ScoreKind::msp, grid, f.suite.ind_val, f.suite.ood_val);

    ProConfig cfg;
    cfg.eps = *res.best.eps;
    cfg.k = *res.best.k;
    const std::vector<double> pro_ind = pro_scores(f.net, ScoreFn::msp(), f.suite.ind_test, cfg);
    const std::vector<double> msp_ind = plain_scores(f.net, ScoreFn::msp(), f.suite.ind_test);

    for (const auto& entry : f.suite.ood_sets) {
        const std::vector<double> pro_ood = pro_scores(f.net, ScoreFn::msp(), entry.data, cfg);
        const std::vector<double> msp_ood = plain_scores(f.net, ScoreFn::msp(), entry.data);
        CHECK(auroc(pro_ind, pro_ood) >= auroc(msp_ind, msp_ood) - 0.01);
    }
}
