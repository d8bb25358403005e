#pragma once

// Shared trained fixture for tests that need realistic score geometry: a
// reduced desk suite plus an adversarially trained classifier. Built once on
// first use.

#include "pro_ood/datasets.hpp"
#include "pro_ood/model.hpp"

namespace test_fixture {

struct DeskFixture {
    pro_ood::OodSuite suite;
    pro_ood::Classifier net;
    pro_ood::TrainConfig train_cfg;

    DeskFixture() {
        pro_ood::DeskPreset preset;
        preset.train_per_class = 60;
        preset.val_per_class = 20;
        preset.test_per_class = 30;
        preset.ood_n = 120;
        preset.ood_val_n = 80;
        suite = gen_desk_suite(preset, 7);

        train_cfg.epochs = 60;
        train_cfg.batch_size = 32;
        train_cfg.learning_rate = 0.1;
        train_cfg.seed = 3;
        train_cfg.adversarial = true;
        train_cfg.eps_adv = 0.1;
        train_cfg.pgd_steps = 3;
        train_cfg.pgd_step_size = 0.07;
        net = pro_ood::train(suite.ind_train, train_cfg, {24, 24}).net;
    }
};

inline const DeskFixture& desk() {
    static DeskFixture f;
    return f;
}

}  // namespace test_fixture
