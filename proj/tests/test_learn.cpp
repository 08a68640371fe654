#include <cmath>
#include <cstdio>
#include <filesystem>

#include "aquaperc/learn.hpp"
#include "aquaperc/rng.hpp"
#include "doctest.h"

using namespace aquaperc;
using namespace aquaperc::learn;

namespace {

// Synthetic rows with a known target function; no rendering involved.
std::vector<DatasetRow> synthetic_rows(size_t n, uint64_t seed,
                                       const std::function<Rgb(const std::array<double, 20>&)>& f) {
    std::vector<DatasetRow> rows;
    Pcg32 rng(seed, 3);
    for (size_t i = 0; i < n; ++i) {
        DatasetRow row;
        for (auto& c : row.calib) c = rng.uniform();
        row.dist = rng.uniform(0.5, 3.0);
        row.light = rng.uniform();
        row.depth = rng.uniform(1.0, 6.0);
        row.img_mean = {rng.uniform(), rng.uniform(), rng.uniform()};
        row.img_std = {rng.uniform(), rng.uniform(), rng.uniform()};
        row.ddist = rng.uniform(-1.0, 1.0);
        row.dlight = rng.uniform(-0.3, 0.3);
        row.target = f(row.inputs());
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_CASE("sweep row counts: paper scale and desk scale") {
    CHECK(SweepSpec::paper_scale().row_count() == 138240);  // 2*10*4*3*6*4*6*4
    SweepSpec desk;
    CHECK(desk.row_count() == 3456);  // 2*3*2*2*4*3*4*3
    CHECK_THROWS(([] {
        SweepSpec bad;
        bad.lights.clear();
        bad.validate();
    })());
}

TEST_CASE("constant-target dataset trains to the constant") {
    auto rows = synthetic_rows(600, 1, [](const auto&) { return Rgb{0.2, 0.2, 0.2}; });
    TrainConfig cfg;
    cfg.seed = 5;
    auto [model, metrics] = train(rows, cfg);
    CHECK(metrics.test_mae < 1e-3);
}

TEST_CASE("linear synthetic target is learned within 0.01 MAE") {
    // y = W x with small mixed weights over the 20 standardized features.
    auto f = [](const std::array<double, 20>& x) {
        Rgb y{0.05, 0.1, 0.15};
        for (int i = 0; i < 20; ++i) {
            y.r += 0.02 * ((i % 3) - 1) * x[i];
            y.g += 0.015 * ((i % 5) - 2) * x[i] / 2.0;
            y.b += 0.01 * ((i % 7) - 3) * x[i] / 3.0;
        }
        return y;
    };
    auto rows = synthetic_rows(2000, 2, f);
    TrainConfig cfg;
    cfg.seed = 7;
    auto [model, metrics] = train(rows, cfg);
    CHECK(metrics.test_mae < 0.01);
}

TEST_CASE("backprop gradients match central finite differences") {
    auto rows = synthetic_rows(120, 3, [](const auto& x) {
        return Rgb{0.1 + 0.1 * std::sin(x[9]), 0.2 + 0.05 * x[10], 0.1};
    });
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.seed = 11;
    auto [model, metrics] = train(rows, cfg);

    Pcg32 rng(99, 1);
    auto params = model.parameter_view();
    double worst = 0.0;
    for (int probe = 0; probe < 10; ++probe) {
        const DatasetRow& row = rows[static_cast<size_t>(rng.uniform() * rows.size())];
        std::vector<double> x(row.inputs().begin(), row.inputs().end());
        auto grad = model.loss_gradient(x, row.target);
        // Random parameter coordinate with a measurable gradient.
        size_t pi = 0;
        for (int tries = 0; tries < 200; ++tries) {
            pi = static_cast<size_t>(rng.uniform() * params.size());
            if (std::abs(grad[pi]) > 1e-6) break;
        }
        if (std::abs(grad[pi]) <= 1e-6) continue;
        double h = 1e-5;
        double saved = *params[pi];
        double lp, lm;
        *params[pi] = saved + h;
        model.loss_gradient(x, row.target, &lp);
        *params[pi] = saved - h;
        model.loss_gradient(x, row.target, &lm);
        *params[pi] = saved;
        double numeric = (lp - lm) / (2.0 * h);
        worst = std::max(worst, std::abs(numeric - grad[pi]) / std::max(std::abs(numeric), 1e-12));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("training is deterministic and the loss trends down") {
    auto rows = synthetic_rows(800, 4, [](const auto& x) {
        return Rgb{0.1 + 0.05 * std::tanh(x[9] - 1.5), 0.2, 0.05 + 0.02 * x[11] / 6.0};
    });
    TrainConfig cfg;
    cfg.seed = 21;
    auto [m1, k1] = train(rows, cfg);
    auto [m2, k2] = train(rows, cfg);
    CHECK(m1.weights[0] == m2.weights[0]);
    CHECK(m1.biases[2] == m2.biases[2]);
    CHECK(k1.test_mae == doctest::Approx(k2.test_mae));

    // Non-increasing within a 5% tolerance band, epoch over epoch.
    for (size_t e = 1; e < k1.epoch_loss.size(); ++e)
        CHECK(k1.epoch_loss[e] <= k1.epoch_loss[e - 1] * 1.05);
}

TEST_CASE("predict clamps at zero and validates inputs") {
    auto rows = synthetic_rows(200, 6, [](const auto&) { return Rgb{0.0, 0.0, 0.0}; });
    TrainConfig cfg;
    cfg.epochs = 3;
    auto [model, metrics] = train(rows, cfg);
    std::vector<double> x(20, 0.5);
    Rgb y = model.predict(x);
    CHECK(y.all_nonnegative());
    CHECK_THROWS(model.predict(std::vector<double>(7, 0.0)));
    std::vector<double> bad(20, 0.0);
    bad[3] = std::nan("");
    CHECK_THROWS(model.predict(bad));

    // Continuity: small input steps move the output by a bounded amount.
    std::vector<double> x2 = x;
    x2[9] += 1e-4;
    Rgb y2 = model.predict(x2);
    CHECK(std::abs(y2.r - y.r) < 1.0 * 1e-2);
}

TEST_CASE("standardization round trips through save/load") {
    auto rows = synthetic_rows(300, 8, [](const auto& x) {
        return Rgb{0.1 + 0.01 * x[9], 0.1, 0.1};
    });
    TrainConfig cfg;
    cfg.epochs = 4;
    auto [model, metrics] = train(rows, cfg);
    std::string path = (std::filesystem::temp_directory_path() / "aquaperc_model.json").string();
    model.save(path);
    MlpModel loaded = MlpModel::load(path);
    CHECK(loaded.dims == model.dims);
    std::vector<double> x(rows[0].inputs().begin(), rows[0].inputs().end());
    Rgb a = model.predict(x);
    Rgb b = loaded.predict(x);
    CHECK(a.r == doctest::Approx(b.r).epsilon(1e-12));
    CHECK(a.b == doctest::Approx(b.b).epsilon(1e-12));
    std::filesystem::remove(path);
}

TEST_CASE("ablation trains an 11-input variant") {
    // Target depends on the calibration features, so dropping them hurts.
    auto rows = synthetic_rows(1500, 9, [](const auto& x) {
        return Rgb{0.1 + 0.08 * x[0], 0.1 + 0.08 * x[4], 0.1 + 0.08 * x[8]};
    });
    TrainConfig cfg;
    cfg.seed = 31;
    auto [with_calib, without_calib] = ablate_calibration(rows, cfg);
    CHECK(with_calib.test_mae < without_calib.test_mae);
}

TEST_CASE("dataset CSV round trip preserves all 23 columns") {
    auto rows = synthetic_rows(25, 10, [](const auto& x) {
        return Rgb{0.1, 0.2, 0.3};
    });
    rows[3].clamped = true;
    std::string path = (std::filesystem::temp_directory_path() / "aquaperc_rows.csv").string();
    write_dataset_csv(rows, path);
    auto rows2 = read_dataset_csv(path);
    REQUIRE(rows2.size() == rows.size());
    CHECK(rows2[5].calib[4] == doctest::Approx(rows[5].calib[4]).epsilon(1e-7));
    CHECK(rows2[5].dist == doctest::Approx(rows[5].dist).epsilon(1e-7));
    CHECK(rows2[5].target.g == doctest::Approx(rows[5].target.g).epsilon(1e-7));
    CHECK(rows2[7].img_std.b == doctest::Approx(rows[7].img_std.b).epsilon(1e-7));
    std::filesystem::remove(path);
    CHECK_THROWS(read_dataset_csv("no/such/dataset.csv"));
}

TEST_CASE("generated mini dataset: identity offset reproduces current stats") {
    SweepSpec spec;
    spec.textures = {"seabed"};
    spec.water_types = {"JII"};
    spec.backscatters = {0.0183};
    spec.depths = {2.0};
    spec.distances = {1.0, 2.0};
    spec.lights = {0.5};
    spec.ddists = {0.0, 0.5};
    spec.dlights = {0.0};
    spec.spp = 12;
    spec.image_width = 96;
    spec.image_height = 54;
    auto rows = generate_dataset(spec, 77);
    REQUIRE(rows.size() == 4);
    for (const auto& row : rows) {
        if (row.ddist == 0.0 && row.dlight == 0.0) {
            CHECK(row.target.r == doctest::Approx(row.img_std.r).epsilon(1e-9));
            CHECK(row.target.g == doctest::Approx(row.img_std.g).epsilon(1e-9));
        }
        CHECK(row.calib[0] >= 0.0);
        CHECK(row.target.all_nonnegative());
        CHECK(!row.clamped);
    }
}

TEST_CASE("train rejects undersized datasets") {
    auto rows = synthetic_rows(50, 12, [](const auto&) { return Rgb{0.1, 0.1, 0.1}; });
    TrainConfig cfg;
    CHECK_THROWS(train(rows, cfg));
}
