#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "aquaperc/calib.hpp"
#include "aquaperc/render.hpp"
#include "aquaperc/rgb.hpp"

namespace aquaperc::learn {

// One training example: 20 inputs (9 calibration decays, 9 state values,
// 2 offsets) and the channel-wise patch contrast of the offset image.
struct DatasetRow {
    std::array<double, 9> calib{};
    double dist{0.0};
    double light{0.0};
    double depth{0.0};
    Rgb img_mean;
    Rgb img_std;  // patch-based, consistent with the contrast targets
    double ddist{0.0};
    double dlight{0.0};
    Rgb target;
    bool clamped{false};  // offsets snapped back into the valid range

    std::array<double, 20> inputs() const;
};

// Axes of the dataset cross product plus the shared scene configuration.
struct SweepSpec {
    std::vector<std::string> textures{"hull", "seabed"};
    std::vector<std::string> water_types{"JI", "JII", "J3C"};
    std::vector<double> backscatters{0.0183, 0.1};
    std::vector<double> depths{2.0, 4.0};
    std::vector<double> distances{0.8, 1.4, 2.0, 2.6};
    std::vector<double> lights{0.2, 0.5, 0.8};
    std::vector<double> ddists{-0.6, 0.0, 0.6, 1.2};
    std::vector<double> dlights{-0.2, 0.0, 0.2};

    int spp{24};
    int image_width{192};
    int image_height{108};
    double particle_refraction{1.10};
    double kd_b_fraction{0.25};  // matches the bundled scenario runtime
    render::NoiseParams noise{0.004, 0.008, true, 1.0};
    std::string data_dir;  // empty: optics::default_data_dir()

    // Sweep matching the published dataset dimensions (not rendered here;
    // used for size arithmetic and as a config template).
    static SweepSpec paper_scale();

    size_t row_count() const;
    void validate() const;
};

using ProgressFn = std::function<void(size_t done, size_t total)>;

std::vector<DatasetRow> generate_dataset(const SweepSpec& spec, uint64_t seed,
                                         const ProgressFn& progress = {});

void write_dataset_csv(const std::vector<DatasetRow>& rows, const std::string& path);
std::vector<DatasetRow> read_dataset_csv(const std::string& path);

struct TrainConfig {
    int epochs{25};
    double test_split{0.2};
    int batch_size{64};
    double learning_rate{1e-3};
    uint64_t seed{1};
    bool use_calibration{true};  // false: drop the 9 calibration inputs
};

// Dense ReLU network, input -> 128 -> 128 -> 3, trained with Adam on the
// mean absolute error. Inputs are standardized with training-split
// statistics stored in the model.
struct MlpModel {
    std::vector<int> dims;                       // {input, 128, 128, 3}
    std::vector<std::vector<double>> weights;    // row-major, per layer
    std::vector<std::vector<double>> biases;
    std::vector<double> feat_mean;
    std::vector<double> feat_scale;

    int input_dim() const { return dims.front(); }

    // Raw forward pass on standardized-internally inputs.
    std::array<double, 3> forward(const std::vector<double>& x) const;

    // Forward pass with outputs clamped at zero (contrast is nonnegative).
    Rgb predict(const std::vector<double>& x) const;

    // Gradient of mean-absolute-error loss against every parameter,
    // appended layer by layer (weights then biases). For gradient checks.
    std::vector<double> loss_gradient(const std::vector<double>& x, const Rgb& target,
                                      double* loss = nullptr) const;
    std::vector<double*> parameter_view();

    void save(const std::string& path) const;
    static MlpModel load(const std::string& path);
};

struct TrainMetrics {
    double train_mae{0.0};
    double test_mae{0.0};
    std::vector<double> epoch_loss;
};

std::pair<MlpModel, TrainMetrics> train(const std::vector<DatasetRow>& rows,
                                        const TrainConfig& cfg);

// Trains the full model and an 11-input variant without the calibration
// features; returns {with_calibration, without_calibration} metrics.
std::pair<TrainMetrics, TrainMetrics> ablate_calibration(const std::vector<DatasetRow>& rows,
                                                         const TrainConfig& cfg);

}  // namespace aquaperc::learn
