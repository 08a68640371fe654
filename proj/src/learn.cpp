#include "aquaperc/learn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "aquaperc/imstats.hpp"
#include "aquaperc/optics.hpp"
#include "aquaperc/rng.hpp"
#include "json.hpp"

namespace aquaperc::learn {

namespace {
inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }
}  // namespace

std::array<double, 20> DatasetRow::inputs() const {
    return {calib[0], calib[1], calib[2], calib[3], calib[4],  calib[5],  calib[6],
            calib[7], calib[8], dist,     light,    depth,     img_mean.r, img_mean.g,
            img_mean.b, img_std.r, img_std.g, img_std.b, ddist, dlight};
}

SweepSpec SweepSpec::paper_scale() {
    SweepSpec spec;
    spec.textures = {"hull", "seabed"};
    spec.water_types = optics::list_water_types();
    spec.backscatters = {0.005, 0.0183, 0.05, 0.1};
    spec.depths = {2.0, 4.0, 6.0};
    spec.distances = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    spec.lights = {0.0, 0.33, 0.66, 1.0};
    spec.ddists = {-1.0, -0.5, 0.0, 0.5, 1.0, 1.5};
    spec.dlights = {-0.25, 0.0, 0.25, 0.5};
    spec.image_width = 1280;
    spec.image_height = 720;
    return spec;
}

size_t SweepSpec::row_count() const {
    return textures.size() * water_types.size() * backscatters.size() * depths.size() *
           distances.size() * lights.size() * ddists.size() * dlights.size();
}

void SweepSpec::validate() const {
    if (textures.empty() || water_types.empty() || backscatters.empty() || depths.empty() ||
        distances.empty() || lights.empty() || ddists.empty() || dlights.empty())
        throw std::invalid_argument("SweepSpec: every sweep axis must be nonempty");
    if (spp < 1 || image_width < 16 || image_height < 16)
        throw std::invalid_argument("SweepSpec: bad rendering parameters");
}

namespace {

struct FrameStats {
    Rgb mean;
    Rgb contrast;
};

// Renders (or reuses) the noisy frame at (depth, distance, light) and
// caches its statistics. The noise stream is keyed by the same triple, so
// identical keys observe identical frames.
class StatsCache {
public:
    StatsCache(render::SceneState scene, render::NoiseParams noise, int spp, uint64_t seed)
        : scene_(std::move(scene)), noise_(noise), spp_(spp), seed_(seed) {}

    const FrameStats& at(double depth, double distance, double light) {
        auto key = std::make_tuple(quantize(depth), quantize(distance), quantize(light));
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;

        render::SceneState scene = scene_;
        scene.depth = depth;
        scene.distance = distance;
        scene.light = light;
        uint64_t frame_seed = derive_seed(seed_, std::get<0>(key),
                                          static_cast<uint64_t>(std::get<1>(key)) << 20 |
                                              static_cast<uint64_t>(std::get<2>(key)));
        ImageF img = render::render(scene, spp_, frame_seed);
        if (noise_.poisson_scale > 0.0 || noise_.gaussian_sigma > 0.0)
            img = render::apply_noise(img, noise_, derive_seed(frame_seed, 0x6e7aULL));
        FrameStats stats;
        stats.mean = imstats::channel_mean(img);
        stats.contrast = imstats::patch_contrast(img, imstats::PatchGrid::fit(img, 8, 6));
        return cache_.emplace(key, stats).first->second;
    }

private:
    static int64_t quantize(double v) { return static_cast<int64_t>(std::llround(v * 1e6)); }

    render::SceneState scene_;
    render::NoiseParams noise_;
    int spp_;
    uint64_t seed_;
    std::map<std::tuple<int64_t, int64_t, int64_t>, FrameStats> cache_;
};

}  // namespace

std::vector<DatasetRow> generate_dataset(const SweepSpec& spec, uint64_t seed,
                                         const ProgressFn& progress) {
    spec.validate();
    const std::string data_dir = spec.data_dir.empty() ? optics::default_data_dir() : spec.data_dir;
    const size_t total = spec.row_count();

    std::vector<DatasetRow> rows;
    rows.reserve(total);
    size_t done = 0;

    size_t scenario_index = 0;
    for (const auto& texture_name : spec.textures) {
        for (const auto& water_id : spec.water_types) {
            for (double backscatter : spec.backscatters) {
                // Scenario-level setup: water body, phase function, target.
                double mu = phase::mu_from_backscatter(spec.particle_refraction, backscatter);
                auto phase_spec = std::make_shared<const phase::PhaseSpec>(phase::PhaseSpec::build(
                    phase::FfParams{spec.particle_refraction, mu}));
                render::SceneState scene;
                scene.water = optics::water_from_type(water_id, data_dir, {}, backscatter,
                                                      spec.particle_refraction);
                scene.phase_spec = phase_spec;
                scene.target.texture = texture::texture_from_name(texture_name);
                scene.kd_b_fraction = spec.kd_b_fraction;
                scene.camera.width = spec.image_width;
                scene.camera.height = spec.image_height;

                uint64_t scenario_seed = derive_seed(seed, 0x7363U, scenario_index);
                ++scenario_index;

                // Calibration covering the sweep (plus the paper's margins:
                // one extra meter of depth, half a meter of distance).
                double max_depth = *std::max_element(spec.depths.begin(), spec.depths.end());
                double max_dist = *std::max_element(spec.distances.begin(), spec.distances.end());
                double max_dd = *std::max_element(spec.ddists.begin(), spec.ddists.end());
                std::vector<double> depth_grid;
                for (double z = 0.5; z <= max_depth + 1.0 + 1e-9; z += 1.0) depth_grid.push_back(z);
                std::vector<double> dist_grid;
                for (double d = 0.5; d <= max_dist + max_dd + 0.5 + 1e-9; d += 0.5)
                    dist_grid.push_back(d);

                calib::CalibRunOptions copts;
                copts.spp = spec.spp;
                copts.noise = spec.noise;
                calib::CalibProfiles profiles = calib::run_calibration(
                    scene, depth_grid, dist_grid, spec.spp, scenario_seed, copts);
                calib::CalibSummary summary = calib::summarize(profiles);
                auto calib_inputs = summary.flatten();

                StatsCache cache(scene, spec.noise, spec.spp, scenario_seed);

                for (double depth : spec.depths) {
                    for (double dist : spec.distances) {
                        for (double light : spec.lights) {
                            const FrameStats& now = cache.at(depth, dist, light);
                            for (double dd : spec.ddists) {
                                for (double dl : spec.dlights) {
                                    DatasetRow row;
                                    std::copy(calib_inputs.begin(), calib_inputs.end(),
                                              row.calib.begin());
                                    row.dist = dist;
                                    row.light = light;
                                    row.depth = depth;
                                    row.img_mean = now.mean;
                                    row.img_std = now.contrast;

                                    double d2 = dist + dd;
                                    double l2 = light + dl;
                                    double d2c = std::clamp(d2, 0.2, 9.5);
                                    double l2c = std::clamp(l2, 0.0, 1.0);
                                    row.clamped = d2c != d2 || l2c != l2;
                                    row.ddist = d2c - dist;
                                    row.dlight = l2c - light;
                                    row.target = cache.at(depth, d2c, l2c).contrast;
                                    rows.push_back(row);
                                    ++done;
                                    if (progress) progress(done, total);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return rows;
}

namespace {

const char* kCsvHeader =
    "kz_decay_r,kz_decay_g,kz_decay_b,kc_on_decay_r,kc_on_decay_g,kc_on_decay_b,"
    "kc_off_decay_r,kc_off_decay_g,kc_off_decay_b,dist,light,depth,"
    "img_mean_r,img_mean_g,img_mean_b,img_std_r,img_std_g,img_std_b,"
    "delta_dist,delta_light,target_r,target_g,target_b";

}  // namespace

void write_dataset_csv(const std::vector<DatasetRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset: " + path);
    out << kCsvHeader << "\n";
    char buf[64];
    for (const auto& row : rows) {
        auto x = row.inputs();
        std::string line;
        for (double v : x) {
            snprintf(buf, sizeof(buf), "%.9g,", v);
            line += buf;
        }
        snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g", row.target.r, row.target.g, row.target.b);
        line += buf;
        out << line << "\n";
    }
}

std::vector<DatasetRow> read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset: " + path);
    std::vector<DatasetRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != 23) throw std::runtime_error("malformed dataset row: " + line);
        DatasetRow row;
        for (int i = 0; i < 9; ++i) row.calib[i] = vals[i];
        row.dist = vals[9];
        row.light = vals[10];
        row.depth = vals[11];
        row.img_mean = {vals[12], vals[13], vals[14]};
        row.img_std = {vals[15], vals[16], vals[17]};
        row.ddist = vals[18];
        row.dlight = vals[19];
        row.target = {vals[20], vals[21], vals[22]};
        rows.push_back(row);
    }
    return rows;
}

namespace {

std::vector<double> row_features(const DatasetRow& row, bool use_calibration) {
    auto x = row.inputs();
    if (use_calibration) return {x.begin(), x.end()};
    return {x.begin() + 9, x.end()};
}

struct AdamState {
    std::vector<double> m, v;
    double beta1{0.9}, beta2{0.999}, eps{1e-8};
    long t{0};
};

}  // namespace

std::array<double, 3> MlpModel::forward(const std::vector<double>& x) const {
    std::vector<double> act(x.size());
    for (size_t i = 0; i < x.size(); ++i) act[i] = (x[i] - feat_mean[i]) / feat_scale[i];
    for (size_t layer = 0; layer + 1 < dims.size(); ++layer) {
        int in_dim = dims[layer], out_dim = dims[layer + 1];
        std::vector<double> next(out_dim);
        const auto& w = weights[layer];
        const auto& bias = biases[layer];
        for (int o = 0; o < out_dim; ++o) {
            double acc = bias[o];
            const double* wr = &w[static_cast<size_t>(o) * in_dim];
            for (int i = 0; i < in_dim; ++i) acc += wr[i] * act[i];
            next[o] = (layer + 2 < dims.size()) ? std::max(0.0, acc) : acc;
        }
        act = std::move(next);
    }
    return {act[0], act[1], act[2]};
}

Rgb MlpModel::predict(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != input_dim())
        throw std::invalid_argument("predict: input dimension mismatch");
    for (double v : x)
        if (!std::isfinite(v)) throw std::invalid_argument("predict: inputs must be finite");
    auto y = forward(x);
    return {std::max(0.0, y[0]), std::max(0.0, y[1]), std::max(0.0, y[2])};
}

std::vector<double> MlpModel::loss_gradient(const std::vector<double>& x, const Rgb& target,
                                            double* loss) const {
    // Forward pass, keeping activations.
    std::vector<std::vector<double>> acts;
    std::vector<double> a0(x.size());
    for (size_t i = 0; i < x.size(); ++i) a0[i] = (x[i] - feat_mean[i]) / feat_scale[i];
    acts.push_back(a0);
    std::vector<std::vector<double>> pre;  // pre-activations per layer
    for (size_t layer = 0; layer + 1 < dims.size(); ++layer) {
        int in_dim = dims[layer], out_dim = dims[layer + 1];
        std::vector<double> z(out_dim);
        for (int o = 0; o < out_dim; ++o) {
            double acc = biases[layer][o];
            const double* wr = &weights[layer][static_cast<size_t>(o) * in_dim];
            for (int i = 0; i < in_dim; ++i) acc += wr[i] * acts.back()[i];
            z[o] = acc;
        }
        pre.push_back(z);
        std::vector<double> a(out_dim);
        bool hidden = layer + 2 < dims.size();
        for (int o = 0; o < out_dim; ++o) a[o] = hidden ? std::max(0.0, z[o]) : z[o];
        acts.push_back(a);
    }

    const auto& y = acts.back();
    double l = (std::abs(y[0] - target.r) + std::abs(y[1] - target.g) + std::abs(y[2] - target.b)) / 3.0;
    if (loss) *loss = l;

    // Backward pass: d(MAE)/dy = sign/3.
    std::vector<double> delta = {sgn(y[0] - target.r) / 3.0, sgn(y[1] - target.g) / 3.0,
                                 sgn(y[2] - target.b) / 3.0};
    std::vector<std::vector<double>> grad_w(weights.size());
    std::vector<std::vector<double>> grad_b(biases.size());
    for (int layer = static_cast<int>(dims.size()) - 2; layer >= 0; --layer) {
        int in_dim = dims[layer], out_dim = dims[layer + 1];
        grad_w[layer].assign(static_cast<size_t>(in_dim) * out_dim, 0.0);
        grad_b[layer] = delta;
        for (int o = 0; o < out_dim; ++o)
            for (int i = 0; i < in_dim; ++i)
                grad_w[layer][static_cast<size_t>(o) * in_dim + i] = delta[o] * acts[layer][i];
        if (layer > 0) {
            std::vector<double> prev(in_dim, 0.0);
            for (int o = 0; o < out_dim; ++o) {
                const double* wr = &weights[layer][static_cast<size_t>(o) * in_dim];
                for (int i = 0; i < in_dim; ++i) prev[i] += wr[i] * delta[o];
            }
            for (int i = 0; i < in_dim; ++i)
                if (pre[layer - 1][i] <= 0.0) prev[i] = 0.0;  // ReLU gate
            delta = std::move(prev);
        }
    }

    std::vector<double> flat;
    for (size_t layer = 0; layer < weights.size(); ++layer) {
        flat.insert(flat.end(), grad_w[layer].begin(), grad_w[layer].end());
        flat.insert(flat.end(), grad_b[layer].begin(), grad_b[layer].end());
    }
    return flat;
}

std::vector<double*> MlpModel::parameter_view() {
    std::vector<double*> view;
    for (size_t layer = 0; layer < weights.size(); ++layer) {
        for (auto& w : weights[layer]) view.push_back(&w);
        for (auto& b : biases[layer]) view.push_back(&b);
    }
    return view;
}

void MlpModel::save(const std::string& path) const {
    nlohmann::json doc;
    doc["format"] = "aquaperc-mlp";
    doc["version"] = 1;
    doc["dims"] = dims;
    doc["weights"] = weights;
    doc["biases"] = biases;
    doc["feat_mean"] = feat_mean;
    doc["feat_scale"] = feat_scale;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model: " + path);
    out << doc.dump() << "\n";
}

MlpModel MlpModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model: " + path);
    nlohmann::json doc = nlohmann::json::parse(in);
    if (doc.value("format", "") != "aquaperc-mlp")
        throw std::runtime_error("not a model file: " + path);
    MlpModel model;
    model.dims = doc.at("dims").get<std::vector<int>>();
    model.weights = doc.at("weights").get<std::vector<std::vector<double>>>();
    model.biases = doc.at("biases").get<std::vector<std::vector<double>>>();
    model.feat_mean = doc.at("feat_mean").get<std::vector<double>>();
    model.feat_scale = doc.at("feat_scale").get<std::vector<double>>();
    return model;
}

namespace {

MlpModel init_model(int input_dim, uint64_t seed) {
    MlpModel model;
    model.dims = {input_dim, 128, 128, 3};
    Pcg32 rng(derive_seed(seed, 0x696e6974ULL), 17);
    for (size_t layer = 0; layer + 1 < model.dims.size(); ++layer) {
        int in_dim = model.dims[layer], out_dim = model.dims[layer + 1];
        double scale = std::sqrt(2.0 / in_dim);
        std::vector<double> w(static_cast<size_t>(in_dim) * out_dim);
        for (auto& v : w) v = scale * rng.gaussian();
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(out_dim, 0.0);
    }
    model.feat_mean.assign(input_dim, 0.0);
    model.feat_scale.assign(input_dim, 1.0);
    return model;
}

double evaluate_mae(const MlpModel& model, const std::vector<std::vector<double>>& xs,
                    const std::vector<Rgb>& ys, const std::vector<size_t>& idx) {
    if (idx.empty()) return 0.0;
    double acc = 0.0;
    for (size_t i : idx) {
        auto y = model.forward(xs[i]);
        acc += (std::abs(y[0] - ys[i].r) + std::abs(y[1] - ys[i].g) + std::abs(y[2] - ys[i].b)) / 3.0;
    }
    return acc / idx.size();
}

}  // namespace

std::pair<MlpModel, TrainMetrics> train(const std::vector<DatasetRow>& rows,
                                        const TrainConfig& cfg) {
    if (rows.size() < 100) throw std::invalid_argument("train: need at least 100 rows");
    if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (!(cfg.test_split > 0.0 && cfg.test_split < 1.0))
        throw std::invalid_argument("train: test split must lie in (0, 1)");

    std::vector<std::vector<double>> xs;
    std::vector<Rgb> ys;
    xs.reserve(rows.size());
    for (const auto& row : rows) {
        xs.push_back(row_features(row, cfg.use_calibration));
        ys.push_back(row.target);
    }
    const int input_dim = static_cast<int>(xs.front().size());

    // Deterministic shuffle, then split.
    std::vector<size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    Pcg32 shuffle_rng(derive_seed(cfg.seed, 0x73706c69ULL), 3);
    for (size_t i = order.size() - 1; i > 0; --i) {
        size_t j = static_cast<size_t>(shuffle_rng.uniform() * (i + 1));
        std::swap(order[i], order[std::min(j, i)]);
    }
    size_t n_test = static_cast<size_t>(rows.size() * cfg.test_split);
    n_test = std::max<size_t>(1, std::min(n_test, rows.size() - 1));
    std::vector<size_t> test_idx(order.begin(), order.begin() + n_test);
    std::vector<size_t> train_idx(order.begin() + n_test, order.end());

    MlpModel model = init_model(input_dim, cfg.seed);
    // Standardization from the training split.
    for (int f = 0; f < input_dim; ++f) {
        double mean = 0.0;
        for (size_t i : train_idx) mean += xs[i][f];
        mean /= train_idx.size();
        double var = 0.0;
        for (size_t i : train_idx) var += (xs[i][f] - mean) * (xs[i][f] - mean);
        var /= train_idx.size();
        model.feat_mean[f] = mean;
        model.feat_scale[f] = std::max(std::sqrt(var), 1e-8);
    }

    auto params = model.parameter_view();
    AdamState adam;
    adam.m.assign(params.size(), 0.0);
    adam.v.assign(params.size(), 0.0);

    TrainMetrics metrics;
    Pcg32 epoch_rng(derive_seed(cfg.seed, 0x65706f63ULL), 5);
    std::vector<double> grad_acc(params.size());
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (size_t i = train_idx.size() - 1; i > 0; --i) {
            size_t j = static_cast<size_t>(epoch_rng.uniform() * (i + 1));
            std::swap(train_idx[i], train_idx[std::min(j, i)]);
        }
        double epoch_loss = 0.0;
        size_t seen = 0;
        for (size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
            size_t end = std::min(train_idx.size(), start + cfg.batch_size);
            std::fill(grad_acc.begin(), grad_acc.end(), 0.0);
            for (size_t k = start; k < end; ++k) {
                double sample_loss = 0.0;
                auto g = model.loss_gradient(xs[train_idx[k]], ys[train_idx[k]], &sample_loss);
                epoch_loss += sample_loss;
                for (size_t p = 0; p < g.size(); ++p) grad_acc[p] += g[p];
            }
            double inv = 1.0 / static_cast<double>(end - start);
            ++adam.t;
            double bc1 = 1.0 - std::pow(adam.beta1, adam.t);
            double bc2 = 1.0 - std::pow(adam.beta2, adam.t);
            for (size_t p = 0; p < params.size(); ++p) {
                double g = grad_acc[p] * inv;
                adam.m[p] = adam.beta1 * adam.m[p] + (1.0 - adam.beta1) * g;
                adam.v[p] = adam.beta2 * adam.v[p] + (1.0 - adam.beta2) * g * g;
                double step = cfg.learning_rate * (adam.m[p] / bc1) /
                              (std::sqrt(adam.v[p] / bc2) + adam.eps);
                *params[p] -= step;
            }
            seen += end - start;
        }
        double mean_loss = epoch_loss / std::max<size_t>(seen, 1);
        if (!std::isfinite(mean_loss)) throw std::runtime_error("training diverged");
        metrics.epoch_loss.push_back(mean_loss);
    }

    metrics.train_mae = evaluate_mae(model, xs, ys, train_idx);
    metrics.test_mae = evaluate_mae(model, xs, ys, test_idx);
    return {std::move(model), metrics};
}

std::pair<TrainMetrics, TrainMetrics> ablate_calibration(const std::vector<DatasetRow>& rows,
                                                         const TrainConfig& cfg) {
    TrainConfig with_cfg = cfg;
    with_cfg.use_calibration = true;
    TrainConfig without_cfg = cfg;
    without_cfg.use_calibration = false;
    auto [model_with, metrics_with] = train(rows, with_cfg);
    auto [model_without, metrics_without] = train(rows, without_cfg);
    (void)model_with;
    (void)model_without;
    return {metrics_with, metrics_without};
}

}  // namespace aquaperc::learn
