#include "aquaperc/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "aquaperc/config.hpp"
#include "aquaperc/harness.hpp"
#include "aquaperc/image_io.hpp"
#include "aquaperc/imstats.hpp"
#include "aquaperc/learn.hpp"
#include "aquaperc/manifest.hpp"
#include "aquaperc/optics.hpp"
#include "aquaperc/phase.hpp"
#include "aquaperc/rng.hpp"
#include "json.hpp"

namespace aquaperc::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void emit_manifest(const std::string& command, const std::string& config_text, uint64_t seed,
                   const std::vector<std::string>& outputs, double wall_time,
                   const std::string& primary_output) {
    manifest::RunManifest m;
    m.command = command;
    m.config_hash = manifest::stable_hash(config_text);
    m.seed = seed;
    m.version = kVersion;
    m.outputs = outputs;
    m.wall_time_s = wall_time;
    manifest::write_manifest(m, primary_output + ".manifest.json");
}

std::vector<double> parse_range(const std::string& text) {
    // "start:stop:step" inclusive grid.
    double start, stop, step;
    char c1, c2;
    std::istringstream ss(text);
    if (!(ss >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0.0)
        throw std::runtime_error("expected start:stop:step, got: " + text);
    std::vector<double> grid;
    for (double v = start; v <= stop + 1e-9; v += step) grid.push_back(v);
    if (grid.size() < 2) throw std::runtime_error("range produced fewer than two points: " + text);
    return grid;
}

nlohmann::json rgb_json(const Rgb& v) { return {v.r, v.g, v.b}; }

int cmd_render(const std::string& scene_path, const std::string& out_path,
               const std::string& png_path, int spp, uint64_t seed, bool with_noise) {
    Stopwatch timer;
    config::SceneConfig sc = config::load_scene(scene_path);
    ImageF img = render::render(sc.scene, spp, seed);
    if (with_noise) img = render::apply_noise(img, sc.noise, seed + 1);
    io::write_pfm(img, out_path);
    std::vector<std::string> outputs{out_path};
    if (!png_path.empty()) {
        io::write_png(img, png_path);
        outputs.push_back(png_path);
    }
    emit_manifest("render", config::Config::parse_file(scene_path).canonical(), seed, outputs,
                  timer.seconds(), out_path);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_stats(const std::string& image_path, const std::string& patches) {
    ImageF img = io::read_pfm(image_path);
    int cols = 10, rows = 6;
    if (!patches.empty()) {
        char x;
        std::istringstream ss(patches);
        if (!(ss >> cols >> x >> rows) || x != 'x')
            throw std::runtime_error("expected COLSxROWS, got: " + patches);
    }
    imstats::PatchGrid grid = imstats::PatchGrid::fit(img, cols, rows);
    nlohmann::json doc;
    doc["mean"] = rgb_json(imstats::channel_mean(img));
    doc["patch_contrast"] = rgb_json(imstats::patch_contrast(img, grid));
    doc["whole_stdev"] = rgb_json(imstats::whole_stdev(img));
    doc["mean_gradient_y"] = imstats::mean_gradient_y(img);
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int cmd_phase_plot(double n, double backscatter, int table_size, const std::string& out_path) {
    Stopwatch timer;
    double mu = phase::mu_from_backscatter(n, backscatter);
    phase::PhaseSpec spec = phase::PhaseSpec::build(phase::FfParams{n, mu}, table_size);
    auto rows = phase::petzold_compare(spec, optics::default_data_dir() + "/petzold_average.txt");
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write: " + out_path);
    out << "psi_deg,ff,hg,petzold\n";
    char buf[160];
    for (const auto& r : rows) {
        snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g", r.psi_deg, r.ff_value, r.hg_value,
                 r.petzold_value);
        out << buf << "\n";
    }
    std::ostringstream cfg;
    cfg << "n=" << n << " B=" << backscatter << " table=" << table_size;
    emit_manifest("phase", cfg.str(), 0, {out_path}, timer.seconds(), out_path);
    std::cout << "wrote " << out_path << " (mu = " << mu << ")\n";
    return 0;
}

int cmd_calibrate(const std::string& scene_path, const std::string& out_path,
                  const std::string& depths, const std::string& distances, int spp,
                  uint64_t seed) {
    Stopwatch timer;
    config::SceneConfig sc = config::load_scene(scene_path);
    std::vector<double> depth_grid =
        depths.empty() ? parse_range("0.5:" + std::to_string(sc.scene.depth + 1.0) + ":1.0")
                       : parse_range(depths);
    std::vector<double> dist_grid =
        distances.empty() ? parse_range("0.5:" + std::to_string(sc.scene.distance + 1.0) + ":0.5")
                          : parse_range(distances);
    calib::CalibRunOptions opts;
    opts.spp = spp;
    opts.noise = sc.noise;
    calib::CalibProfiles profiles =
        calib::run_calibration(sc.scene, depth_grid, dist_grid, spp, seed, opts);
    calib::CalibSummary summary = calib::summarize(profiles);
    calib::save_profiles(profiles, summary, out_path);
    emit_manifest("calibrate", config::Config::parse_file(scene_path).canonical(), seed,
                  {out_path}, timer.seconds(), out_path);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_gen_dataset(const std::string& out_path, const std::string& scale, int spp, uint64_t seed,
                    bool quiet) {
    Stopwatch timer;
    learn::SweepSpec spec;
    if (scale == "paper") {
        spec = learn::SweepSpec::paper_scale();
        std::cerr << "note: paper-scale sweep renders " << spec.row_count()
                  << " rows; expect hours of runtime\n";
    } else if (scale != "desk") {
        throw std::runtime_error("unknown sweep scale: " + scale);
    }
    if (spp > 0) spec.spp = spp;
    size_t total = spec.row_count();
    auto rows = learn::generate_dataset(spec, seed, [&](size_t done, size_t n) {
        if (!quiet && done % 500 == 0) std::cerr << "rows " << done << "/" << n << "\n";
    });
    learn::write_dataset_csv(rows, out_path);
    std::ostringstream cfg;
    cfg << "scale=" << scale << " spp=" << spec.spp << " rows=" << total;
    emit_manifest("gen-dataset", cfg.str(), seed, {out_path}, timer.seconds(), out_path);
    std::cout << "wrote " << out_path << " (" << rows.size() << " rows)\n";
    return 0;
}

int cmd_train(const std::string& data_path, const std::string& out_path, bool no_calib,
              int epochs, uint64_t seed) {
    Stopwatch timer;
    auto rows = learn::read_dataset_csv(data_path);
    learn::TrainConfig cfg;
    cfg.use_calibration = !no_calib;
    cfg.seed = seed;
    if (epochs > 0) cfg.epochs = epochs;
    auto [model, metrics] = learn::train(rows, cfg);
    model.save(out_path);
    nlohmann::json doc;
    doc["train_mae"] = metrics.train_mae;
    doc["test_mae"] = metrics.test_mae;
    doc["epochs"] = cfg.epochs;
    doc["inputs"] = model.input_dim();
    std::cout << doc.dump(2) << "\n";
    std::ostringstream cfgtext;
    cfgtext << "data=" << data_path << " no_calib=" << no_calib << " epochs=" << cfg.epochs;
    emit_manifest("train", cfgtext.str(), seed, {out_path}, timer.seconds(), out_path);
    return 0;
}

int cmd_suggest(const std::string& model_path, const std::string& profiles_path,
                const std::string& state_path, double lambda_c, double lambda_d, double kappa_b,
                double kappa_c) {
    learn::MlpModel model = learn::MlpModel::load(model_path);
    auto [profiles, summary] = calib::load_profiles(profiles_path);

    std::ifstream in(state_path);
    if (!in) throw std::runtime_error("cannot open state: " + state_path);
    nlohmann::json sj = nlohmann::json::parse(in);
    guide::GuideState state;
    state.dist = sj.at("dist");
    state.light = sj.at("light");
    state.depth = sj.at("depth");
    auto mean = sj.at("img_mean");
    auto stdev = sj.at("img_std");
    state.img_mean = {mean.at(0), mean.at(1), mean.at(2)};
    state.img_std = {stdev.at(0), stdev.at(1), stdev.at(2)};

    guide::GuideParams params;
    params.lambda_c = lambda_c;
    params.lambda_d = lambda_d;
    params.kappa_b = kappa_b;
    params.kappa_c = kappa_c;
    guide::Suggestion s = guide::suggest(state, summary, profiles, model, params);

    nlohmann::json doc;
    doc["delta_d"] = s.delta_d;
    doc["delta_l"] = s.delta_l;
    doc["y"] = s.y;
    doc["m_c"] = s.m_c;
    doc["m_d"] = s.m_d;
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int cmd_simulate(const std::string& scenario_path, const std::string& policies,
                 const std::string& out_dir, const std::string& model_path,
                 const std::string& profiles_path, const std::string& cache_dir, int spp,
                 uint64_t seed) {
    Stopwatch timer;
    harness::ScenarioSpec scenario = config::load_scenario(scenario_path);
    if (spp > 0) scenario.spp = spp;

    std::string cache = cache_dir;
    if (cache.empty()) {
        if (const char* env = std::getenv("AQUAPERC_CACHE"))
            cache = env;
        else
            cache = out_dir + "/cache";
    }

    std::map<std::string, harness::PolicyTrace> traces;
    harness::OperationPlan plan = harness::OperationPlan::build(scenario);
    harness::LatticeCache lattice(scenario, cache, seed);

    std::shared_ptr<learn::MlpModel> model;
    std::shared_ptr<calib::CalibProfiles> profiles;
    calib::CalibSummary summary;

    std::istringstream ss(policies);
    std::string token;
    while (std::getline(ss, token, ',')) {
        harness::Policy policy;
        if (token == "proposed") {
            if (!model) {
                if (model_path.empty())
                    throw std::runtime_error("the proposed policy needs --model");
                model = std::make_shared<learn::MlpModel>(learn::MlpModel::load(model_path));
                if (!profiles_path.empty()) {
                    auto [p, s] = calib::load_profiles(profiles_path);
                    profiles = std::make_shared<calib::CalibProfiles>(p);
                    summary = s;
                } else {
                    // Calibrate in this scenario's water before the run.
                    render::SceneState base = scenario.base_scene();
                    base.depth = scenario.leg_depths.back();
                    std::vector<double> depth_grid;
                    for (double z = 0.5; z <= scenario.leg_depths.back() + 1.0 + 1e-9; z += 1.0)
                        depth_grid.push_back(z);
                    std::vector<double> dist_grid;
                    for (double d = 0.5; d <= scenario.lattice_distances.back() + 0.5 + 1e-9;
                         d += 0.5)
                        dist_grid.push_back(d);
                    calib::CalibRunOptions copts;
                    copts.spp = scenario.spp;
                    copts.noise = scenario.noise;
                    profiles = std::make_shared<calib::CalibProfiles>(calib::run_calibration(
                        base, depth_grid, dist_grid, scenario.spp, derive_seed(seed, 0xca11ULL),
                        copts));
                    summary = calib::summarize(*profiles);
                }
            }
            harness::ProposedPolicy p;
            p.model = model;
            p.profiles = profiles;
            p.summary = summary;
            p.params.d_min = scenario.lattice_distances.front();
            p.params.d_max = scenario.lattice_distances.back();
            policy = p;
        } else if (token.rfind("fixed:", 0) == 0) {
            harness::FixedPolicy p;
            char c1, c2;
            std::istringstream ts(token.substr(6));
            std::string rest = token.substr(6);
            size_t colon = rest.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error("expected fixed:<d>:<l>, got: " + token);
            p.distance = std::stod(rest.substr(0, colon));
            p.light = std::stod(rest.substr(colon + 1));
            (void)c1;
            (void)c2;
            policy = p;
        } else if (token == "gradient") {
            policy = harness::GradientPolicy{};
        } else {
            throw std::runtime_error("unknown policy: " + token);
        }
        harness::PolicyTrace trace = harness::run_policy(plan, policy, seed, lattice);
        traces[trace.policy] = trace;
    }

    harness::compare_report(traces, scenario, out_dir);
    emit_manifest("simulate", config::Config::parse_file(scenario_path).canonical(), seed,
                  {out_dir + "/summary.csv"}, timer.seconds(), out_dir + "/summary.csv");
    std::cout << "wrote report to " << out_dir << "\n";
    return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"aquaperc: underwater imaging simulation and active perception"};
    app.require_subcommand(0, 1);

    bool dump_defaults = false;
    app.add_flag("--dump-defaults", dump_defaults, "print the default scene and scenario configs");

    // render
    auto* render_cmd = app.add_subcommand("render", "render a scene to PFM/PNG");
    std::string scene_path, out_path, png_path;
    int spp = 64;
    uint64_t seed = 1;
    bool with_noise = false;
    render_cmd->add_option("--scene", scene_path, "scene config file")->required();
    render_cmd->add_option("--out", out_path, "output PFM path")->required();
    render_cmd->add_option("--png", png_path, "optional PNG preview path");
    render_cmd->add_option("--spp", spp, "samples per pixel");
    render_cmd->add_option("--seed", seed, "RNG seed");
    render_cmd->add_flag("--noise", with_noise, "apply the scene's sensor noise model");

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "image statistics as JSON");
    std::string image_path, patches;
    stats_cmd->add_option("--image", image_path, "input PFM image")->required();
    stats_cmd->add_option("--patches", patches, "patch lattice, e.g. 10x6");

    // phase
    auto* phase_cmd = app.add_subcommand("phase", "phase-function comparison table");
    bool plot = false;
    double ff_n = 1.10, ff_b = 0.0183;
    int table_size = 2048;
    std::string phase_out = "phase_comparison.csv";
    phase_cmd->add_flag("--plot", plot, "write the comparison CSV");
    phase_cmd->add_option("--n", ff_n, "particle refractive index");
    phase_cmd->add_option("--backscatter", ff_b, "backscatter fraction");
    phase_cmd->add_option("--table-size", table_size, "CDF table entries");
    phase_cmd->add_option("--out", phase_out, "output CSV path");

    // calibrate
    auto* calib_cmd = app.add_subcommand("calibrate", "run the two-step calibration");
    std::string calib_scene, calib_out = "profiles.json", depths, distances;
    int calib_spp = 64;
    uint64_t calib_seed = 1;
    calib_cmd->add_option("--scene", calib_scene, "scene config file")->required();
    calib_cmd->add_option("--out", calib_out, "output profiles JSON");
    calib_cmd->add_option("--depths", depths, "depth grid start:stop:step");
    calib_cmd->add_option("--distances", distances, "distance grid start:stop:step");
    calib_cmd->add_option("--spp", calib_spp, "samples per pixel");
    calib_cmd->add_option("--seed", calib_seed, "RNG seed");

    // gen-dataset
    auto* gen_cmd = app.add_subcommand("gen-dataset", "render the training dataset");
    std::string gen_out = "dataset.csv", gen_scale = "desk";
    int gen_spp = 0;
    uint64_t gen_seed = 1;
    bool gen_quiet = false;
    gen_cmd->add_option("--out", gen_out, "output CSV path");
    gen_cmd->add_option("--scale", gen_scale, "sweep scale: desk or paper");
    gen_cmd->add_option("--spp", gen_spp, "samples per pixel override");
    gen_cmd->add_option("--seed", gen_seed, "RNG seed");
    gen_cmd->add_flag("--quiet", gen_quiet, "suppress progress output");

    // train
    auto* train_cmd = app.add_subcommand("train", "train the contrast predictor");
    std::string train_data, train_out = "model.json";
    bool no_calib = false;
    int train_epochs = 0;
    uint64_t train_seed = 1;
    train_cmd->add_option("--data", train_data, "dataset CSV")->required();
    train_cmd->add_option("--out", train_out, "output model JSON");
    train_cmd->add_flag("--no-calib", no_calib, "drop the calibration inputs");
    train_cmd->add_option("--epochs", train_epochs, "training epochs");
    train_cmd->add_option("--seed", train_seed, "RNG seed");

    // suggest
    auto* suggest_cmd = app.add_subcommand("suggest", "distance/light suggestion");
    std::string sg_model, sg_profiles, sg_state;
    double lambda_c = 1.0, lambda_d = 1.0, kappa_b = 8.0, kappa_c = 1.0;
    suggest_cmd->add_option("--model", sg_model, "model JSON")->required();
    suggest_cmd->add_option("--profiles", sg_profiles, "calibration profiles JSON")->required();
    suggest_cmd->add_option("--state", sg_state, "state JSON")->required();
    suggest_cmd->add_option("--lambda-c", lambda_c, "contrast weight");
    suggest_cmd->add_option("--lambda-d", lambda_d, "distance weight");
    suggest_cmd->add_option("--kappa-b", kappa_b, "regulator center tuning");
    suggest_cmd->add_option("--kappa-c", kappa_c, "regulator width tuning");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "run the operation comparison");
    std::string sim_scenario, sim_policies = "proposed,fixed:1:0.5,fixed:2:0.25,gradient";
    std::string sim_out = "report", sim_model, sim_profiles, sim_cache;
    int sim_spp = 0;
    uint64_t sim_seed = 1;
    sim_cmd->add_option("--scenario", sim_scenario, "scenario config file")->required();
    sim_cmd->add_option("--policies", sim_policies, "comma list: proposed,fixed:<d>:<l>,gradient");
    sim_cmd->add_option("--out", sim_out, "report directory");
    sim_cmd->add_option("--model", sim_model, "model JSON (needed by proposed)");
    sim_cmd->add_option("--profiles", sim_profiles, "profiles JSON (else calibrate in-scenario)");
    sim_cmd->add_option("--cache", sim_cache, "lattice cache directory");
    sim_cmd->add_option("--spp", sim_spp, "samples per pixel override");
    sim_cmd->add_option("--seed", sim_seed, "RNG seed");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (dump_defaults) {
            std::cout << "# --- default scene ---\n"
                      << config::default_scene_text() << "\n# --- default scenario ---\n"
                      << config::default_scenario_text();
            return 0;
        }
        if (render_cmd->parsed())
            return cmd_render(scene_path, out_path, png_path, spp, seed, with_noise);
        if (stats_cmd->parsed()) return cmd_stats(image_path, patches);
        if (phase_cmd->parsed()) {
            if (!plot) throw std::runtime_error("phase: nothing to do (use --plot)");
            return cmd_phase_plot(ff_n, ff_b, table_size, phase_out);
        }
        if (calib_cmd->parsed())
            return cmd_calibrate(calib_scene, calib_out, depths, distances, calib_spp, calib_seed);
        if (gen_cmd->parsed())
            return cmd_gen_dataset(gen_out, gen_scale, gen_spp, gen_seed, gen_quiet);
        if (train_cmd->parsed())
            return cmd_train(train_data, train_out, no_calib, train_epochs, train_seed);
        if (suggest_cmd->parsed())
            return cmd_suggest(sg_model, sg_profiles, sg_state, lambda_c, lambda_d, kappa_b,
                               kappa_c);
        if (sim_cmd->parsed())
            return cmd_simulate(sim_scenario, sim_policies, sim_out, sim_model, sim_profiles,
                                sim_cache, sim_spp, sim_seed);
        std::cout << app.help();
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace aquaperc::cli
