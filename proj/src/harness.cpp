#include "aquaperc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "aquaperc/image_io.hpp"
#include "aquaperc/optics.hpp"
#include "aquaperc/rng.hpp"

namespace aquaperc::harness {

namespace fs = std::filesystem;

void ScenarioSpec::validate() const {
    if (leg_depths.empty() || steps_per_leg < 1)
        throw std::invalid_argument("ScenarioSpec: need at least one leg and one step");
    if (lattice_distances.empty() || lattice_lights.empty())
        throw std::invalid_argument("ScenarioSpec: candidate lattice must be nonempty");
    if (!(step_m > 0.0)) throw std::invalid_argument("ScenarioSpec: step spacing must be positive");
}

render::SceneState ScenarioSpec::base_scene() const {
    const std::string dir = data_dir.empty() ? optics::default_data_dir() : data_dir;
    render::SceneState scene;
    scene.water = optics::water_from_type(water_type, dir, {}, backscatter, particle_refraction);
    double mu = phase::mu_from_backscatter(particle_refraction, backscatter);
    scene.phase_spec = std::make_shared<const phase::PhaseSpec>(
        phase::PhaseSpec::build(phase::FfParams{particle_refraction, mu}));
    scene.target.texture = texture::texture_from_name(texture);
    scene.surface_irradiance = surface_irradiance;
    scene.kd_b_fraction = kd_b_fraction;
    scene.camera.width = image_width;
    scene.camera.height = image_height;
    return scene;
}

OperationPlan OperationPlan::build(const ScenarioSpec& scenario) {
    scenario.validate();
    OperationPlan plan;
    plan.scenario = scenario;
    for (size_t leg = 0; leg < scenario.leg_depths.size(); ++leg)
        for (int step = 0; step < scenario.steps_per_leg; ++step)
            plan.waypoints.push_back({static_cast<int>(leg), step, scenario.leg_depths[leg],
                                      step * scenario.step_m});
    return plan;
}

std::string policy_name(const Policy& policy) {
    if (const auto* fixed = std::get_if<FixedPolicy>(&policy)) {
        char buf[64];
        snprintf(buf, sizeof(buf), "fixed_%.2gm_%.0f%%", fixed->distance, fixed->light * 100.0);
        return buf;
    }
    if (std::holds_alternative<GradientPolicy>(policy)) return "gradient";
    return "proposed";
}

std::pair<double, double> gradient_policy_step(double measured_gradient, double target_gradient,
                                               double gain, double current_d, double current_l,
                                               double d_min, double d_max) {
    if (!(target_gradient > 0.0))
        throw std::invalid_argument("gradient policy: target gradient must be positive");
    double error = (measured_gradient - target_gradient) / target_gradient;
    double step = std::clamp(gain * error, -gain, gain);
    double d_next = std::clamp(current_d * (1.0 + step), d_min, d_max);
    return {d_next, current_l};
}

LatticeCache::LatticeCache(const ScenarioSpec& scenario, std::string cache_dir, uint64_t seed)
    : scenario_(scenario), base_(scenario.base_scene()), cache_dir_(std::move(cache_dir)),
      seed_(seed) {}

const ImageF& LatticeCache::at(int leg, int i_dist, int i_light) {
    auto key = std::make_tuple(leg, i_dist, i_light);
    auto it = memory_.find(key);
    if (it != memory_.end()) return it->second;

    char name[64];
    snprintf(name, sizeof(name), "%g_%g.pfm", scenario_.lattice_distances[i_dist],
             scenario_.lattice_lights[i_light]);
    fs::path dir = fs::path(cache_dir_) / scenario_.name / std::to_string(leg);
    fs::path file = dir / name;
    if (!cache_dir_.empty() && fs::exists(file)) {
        ImageF img = io::read_pfm(file.string());
        return memory_.emplace(key, std::move(img)).first->second;
    }

    render::SceneState scene = base_;
    scene.depth = scenario_.leg_depths[leg];
    scene.distance = scenario_.lattice_distances[i_dist];
    scene.light = scenario_.lattice_lights[i_light];
    // Each leg views its own stretch of the asset.
    scene.target.offset_u = 1.7 * leg;
    ImageF img = render::render(scene, scenario_.spp, derive_seed(seed_, leg, i_dist, i_light));
    if (!cache_dir_.empty()) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (!ec) io::write_pfm(img, file.string());
    }
    return memory_.emplace(key, std::move(img)).first->second;
}

namespace {

// Nearest lattice index; ties resolve toward the smaller value.
int snap_index(const std::vector<double>& grid, double value) {
    int best = 0;
    double best_err = std::abs(grid[0] - value);
    for (size_t i = 1; i < grid.size(); ++i) {
        double err = std::abs(grid[i] - value);
        if (err < best_err - 1e-12) {
            best = static_cast<int>(i);
            best_err = err;
        }
    }
    return best;
}

}  // namespace

PolicyTrace run_policy(const OperationPlan& plan, const Policy& policy, uint64_t seed,
                       LatticeCache& cache) {
    const ScenarioSpec& scenario = plan.scenario;
    PolicyTrace trace;
    trace.policy = policy_name(policy);

    const double d_min = scenario.lattice_distances.front();
    const double d_max = scenario.lattice_distances.back();

    // The gradient baseline needs its reference frame: the Sobel response
    // at 1 m in this water (prior knowledge of the environment).
    double gradient_target = -1.0;
    if (const auto* grad = std::get_if<GradientPolicy>(&policy)) {
        gradient_target = grad->target_gradient;
        if (!(gradient_target > 0.0)) {
            int i_ref_d = snap_index(scenario.lattice_distances, 1.0);
            int i_ref_l = snap_index(scenario.lattice_lights, 0.5);
            ImageF ref = cache.at(0, i_ref_d, i_ref_l);
            ref = render::apply_noise(ref, scenario.noise, derive_seed(seed, 0x726566ULL));
            gradient_target = imstats::mean_gradient_y(ref);
        }
    }

    double desired_d = 1.5, desired_l = 0.5;
    if (const auto* fixed = std::get_if<FixedPolicy>(&policy)) {
        desired_d = fixed->distance;
        desired_l = fixed->light;
    }

    ImageF previous;
    bool has_previous = false;
    for (size_t w = 0; w < plan.waypoints.size(); ++w) {
        const Waypoint& wp = plan.waypoints[w];
        int i_d = snap_index(scenario.lattice_distances, desired_d);
        int i_l = snap_index(scenario.lattice_lights, desired_l);
        double chosen_d = scenario.lattice_distances[i_d];
        double chosen_l = scenario.lattice_lights[i_l];

        ImageF frame = cache.at(wp.leg, i_d, i_l);
        frame = render::apply_noise(frame, scenario.noise, derive_seed(seed, wp.leg, wp.step));

        StepRecord record;
        record.leg = wp.leg;
        record.step = wp.step;
        record.distance = chosen_d;
        record.light = chosen_l;
        record.contrast = imstats::patch_contrast(frame, imstats::PatchGrid::fit(frame, 8, 6));
        record.mean_gradient = imstats::mean_gradient_y(frame);
        if (has_previous) record.match = imstats::match_consecutive(previous, frame);
        bool usable = has_previous && record.match.n_inliers >= kUsableInliers;
        record.coverage = imstats::coverage_area(chosen_d, cache.scenario().base_scene().camera.fov_h,
                                                 cache.scenario().base_scene().camera.aspect(),
                                                 usable);
        trace.steps.push_back(record);

        // Decide the next (d, l) from what this frame showed.
        if (std::holds_alternative<FixedPolicy>(policy)) {
            // unchanged
        } else if (std::get_if<GradientPolicy>(&policy)) {
            const auto& grad = std::get<GradientPolicy>(policy);
            auto [d_next, l_next] = gradient_policy_step(record.mean_gradient, gradient_target,
                                                         grad.gain, chosen_d, chosen_l, d_min, d_max);
            desired_d = d_next;
            desired_l = l_next;
        } else {
            const auto& proposed = std::get<ProposedPolicy>(policy);
            guide::GuideState state;
            state.dist = chosen_d;
            state.light = chosen_l;
            state.depth = wp.depth;
            state.img_mean = imstats::channel_mean(frame);
            state.img_std = record.contrast;
            guide::Suggestion s = guide::suggest(state, proposed.summary, *proposed.profiles,
                                                 *proposed.model, proposed.params);
            desired_d = chosen_d + s.delta_d;
            desired_l = chosen_l + s.delta_l;
        }

        previous = std::move(frame);
        has_previous = true;
    }
    return trace;
}

Aggregate aggregate(const PolicyTrace& trace, const ScenarioSpec& scenario) {
    (void)scenario;
    if (trace.steps.empty()) throw std::invalid_argument("aggregate: empty trace");
    Aggregate agg;
    int usable = 0;
    for (const auto& s : trace.steps) {
        agg.mean_features += s.match.n_features;
        agg.mean_inliers += s.match.n_inliers;
        agg.mean_ratio += s.match.inlier_ratio;
        agg.total_coverage += s.coverage;
        usable += s.match.n_inliers >= kUsableInliers ? 1 : 0;
    }
    double n = static_cast<double>(trace.steps.size());
    agg.mean_features /= n;
    agg.mean_inliers /= n;
    agg.mean_ratio /= n;
    agg.usable_fraction = usable / n;
    return agg;
}

namespace {

void write_trace_csv(const PolicyTrace& trace, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace: " + path.string());
    out << "step,leg,distance,light,features,matches,inliers,ratio,coverage,"
           "contrast_r,contrast_g,contrast_b,mean_gradient\n";
    char buf[256];
    for (size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& s = trace.steps[i];
        snprintf(buf, sizeof(buf), "%zu,%d,%.9g,%.9g,%d,%d,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g", i,
                 s.leg, s.distance, s.light, s.match.n_features, s.match.n_matches,
                 s.match.n_inliers, s.match.inlier_ratio, s.coverage, s.contrast.r, s.contrast.g,
                 s.contrast.b, s.mean_gradient);
        out << buf << "\n";
    }
}

struct Series {
    std::string label;
    std::vector<double> values;
};

// Minimal SVG line chart; enough for the report plots.
void write_svg_plot(const fs::path& path, const std::string& title,
                    const std::vector<Series>& series) {
    const int width = 720, height = 360, margin = 48;
    double lo = 1e300, hi = -1e300;
    size_t n = 0;
    for (const auto& s : series) {
        n = std::max(n, s.values.size());
        for (double v : s.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (n < 2) return;
    if (hi - lo < 1e-12) {
        hi += 1.0;
        lo -= 1.0;
    }
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write plot: " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << title << "</text>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
        << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    char buf[64];
    snprintf(buf, sizeof(buf), "%.3g", hi);
    out << "<text x=\"4\" y=\"" << margin + 4 << "\" font-size=\"11\">" << buf << "</text>\n";
    snprintf(buf, sizeof(buf), "%.3g", lo);
    out << "<text x=\"4\" y=\"" << height - margin << "\" font-size=\"11\">" << buf << "</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        out << "<polyline fill=\"none\" stroke=\"" << kColors[si % 5]
            << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < s.values.size(); ++i) {
            double x = margin + (width - 2.0 * margin) * i / (n - 1);
            double y = height - margin -
                       (height - 2.0 * margin) * (s.values[i] - lo) / (hi - lo);
            snprintf(buf, sizeof(buf), "%.1f,%.1f ", x, y);
            out << buf;
        }
        out << "\"/>\n";
        out << "<text x=\"" << width - margin + 4 << "\" y=\"" << margin + 16 * si
            << "\" font-size=\"11\" fill=\"" << kColors[si % 5] << "\">" << s.label << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace

void compare_report(const std::map<std::string, PolicyTrace>& traces,
                    const ScenarioSpec& scenario, const std::string& out_dir) {
    if (traces.size() < 2)
        throw std::invalid_argument("compare_report: need at least two policies");
    fs::create_directories(out_dir);

    std::vector<Series> dist_series, light_series, inlier_series, ratio_series;
    for (const auto& [name, trace] : traces) {
        write_trace_csv(trace, fs::path(out_dir) / (name + "_trace.csv"));
        Series d{name, {}}, l{name, {}}, inl{name, {}}, rat{name, {}};
        for (const auto& s : trace.steps) {
            d.values.push_back(s.distance);
            l.values.push_back(s.light);
            inl.values.push_back(s.match.n_inliers);
            rat.values.push_back(s.match.inlier_ratio);
        }
        dist_series.push_back(d);
        light_series.push_back(l);
        inlier_series.push_back(inl);
        ratio_series.push_back(rat);
    }

    std::ofstream summary(fs::path(out_dir) / "summary.csv");
    if (!summary) throw std::runtime_error("cannot write summary: " + out_dir);
    summary << "# scenario: " << scenario.name << "\n";
    summary << "# niqe baseline: not implemented\n";
    summary << "policy,mean_features,mean_inliers,mean_ratio,total_coverage_m2,usable_fraction\n";
    char buf[256];
    for (const auto& [name, trace] : traces) {
        Aggregate agg = aggregate(trace, scenario);
        snprintf(buf, sizeof(buf), "%s,%.6g,%.6g,%.6g,%.6g,%.6g", name.c_str(), agg.mean_features,
                 agg.mean_inliers, agg.mean_ratio, agg.total_coverage, agg.usable_fraction);
        summary << buf << "\n";
    }

    write_svg_plot(fs::path(out_dir) / "params_distance.svg",
                   scenario.name + ": chosen distance per step", dist_series);
    write_svg_plot(fs::path(out_dir) / "params_light.svg",
                   scenario.name + ": chosen light intensity per step", light_series);
    write_svg_plot(fs::path(out_dir) / "inliers.svg", scenario.name + ": inliers per step",
                   inlier_series);
    write_svg_plot(fs::path(out_dir) / "inlier_ratio.svg", scenario.name + ": inlier ratio per step",
                   ratio_series);
}

}  // namespace aquaperc::harness
