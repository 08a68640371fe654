#include "aquaperc/calib.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "aquaperc/imstats.hpp"
#include "aquaperc/rng.hpp"
#include "json.hpp"

namespace aquaperc::calib {

namespace {

void check_grid(const std::vector<double>& grid, size_t min_size, const char* what) {
    if (grid.size() < min_size) throw std::invalid_argument(std::string(what) + ": grid too short");
    for (size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument(std::string(what) + ": grid must be strictly increasing");
}

ImageF acquire(const render::SceneState& scene, int spp, uint64_t seed,
               const CalibRunOptions& opts) {
    ImageF img = render::render(scene, spp, seed, opts.render);
    if (opts.noise.poisson_scale > 0.0 || opts.noise.gaussian_sigma > 0.0)
        img = render::apply_noise(img, opts.noise, derive_seed(seed, 0x6361ULL));
    return img;
}

}  // namespace

void CalibProfiles::validate() const {
    check_grid(depth_grid, 2, "depth profile");
    check_grid(dist_grid, 2, "distance profile");
    if (kz.size() != depth_grid.size() || kc_on.size() != dist_grid.size() ||
        kc_off.size() != dist_grid.size())
        throw std::invalid_argument("profile value counts do not match their grids");
    const Rgb& first = kz.front();
    if (std::abs(first.r - 1.0) > 1e-12 || std::abs(first.g - 1.0) > 1e-12 ||
        std::abs(first.b - 1.0) > 1e-12)
        throw std::invalid_argument("kz must be 1 at the reference depth");
    for (const auto& v : kz)
        if (!v.all_finite() || !v.all_nonnegative())
            throw std::invalid_argument("kz values must be finite and nonnegative");
}

std::pair<std::vector<double>, std::vector<Rgb>> run_depth_profile(
    const render::SceneState& scene_base, const std::vector<double>& depths, int spp,
    uint64_t seed, const CalibRunOptions& opts) {
    check_grid(depths, 2, "depth profile");
    render::SceneState scene = scene_base;
    scene.look = render::LookDir::up;
    scene.light = 0.0;  // lights off while looking at the surface

    std::vector<Rgb> kz;
    Rgb reference;
    for (size_t i = 0; i < depths.size(); ++i) {
        scene.depth = depths[i];
        ImageF img = acquire(scene, spp, derive_seed(seed, 0x647aULL, i), opts);
        Rgb mean = imstats::channel_mean(img);
        if (i == 0) {
            if (!(mean.min_component() > 0.0))
                throw std::runtime_error("degenerate calibration: zero mean at reference depth");
            reference = mean;
            kz.push_back(Rgb{1.0, 1.0, 1.0});
        } else {
            kz.push_back(mean / reference);
        }
    }
    return {depths, kz};
}

std::pair<std::vector<double>, std::vector<Rgb>> run_contrast_profile(
    const render::SceneState& scene_base, const std::vector<double>& distances, bool lights_on,
    int spp, uint64_t seed, const CalibRunOptions& opts) {
    check_grid(distances, 2, "distance profile");
    render::SceneState scene = scene_base;
    scene.look = render::LookDir::horizontal;
    scene.light = lights_on ? scene_base.light : 0.0;
    if (lights_on && !(scene.light > 0.0)) scene.light = 1.0;

    std::vector<Rgb> kc;
    for (size_t i = 0; i < distances.size(); ++i) {
        scene.distance = distances[i];
        ImageF img = acquire(scene, spp, derive_seed(seed, lights_on ? 0x6f6eULL : 0x6f66ULL, i), opts);
        imstats::PatchGrid grid =
            opts.grid ? *opts.grid : imstats::PatchGrid::fit(img, 10, 6);
        kc.push_back(imstats::patch_contrast(img, grid));
    }
    return {distances, kc};
}

CalibProfiles run_calibration(const render::SceneState& scene_base,
                              const std::vector<double>& depths,
                              const std::vector<double>& distances, int spp, uint64_t seed,
                              const CalibRunOptions& opts) {
    CalibProfiles profiles;
    auto [dg, kz] = run_depth_profile(scene_base, depths, spp, seed, opts);
    profiles.depth_grid = dg;
    profiles.kz = kz;
    auto [cg_on, kc_on] = run_contrast_profile(scene_base, distances, true, spp, seed, opts);
    auto [cg_off, kc_off] = run_contrast_profile(scene_base, distances, false, spp, seed, opts);
    profiles.dist_grid = cg_on;
    profiles.kc_on = kc_on;
    profiles.kc_off = kc_off;
    profiles.validate();
    return profiles;
}

namespace {

Rgb fit_decay(const std::vector<double>& grid, const std::vector<Rgb>& values) {
    constexpr double kEps = 1e-6;
    Rgb decay;
    bool any_signal = false;
    for (int c = 0; c < 3; ++c) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        double n = static_cast<double>(grid.size());
        for (size_t i = 0; i < grid.size(); ++i) {
            double y = std::log(std::max(values[i][c], 0.0) + kEps);
            sx += grid[i];
            sy += y;
            sxx += grid[i] * grid[i];
            sxy += grid[i] * y;
        }
        double denom = n * sxx - sx * sx;
        if (std::abs(denom) < 1e-12)
            throw std::invalid_argument("decay fit needs at least two distinct grid points");
        double slope = (n * sxy - sx * sy) / denom;
        decay[c] = std::max(0.0, -slope);
        for (size_t i = 0; i < grid.size(); ++i) any_signal = any_signal || values[i][c] > 0.0;
    }
    if (!any_signal) throw std::runtime_error("degenerate calibration: all-zero profile");
    return decay;
}

}  // namespace

CalibSummary summarize(const CalibProfiles& profiles) {
    if (profiles.depth_grid.size() < 2 || profiles.dist_grid.size() < 2)
        throw std::invalid_argument("summarize: need at least two grid points per profile");
    CalibSummary summary;
    summary.kz_decay = fit_decay(profiles.depth_grid, profiles.kz);
    summary.kc_on_decay = fit_decay(profiles.dist_grid, profiles.kc_on);
    summary.kc_off_decay = fit_decay(profiles.dist_grid, profiles.kc_off);
    return summary;
}

Rgb lookup(const CalibProfiles& profiles, ProfileKind which, double coord) {
    const std::vector<double>& grid =
        which == ProfileKind::kz ? profiles.depth_grid : profiles.dist_grid;
    const std::vector<Rgb>& values = which == ProfileKind::kz
                                         ? profiles.kz
                                         : (which == ProfileKind::kc_on ? profiles.kc_on
                                                                        : profiles.kc_off);
    if (coord < grid.front() - 1e-12 || coord > grid.back() + 1e-12)
        throw std::out_of_range("lookup coordinate outside the calibrated range");
    coord = std::clamp(coord, grid.front(), grid.back());
    size_t hi = 1;
    while (hi + 1 < grid.size() && grid[hi] < coord) ++hi;
    double t = (coord - grid[hi - 1]) / (grid[hi] - grid[hi - 1]);
    return values[hi - 1] * (1.0 - t) + values[hi] * t;
}

namespace {

nlohmann::json rgb_list(const std::vector<Rgb>& values) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& v : values) arr.push_back({v.r, v.g, v.b});
    return arr;
}

std::vector<Rgb> rgb_list_from(const nlohmann::json& arr) {
    std::vector<Rgb> out;
    for (const auto& v : arr) out.push_back({v.at(0), v.at(1), v.at(2)});
    return out;
}

}  // namespace

void save_profiles(const CalibProfiles& profiles, const CalibSummary& summary,
                   const std::string& path) {
    profiles.validate();
    nlohmann::json doc;
    doc["format"] = "aquaperc-profiles";
    doc["version"] = 1;
    doc["depth_grid"] = profiles.depth_grid;
    doc["kz"] = rgb_list(profiles.kz);
    doc["dist_grid"] = profiles.dist_grid;
    doc["kc_on"] = rgb_list(profiles.kc_on);
    doc["kc_off"] = rgb_list(profiles.kc_off);
    doc["summary"] = {
        {"kz_decay", {summary.kz_decay.r, summary.kz_decay.g, summary.kz_decay.b}},
        {"kc_on_decay", {summary.kc_on_decay.r, summary.kc_on_decay.g, summary.kc_on_decay.b}},
        {"kc_off_decay",
         {summary.kc_off_decay.r, summary.kc_off_decay.g, summary.kc_off_decay.b}}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write profiles: " + path);
    out << doc.dump(2) << "\n";
}

std::pair<CalibProfiles, CalibSummary> load_profiles(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profiles: " + path);
    nlohmann::json doc = nlohmann::json::parse(in);
    CalibProfiles profiles;
    profiles.depth_grid = doc.at("depth_grid").get<std::vector<double>>();
    profiles.kz = rgb_list_from(doc.at("kz"));
    profiles.dist_grid = doc.at("dist_grid").get<std::vector<double>>();
    profiles.kc_on = rgb_list_from(doc.at("kc_on"));
    profiles.kc_off = rgb_list_from(doc.at("kc_off"));
    profiles.validate();
    CalibSummary summary;
    auto read_rgb = [&](const char* key) {
        const auto& v = doc.at("summary").at(key);
        return Rgb{v.at(0), v.at(1), v.at(2)};
    };
    summary.kz_decay = read_rgb("kz_decay");
    summary.kc_on_decay = read_rgb("kc_on_decay");
    summary.kc_off_decay = read_rgb("kc_off_decay");
    return {profiles, summary};
}

}  // namespace aquaperc::calib
