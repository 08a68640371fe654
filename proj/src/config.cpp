#include "aquaperc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "aquaperc/optics.hpp"

namespace aquaperc::config {

namespace {

std::string trim(const std::string& s) {
    size_t lo = s.find_first_not_of(" \t\r\n");
    if (lo == std::string::npos) return "";
    size_t hi = s.find_last_not_of(" \t\r\n");
    return s.substr(lo, hi - lo + 1);
}

}  // namespace

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::runtime_error("config line " + std::to_string(line_no) +
                                         ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            cfg.sections_[section];
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
    auto it = sections_.find(section);
    if (it == sections_.end()) return fallback;
    auto kit = it->second.find(key);
    return kit == it->second.end() ? fallback : kit->second;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
    if (!has(section, key)) return fallback;
    return std::stod(get(section, key, ""));
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
    if (!has(section, key)) return fallback;
    return std::stoi(get(section, key, ""));
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = get(section, key, "");
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::runtime_error("config: not a boolean: " + v);
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key,
                                     const std::vector<double>& fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<double> out;
    std::istringstream ss(get(section, key, ""));
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stod(trim(cell)));
    return out;
}

std::string Config::canonical() const {
    std::ostringstream out;
    for (const auto& [section, keys] : sections_) {
        out << "[" << section << "]\n";
        for (const auto& [key, value] : keys) out << key << " = " << value << "\n";
    }
    return out.str();
}

SceneConfig scene_from_config(const Config& cfg) {
    SceneConfig sc;
    render::SceneState& scene = sc.scene;

    optics::BandRanges bands;
    bands.red_lo = cfg.get_double("bands", "red_lo", bands.red_lo);
    bands.red_hi = cfg.get_double("bands", "red_hi", bands.red_hi);
    bands.green_lo = cfg.get_double("bands", "green_lo", bands.green_lo);
    bands.green_hi = cfg.get_double("bands", "green_hi", bands.green_hi);
    bands.blue_lo = cfg.get_double("bands", "blue_lo", bands.blue_lo);
    bands.blue_hi = cfg.get_double("bands", "blue_hi", bands.blue_hi);

    double backscatter = cfg.get_double("water", "backscatter", 0.0183);
    double refraction = cfg.get_double("water", "particle_refraction", 1.10);
    if (cfg.has("water", "type")) {
        std::string type = cfg.get("water", "type", "JI");
        std::string data_dir = cfg.get("water", "data_dir", optics::default_data_dir());
        scene.water = optics::water_from_type(type, data_dir, bands, backscatter, refraction);
    } else {
        scene.water.absorption = {cfg.get_double("water", "absorption_r", 0.38),
                                  cfg.get_double("water", "absorption_g", 0.05),
                                  cfg.get_double("water", "absorption_b", 0.02)};
        scene.water.scattering = {cfg.get_double("water", "scattering_r", 0.03),
                                  cfg.get_double("water", "scattering_g", 0.035),
                                  cfg.get_double("water", "scattering_b", 0.04)};
        scene.water.backscatter_fraction = backscatter;
        scene.water.particle_refraction = refraction;
    }

    std::string phase_kind = cfg.get("phase", "kind", "ff");
    int table_size = cfg.get_int("phase", "table_size", 2048);
    if (phase_kind == "ff") {
        double mu = cfg.has("phase", "mu")
                        ? cfg.get_double("phase", "mu", 3.5835)
                        : phase::mu_from_backscatter(refraction, backscatter);
        scene.phase_spec = std::make_shared<const phase::PhaseSpec>(
            phase::PhaseSpec::build(phase::FfParams{refraction, mu}, table_size));
    } else if (phase_kind == "hg") {
        double g = cfg.has("phase", "g") ? cfg.get_double("phase", "g", 0.8)
                                         : phase::hg_g_for_backscatter(backscatter);
        scene.phase_spec = std::make_shared<const phase::PhaseSpec>(
            phase::PhaseSpec::build(phase::HgParams{g}, table_size));
    } else {
        throw std::runtime_error("unknown phase kind: " + phase_kind);
    }

    scene.depth = cfg.get_double("scene", "depth", 3.0);
    scene.distance = cfg.get_double("scene", "distance", 1.5);
    scene.light = cfg.get_double("scene", "light", 0.0);
    scene.look = cfg.get("scene", "look", "horizontal") == "up" ? render::LookDir::up
                                                                : render::LookDir::horizontal;
    scene.surface_irradiance = {cfg.get_double("scene", "surface_irradiance_r", 3.0),
                                cfg.get_double("scene", "surface_irradiance_g", 3.0),
                                cfg.get_double("scene", "surface_irradiance_b", 3.0)};
    scene.kd_b_fraction = cfg.get_double("water", "kd_b_fraction", 1.0);

    scene.target.present = cfg.get_bool("target", "present", true);
    scene.target.texture = texture::texture_from_name(cfg.get("target", "texture", "seabed"));
    scene.target.extent_w = cfg.get_double("target", "extent_w", 4.0);
    scene.target.extent_h = cfg.get_double("target", "extent_h", 4.0);
    scene.target.offset_u = cfg.get_double("target", "offset_u", 0.0);

    scene.camera.width = cfg.get_int("camera", "width", 320);
    scene.camera.height = cfg.get_int("camera", "height", 180);
    scene.camera.fov_h = cfg.get_double("camera", "fov_deg", 60.0) * 3.14159265358979 / 180.0;

    scene.light_spec.power_max = {cfg.get_double("light", "power_r", 5.0),
                                  cfg.get_double("light", "power_g", 5.0),
                                  cfg.get_double("light", "power_b", 5.0)};
    scene.light_spec.offset_up = cfg.get_double("light", "offset_up", 0.15);
    scene.light_spec.spot_exponent = cfg.get_double("light", "spot_exponent", 8.0);

    sc.noise.poisson_scale = cfg.get_double("noise", "poisson_scale", 0.004);
    sc.noise.gaussian_sigma = cfg.get_double("noise", "gaussian_sigma", 0.008);
    sc.noise.clip = cfg.get_bool("noise", "clip", true);
    sc.noise.saturation = cfg.get_double("noise", "saturation", 1.0);

    scene.validate();
    return sc;
}

SceneConfig load_scene(const std::string& path) {
    return scene_from_config(Config::parse_file(path));
}

harness::ScenarioSpec load_scenario(const std::string& path) {
    Config cfg = Config::parse_file(path);
    harness::ScenarioSpec spec;
    spec.name = cfg.get("scenario", "name", "scenario");
    spec.water_type = cfg.get("water", "type", "JI");
    spec.backscatter = cfg.get_double("water", "backscatter", 0.0183);
    spec.particle_refraction = cfg.get_double("water", "particle_refraction", 1.10);
    spec.texture = cfg.get("target", "texture", "seabed");
    spec.surface_irradiance = {cfg.get_double("scene", "surface_irradiance_r", 3.0),
                               cfg.get_double("scene", "surface_irradiance_g", 3.0),
                               cfg.get_double("scene", "surface_irradiance_b", 3.0)};
    spec.leg_depths = cfg.get_list("scenario", "leg_depths", spec.leg_depths);
    spec.steps_per_leg = cfg.get_int("scenario", "steps_per_leg", spec.steps_per_leg);
    spec.step_m = cfg.get_double("scenario", "step_m", spec.step_m);
    spec.lattice_distances = cfg.get_list("scenario", "distances", spec.lattice_distances);
    spec.lattice_lights = cfg.get_list("scenario", "lights", spec.lattice_lights);
    spec.spp = cfg.get_int("scenario", "spp", spec.spp);
    spec.image_width = cfg.get_int("camera", "width", spec.image_width);
    spec.image_height = cfg.get_int("camera", "height", spec.image_height);
    spec.noise.poisson_scale = cfg.get_double("noise", "poisson_scale", spec.noise.poisson_scale);
    spec.noise.gaussian_sigma = cfg.get_double("noise", "gaussian_sigma", spec.noise.gaussian_sigma);
    spec.kd_b_fraction = cfg.get_double("water", "kd_b_fraction", spec.kd_b_fraction);
    spec.data_dir = cfg.get("water", "data_dir", "");
    spec.validate();
    return spec;
}

learn::TrainConfig train_config_from(const Config& cfg) {
    learn::TrainConfig tc;
    tc.epochs = cfg.get_int("train", "epochs", tc.epochs);
    tc.test_split = cfg.get_double("train", "test_split", tc.test_split);
    tc.batch_size = cfg.get_int("train", "batch_size", tc.batch_size);
    tc.learning_rate = cfg.get_double("train", "learning_rate", tc.learning_rate);
    tc.seed = static_cast<uint64_t>(cfg.get_int("train", "seed", 1));
    return tc;
}

std::string default_scene_text() {
    return R"([water]
type = JI
backscatter = 0.0183
particle_refraction = 1.10

[phase]
kind = ff
table_size = 2048

[scene]
depth = 3.0
distance = 1.5
light = 0.0
look = horizontal
surface_irradiance_r = 3.0
surface_irradiance_g = 3.0
surface_irradiance_b = 3.0

[target]
present = true
texture = seabed
extent_w = 4.0
extent_h = 4.0

[camera]
width = 320
height = 180
fov_deg = 60

[light]
power_r = 5.0
power_g = 5.0
power_b = 5.0
offset_up = 0.15
spot_exponent = 8.0

[bands]
red_lo = 600
red_hi = 700
green_lo = 500
green_hi = 600
blue_lo = 400
blue_hi = 500

[noise]
poisson_scale = 0.004
gaussian_sigma = 0.008
clip = true
saturation = 1.0
)";
}

std::string default_scenario_text() {
    return R"([scenario]
name = low_turbidity
leg_depths = 2.0, 3.0, 4.0, 5.0
steps_per_leg = 10
step_m = 0.5
distances = 0.5, 1.0, 1.5, 2.0, 2.5, 3.0
lights = 0.0, 0.25, 0.5, 0.75, 1.0
spp = 48

[water]
type = JI
backscatter = 0.0183
particle_refraction = 1.10

[target]
texture = seabed

[camera]
width = 320
height = 180

[noise]
poisson_scale = 0.004
gaussian_sigma = 0.008
)";
}

}  // namespace aquaperc::config
