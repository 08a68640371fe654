#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aquaperc/imstats.hpp"
#include "aquaperc/render.hpp"
#include "aquaperc/rgb.hpp"

namespace aquaperc::calib {

enum class ProfileKind { kz, kc_on, kc_off };

// Decay rates (1/m) of the exponential fits to the three profiles; the nine
// calibration inputs of the prediction model.
struct CalibSummary {
    Rgb kz_decay;
    Rgb kc_on_decay;
    Rgb kc_off_decay;

    std::vector<double> flatten() const {
        return {kz_decay.r,     kz_decay.g,     kz_decay.b,    kc_on_decay.r, kc_on_decay.g,
                kc_on_decay.b,  kc_off_decay.r, kc_off_decay.g, kc_off_decay.b};
    }
};

// Depth-illumination ratios and distance-contrast profiles per channel.
struct CalibProfiles {
    std::vector<double> depth_grid;  // m, strictly increasing
    std::vector<Rgb> kz;             // kz[0] == (1,1,1)
    std::vector<double> dist_grid;   // m, strictly increasing
    std::vector<Rgb> kc_on;
    std::vector<Rgb> kc_off;

    void validate() const;
    double depth_min() const { return depth_grid.front(); }
    double depth_max() const { return depth_grid.back(); }
    double dist_min() const { return dist_grid.front(); }
    double dist_max() const { return dist_grid.back(); }
};

struct CalibRunOptions {
    int spp{64};
    render::NoiseParams noise{};  // defaults to noise-free acquisition
    render::RenderOptions render{};
    imstats::PatchGrid* grid{nullptr};  // optional explicit patch lattice
};

// Looks toward the surface with the lights off at each depth and records
// the channel-mean ratio against the shallowest sample.
std::pair<std::vector<double>, std::vector<Rgb>> run_depth_profile(
    const render::SceneState& scene_base, const std::vector<double>& depths, int spp,
    uint64_t seed, const CalibRunOptions& opts = {});

// Looks at the target across the distance grid and records the patch
// contrast, lights held on or off.
std::pair<std::vector<double>, std::vector<Rgb>> run_contrast_profile(
    const render::SceneState& scene_base, const std::vector<double>& distances, bool lights_on,
    int spp, uint64_t seed, const CalibRunOptions& opts = {});

// Convenience wrapper running both steps.
CalibProfiles run_calibration(const render::SceneState& scene_base,
                              const std::vector<double>& depths,
                              const std::vector<double>& distances, int spp, uint64_t seed,
                              const CalibRunOptions& opts = {});

// Per-channel least-squares fit of log(value + 1e-6) against the grid
// coordinate; decay = max(0, -slope).
CalibSummary summarize(const CalibProfiles& profiles);

// Linear interpolation on the profile grid; out-of-bounds coordinates are
// an error (operation must stay inside the calibrated ranges).
Rgb lookup(const CalibProfiles& profiles, ProfileKind which, double coord);

void save_profiles(const CalibProfiles& profiles, const CalibSummary& summary,
                   const std::string& path);
std::pair<CalibProfiles, CalibSummary> load_profiles(const std::string& path);

}  // namespace aquaperc::calib
