#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "aquaperc/calib.hpp"
#include "aquaperc/guide.hpp"
#include "aquaperc/imstats.hpp"
#include "aquaperc/learn.hpp"
#include "aquaperc/render.hpp"

namespace aquaperc::harness {

// One simulated inspection: lawnmower legs at fixed depths, a candidate
// lattice of (distance, light) pairs re-rendered every 0.5 m step.
struct ScenarioSpec {
    std::string name{"scenario"};
    std::string water_type{"JI"};
    double backscatter{0.0183};
    double particle_refraction{1.10};
    std::string texture{"seabed"};
    Rgb surface_irradiance{3.0, 3.0, 3.0};
    double kd_b_fraction{0.25};  // measured-diffuse-attenuation stand-in
    std::vector<double> leg_depths{2.0, 3.0, 4.0, 5.0};
    int steps_per_leg{10};
    double step_m{0.5};
    std::vector<double> lattice_distances{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    std::vector<double> lattice_lights{0.0, 0.25, 0.5, 0.75, 1.0};
    int spp{48};
    int image_width{320};
    int image_height{180};
    render::NoiseParams noise{0.004, 0.008, true, 1.0};
    std::string data_dir;  // empty: optics::default_data_dir()

    void validate() const;
    render::SceneState base_scene() const;
};

struct Waypoint {
    int leg{0};
    int step{0};
    double depth{0.0};
    double along_track{0.0};
};

struct OperationPlan {
    ScenarioSpec scenario;
    std::vector<Waypoint> waypoints;

    static OperationPlan build(const ScenarioSpec& scenario);
};

struct FixedPolicy {
    double distance{1.0};
    double light{0.5};
};

struct GradientPolicy {
    double target_gradient{-1.0};  // < 0: measure from a 1 m reference frame
    double gain{0.5};
};

struct ProposedPolicy {
    std::shared_ptr<const learn::MlpModel> model;
    std::shared_ptr<const calib::CalibProfiles> profiles;
    calib::CalibSummary summary;
    guide::GuideParams params;
};

using Policy = std::variant<ProposedPolicy, FixedPolicy, GradientPolicy>;

std::string policy_name(const Policy& policy);

// Proportional distance controller holding a reference Sobel gradient.
// Light intensity is left unchanged by this baseline.
std::pair<double, double> gradient_policy_step(double measured_gradient, double target_gradient,
                                               double gain, double current_d, double current_l,
                                               double d_min, double d_max);

struct StepRecord {
    int leg{0};
    int step{0};
    double distance{0.0};
    double light{0.0};
    imstats::MatchReport match;
    double coverage{0.0};
    Rgb contrast;
    double mean_gradient{0.0};
};

struct PolicyTrace {
    std::string policy;
    std::vector<StepRecord> steps;
};

// Disk-backed cache of noiseless lattice renders,
// <cache_dir>/<scenario>/<leg>/<d>_<l>.pfm.
class LatticeCache {
public:
    LatticeCache(const ScenarioSpec& scenario, std::string cache_dir, uint64_t seed);

    const ImageF& at(int leg, int i_dist, int i_light);
    const ScenarioSpec& scenario() const { return scenario_; }

private:
    ScenarioSpec scenario_;
    render::SceneState base_;
    std::string cache_dir_;
    uint64_t seed_;
    std::map<std::tuple<int, int, int>, ImageF> memory_;
};

PolicyTrace run_policy(const OperationPlan& plan, const Policy& policy, uint64_t seed,
                       LatticeCache& cache);

struct Aggregate {
    double mean_features{0.0};
    double mean_inliers{0.0};
    double mean_ratio{0.0};
    double total_coverage{0.0};
    double usable_fraction{0.0};  // frames with inliers >= usable threshold
};

// Usability threshold for coverage: three times the RANSAC minimal set.
constexpr int kUsableInliers = 12;

Aggregate aggregate(const PolicyTrace& trace, const ScenarioSpec& scenario);

// Per-policy trace CSVs, a summary table and SVG parameter/inlier plots.
void compare_report(const std::map<std::string, PolicyTrace>& traces,
                    const ScenarioSpec& scenario, const std::string& out_dir);

}  // namespace aquaperc::harness
