#pragma once

#include <array>
#include <functional>

#include "aquaperc/calib.hpp"
#include "aquaperc/learn.hpp"
#include "aquaperc/rgb.hpp"

namespace aquaperc::guide {

struct GuideParams {
    double lambda_c{1.0};
    double lambda_d{1.0};
    double kappa_b{8.0};  // desk-scale default, tuned with tools/tune_guide.py
    double kappa_c{1.0};
    double d_min{0.5};
    double d_max{3.0};

    void validate() const;
};

struct Suggestion {
    double delta_d{0.0};
    double delta_l{0.0};
    double y{0.0};
    double m_c{0.0};
    double m_d{0.0};
};

// Current operating state fed to the prediction model.
struct GuideState {
    double dist{1.0};
    double light{0.5};
    double depth{2.0};
    Rgb img_mean;
    Rgb img_std;
};

// Sum of the predicted channel contrasts.
double contrast_metric(const Rgb& predicted);

// Gaussian distance regulator. The center derives from the lights-on
// contrast profile at the current distance, the width from the depth
// profile; both clamped for numerical sanity.
double distance_metric(double d, double z, const calib::CalibProfiles& profiles,
                       const GuideParams& params);

struct QualityBreakdown {
    double y{0.0};
    double m_c{0.0};
    double m_d{0.0};
};

// Offset quality y = lambda_c * m_c + lambda_d * m_d for a candidate
// (delta_d, delta_l); out-of-bounds candidates are evaluated at the nearest
// feasible point minus a large penalty proportional to the violation.
QualityBreakdown offset_quality(const GuideState& state, const calib::CalibSummary& summary,
                                const calib::CalibProfiles& profiles,
                                const learn::MlpModel& model, double delta_d, double delta_l,
                                const GuideParams& params);

struct NmOptions {
    int max_iters{200};
    double tol{1e-3};  // simplex diameter in normalized coordinates
};

struct NmResult {
    std::array<double, 2> x{};
    double value{0.0};
    int iterations{0};
    bool converged{false};
};

// Two-dimensional Nelder-Mead minimizer (reflection/expansion/contraction/
// shrink). The scale array normalizes coordinates for the stopping rule.
NmResult nelder_mead_2d(const std::function<double(double, double)>& f,
                        std::array<std::array<double, 2>, 3> simplex,
                        const std::array<double, 2>& scale, const NmOptions& opts = {});

// Maximizes offset quality over (delta_d, delta_l) and returns the best
// in-bounds suggestion. Deterministic for a fixed initial simplex.
Suggestion suggest(const GuideState& state, const calib::CalibSummary& summary,
                   const calib::CalibProfiles& profiles, const learn::MlpModel& model,
                   const GuideParams& params, const NmOptions& opts = {});

}  // namespace aquaperc::guide
