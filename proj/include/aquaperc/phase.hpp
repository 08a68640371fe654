#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace aquaperc::phase {

// Henyey-Greenstein asymmetry parameter, g in (-1, 1).
struct HgParams {
    double g{0.8};
};

// Fournier-Forand: particle refractive index n > 1 and hyperbolic
// size-distribution slope mu in (3, 5).
struct FfParams {
    double n{1.10};
    double mu{3.5835};
};

using PhaseParams = std::variant<HgParams, FfParams>;

// Helper quantities for the FF algebra.
struct FfDerived {
    double nu;        // (3 - mu) / 2
    double delta90;   // delta at psi = 90 deg
    double delta180;  // delta at psi = 180 deg

    static FfDerived from(double n, double mu);
};

double eval_hg(double g, double psi);
double eval_ff(double n, double mu, double psi);

// Analytic cumulative distributions F(psi) = 2*pi * int_0^psi beta sin dpsi.
// Used as independent checks against the tabulated CDF.
double hg_cdf(double g, double psi);
double ff_cdf(double n, double mu, double psi);

// Backscatter fraction B = b_b / b obtained by integrating the FF function
// over the rear hemisphere.
double backscatter_fraction(double n, double mu);

// Slope parameter from a requested backscatter fraction (inverse of the
// above at fixed n).
double mu_from_backscatter(double n, double backscatter);

// HG asymmetry whose rear-hemisphere mass equals the given backscatter
// fraction; used for backscatter-matched HG/FF comparisons.
double hg_g_for_backscatter(double backscatter);

// Phase function with a precomputed inverse-CDF table for angle sampling
// and a downwelling-hemisphere in-scatter table for ambient lighting.
class PhaseSpec {
public:
    static constexpr double kMinAngle = 1e-4;  // rad; forward singularity guard
    // Refracted skylight is confined to the Snell cone, half-angle
    // asin(1 / 1.333): sin^2 of that angle normalizes the cone radiance.
    static constexpr double kSnellSin2 = 0.5625;
    // Fraction of the cone in-scatter integral replaced by its direction
    // average; stands in for the diffuse multiply-scattered field.
    static constexpr double kConeDiffuseBlend = 0.8;

    static PhaseSpec build(const PhaseParams& params, int n_table = 2048);

    const PhaseParams& params() const { return params_; }
    bool is_ff() const { return std::holds_alternative<FfParams>(params_); }

    double evaluate(double psi) const;

    // Tabulated CDF, linear interpolation between nodes.
    double cdf(double psi) const;

    // Inverse-CDF sampling: binary search plus linear interpolation.
    // u is clamped into [0, 1).
    double sample_angle(double u) const;

    // Integral of the phase function over the refracted-skylight cone for a
    // viewing direction with the given upward cosine, normalized by the
    // cone projection. Drives the ambient in-scatter term in the renderer.
    double downwelling_inscatter(double view_cos_up) const;

    const std::vector<double>& table_angles() const { return angles_; }
    const std::vector<double>& table_cdf() const { return cdf_; }

private:
    PhaseSpec() = default;

    PhaseParams params_;
    std::vector<double> angles_;  // strictly increasing, [kMinAngle, pi]
    std::vector<double> cdf_;     // strictly increasing, [~0, 1]
    std::vector<double> hemi_cos_;   // view cosine grid for the hemisphere table
    std::vector<double> hemi_value_;
};

using PhaseSpecPtr = std::shared_ptr<const PhaseSpec>;

struct PetzoldRow {
    double angle_deg;
    double value;  // 1/sr
};

std::vector<PetzoldRow> load_petzold(const std::string& path);

// Mean cosine of a tabulated phase function (trapezoid over the table).
double mean_cosine(const std::vector<PetzoldRow>& rows);

struct PhaseComparisonRow {
    double psi_deg;
    double ff_value;
    double hg_value;
    double petzold_value;
};

// Evaluates FF (from the spec) and HG (asymmetry = Petzold mean cosine) at
// the bundled measurement angles.
std::vector<PhaseComparisonRow> petzold_compare(const PhaseSpec& spec, const std::string& petzold_path);

}  // namespace aquaperc::phase
