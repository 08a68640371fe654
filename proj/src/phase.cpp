#include "aquaperc/phase.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aquaperc::phase {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kFourPi = 4.0 * kPi;

void check_hg(double g) {
    if (!(g > -1.0 && g < 1.0)) throw std::domain_error("HG asymmetry g must lie in (-1, 1)");
}

void check_ff(double n, double mu) {
    if (!(n > 1.0)) throw std::domain_error("FF particle refraction n must exceed 1");
    if (!(mu > 3.0 && mu < 5.0)) throw std::domain_error("FF slope mu must lie in (3, 5)");
}

double delta_of(double n, double psi) {
    double s = std::sin(0.5 * psi);
    return 4.0 / (3.0 * (n - 1.0) * (n - 1.0)) * s * s;
}

}  // namespace

FfDerived FfDerived::from(double n, double mu) {
    check_ff(n, mu);
    return {0.5 * (3.0 - mu), delta_of(n, kPi / 2.0), delta_of(n, kPi)};
}

double eval_hg(double g, double psi) {
    check_hg(g);
    if (!(psi >= 0.0 && psi <= kPi)) throw std::domain_error("scattering angle must lie in [0, pi]");
    double denom = 1.0 + g * g - 2.0 * g * std::cos(psi);
    return (1.0 - g * g) / (kFourPi * std::pow(denom, 1.5));
}

double eval_ff(double n, double mu, double psi) {
    check_ff(n, mu);
    if (!(psi > 0.0 && psi <= kPi))
        throw std::domain_error("FF is singular at psi = 0; angle must lie in (0, pi]");
    const double nu = 0.5 * (3.0 - mu);
    double delta = delta_of(n, psi);
    // delta = 1 is a removable singularity; nudge to keep the division sane.
    if (std::abs(delta - 1.0) < 1e-9) delta = 1.0 + (delta >= 1.0 ? 1e-9 : -1e-9);
    const double delta_nu = std::pow(delta, nu);
    const double s2 = std::sin(0.5 * psi) * std::sin(0.5 * psi);

    const double one_m_d = 1.0 - delta;
    const double one_m_dnu = 1.0 - delta_nu;
    double first = 1.0 / (kFourPi * one_m_d * one_m_d * delta_nu) *
                   (nu * one_m_d - one_m_dnu + (delta * one_m_dnu - nu * one_m_d) / s2);

    const double d180 = delta_of(n, kPi);
    const double d180_nu = std::pow(d180, nu);
    double second = (1.0 - d180_nu) / (16.0 * kPi * (d180 - 1.0) * d180_nu) *
                    (3.0 * std::cos(psi) * std::cos(psi) - 1.0);
    return first + second;
}

double hg_cdf(double g, double psi) {
    check_hg(g);
    if (std::abs(g) < 1e-12) return 0.5 * (1.0 - std::cos(psi));
    double denom = std::sqrt(1.0 + g * g - 2.0 * g * std::cos(psi));
    return (1.0 - g * g) / (2.0 * g) * (1.0 / (1.0 - g) - 1.0 / denom);
}

double ff_cdf(double n, double mu, double psi) {
    check_ff(n, mu);
    const double nu = 0.5 * (3.0 - mu);
    double delta = delta_of(n, psi);
    if (std::abs(delta - 1.0) < 1e-9) delta = 1.0 + (delta >= 1.0 ? 1e-9 : -1e-9);
    const double delta_nu = std::pow(delta, nu);
    const double s2 = std::sin(0.5 * psi) * std::sin(0.5 * psi);
    double value = ((1.0 - delta * delta_nu) - (1.0 - delta_nu) * s2) / ((1.0 - delta) * delta_nu);
    const double d180 = delta_of(n, kPi);
    const double d180_nu = std::pow(d180, nu);
    double c = std::cos(psi);
    value += (1.0 - d180_nu) / (8.0 * (d180 - 1.0) * d180_nu) * c * (1.0 - c * c);
    return value;
}

double backscatter_fraction(double n, double mu) {
    FfDerived d = FfDerived::from(n, mu);
    if (std::abs(d.delta90 - 1.0) < 1e-12)
        throw std::domain_error("degenerate FF parameters: delta(90 deg) = 1");
    double d90_nu = std::pow(d.delta90, d.nu);
    double numer = 1.0 - d.delta90 * d90_nu - 0.5 * (1.0 - d90_nu);
    return 1.0 - numer / ((1.0 - d.delta90) * d90_nu);
}

double mu_from_backscatter(double n, double backscatter) {
    if (!(n > 1.0)) throw std::domain_error("FF particle refraction n must exceed 1");
    if (!(backscatter > 0.0 && backscatter < 0.5))
        throw std::domain_error("backscatter fraction must lie in (0, 0.5)");
    double delta90 = delta_of(n, kPi / 2.0);
    double arg = 2.0 * backscatter * (delta90 - 1.0) + 1.0;
    if (!(arg > 0.0)) throw std::domain_error("backscatter fraction out of invertible range");
    return 2.0 * std::log(arg) / std::log(delta90) + 3.0;
}

double hg_g_for_backscatter(double backscatter) {
    if (!(backscatter > 0.0 && backscatter < 0.5))
        throw std::domain_error("backscatter fraction must lie in (0, 0.5)");
    // B_hg(g) = 1 - F(pi/2) is strictly decreasing in g; bisect.
    double lo = 0.0, hi = 0.999999;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        double b = 1.0 - hg_cdf(mid, kPi / 2.0);
        if (b > backscatter)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

// Log-spaced [kMinAngle, 1 deg] for the first half of the nodes, linear up
// to pi for the rest; the forward peak carries most of the mass.
std::vector<double> make_angle_grid(int n_table) {
    const double knee = kPi / 180.0;
    std::vector<double> grid;
    grid.reserve(n_table);
    int n_log = n_table / 2;
    int n_lin = n_table - n_log;
    double log_lo = std::log(PhaseSpec::kMinAngle);
    double log_hi = std::log(knee);
    for (int i = 0; i < n_log; ++i)
        grid.push_back(std::exp(log_lo + (log_hi - log_lo) * i / (n_log - 1)));
    for (int i = 1; i <= n_lin; ++i)
        grid.push_back(knee + (kPi - knee) * i / n_lin);
    grid.back() = kPi;
    return grid;
}

double eval_params(const PhaseParams& p, double psi) {
    if (const auto* hg = std::get_if<HgParams>(&p)) return eval_hg(hg->g, psi);
    const auto& ff = std::get<FfParams>(p);
    return eval_ff(ff.n, ff.mu, psi);
}

}  // namespace

PhaseSpec PhaseSpec::build(const PhaseParams& params, int n_table) {
    if (n_table < 64) throw std::invalid_argument("phase table needs at least 64 entries");
    if (const auto* hg = std::get_if<HgParams>(&params)) check_hg(hg->g);
    if (const auto* ff = std::get_if<FfParams>(&params)) check_ff(ff->n, ff->mu);

    PhaseSpec spec;
    spec.params_ = params;
    spec.angles_ = make_angle_grid(n_table);

    // Cumulative integral of 2*pi*beta*sin(psi). The mass below the first
    // grid node (the forward singularity) comes from the closed-form CDF;
    // the body is a trapezoid with per-cell subdivision on the log-headed
    // grid. The table therefore carries the full forward peak as an atom at
    // kMinAngle and the sampler never returns zero.
    double head;
    if (const auto* hg = std::get_if<HgParams>(&params)) {
        head = hg_cdf(hg->g, kMinAngle);
    } else {
        const auto& ff = std::get<FfParams>(params);
        head = ff_cdf(ff.n, ff.mu, kMinAngle);
    }
    const int kSub = 8;
    std::vector<double> cdf(spec.angles_.size(), 0.0);
    double acc = head;
    double prev_angle = spec.angles_.front();
    double prev_f = 2.0 * kPi * eval_params(params, prev_angle) * std::sin(prev_angle);
    cdf[0] = acc;
    for (size_t i = 1; i < spec.angles_.size(); ++i) {
        double a1 = spec.angles_[i];
        for (int s = 1; s <= kSub; ++s) {
            double x = prev_angle + (a1 - prev_angle) * s / kSub;
            double f = 2.0 * kPi * eval_params(params, x) * std::sin(x);
            if (!std::isfinite(f)) throw std::runtime_error("non-finite phase integrand");
            if (f < 0.0)
                throw std::domain_error("phase function negative; parameters rejected");
            acc += 0.5 * (prev_f + f) * (x - prev_angle);
            prev_angle = x;
            prev_f = f;
        }
        cdf[i] = acc;
    }
    double total = cdf.back();
    if (!(std::abs(total - 1.0) < 1e-3))
        throw std::domain_error("phase function normalization off by more than 1e-3");
    for (auto& v : cdf) v /= total;
    // Enforce strict monotonicity for the binary search.
    for (size_t i = 1; i < cdf.size(); ++i)
        if (cdf[i] <= cdf[i - 1]) cdf[i] = std::nextafter(cdf[i - 1], 2.0);
    cdf.back() = 1.0;
    spec.cdf_ = std::move(cdf);

    // Downwelling in-scatter table H(u): integral of the phase function
    // over the refracted-skylight (Snell) cone of incoming directions, for
    // an outgoing (toward-camera) direction with upward look cosine u,
    // normalized by the cone solid-angle projection so that the ambient
    // NEE term is E(z)/pi * H(u). Uses the arc fraction of each psi-cone
    // around the outgoing direction that lies inside the Snell cone.
    const int kHemi = 65;
    const double cos_snell = std::sqrt(1.0 - kSnellSin2);
    spec.hemi_cos_.resize(kHemi);
    spec.hemi_value_.resize(kHemi);
    for (int k = 0; k < kHemi; ++k) {
        double u = -1.0 + 2.0 * k / (kHemi - 1);
        spec.hemi_cos_[k] = u;
        double s_o = std::sqrt(std::max(0.0, 1.0 - u * u));
        double total_h = 0.0;
        double pa = 0.0, pf = 0.0;
        for (size_t i = 0; i < spec.angles_.size(); ++i) {
            double x = spec.angles_[i];
            double sx = std::sin(x);
            double frac;
            if (s_o * sx < 1e-9) {
                frac = (u * std::cos(x) >= cos_snell) ? 1.0 : 0.0;
            } else {
                double tau = (u * std::cos(x) - cos_snell) / (sx * s_o);
                tau = std::clamp(tau, -1.0, 1.0);
                frac = 1.0 - std::acos(tau) / kPi;
            }
            double f = 2.0 * kPi * eval_params(params, x) * sx * frac;
            total_h += 0.5 * (pf + f) * (x - pa);
            pa = x;
            pf = f;
        }
        spec.hemi_value_[k] = total_h / (total * kSnellSin2);
    }
    // Blend toward the direction-averaged value: the multiply-scattered
    // part of the in-water field is close to diffuse, and the raw
    // single-scatter cone integral alone overstates the horizon falloff.
    double mean_h = 0.0;
    for (double v : spec.hemi_value_) mean_h += v;
    mean_h /= spec.hemi_value_.size();
    for (auto& v : spec.hemi_value_)
        v = (1.0 - kConeDiffuseBlend) * v + kConeDiffuseBlend * mean_h;
    return spec;
}

double PhaseSpec::evaluate(double psi) const { return eval_params(params_, psi); }

double PhaseSpec::cdf(double psi) const {
    if (psi <= angles_.front())
        return psi <= 0.0 ? 0.0 : cdf_.front() * (psi / angles_.front());
    if (psi >= angles_.back()) return 1.0;
    auto it = std::upper_bound(angles_.begin(), angles_.end(), psi);
    size_t i = static_cast<size_t>(it - angles_.begin());
    double t = (psi - angles_[i - 1]) / (angles_[i] - angles_[i - 1]);
    return cdf_[i - 1] + t * (cdf_[i] - cdf_[i - 1]);
}

double PhaseSpec::sample_angle(double u) const {
    u = std::clamp(u, 0.0, 1.0 - 1e-12);
    if (u <= cdf_.front()) return angles_.front();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    size_t i = static_cast<size_t>(it - cdf_.begin());
    if (i >= cdf_.size()) i = cdf_.size() - 1;
    double t = (u - cdf_[i - 1]) / (cdf_[i] - cdf_[i - 1]);
    return angles_[i - 1] + t * (angles_[i] - angles_[i - 1]);
}

double PhaseSpec::downwelling_inscatter(double view_cos_up) const {
    double u = std::clamp(view_cos_up, -1.0, 1.0);
    double x = (u + 1.0) * 0.5 * (hemi_cos_.size() - 1);
    size_t i = std::min(static_cast<size_t>(x), hemi_cos_.size() - 2);
    double t = x - i;
    return hemi_value_[i] + t * (hemi_value_[i + 1] - hemi_value_[i]);
}

std::vector<PetzoldRow> load_petzold(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open phase measurement table: " + path);
    std::vector<PetzoldRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        PetzoldRow r{};
        if (!(row >> r.angle_deg >> r.value))
            throw std::runtime_error("malformed row in " + path + ": " + line);
        rows.push_back(r);
    }
    if (rows.size() < 2) throw std::runtime_error("phase measurement table too short: " + path);
    return rows;
}

double mean_cosine(const std::vector<PetzoldRow>& rows) {
    double num = 0.0, den = 0.0;
    for (size_t i = 1; i < rows.size(); ++i) {
        double a0 = rows[i - 1].angle_deg * kPi / 180.0;
        double a1 = rows[i].angle_deg * kPi / 180.0;
        double f0 = rows[i - 1].value * std::sin(a0);
        double f1 = rows[i].value * std::sin(a1);
        double w = 0.5 * (a1 - a0);
        num += w * (f0 * std::cos(a0) + f1 * std::cos(a1));
        den += w * (f0 + f1);
    }
    return num / den;
}

std::vector<PhaseComparisonRow> petzold_compare(const PhaseSpec& spec, const std::string& petzold_path) {
    auto rows = load_petzold(petzold_path);
    double g = mean_cosine(rows);
    std::vector<PhaseComparisonRow> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        double psi = std::max(r.angle_deg * kPi / 180.0, PhaseSpec::kMinAngle);
        out.push_back({r.angle_deg, spec.evaluate(psi), eval_hg(g, psi), r.value});
    }
    return out;
}

}  // namespace aquaperc::phase
