#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "aquaperc/optics.hpp"
#include "aquaperc/phase.hpp"
#include "aquaperc/rng.hpp"
#include "doctest.h"

using namespace aquaperc;
using namespace aquaperc::phase;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Quadrature oracle: 2*pi * integral of beta * sin(psi), log-spaced head to
// resolve the forward peak, then a fine linear tail. Independent of the
// CDF-table construction.
double normalization_integral(const std::function<double(double)>& beta) {
    const int n_log = 50000, n_lin = 50000;
    double acc = 0.0;
    double prev_x = 1e-7, prev_f = 2.0 * kPi * beta(prev_x) * std::sin(prev_x);
    double knee = kPi / 180.0;
    for (int i = 1; i <= n_log; ++i) {
        double x = std::exp(std::log(1e-7) + (std::log(knee) - std::log(1e-7)) * i / n_log);
        x = std::min(x, kPi);
        double f = 2.0 * kPi * beta(x) * std::sin(x);
        acc += 0.5 * (prev_f + f) * (x - prev_x);
        prev_x = x;
        prev_f = f;
    }
    for (int i = 1; i <= n_lin; ++i) {
        double x = std::min(knee + (kPi - knee) * i / n_lin, kPi);
        double f = 2.0 * kPi * beta(x) * std::sin(x);
        acc += 0.5 * (prev_f + f) * (x - prev_x);
        prev_x = x;
        prev_f = f;
    }
    return acc;
}

const double kPetzoldN = 1.10;
const double kPetzoldMu = 3.5835;

}  // namespace

TEST_CASE("HG evaluates to the closed form") {
    CHECK(eval_hg(0.0, 0.3) == doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-12));
    CHECK(eval_hg(0.0, 2.9) == doctest::Approx(0.0795775).epsilon(1e-6));
    // g = 0.9 at psi = 0: (1/4pi) * (1 - 0.81) / 0.1^3
    CHECK(eval_hg(0.9, 0.0) == doctest::Approx(15.1197).epsilon(1e-5));
    CHECK_THROWS_AS(eval_hg(1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(eval_hg(0.5, -0.1), std::domain_error);
}

TEST_CASE("HG normalization integral is 1") {
    for (double g : {-0.5, 0.0, 0.5, 0.9}) {
        double integral = normalization_integral([g](double psi) { return eval_hg(g, psi); });
        CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("FF normalization integral is 1 for the reference parameters") {
    double integral = normalization_integral(
        [](double psi) { return eval_ff(kPetzoldN, kPetzoldMu, psi); });
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("FF has a strong forward peak") {
    double forward = eval_ff(kPetzoldN, kPetzoldMu, 0.1 * kPi / 180.0);
    double side = eval_ff(kPetzoldN, kPetzoldMu, kPi / 2.0);
    CHECK(forward / side > 1e4);
    CHECK_THROWS_AS(eval_ff(kPetzoldN, kPetzoldMu, 0.0), std::domain_error);
    CHECK_THROWS_AS(eval_ff(0.99, kPetzoldMu, 0.5), std::domain_error);
    CHECK_THROWS_AS(eval_ff(1.1, 5.5, 0.5), std::domain_error);
}

TEST_CASE("FF decreases monotonically from 1 to 90 degrees") {
    // Includes the removable delta = 1 point near 5 degrees for n = 1.05.
    double prev = eval_ff(1.05, 3.6, 1.0 * kPi / 180.0);
    for (int i = 1; i <= 890; ++i) {
        double psi = (1.0 + 0.1 * i) * kPi / 180.0;
        double cur = eval_ff(1.05, 3.6, psi);
        CHECK(cur > 0.0);
        CHECK(cur < prev * (1.0 + 1e-9));
        prev = cur;
    }
}

TEST_CASE("backscatter fraction matches the reference parameter pair") {
    CHECK(backscatter_fraction(kPetzoldN, kPetzoldMu) == doctest::Approx(0.0183).epsilon(2e-3));
    // Strictly increasing in mu at fixed n.
    double prev = backscatter_fraction(1.08, 3.1);
    for (double mu = 3.15; mu <= 4.5; mu += 0.05) {
        double cur = backscatter_fraction(1.08, mu);
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("mu_from_backscatter inverts backscatter_fraction") {
    Pcg32 rng(42, 5);
    for (int trial = 0; trial < 20; ++trial) {
        double n = rng.uniform(1.02, 1.2);
        double mu = rng.uniform(3.1, 4.8);
        double b = backscatter_fraction(n, mu);
        CHECK(mu_from_backscatter(n, b) == doctest::Approx(mu).epsilon(1e-10));
        double b2 = backscatter_fraction(n, mu_from_backscatter(n, b));
        CHECK(std::abs(b2 - b) < 1e-9);
    }
    CHECK(mu_from_backscatter(kPetzoldN, 0.0183) == doctest::Approx(3.58).epsilon(0.003));
    // B -> 0+ drives mu -> 3+ (log(1) = 0 limit).
    CHECK(mu_from_backscatter(1.1, 1e-12) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK_THROWS_AS(mu_from_backscatter(1.1, 0.6), std::domain_error);
}

TEST_CASE("CDF table: isotropic HG has median at 90 degrees") {
    PhaseSpec spec = PhaseSpec::build(HgParams{0.0});
    CHECK(spec.cdf(kPi / 2.0) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(spec.sample_angle(0.5) == doctest::Approx(kPi / 2.0).epsilon(1e-3));
    CHECK(spec.sample_angle(0.0) == doctest::Approx(spec.table_angles().front()).epsilon(1e-12));
}

TEST_CASE("CDF table agrees with the analytic cumulative distributions") {
    SUBCASE("HG") {
        PhaseSpec spec = PhaseSpec::build(HgParams{0.7});
        for (double psi = 0.05; psi < kPi; psi += 0.05)
            CHECK(spec.cdf(psi) == doctest::Approx(hg_cdf(0.7, psi)).epsilon(5e-4));
    }
    SUBCASE("FF") {
        PhaseSpec spec = PhaseSpec::build(FfParams{kPetzoldN, kPetzoldMu});
        for (double psi = 0.01; psi < kPi; psi += 0.02) {
            double analytic = ff_cdf(kPetzoldN, kPetzoldMu, psi);
            CHECK(std::abs(spec.cdf(psi) - analytic) < 1e-3);
        }
    }
}

TEST_CASE("FF rear-hemisphere mass equals the backscatter fraction") {
    PhaseSpec spec = PhaseSpec::build(FfParams{kPetzoldN, kPetzoldMu});
    double b = backscatter_fraction(kPetzoldN, kPetzoldMu);
    CHECK(spec.cdf(kPi / 2.0) + b == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("CDF tables are strictly monotone for the bundled parameter sets") {
    std::vector<PhaseParams> sets = {HgParams{0.0}, HgParams{0.7}, HgParams{0.924},
                                     FfParams{1.05, 3.3}, FfParams{kPetzoldN, kPetzoldMu},
                                     FfParams{1.15, 4.2}};
    for (const auto& params : sets) {
        PhaseSpec spec = PhaseSpec::build(params);
        const auto& cdf = spec.table_cdf();
        const auto& angles = spec.table_angles();
        CHECK(angles.front() == doctest::Approx(PhaseSpec::kMinAngle));
        CHECK(angles.back() == doctest::Approx(kPi));
        CHECK(cdf.back() == doctest::Approx(1.0).epsilon(1e-6));
        for (size_t i = 1; i < cdf.size(); ++i) {
            CHECK(cdf[i] > cdf[i - 1]);
            CHECK(angles[i] > angles[i - 1]);
        }
    }
}

TEST_CASE("sampled angles reproduce the tabulated CDF") {
    PhaseSpec spec = PhaseSpec::build(FfParams{kPetzoldN, kPetzoldMu});
    const int n_samples = 1000000;
    std::vector<double> samples(n_samples);
    Pcg32 rng(7, 11);
    for (int i = 0; i < n_samples; ++i) samples[i] = spec.sample_angle(rng.uniform());
    std::sort(samples.begin(), samples.end());
    // Sup-norm distance between the empirical CDF and the table CDF. The
    // CDF is right-continuous (forward-peak atom at the first node), so
    // count samples <= psi.
    double worst = 0.0;
    for (int k = 1; k <= 200; ++k) {
        double u = static_cast<double>(k) / 201.0;
        double psi = spec.sample_angle(u);
        double empirical =
            std::upper_bound(samples.begin(), samples.end(), psi) - samples.begin();
        empirical /= n_samples;
        worst = std::max(worst, std::abs(empirical - spec.cdf(psi)));
    }
    CHECK(worst < 5e-3);

    SUBCASE("round trip through the table") {
        for (double psi : {0.01, 0.1, 0.5, 1.5, 3.0})
            CHECK(spec.sample_angle(spec.cdf(psi)) == doctest::Approx(psi).epsilon(1e-3));
    }
}

TEST_CASE("petzold comparison: FF close, mean-cosine HG far at small angles") {
    PhaseSpec spec = PhaseSpec::build(FfParams{
        kPetzoldN, mu_from_backscatter(kPetzoldN, 0.0183)});
    std::string path = optics::default_data_dir() + "/petzold_average.txt";
    auto rows = petzold_compare(spec, path);
    CHECK(rows.size() == load_petzold(path).size());
    for (const auto& r : rows) {
        if (r.psi_deg < 0.1 - 1e-9 || r.psi_deg > 170.0 + 1e-9) continue;
        INFO("angle ", r.psi_deg);
        CHECK(r.ff_value / r.petzold_value < 2.0);
        CHECK(r.ff_value / r.petzold_value > 0.5);
    }
    CHECK(rows.front().psi_deg == doctest::Approx(0.1));
    double hg_ratio = rows.front().hg_value / rows.front().petzold_value;
    CHECK((hg_ratio > 10.0 || hg_ratio < 0.1));
    CHECK_THROWS(load_petzold("no/such/file.txt"));
}

TEST_CASE("hg_g_for_backscatter hits the requested rear-hemisphere mass") {
    for (double b : {0.005, 0.0183, 0.1}) {
        double g = hg_g_for_backscatter(b);
        CHECK(1.0 - hg_cdf(g, kPi / 2.0) == doctest::Approx(b).epsilon(1e-6));
    }
}

TEST_CASE("downwelling in-scatter table is bounded and favors upward views") {
    PhaseSpec spec = PhaseSpec::build(FfParams{kPetzoldN, kPetzoldMu});
    double up = spec.downwelling_inscatter(1.0);
    double down = spec.downwelling_inscatter(-1.0);
    CHECK(up > 0.0);
    CHECK(up <= 1.0 / PhaseSpec::kSnellSin2);
    CHECK(down > 0.0);

    // Analytic oracle: the raw cone integrals are F(theta_c)/sin^2 looking
    // up and (1 - F(pi - theta_c))/sin^2 looking down; the table blends
    // each 50/50 with the direction average Omega_cone / (4 pi sin^2).
    double theta_c = std::asin(std::sqrt(PhaseSpec::kSnellSin2));
    double cone_mean = 0.5 * (1.0 - std::cos(theta_c)) / PhaseSpec::kSnellSin2;
    double raw_up = ff_cdf(kPetzoldN, kPetzoldMu, theta_c) / PhaseSpec::kSnellSin2;
    double raw_down =
        (1.0 - ff_cdf(kPetzoldN, kPetzoldMu, kPi - theta_c)) / PhaseSpec::kSnellSin2;
    const double keep = 1.0 - PhaseSpec::kConeDiffuseBlend;
    CHECK(up == doctest::Approx(keep * raw_up + PhaseSpec::kConeDiffuseBlend * cone_mean)
                    .epsilon(0.01));
    CHECK(down == doctest::Approx(keep * raw_down + PhaseSpec::kConeDiffuseBlend * cone_mean)
                      .epsilon(0.05));
    CHECK(up > 1.5 * down);
}

TEST_CASE("table construction rejects bad inputs") {
    CHECK_THROWS_AS(PhaseSpec::build(HgParams{0.5}, 32), std::invalid_argument);
    CHECK_THROWS_AS(PhaseSpec::build(HgParams{1.5}), std::domain_error);
    CHECK_THROWS_AS(PhaseSpec::build(FfParams{1.1, 2.0}), std::domain_error);
}
