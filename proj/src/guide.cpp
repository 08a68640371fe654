#include "aquaperc/guide.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aquaperc::guide {

void GuideParams::validate() const {
    if (!(lambda_c >= 0.0 && lambda_d >= 0.0 && lambda_c + lambda_d > 0.0))
        throw std::invalid_argument("GuideParams: weights must be >= 0 with a positive sum");
    if (!(kappa_b > 0.0 && kappa_c > 0.0))
        throw std::invalid_argument("GuideParams: kappa tuning parameters must be positive");
    if (!(d_min < d_max)) throw std::invalid_argument("GuideParams: d_min must be < d_max");
}

double contrast_metric(const Rgb& predicted) {
    if (!predicted.all_nonnegative())
        throw std::invalid_argument("contrast_metric: predicted contrast must be >= 0");
    return predicted.sum();
}

double distance_metric(double d, double z, const calib::CalibProfiles& profiles,
                       const GuideParams& params) {
    params.validate();
    if (!(z > 0.0)) throw std::domain_error("distance_metric: depth must be positive");
    Rgb kc = calib::lookup(profiles, calib::ProfileKind::kc_on, d);
    Rgb kz = calib::lookup(profiles, calib::ProfileKind::kz, z);
    double center = std::sqrt(std::max(kc.sum(), 0.0)) * params.kappa_b / z;
    center = std::clamp(center, params.d_min, params.d_max);
    double kz_mean = kz.mean();
    double width = std::max(kz_mean * kz_mean / params.kappa_c, 1e-3);
    double arg = (d - center) / width;
    // Exponent floored to keep the metric strictly positive.
    return std::exp(std::max(-0.5 * arg * arg, -700.0));
}

QualityBreakdown offset_quality(const GuideState& state, const calib::CalibSummary& summary,
                                const calib::CalibProfiles& profiles,
                                const learn::MlpModel& model, double delta_d, double delta_l,
                                const GuideParams& params) {
    params.validate();
    double d_new = state.dist + delta_d;
    double l_new = state.light + delta_l;
    double d_eval = std::clamp(d_new, params.d_min, params.d_max);
    double l_eval = std::clamp(l_new, 0.0, 1.0);
    double violation = std::abs(d_new - d_eval) + std::abs(l_new - l_eval);

    std::vector<double> inputs;
    if (model.input_dim() == 20) {
        auto c = summary.flatten();
        inputs.assign(c.begin(), c.end());
    } else if (model.input_dim() != 11) {
        throw std::invalid_argument("offset_quality: model must take 20 or 11 inputs");
    }
    double eff_dd = d_eval - state.dist;
    double eff_dl = l_eval - state.light;
    double state_part[11] = {state.dist,      state.light,     state.depth,    state.img_mean.r,
                             state.img_mean.g, state.img_mean.b, state.img_std.r, state.img_std.g,
                             state.img_std.b,  eff_dd,          eff_dl};
    inputs.insert(inputs.end(), state_part, state_part + 11);

    QualityBreakdown q;
    q.m_c = contrast_metric(model.predict(inputs));
    q.m_d = distance_metric(d_eval, state.depth, profiles, params);
    q.y = params.lambda_c * q.m_c + params.lambda_d * q.m_d - 1e6 * violation;
    return q;
}

namespace {

struct Vertex {
    std::array<double, 2> x;
    double f;
};

double diameter(const std::array<Vertex, 3>& v, const std::array<double, 2>& scale) {
    double best = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            double dx = (v[i].x[0] - v[j].x[0]) / scale[0];
            double dy = (v[i].x[1] - v[j].x[1]) / scale[1];
            best = std::max(best, std::hypot(dx, dy));
        }
    return best;
}

}  // namespace

NmResult nelder_mead_2d(const std::function<double(double, double)>& f,
                        std::array<std::array<double, 2>, 3> simplex,
                        const std::array<double, 2>& scale, const NmOptions& opts) {
    constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
    std::array<Vertex, 3> v;
    for (int i = 0; i < 3; ++i) v[i] = {simplex[i], f(simplex[i][0], simplex[i][1])};

    NmResult result;
    int iter = 0;
    for (; iter < opts.max_iters; ++iter) {
        std::sort(v.begin(), v.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
        if (diameter(v, scale) < opts.tol) {
            result.converged = true;
            break;
        }
        std::array<double, 2> centroid = {(v[0].x[0] + v[1].x[0]) / 2.0,
                                          (v[0].x[1] + v[1].x[1]) / 2.0};
        auto point_at = [&](double coef) {
            return std::array<double, 2>{centroid[0] + coef * (centroid[0] - v[2].x[0]),
                                         centroid[1] + coef * (centroid[1] - v[2].x[1])};
        };
        auto reflected = point_at(kReflect);
        double fr = f(reflected[0], reflected[1]);
        if (fr < v[0].f) {
            auto expanded = point_at(kExpand);
            double fe = f(expanded[0], expanded[1]);
            v[2] = fe < fr ? Vertex{expanded, fe} : Vertex{reflected, fr};
            continue;
        }
        if (fr < v[1].f) {
            v[2] = {reflected, fr};
            continue;
        }
        auto contracted = point_at(fr < v[2].f ? kContract : -kContract);
        double fc = f(contracted[0], contracted[1]);
        if (fc < std::min(fr, v[2].f)) {
            v[2] = {contracted, fc};
            continue;
        }
        for (int i = 1; i < 3; ++i) {
            for (int k = 0; k < 2; ++k)
                v[i].x[k] = v[0].x[k] + kShrink * (v[i].x[k] - v[0].x[k]);
            v[i].f = f(v[i].x[0], v[i].x[1]);
        }
    }
    std::sort(v.begin(), v.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    result.x = v[0].x;
    result.value = v[0].f;
    result.iterations = iter;
    return result;
}

Suggestion suggest(const GuideState& state, const calib::CalibSummary& summary,
                   const calib::CalibProfiles& profiles, const learn::MlpModel& model,
                   const GuideParams& params, const NmOptions& opts) {
    params.validate();
    auto objective = [&](double dd, double dl) {
        return -offset_quality(state, summary, profiles, model, dd, dl, params).y;
    };

    const std::array<std::array<double, 2>, 3> seed_simplex = {
        {{0.0, 0.0}, {0.25, 0.0}, {0.0, 0.1}}};
    const std::array<double, 2> scale = {params.d_max - params.d_min, 1.0};

    NmResult best = nelder_mead_2d(objective, seed_simplex, scale, opts);
    if (!std::isfinite(best.value)) {
        // One retry from a jittered simplex (fixed table, not random).
        std::array<std::array<double, 2>, 3> jittered = {
            {{0.07, -0.03}, {-0.19, 0.05}, {0.11, 0.08}}};
        best = nelder_mead_2d(objective, jittered, scale, opts);
    }

    Suggestion suggestion;
    double d_new = std::clamp(state.dist + best.x[0], params.d_min, params.d_max);
    double l_new = std::clamp(state.light + best.x[1], 0.0, 1.0);
    suggestion.delta_d = d_new - state.dist;
    suggestion.delta_l = l_new - state.light;
    QualityBreakdown q = offset_quality(state, summary, profiles, model, suggestion.delta_d,
                                        suggestion.delta_l, params);
    suggestion.y = q.y;
    suggestion.m_c = q.m_c;
    suggestion.m_d = q.m_d;
    return suggestion;
}

}  // namespace aquaperc::guide
