#include "aquaperc/render.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

#include "aquaperc/rng.hpp"

namespace aquaperc::render {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr bool kAmbientAllOrders = false;  // probe switch

struct Vec3 {
    double x{0.0}, y{0.0}, z{0.0};  // z points down (depth axis)

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double length() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const {
        double len = length();
        return {x / len, y / len, z / len};
    }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
};

// Rotates `dir` by polar angle psi (around an arbitrary orthonormal frame)
// with azimuth phi.
Vec3 rotate_about(const Vec3& dir, double psi, double phi) {
    Vec3 w = dir.normalized();
    Vec3 helper = std::abs(w.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
    Vec3 u = w.cross(helper).normalized();
    Vec3 v = w.cross(u);
    double sp = std::sin(psi), cp = std::cos(psi);
    return (u * (sp * std::cos(phi)) + v * (sp * std::sin(phi)) + w * cp).normalized();
}

struct TargetHit {
    double t{0.0};
    double u{0.0}, v{0.0};  // target-plane coordinates, m
};

class SceneGeometry {
public:
    explicit SceneGeometry(const SceneState& scene) : scene_(scene) {
        // Camera at the origin of (x: optical axis when horizontal,
        // y: lateral, z: down). Depth of a world point p is scene.depth + p.z.
        horizontal_ = scene.look == LookDir::horizontal;
        light_pos_ = {0.0, 0.0, -scene.light_spec.offset_up};
        light_axis_ = horizontal_ ? Vec3{1, 0, 0} : Vec3{0, 0, -1};
    }

    bool horizontal() const { return horizontal_; }
    const Vec3& light_pos() const { return light_pos_; }
    const Vec3& light_axis() const { return light_axis_; }

    double depth_of(const Vec3& p) const { return scene_.depth + p.z; }

    // Surface plane z = -depth (world z is relative to the camera).
    bool hits_surface(const Vec3& o, const Vec3& d, double* t) const {
        if (d.z >= -1e-12) return false;
        double tt = (-scene_.depth - o.z) / d.z;
        if (tt <= 1e-9) return false;
        *t = tt;
        return true;
    }

    bool hits_target(const Vec3& o, const Vec3& d, TargetHit* hit) const {
        if (!scene_.target.present || !horizontal_) return false;
        if (std::abs(d.x) < 1e-12) return false;
        double tt = (scene_.distance - o.x) / d.x;
        if (tt <= 1e-9) return false;
        double py = o.y + tt * d.y;
        double pz = o.z + tt * d.z;
        if (std::abs(py) > 0.5 * scene_.target.extent_w ||
            std::abs(pz) > 0.5 * scene_.target.extent_h)
            return false;
        // Only the camera-facing side reflects.
        if (d.x <= 0.0) return false;
        hit->t = tt;
        hit->u = py + scene_.target.offset_u;
        hit->v = pz;
        return true;
    }

private:
    const SceneState& scene_;
    bool horizontal_;
    Vec3 light_pos_;
    Vec3 light_axis_;
};

class PathTracer {
public:
    PathTracer(const SceneState& scene, const RenderOptions& opts)
        : scene_(scene), geom_(scene), opts_(opts) {
        attenuation_ = scene.water.beam_attenuation();
        scatter_ = scene.water.scattering;
        kd_ = scene.water.absorption + scene.water.scattering * scene.kd_b_fraction;
        mean_c_ = attenuation_.mean();
        pure_absorption_ = scatter_.max_component() < 1e-12;
        sky_radiance_ = scene.surface_irradiance / kPi;
        light_power_ = scene.light_spec.power_max * scene.light;
        light_norm_ = (scene.light_spec.spot_exponent + 1.0) / (2.0 * kPi);
        lights_on_ = light_power_.max_component() > 0.0;
    }

    // Next-flight estimator: for every path segment the surface/target
    // radiance behind it and the ambient in-scatter along it are integrated
    // analytically (both have closed forms in a homogeneous medium); only
    // the spotlight in-scatter and the continuation direction are sampled,
    // with the collision distance drawn from the truncated exponential on
    // the segment. This removes the Bernoulli noise of surface hits and the
    // dominant ambient-veil noise.
    Rgb trace(Vec3 origin, Vec3 dir, Pcg32& rng, int sample, int spp) const {
        Rgb radiance{0, 0, 0};
        Rgb throughput{1, 1, 1};
        int scatter_events = 0;

        for (int bounce = 0; bounce < opts_.max_bounces; ++bounce) {
            double t_surface = 0.0;
            TargetHit target_hit;
            bool surface = geom_.hits_surface(origin, dir, &t_surface);
            bool target = geom_.hits_target(origin, dir, &target_hit);
            double s_hit = std::numeric_limits<double>::infinity();
            enum { kNone, kSurface, kTarget } kind = kNone;
            if (surface) {
                s_hit = t_surface;
                kind = kSurface;
            }
            if (target && target_hit.t < s_hit) {
                s_hit = target_hit.t;
                kind = kTarget;
            }

            // Analytic contribution of whatever the segment ends on. Sky
            // radiance is collected only by unscattered camera rays: for
            // scattered segments that transport is already inside the
            // per-segment ambient integral.
            if (kind == kTarget) {
                Vec3 p = origin + dir * s_hit;
                radiance += throughput * beam_transmittance(s_hit) * shade_target(p, target_hit);
            } else if (kind == kSurface && scatter_events == 0) {
                radiance += throughput * beam_transmittance(s_hit) * sky_radiance_;
            }

            if (scatter_events == 0 || kAmbientAllOrders)
                radiance += throughput * segment_ambient(origin, dir, s_hit);

            if (pure_absorption_) break;

            // Collision inside the segment (truncated exponential).
            double p_collide = std::isfinite(s_hit)
                                   ? -std::expm1(-mean_c_ * s_hit)
                                   : 1.0;
            if (p_collide < 1e-12) break;
            // First-bounce dimensions are stratified across the pixel's
            // samples; later bounces use plain uniforms.
            double u1 = scatter_events == 0 ? (sample + rng.uniform()) / spp : rng.uniform();
            double t_event = -std::log(std::max(1.0 - u1 * p_collide, 1e-300)) / mean_c_;
            t_event = std::isfinite(s_hit) ? std::min(t_event, s_hit * (1.0 - 1e-12)) : t_event;
            Vec3 p = origin + dir * t_event;
            throughput *= collision_weight(t_event) * p_collide;

            radiance += throughput * spotlight_nee(p, dir);

            ++scatter_events;
            if (scatter_events >= opts_.rr_start) {
                double survive = std::clamp(throughput.max_component(), 0.05, 0.95);
                if (rng.uniform() >= survive) break;
                throughput /= survive;
            }
            double u_psi = scatter_events == 1 ? (sample + rng.uniform()) / spp : rng.uniform();
            double psi = scene_.phase_spec->sample_angle(u_psi);
            double phi = 2.0 * kPi * rng.uniform();
            dir = rotate_about(dir, psi, phi);
            origin = p;
        }
        return radiance;
    }

private:
    // Weight for a medium collision at distance t drawn from the truncated
    // exponential with rate mean_c_: exp(-(c - mean) t) * b / mean per
    // channel; the caller multiplies the collision probability in.
    Rgb collision_weight(double t) const {
        Rgb w;
        for (int i = 0; i < 3; ++i)
            w[i] = std::exp(-(attenuation_[i] - mean_c_) * t) * scatter_[i] / mean_c_;
        return w;
    }

    Rgb beam_transmittance(double s) const {
        return {std::exp(-attenuation_.r * s), std::exp(-attenuation_.g * s),
                std::exp(-attenuation_.b * s)};
    }

    Rgb ambient_field(double depth) const {
        double z = std::max(depth, 0.0);
        return {scene_.surface_irradiance.r * std::exp(-kd_.r * z),
                scene_.surface_irradiance.g * std::exp(-kd_.g * z),
                scene_.surface_irradiance.b * std::exp(-kd_.b * z)};
    }

    // Closed-form single-scatter of the transmitted sky field along one
    // segment: integral of exp(-c t) * b * E(z(t)) * H(u) / pi over
    // t in [0, length]. E(z(t)) is exponential in t, so per channel the
    // integral is (1 - exp(-r L)) / r with r = c + K_d * dir_z.
    Rgb segment_ambient(const Vec3& origin, const Vec3& dir, double length) const {
        if (pure_absorption_) return {0, 0, 0};
        double hemi = scene_.phase_spec->downwelling_inscatter(-dir.z);
        Rgb field = ambient_field(geom_.depth_of(origin));
        Rgb out;
        for (int c = 0; c < 3; ++c) {
            double rate = attenuation_[c] + kd_[c] * dir.z;
            double integral;
            if (std::isfinite(length)) {
                integral = std::abs(rate) > 1e-12 ? -std::expm1(-rate * length) / rate : length;
            } else {
                integral = rate > 1e-12 ? 1.0 / rate : 0.0;
            }
            out[c] = scatter_[c] * field[c] * hemi / kPi * integral;
        }
        return out;
    }

    // Spotlight next-event estimation at a scatter vertex.
    Rgb spotlight_nee(const Vec3& p, const Vec3& dir) const {
        if (!lights_on_) return {0, 0, 0};
        Vec3 to_light = geom_.light_pos() - p;
        double r = to_light.length();
        if (r <= 1e-6 || !light_visible(p, to_light, r)) return {0, 0, 0};
        Vec3 wl = to_light * (1.0 / r);
        double cos_axis = (wl * -1.0).dot(geom_.light_axis());
        if (cos_axis <= 0.0) return {0, 0, 0};
        double emit = light_norm_ * std::pow(cos_axis, scene_.light_spec.spot_exponent);
        double cos_psi = wl.dot(dir);  // incoming travel vs outgoing travel
        double phase = scene_.phase_spec->evaluate(std::clamp(
            std::acos(std::clamp(cos_psi, -1.0, 1.0)), phase::PhaseSpec::kMinAngle, kPi));
        return light_power_ * (emit * phase / (r * r)) * beam_transmittance(r);
    }

    bool light_visible(const Vec3& p, const Vec3& to_light, double r) const {
        if (!scene_.target.present || !geom_.horizontal()) return true;
        TargetHit hit;
        Vec3 d = to_light * (1.0 / r);
        if (!geom_.hits_target(p, d, &hit)) {
            // Also blocked when looking through from behind.
            if (std::abs(d.x) > 1e-12) {
                double tt = (scene_.distance - p.x) / d.x;
                if (tt > 1e-9 && tt < r - 1e-9) {
                    double py = p.y + tt * d.y;
                    double pz = p.z + tt * d.z;
                    if (std::abs(py) <= 0.5 * scene_.target.extent_w &&
                        std::abs(pz) <= 0.5 * scene_.target.extent_h)
                        return false;
                }
            }
            return true;
        }
        return hit.t >= r - 1e-9;
    }

    Rgb shade_target(const Vec3& p, const TargetHit& hit) const {
        Rgb rho = texture::albedo(scene_.target.texture, hit.u, hit.v);
        // Half-bath ambient irradiance, raised per channel by the
        // single-scattering albedo for the in-scattered part of the field
        // (the same first-order amplification the veil receives).
        Rgb irradiance = ambient_field(geom_.depth_of(p)) * 0.5;
        for (int c = 0; c < 3; ++c) irradiance[c] *= 1.0 + scatter_[c] / attenuation_[c];

        if (lights_on_) {
            Vec3 to_light = geom_.light_pos() - p;
            double r = to_light.length();
            Vec3 wl = to_light * (1.0 / r);
            double cos_surf = std::max(0.0, -wl.x);  // target normal is -x
            double cos_axis = (wl * -1.0).dot(geom_.light_axis());
            if (cos_surf > 0.0 && cos_axis > 0.0) {
                double emit = light_norm_ * std::pow(cos_axis, scene_.light_spec.spot_exponent);
                irradiance += light_power_ * (emit * cos_surf / (r * r)) * beam_transmittance(r);
            }
        }
        return rho * irradiance / kPi;
    }

    const SceneState& scene_;
    SceneGeometry geom_;
    RenderOptions opts_;
    Rgb attenuation_;
    Rgb scatter_;
    Rgb kd_;
    double mean_c_{0.0};
    bool pure_absorption_{false};
    Rgb sky_radiance_;
    Rgb light_power_;
    double light_norm_{0.0};
    bool lights_on_{false};
};

int resolve_threads(int requested) {
    if (const char* env = std::getenv("AQUAPERC_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

void SceneState::validate() const {
    water.validate();
    if (!phase_spec) throw std::invalid_argument("SceneState: phase function missing");
    if (!(depth >= 0.0)) throw std::invalid_argument("SceneState: depth must be >= 0");
    if (!(distance >= 0.1 && distance <= 10.0))
        throw std::invalid_argument("SceneState: distance must lie in [0.1, 10] m");
    if (!(light >= 0.0 && light <= 1.0))
        throw std::invalid_argument("SceneState: light intensity must lie in [0, 1]");
    if (camera.width <= 0 || camera.height <= 0)
        throw std::invalid_argument("SceneState: resolution must be positive");
    if (!(camera.fov_h > 0.0 && camera.fov_h < kPi))
        throw std::invalid_argument("SceneState: horizontal FOV must lie in (0, pi)");
    if (!surface_irradiance.all_finite() || !surface_irradiance.all_nonnegative())
        throw std::invalid_argument("SceneState: surface irradiance must be finite and >= 0");
    if (!(kd_b_fraction >= 0.0 && kd_b_fraction <= 1.0))
        throw std::invalid_argument("SceneState: kd_b_fraction must lie in [0, 1]");
}

ImageF render(const SceneState& scene, int spp, uint64_t seed, const RenderOptions& opts) {
    scene.validate();
    if (spp < 1) throw std::invalid_argument("render: spp must be >= 1");

    PathTracer tracer(scene, opts);
    const int width = scene.camera.width;
    const int height = scene.camera.height;
    ImageF img(width, height);

    const double tan_h = std::tan(0.5 * scene.camera.fov_h);
    const double tan_v = tan_h * height / width;
    const bool horizontal = scene.look == LookDir::horizontal;

    auto render_rows = [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < width; ++x) {
                uint64_t pixel_index = static_cast<uint64_t>(y) * width + x;
                Rgb sum{0, 0, 0};
                for (int s = 0; s < spp; ++s) {
                    Pcg32 rng(derive_seed(seed, pixel_index, static_cast<uint64_t>(s)), pixel_index);
                    double jx = rng.uniform();
                    double jy = rng.uniform();
                    double nx = ((x + jx) / width) * 2.0 - 1.0;
                    double ny = ((y + jy) / height) * 2.0 - 1.0;
                    Vec3 dir;
                    if (horizontal) {
                        // Row 0 is the top of the frame and looks upward (-z).
                        dir = Vec3{1.0, nx * tan_h, ny * tan_v}.normalized();
                    } else {
                        dir = Vec3{ny * tan_v, nx * tan_h, -1.0}.normalized();
                    }
                    sum += tracer.trace({0, 0, 0}, dir, rng, s, spp);
                }
                img.set(x, y, sum / static_cast<double>(spp));
            }
        }
    };

    int n_threads = resolve_threads(opts.threads);
    if (n_threads <= 1 || height < 2 * n_threads) {
        render_rows(0, height);
    } else {
        std::vector<std::thread> pool;
        int chunk = (height + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            int y0 = t * chunk;
            int y1 = std::min(height, y0 + chunk);
            if (y0 >= y1) break;
            pool.emplace_back(render_rows, y0, y1);
        }
        for (auto& th : pool) th.join();
    }
    return img;
}

ImageF apply_noise(const ImageF& img, const NoiseParams& params, uint64_t seed) {
    if (!(params.poisson_scale >= 0.0) || !std::isfinite(params.poisson_scale) ||
        !(params.gaussian_sigma >= 0.0) || !std::isfinite(params.gaussian_sigma))
        throw std::invalid_argument("apply_noise: parameters must be finite and >= 0");
    ImageF out(img.width, img.height);
    const double alpha = params.poisson_scale;
    const double sigma = params.gaussian_sigma;
    for (size_t p = 0; p < img.pixel_count(); ++p) {
        Pcg32 rng(derive_seed(seed, p, 0x6e6f697365ULL), p);
        for (int ch = 0; ch < 3; ++ch) {
            double x = img.data[p * 3 + ch];
            double y;
            if (alpha > 0.0) {
                y = alpha * static_cast<double>(rng.poisson(std::max(x, 0.0) / alpha));
            } else {
                y = x;
            }
            if (sigma > 0.0) y += sigma * rng.gaussian();
            if (params.clip) y = std::clamp(y, 0.0, params.saturation);
            out.data[p * 3 + ch] = static_cast<float>(y);
        }
    }
    return out;
}

std::map<std::pair<int, int>, ImageF> render_grid(const SceneState& scene_base,
                                                  const std::vector<double>& distances,
                                                  const std::vector<double>& lights, int spp,
                                                  uint64_t seed, const RenderOptions& opts) {
    if (distances.empty() || lights.empty())
        throw std::invalid_argument("render_grid: sweep lists must be nonempty");
    std::map<std::pair<int, int>, ImageF> grid;
    for (size_t i = 0; i < distances.size(); ++i) {
        for (size_t j = 0; j < lights.size(); ++j) {
            SceneState scene = scene_base;
            scene.distance = distances[i];
            scene.light = lights[j];
            grid.emplace(std::make_pair(static_cast<int>(i), static_cast<int>(j)),
                         render(scene, spp, derive_seed(seed, i, j), opts));
        }
    }
    return grid;
}

}  // namespace aquaperc::render
