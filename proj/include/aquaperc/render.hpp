#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "aquaperc/image.hpp"
#include "aquaperc/optics.hpp"
#include "aquaperc/phase.hpp"
#include "aquaperc/texture.hpp"

namespace aquaperc::render {

enum class LookDir { horizontal, up };

struct CameraSpec {
    double fov_h{1.0471975511965976};  // 60 deg
    int width{320};
    int height{180};

    double aspect() const { return static_cast<double>(width) / height; }
};

struct TargetSpec {
    bool present{true};
    texture::TextureId texture{texture::TextureId::seabed};
    double extent_w{4.0};  // m
    double extent_h{4.0};  // m
    double offset_u{0.0};  // lateral texture anchor, m
};

struct LightSpec {
    Rgb power_max{5.0, 5.0, 5.0};  // W per channel at l = 1
    double offset_up{0.15};        // m above the camera
    double spot_exponent{8.0};     // cosine-power falloff
};

// Full configuration of one render: water, phase function, geometry,
// lighting. Immutable during rendering.
struct SceneState {
    optics::WaterProps water;
    phase::PhaseSpecPtr phase_spec;
    double depth{3.0};      // m, camera depth below the surface
    double distance{1.5};   // m, camera to target along the optical axis
    double light{0.0};      // fraction of light_spec.power_max in [0, 1]
    LightSpec light_spec;
    Rgb surface_irradiance{3.0, 3.0, 3.0};  // E0, downwelling at z = 0
    TargetSpec target;
    CameraSpec camera;
    LookDir look{LookDir::horizontal};

    // Diffuse attenuation of the ambient field: K_d = a + f * b with
    // f = kd_b_fraction. The default 1.0 is the plain a + b stand-in;
    // measured diffuse attenuation sits nearer a + 0.25 b, and bundled
    // scenarios use that.
    double kd_b_fraction{1.0};

    void validate() const;
};

struct RenderOptions {
    int max_bounces{16};
    int rr_start{3};   // Russian roulette after this many scatter events
    int threads{0};    // 0: hardware concurrency (AQUAPERC_THREADS overrides)
};

// Path-traced radiance estimate. Deterministic for fixed (scene, spp, seed)
// regardless of thread count: every pixel owns its RNG stream.
//
// Transport model:
//  - homogeneous medium, beam attenuation c = a + b per channel;
//  - ambient light is the transmitted sky field E0 * exp(-K_d z), K_d = a+b,
//    collected by direct surface-plane hits of unscattered camera rays, by
//    next-event estimation at every scatter vertex (downwelling-hemisphere
//    phase integral), and as irradiance 0.5 * E(z) on surfaces;
//  - spotlight at a fixed offset above the camera, cosine-power falloff,
//    reached by next-event estimation only;
//  - surfaces are Lambertian, lit directly (no surface interreflection).
ImageF render(const SceneState& scene, int spp, uint64_t seed, const RenderOptions& opts = {});

struct NoiseParams {
    double poisson_scale{0.0};   // alpha; 0 disables the signal-dependent term
    double gaussian_sigma{0.0};  // thermal noise
    bool clip{true};
    double saturation{1.0};
};

// Per-pixel y = alpha * Poisson(x / alpha) + N(0, sigma^2), optionally
// clipped to [0, saturation]. Deterministic given the seed.
ImageF apply_noise(const ImageF& img, const NoiseParams& params, uint64_t seed);

// Cross-product render cache keyed by (distance index, light index).
std::map<std::pair<int, int>, ImageF> render_grid(const SceneState& scene_base,
                                                  const std::vector<double>& distances,
                                                  const std::vector<double>& lights, int spp,
                                                  uint64_t seed, const RenderOptions& opts = {});

}  // namespace aquaperc::render
