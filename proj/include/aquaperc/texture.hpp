#pragma once

#include <stdexcept>
#include <string>

#include "aquaperc/rgb.hpp"

namespace aquaperc::texture {

// Bundled procedural albedo maps. "hull" is a low-feature red surface with
// sparse paint-peel patches; "seabed" is detailed high-frequency ground.
enum class TextureId { hull, seabed };

TextureId texture_from_name(const std::string& name);
std::string texture_name(TextureId id);

// Albedo at target-plane coordinates in meters. Deterministic.
Rgb albedo(TextureId id, double u, double v);

}  // namespace aquaperc::texture
