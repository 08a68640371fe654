#pragma once

#include <string>
#include <utility>
#include <vector>

#include "aquaperc/rgb.hpp"

namespace aquaperc::optics {

// Wavelength intervals (nm) averaged into the three wideband channels.
struct BandRanges {
    double red_lo{600.0}, red_hi{700.0};
    double green_lo{500.0}, green_hi{600.0};
    double blue_lo{400.0}, blue_hi{500.0};

    void validate() const;
};

struct JerlovSample {
    double wavelength_nm;
    double absorption;  // 1/m
    double scattering;  // 1/m
};

// Spectral IOP table for one water type. Wavelengths strictly increasing.
struct JerlovTable {
    std::string water_type_id;
    std::vector<JerlovSample> samples;

    void validate() const;
    double min_wavelength() const { return samples.front().wavelength_nm; }
    double max_wavelength() const { return samples.back().wavelength_nm; }

    // Linear interpolation; throws std::out_of_range outside the support.
    double absorption_at(double wavelength_nm) const;
    double scattering_at(double wavelength_nm) const;
};

// Wideband optical description of one water body.
struct WaterProps {
    Rgb absorption;                 // 1/m
    Rgb scattering;                 // 1/m
    double backscatter_fraction{0.0183};  // B, in (0, 0.5)
    double particle_refraction{1.10};     // n, in (1, 1.4)

    Rgb beam_attenuation() const { return absorption + scattering; }
    void validate() const;
};

// The ten bundled water types, stable order, oceanic then coastal.
std::vector<std::string> list_water_types();

// Band-averaged wideband coefficients: arithmetic mean of the linearly
// interpolated table on a 1 nm grid inside each band (endpoints included).
std::pair<Rgb, Rgb> wideband_from_table(const JerlovTable& table, const BandRanges& bands);

JerlovTable load_jerlov_table(const std::string& path);
JerlovTable load_water_type(const std::string& water_type_id, const std::string& data_dir);

WaterProps water_from_type(const std::string& water_type_id, const std::string& data_dir,
                           const BandRanges& bands, double backscatter_fraction,
                           double particle_refraction);

// Default data directory: compiled-in source path, overridable with the
// AQUAPERC_DATA environment variable.
std::string default_data_dir();

}  // namespace aquaperc::optics
