#include "aquaperc/optics.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aquaperc::optics {

void BandRanges::validate() const {
    if (!(red_lo < red_hi) || !(green_lo < green_hi) || !(blue_lo < blue_hi))
        throw std::invalid_argument("BandRanges: each band must be a nonempty interval");
    // Bands must not overlap (blue < green < red in wavelength).
    if (blue_hi > green_lo || green_hi > red_lo)
        throw std::invalid_argument("BandRanges: bands must not overlap");
}

void JerlovTable::validate() const {
    if (samples.size() < 2) throw std::invalid_argument("JerlovTable: need at least two samples");
    for (size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (!(s.absorption >= 0.0) || !(s.scattering >= 0.0))
            throw std::invalid_argument("JerlovTable: coefficients must be nonnegative");
        if (i > 0 && !(s.wavelength_nm > samples[i - 1].wavelength_nm))
            throw std::invalid_argument("JerlovTable: wavelengths must be strictly increasing");
    }
}

namespace {

double interp_column(const std::vector<JerlovSample>& samples, double wl, bool absorption) {
    if (wl < samples.front().wavelength_nm || wl > samples.back().wavelength_nm) {
        std::ostringstream msg;
        msg << "wavelength " << wl << " nm outside table support ["
            << samples.front().wavelength_nm << ", " << samples.back().wavelength_nm << "]";
        throw std::out_of_range(msg.str());
    }
    size_t hi = 1;
    while (hi + 1 < samples.size() && samples[hi].wavelength_nm < wl) ++hi;
    const auto& a = samples[hi - 1];
    const auto& b = samples[hi];
    double t = (wl - a.wavelength_nm) / (b.wavelength_nm - a.wavelength_nm);
    double va = absorption ? a.absorption : a.scattering;
    double vb = absorption ? b.absorption : b.scattering;
    return va + t * (vb - va);
}

double band_mean(const JerlovTable& table, double lo, double hi, bool absorption) {
    // 1 nm grid, endpoints included.
    int steps = static_cast<int>(std::floor(hi - lo + 0.5));
    if (steps < 1) throw std::invalid_argument("band narrower than averaging grid");
    double sum = 0.0;
    int count = 0;
    for (int i = 0; i <= steps; ++i) {
        double wl = lo + static_cast<double>(i) * (hi - lo) / steps;
        sum += interp_column(table.samples, wl, absorption);
        ++count;
    }
    return sum / count;
}

}  // namespace

double JerlovTable::absorption_at(double wl) const { return interp_column(samples, wl, true); }
double JerlovTable::scattering_at(double wl) const { return interp_column(samples, wl, false); }

void WaterProps::validate() const {
    if (!absorption.all_finite() || !scattering.all_finite() || !absorption.all_nonnegative() ||
        !scattering.all_nonnegative())
        throw std::invalid_argument("WaterProps: coefficients must be finite and nonnegative");
    Rgb c = beam_attenuation();
    if (!(c.min_component() > 0.0))
        throw std::invalid_argument("WaterProps: beam attenuation must be positive per channel");
    if (!(backscatter_fraction > 0.0 && backscatter_fraction < 0.5))
        throw std::invalid_argument("WaterProps: backscatter fraction must lie in (0, 0.5)");
    if (!(particle_refraction > 1.0 && particle_refraction < 1.4))
        throw std::invalid_argument("WaterProps: particle refraction must lie in (1, 1.4)");
}

std::vector<std::string> list_water_types() {
    return {"JI", "JIA", "JIB", "JII", "JIII", "J1C", "J3C", "J5C", "J7C", "J9C"};
}

std::pair<Rgb, Rgb> wideband_from_table(const JerlovTable& table, const BandRanges& bands) {
    table.validate();
    bands.validate();
    Rgb absorption{band_mean(table, bands.red_lo, bands.red_hi, true),
                   band_mean(table, bands.green_lo, bands.green_hi, true),
                   band_mean(table, bands.blue_lo, bands.blue_hi, true)};
    Rgb scattering{band_mean(table, bands.red_lo, bands.red_hi, false),
                   band_mean(table, bands.green_lo, bands.green_hi, false),
                   band_mean(table, bands.blue_lo, bands.blue_hi, false)};
    return {absorption, scattering};
}

JerlovTable load_jerlov_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open water table: " + path);
    JerlovTable table;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        JerlovSample s{};
        if (!(row >> s.wavelength_nm >> s.absorption >> s.scattering))
            throw std::runtime_error("malformed row in " + path + ": " + line);
        table.samples.push_back(s);
    }
    table.validate();
    return table;
}

JerlovTable load_water_type(const std::string& water_type_id, const std::string& data_dir) {
    JerlovTable t = load_jerlov_table(data_dir + "/jerlov/" + water_type_id + ".txt");
    t.water_type_id = water_type_id;
    return t;
}

WaterProps water_from_type(const std::string& water_type_id, const std::string& data_dir,
                           const BandRanges& bands, double backscatter_fraction,
                           double particle_refraction) {
    JerlovTable table = load_water_type(water_type_id, data_dir);
    auto [a, b] = wideband_from_table(table, bands);
    WaterProps props;
    props.absorption = a;
    props.scattering = b;
    props.backscatter_fraction = backscatter_fraction;
    props.particle_refraction = particle_refraction;
    props.validate();
    return props;
}

std::string default_data_dir() {
    if (const char* env = std::getenv("AQUAPERC_DATA")) return env;
#ifdef AQUAPERC_DATA_DIR
    return AQUAPERC_DATA_DIR;
#else
    return "data";
#endif
}

}  // namespace aquaperc::optics
