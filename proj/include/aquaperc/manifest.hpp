#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace aquaperc::manifest {

// Reproducibility record written next to every CLI output.
struct RunManifest {
    std::string command;
    uint64_t config_hash{0};
    uint64_t seed{0};
    std::string version;
    std::vector<std::string> outputs;
    double wall_time_s{0.0};
};

// FNV-1a over a canonical configuration dump; stable across runs.
uint64_t stable_hash(const std::string& text);

// Atomic write: temp file in the same directory, then rename.
void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace aquaperc::manifest
