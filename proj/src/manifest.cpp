#include "aquaperc/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace aquaperc::manifest {

uint64_t stable_hash(const std::string& text) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    nlohmann::json doc;
    doc["command"] = manifest.command;
    doc["config_hash"] = manifest.config_hash;
    doc["seed"] = manifest.seed;
    doc["version"] = manifest.version;
    doc["outputs"] = manifest.outputs;
    doc["wall_time_s"] = manifest.wall_time_s;

    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write manifest: " + tmp);
        out << doc.dump(2) << "\n";
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot finalize manifest: " + path);
}

}  // namespace aquaperc::manifest
