#pragma once

#include <map>
#include <string>
#include <vector>

#include "aquaperc/harness.hpp"
#include "aquaperc/learn.hpp"
#include "aquaperc/render.hpp"

namespace aquaperc::config {

// One key/value format for scenes, scenarios and training configs:
// `[section]` headers, `key = value` lines, `#` comments.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& section, const std::string& key,
                                 const std::vector<double>& fallback) const;

    // Canonical dump: sorted sections and keys. Stable input for hashing.
    std::string canonical() const;

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

// Scene file -> renderer state plus the noise model to apply afterwards.
struct SceneConfig {
    render::SceneState scene;
    render::NoiseParams noise;
};

SceneConfig load_scene(const std::string& path);
SceneConfig scene_from_config(const Config& cfg);

harness::ScenarioSpec load_scenario(const std::string& path);
learn::TrainConfig train_config_from(const Config& cfg);

// Default scene and scenario files, printable via --dump-defaults.
std::string default_scene_text();
std::string default_scenario_text();

}  // namespace aquaperc::config
