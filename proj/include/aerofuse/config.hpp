#pragma once

/// @file config.hpp
/// @brief INI run configuration. Every key is optional; unknown sections and
/// keys are rejected. `default_config_document()` lists all of them with
/// their defaults.

#include "aerofuse/evaluation.hpp"
#include "aerofuse/fusion.hpp"
#include "aerofuse/synthetic.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace aerofuse {

/// Environment variable naming the config used when --config is absent.
inline constexpr const char* kConfigEnvVar = "AEROFUSE_CONFIG";

struct SimulateConfig {
    int scenes = 4;
    /// "calibrated" starts both noise models from the calibrated presets,
    /// "noiseless" from all-zero rates. Keys in [seg_noise]/[det_noise]
    /// override either.
    std::string noise = "calibrated";
    synth::SceneParams scene = synth::calibrated_scene(1);
    synth::SyntheticBackendConfig seg = synth::calibrated_segmentation(1);
    synth::SyntheticBackendConfig det = synth::calibrated_detection(1);
    /// Also write a rendered three-channel image.pmap per scene.
    bool write_image = true;
};

struct Config {
    /// Empty: the built-in taxonomy.
    std::string taxonomy;
    std::uint64_t seed = 1;
    FusionOptions fusion;
    OverlapCriterion criterion = OverlapCriterion::OverTarget;
    double match_threshold = kDefaultMatchThreshold;
    int report_level = 3;
    /// Inputs for run/end-to-end when nothing is simulated.
    std::string manifest;
    std::string seg_backend;
    std::string det_backend;
    std::optional<SimulateConfig> simulate;

    void validate() const;
};

/// Throws ini::IniError (syntax, unknown key) or std::invalid_argument
/// (out-of-domain value).
Config parse_config(std::string_view document);
Config load_config(const std::string& path);

/// Annotated INI document with every key at its default value.
std::string default_config_document();

/// Seed of the k-th simulated scene for a run seed.
std::uint64_t scene_seed(std::uint64_t seed, int index);

/// Taxonomy named by the config (built-in when empty).
Taxonomy load_taxonomy(const Config& config);

}  // namespace aerofuse
