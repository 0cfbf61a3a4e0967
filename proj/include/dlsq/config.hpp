#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dlsq/errors.hpp"
#include "dlsq/lane_model.hpp"
#include "dlsq/lane_scene.hpp"
#include "dlsq/toy_lab.hpp"

namespace dlsq {

/// Parse or validation failure, located as "file:line: message".
class ConfigError : public InvalidConfig {
public:
    using InvalidConfig::InvalidConfig;
};

struct ToySettings {
    ToyMode mode = ToyMode::weights;
    double lr = 0.5;
    std::size_t steps = 200;
    double t = 1.0;
    std::uint64_t seed = 7;
    std::array<double, 2> target{0.2, 0.6};
    std::size_t points = 8;
    double amplitude = 0.2;
    /// An SVG frame is written every this many steps, plus the final state.
    std::size_t frame_every = 10;

    ToyConfig to_toy_config() const;
};

struct SceneSettings {
    lane::SceneConfig scene;
    std::uint64_t first_seed = 1;
    std::size_t train = 200;
    std::size_t val = 50;
    /// Defaults to first_seed + train, right after the training range.
    std::optional<std::uint64_t> val_first_seed;
    std::uint64_t val_seed() const { return val_first_seed.value_or(first_seed + train); }
    /// Held-out set where every scene carries distractor blobs.
    std::uint64_t distractor_first_seed = 100000;
    std::size_t distractor_count = 20;
};

struct TrainSettings {
    lane::TrainConfig common;
    double lr_end2end = 0.01;
    double lr_xent = 0.3;

    lane::TrainConfig for_regime(lane::Regime regime) const;
};

/// Everything a command needs; sections are optional and fall back to defaults.
struct ExperimentConfig {
    ToySettings toy;
    SceneSettings scenes;
    TrainSettings train;
    lane::EvalConfig eval;
    std::filesystem::path output_dir = "out";
};

/// Plain-text format:
///
///   # comment
///   [section]            or [section.sub]
///   key = value
///
/// Sections: toy, scenes, scenes.distractor, homography, train,
/// train.end2end, train.xent, eval, output. Unknown sections or keys,
/// duplicates and out-of-range values raise ConfigError naming the line and key.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Resolves a relative output directory against $DLSQ_OUT_ROOT when it is set.
std::filesystem::path resolve_output_dir(const std::filesystem::path& dir);

}  // namespace dlsq
