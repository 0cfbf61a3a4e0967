#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dlsq/geo_loss.hpp"
#include "dlsq/lane_scene.hpp"
#include "dlsq/linfit.hpp"

namespace dlsq::lane {

/// Per-pixel features: center intensity, the 8 neighbors (NW, N, NE, W, E,
/// SW, S, SE, edges clamped), then normalized column and row.
inline constexpr std::size_t kFeatures = 11;
inline constexpr std::size_t kParamsPerMap = kFeatures + 1;

/// Linear per-pixel scorer, one row of 12 parameters per output map. The
/// raw score is s = theta . f + bias and the weight is s^2.
class WeightGenerator {
public:
    WeightGenerator() = default;
    explicit WeightGenerator(std::size_t maps) : maps_(maps), params_(maps * kParamsPerMap, 0.0) {}
    /// Throws InvalidConfig if params.size() != maps * 12 or a value is not finite.
    WeightGenerator(std::size_t maps, std::vector<double> params);

    /// Center weight 1, everything else uniform in [-scale, scale].
    static WeightGenerator initial(std::size_t maps, std::uint64_t seed, double scale = 0.01);

    std::size_t maps() const noexcept { return maps_; }
    const std::vector<double>& params() const noexcept { return params_; }
    std::vector<double>& params() noexcept { return params_; }
    double param(std::size_t k, std::size_t j) const { return params_[k * kParamsPerMap + j]; }

private:
    std::size_t maps_ = 0;
    std::vector<double> params_;
};

/// Features of every pixel, row-major, kFeatures values per pixel.
std::vector<double> pixel_features(const SyntheticScene& scene);

/// Raw scores s of map k for precomputed features.
std::vector<double> raw_scores(const WeightGenerator& gen, const std::vector<double>& features, std::size_t k);

/// One WeightedPointSet per map over the normalized pixel grid, weights s^2.
std::vector<WeightedPointSet> forward_weights(const WeightGenerator& gen, const SyntheticScene& scene);

struct ChainResult {
    /// Sum of the geometric losses over all curves of the scene.
    double loss = 0.0;
    std::vector<double> grad;
};

/// Full pipeline on one scene: weights -> transform -> weighted fit (n = 3)
/// -> parabola geometric loss, with the gradient for every generator
/// parameter. Throws DegenerateSystem if any curve's fit is singular.
ChainResult end_to_end_loss(const WeightGenerator& gen, const SyntheticScene& scene, const LossConfig& loss,
                            const FitOptions& fit = {});

/// Per-pixel binary cross-entropy of sigmoid(s) against the rendered labels,
/// averaged over pixels and maps, with its gradient.
ChainResult cross_entropy_loss(const WeightGenerator& gen, const SyntheticScene& scene, double label_half_thickness);

enum class EvalMode { end_to_end, two_step };
const char* to_string(EvalMode mode) noexcept;

struct EvalConfig {
    double t = 1.0;
    /// Error charged to a curve whose fit is degenerate.
    double error_cap = 1.0;
    /// two_step keeps pixels with sigmoid(s) above this and fits them with unit weights.
    double threshold = 0.5;
};

struct EvalResult {
    double mean_error = 0.0;
    std::size_t curves = 0;
    std::size_t degenerate = 0;
};

/// Mean area error over all curves and scenes. Throws InvalidConfig on an empty set.
EvalResult evaluate(const WeightGenerator& gen, const std::vector<SyntheticScene>& scenes, EvalMode mode,
                    const EvalConfig& cfg = {});

/// Weighted parabola fit (n = 3) in the ortho frame for an arbitrary per-pixel weight map.
CurveParams fit_weight_map(const SyntheticScene& scene, const std::vector<double>& weights);

/// Fitted curve for map k in the given mode.
CurveParams predict_curve(const WeightGenerator& gen, const SyntheticScene& scene, std::size_t k, EvalMode mode,
                          double threshold = 0.5);

enum class Regime { end_to_end, cross_entropy };
const char* to_string(Regime regime) noexcept;
/// Accepts "end2end" and "xent".
Regime parse_regime(const std::string& name);

enum class Optimizer { gd, adam };
const char* to_string(Optimizer opt) noexcept;
/// Accepts "gd" and "adam".
Optimizer parse_optimizer(const std::string& name);

struct TrainConfig {
    std::size_t epochs = 40;
    /// Plain gradient descent, or Adam (beta1 0.9, beta2 0.999, eps 1e-8).
    Optimizer optimizer = Optimizer::adam;
    double lr = 0.01;
    std::size_t batch_size = 10;
    double t = 1.0;
    std::uint64_t seed = 1;
    double init_scale = 0.01;
    /// Half-thickness in pixels of the cross-entropy labels.
    double label_half_thickness = 1.5;
    double error_cap = 1.0;

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_error = 0.0;
};

struct TrainReport {
    Regime regime = Regime::end_to_end;
    std::vector<EpochRecord> epochs;
    WeightGenerator params;
    /// Curves skipped during training because their fit was degenerate.
    std::size_t skipped_degenerate = 0;
    /// Not part of the CSV, so reports of identical runs compare equal byte-for-byte.
    double wall_clock_seconds = 0.0;
};

/// Plain gradient descent over shuffled mini-batches. Validation error is
/// measured after every epoch in the regime's evaluation mode. Throws
/// InvalidConfig on an empty split and DivergedState on non-finite state.
TrainReport train(Regime regime, const std::vector<SyntheticScene>& train_set,
                  const std::vector<SyntheticScene>& val_set, const TrainConfig& cfg,
                  const WeightGenerator* init = nullptr);

inline TrainReport train_end_to_end(const std::vector<SyntheticScene>& train_set,
                                    const std::vector<SyntheticScene>& val_set, const TrainConfig& cfg) {
    return train(Regime::end_to_end, train_set, val_set, cfg);
}
inline TrainReport train_cross_entropy(const std::vector<SyntheticScene>& train_set,
                                       const std::vector<SyntheticScene>& val_set, const TrainConfig& cfg) {
    return train(Regime::cross_entropy, train_set, val_set, cfg);
}

/// epoch,train_loss,val_error
void write_report_csv(std::ostream& out, const TrainReport& report);

/// Plain text: "maps K" then K lines of 12 numbers.
void write_params(std::ostream& out, const WeightGenerator& gen);
WeightGenerator read_params(std::istream& in);

/// Scenes for seeds [first_seed, first_seed + count).
std::vector<SyntheticScene> generate_scenes(std::uint64_t first_seed, std::size_t count, const SceneConfig& cfg);

/// Share of total weight mass (summed over maps) on pixels where mask is set.
double weight_share(const WeightGenerator& gen, const SyntheticScene& scene, const std::vector<std::uint8_t>& mask);

/// Share of map k's weight mass within `radius_px` (along rows) of gt curve k.
double near_curve_share(const WeightGenerator& gen, const SyntheticScene& scene, std::size_t k, double radius_px);

}  // namespace dlsq::lane
