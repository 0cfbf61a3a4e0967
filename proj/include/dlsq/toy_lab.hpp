#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dlsq/errors.hpp"
#include "dlsq/types.hpp"

namespace dlsq {

/// Which inputs of the fit gradient descent is allowed to move.
enum class ToyMode { coords, weights, both };

std::string_view to_string(ToyMode mode);
/// Throws InvalidConfig for anything but "coords", "weights" or "both".
ToyMode parse_toy_mode(std::string_view text);

struct ToyConfig {
    ToyMode mode = ToyMode::weights;
    WeightedPointSet points;
    CurveParams target{{0.0, 1.0}};
    double lr = 0.5;
    std::size_t steps = 200;
    double t = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Eight points equally spaced on [0, 1], y perturbed around `target` by up to
/// +-amplitude, unit weights.
WeightedPointSet default_toy_points(const CurveParams& target, std::uint64_t seed, std::size_t count = 8,
                                    double amplitude = 0.2);

struct ToyStepResult {
    WeightedPointSet next;
    double loss = 0.0;
    CurveParams beta;
};

/// Fits a line to `state`, scores it against cfg.target with the closed-form
/// line loss and takes one gradient step on the inputs selected by cfg.mode.
/// Weights are updated through w = u^2 so they never turn negative.
ToyStepResult toy_step(const WeightedPointSet& state, const ToyConfig& cfg);

struct TrajectoryRecord {
    std::size_t step = 0;
    double loss = 0.0;
    CurveParams beta;
    WeightedPointSet points;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
};

/// Raised by run_toy when a step fails; carries the records gathered so far.
class ToyRunFailed : public Error {
public:
    ToyRunFailed(Trajectory partial, std::exception_ptr cause, const std::string& what)
        : Error(what), partial_(std::move(partial)), cause_(std::move(cause)) {}

    const Trajectory& partial() const noexcept { return partial_; }
    [[noreturn]] void rethrow_cause() const { std::rethrow_exception(cause_); }

private:
    Trajectory partial_;
    std::exception_ptr cause_;
};

/// Runs cfg.steps descent steps. The trajectory holds steps + 1 records, the
/// last one being the fit at the final state.
Trajectory run_toy(const ToyConfig& cfg);

/// CSV with columns step, loss, beta0, beta1, x_0.., y_0.., w_0...
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

/// SVG of one record: circles sized by weight, fitted line and target line.
std::string render_toy_frame_svg(const TrajectoryRecord& record, const CurveParams& target,
                                 const Trajectory& trajectory);

}  // namespace dlsq
