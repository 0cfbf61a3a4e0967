#include "dlsq/toy_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "dlsq/autodiff_fit.hpp"
#include "dlsq/geo_loss.hpp"
#include "dlsq/io.hpp"
#include "dlsq/linfit.hpp"
#include "dlsq/rng.hpp"

namespace dlsq {

std::string_view to_string(ToyMode mode) {
    switch (mode) {
        case ToyMode::coords:
            return "coords";
        case ToyMode::weights:
            return "weights";
        case ToyMode::both:
            return "both";
    }
    return "?";
}

ToyMode parse_toy_mode(std::string_view text) {
    if (text == "coords") return ToyMode::coords;
    if (text == "weights") return ToyMode::weights;
    if (text == "both") return ToyMode::both;
    throw InvalidConfig("unknown toy mode '" + std::string(text) + "' (expected coords, weights or both)");
}

void ToyConfig::validate() const {
    if (!std::isfinite(lr) || lr < 0.0) throw InvalidConfig("lr must be finite and non-negative");
    if (target.size() != 2) throw InvalidConfig("toy target must be a line (2 coefficients)");
    LossConfig{t, 2}.validate();
    points.validate();
}

WeightedPointSet default_toy_points(const CurveParams& target, std::uint64_t seed, std::size_t count,
                                    double amplitude) {
    Rng rng(seed);
    WeightedPointSet p;
    p.xs.resize(count);
    p.ys.resize(count);
    p.ws.assign(count, 1.0);
    for (std::size_t i = 0; i < count; ++i) {
        const double x = count > 1 ? static_cast<double>(i) / static_cast<double>(count - 1) : 0.0;
        p.xs[i] = x;
        p.ys[i] = target(x) + rng.uniform(-amplitude, amplitude);
    }
    return p;
}

ToyStepResult toy_step(const WeightedPointSet& state, const ToyConfig& cfg) {
    const LossConfig loss_cfg{cfg.t, 2};
    const auto [beta, ctx] = solve_weighted_ls(state, 2);
    const LossValue loss = geometric_loss_line(beta, cfg.target, loss_cfg);
    if (!std::isfinite(loss.value)) throw DivergedState("toy loss is not finite");

    const FitGradients grads = backward_fit(ctx, UpstreamGrad{loss.grad});

    ToyStepResult out{state, loss.value, beta};
    const bool move_coords = cfg.mode == ToyMode::coords || cfg.mode == ToyMode::both;
    const bool move_weights = cfg.mode == ToyMode::weights || cfg.mode == ToyMode::both;
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (move_coords) {
            out.next.xs[i] -= cfg.lr * grads.d_x[i];
            out.next.ys[i] -= cfg.lr * grads.d_y[i];
        }
        if (move_weights) {
            // w = u^2 with u >= 0, so dL/du = 2 u dL/dw.
            const double u = std::sqrt(state.ws[i]);
            const double u_next = u - cfg.lr * 2.0 * u * grads.d_w[i];
            out.next.ws[i] = u_next * u_next;
        }
        if (!std::isfinite(out.next.xs[i]) || !std::isfinite(out.next.ys[i]) || !std::isfinite(out.next.ws[i])) {
            throw DivergedState("toy state became non-finite at point " + std::to_string(i));
        }
    }
    return out;
}

Trajectory run_toy(const ToyConfig& cfg) {
    cfg.validate();
    Trajectory traj;
    traj.records.reserve(cfg.steps + 1);
    WeightedPointSet state = cfg.points;
    try {
        for (std::size_t k = 0; k < cfg.steps; ++k) {
            ToyStepResult r = toy_step(state, cfg);
            traj.records.push_back({k, r.loss, std::move(r.beta), std::move(state)});
            state = std::move(r.next);
        }
        const auto [beta, ctx] = solve_weighted_ls(state, 2);
        const double loss = geometric_loss_line(beta, cfg.target, LossConfig{cfg.t, 2}).value;
        if (!std::isfinite(loss)) throw DivergedState("toy loss is not finite");
        traj.records.push_back({cfg.steps, loss, beta, std::move(state)});
    } catch (const Error& e) {
        const std::string what =
            "toy run stopped after " + std::to_string(traj.records.size()) + " records: " + e.what();
        throw ToyRunFailed(std::move(traj), std::current_exception(), what);
    }
    return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
    const std::size_t m = trajectory.records.empty() ? 0 : trajectory.records.front().points.size();
    out << "step,loss,beta0,beta1";
    for (const char* prefix : {"x_", "y_", "w_"}) {
        for (std::size_t i = 0; i < m; ++i) out << ',' << prefix << i;
    }
    out << '\n';
    for (const auto& rec : trajectory.records) {
        out << rec.step << ',' << format_double(rec.loss) << ',' << format_double(rec.beta[0]) << ','
            << format_double(rec.beta[1]);
        for (const auto* seq : {&rec.points.xs, &rec.points.ys, &rec.points.ws}) {
            for (double v : *seq) out << ',' << format_double(v);
        }
        out << '\n';
    }
}

std::string render_toy_frame_svg(const TrajectoryRecord& record, const CurveParams& target,
                                 const Trajectory& trajectory) {
    // A window shared by every frame of the run keeps the animation steady.
    double x_lo = std::numeric_limits<double>::infinity();
    double x_hi = -x_lo;
    double y_lo = x_lo;
    double y_hi = -x_lo;
    double w_max = 0.0;
    for (const auto& rec : trajectory.records) {
        for (std::size_t i = 0; i < rec.points.size(); ++i) {
            x_lo = std::min(x_lo, rec.points.xs[i]);
            x_hi = std::max(x_hi, rec.points.xs[i]);
            y_lo = std::min(y_lo, rec.points.ys[i]);
            y_hi = std::max(y_hi, rec.points.ys[i]);
            w_max = std::max(w_max, rec.points.ws[i]);
        }
    }
    for (double x : {x_lo, x_hi}) {
        y_lo = std::min(y_lo, target(x));
        y_hi = std::max(y_hi, target(x));
    }
    const double pad_x = 0.1 * std::max(x_hi - x_lo, 1e-6);
    const double pad_y = 0.1 * std::max(y_hi - y_lo, 1e-6);
    x_lo -= pad_x;
    x_hi += pad_x;
    y_lo -= pad_y;
    y_hi += pad_y;

    constexpr double kSize = 400.0;
    auto px = [&](double x) { return (x - x_lo) / (x_hi - x_lo) * kSize; };
    auto py = [&](double y) { return kSize - (y - y_lo) / (y_hi - y_lo) * kSize; };
    auto line = [&](const CurveParams& c, const char* color) {
        std::ostringstream s;
        s << "<line x1=\"" << px(x_lo) << "\" y1=\"" << py(c(x_lo)) << "\" x2=\"" << px(x_hi) << "\" y2=\""
          << py(c(x_hi)) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        return s.str();
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" viewBox=\"0 0 400 400\">\n"
        << "<rect width=\"400\" height=\"400\" fill=\"white\"/>\n"
        << line(target, "green") << line(record.beta, "blue");
    for (std::size_t i = 0; i < record.points.size(); ++i) {
        const double r = w_max > 0.0 ? 2.0 + 10.0 * record.points.ws[i] / w_max : 2.0;
        svg << "<circle cx=\"" << px(record.points.xs[i]) << "\" cy=\"" << py(record.points.ys[i]) << "\" r=\"" << r
            << "\" fill=\"steelblue\" fill-opacity=\"0.7\"/>\n";
    }
    svg << "<text x=\"8\" y=\"18\" font-size=\"12\">step " << record.step << "  loss " << record.loss
        << "</text>\n</svg>\n";
    return svg.str();
}

}  // namespace dlsq
