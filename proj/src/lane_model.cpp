#include "dlsq/lane_model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dlsq/autodiff_fit.hpp"
#include "dlsq/errors.hpp"
#include "dlsq/homography.hpp"
#include "dlsq/io.hpp"
#include "dlsq/rng.hpp"

namespace dlsq::lane {

WeightGenerator::WeightGenerator(std::size_t maps, std::vector<double> params)
    : maps_(maps), params_(std::move(params)) {
    if (params_.size() != maps_ * kParamsPerMap) {
        throw InvalidConfig("generator needs " + std::to_string(maps_ * kParamsPerMap) + " parameters, got " +
                            std::to_string(params_.size()));
    }
    for (double p : params_) {
        if (!std::isfinite(p)) throw InvalidConfig("generator parameter is not finite");
    }
}

WeightGenerator WeightGenerator::initial(std::size_t maps, std::uint64_t seed, double scale) {
    Rng rng(seed);
    WeightGenerator gen(maps);
    for (std::size_t k = 0; k < maps; ++k) {
        for (std::size_t j = 0; j < kParamsPerMap; ++j) {
            gen.params_[k * kParamsPerMap + j] = rng.uniform(-scale, scale);
        }
        gen.params_[k * kParamsPerMap] += 1.0;
    }
    return gen;
}

std::vector<double> pixel_features(const SyntheticScene& scene) {
    const long h = static_cast<long>(scene.height);
    const long w = static_cast<long>(scene.width);
    std::vector<double> f(scene.pixels() * kFeatures);
    auto at = [&](long r, long c) {
        r = std::clamp(r, 0L, h - 1);
        c = std::clamp(c, 0L, w - 1);
        return scene.image[static_cast<std::size_t>(r * w + c)];
    };
    static constexpr int kOffsets[8][2] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}};
    for (long r = 0; r < h; ++r) {
        for (long c = 0; c < w; ++c) {
            double* p = &f[static_cast<std::size_t>(r * w + c) * kFeatures];
            p[0] = at(r, c);
            for (int q = 0; q < 8; ++q) p[1 + q] = at(r + kOffsets[q][0], c + kOffsets[q][1]);
            p[9] = static_cast<double>(c) / static_cast<double>(w - 1);
            p[10] = static_cast<double>(r) / static_cast<double>(h - 1);
        }
    }
    return f;
}

std::vector<double> raw_scores(const WeightGenerator& gen, const std::vector<double>& features, std::size_t k) {
    const std::size_t m = features.size() / kFeatures;
    const double* theta = &gen.params()[k * kParamsPerMap];
    std::vector<double> s(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double* f = &features[i * kFeatures];
        double acc = theta[kFeatures];
        for (std::size_t j = 0; j < kFeatures; ++j) acc += theta[j] * f[j];
        s[i] = acc;
    }
    return s;
}

namespace {

void check_maps(const WeightGenerator& gen, const SyntheticScene& scene) {
    if (gen.maps() != scene.gt_curves.size()) {
        throw InvalidConfig("generator has " + std::to_string(gen.maps()) + " maps but scene has " +
                            std::to_string(scene.gt_curves.size()) + " curves");
    }
}

// dL/dtheta for map k given dL/ds per pixel; fixed summation order.
void accumulate(std::vector<double>& grad, std::size_t k, const std::vector<double>& features,
                const std::vector<double>& ds) {
    double* g = &grad[k * kParamsPerMap];
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds[i] == 0.0) continue;
        const double* f = &features[i * kFeatures];
        for (std::size_t j = 0; j < kFeatures; ++j) g[j] += ds[i] * f[j];
        g[kFeatures] += ds[i];
    }
}

double sigmoid(double s) { return s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s)); }

// log(1 + e^s), stable for large |s|
double softplus(double s) { return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

}  // namespace

std::vector<WeightedPointSet> forward_weights(const WeightGenerator& gen, const SyntheticScene& scene) {
    check_maps(gen, scene);
    const std::vector<double> features = pixel_features(scene);
    const WeightedPointSet grid = scene.pixel_grid();
    std::vector<WeightedPointSet> out;
    for (std::size_t k = 0; k < gen.maps(); ++k) {
        WeightedPointSet set = grid;
        const std::vector<double> s = raw_scores(gen, features, k);
        for (std::size_t i = 0; i < s.size(); ++i) set.ws[i] = s[i] * s[i];
        out.push_back(std::move(set));
    }
    return out;
}

ChainResult end_to_end_loss(const WeightGenerator& gen, const SyntheticScene& scene, const LossConfig& loss,
                            const FitOptions& fit) {
    check_maps(gen, scene);
    const std::vector<double> features = pixel_features(scene);
    WeightedPointSet ortho = transform_points(scene.image_to_ortho, scene.pixel_grid());
    ChainResult result;
    result.grad.assign(gen.params().size(), 0.0);
    for (std::size_t k = 0; k < gen.maps(); ++k) {
        const std::vector<double> s = raw_scores(gen, features, k);
        for (std::size_t i = 0; i < s.size(); ++i) {
            ortho.ws[i] = s[i] * s[i];
            if (!std::isfinite(ortho.ws[i])) {
                throw DivergedState("generator weight overflowed at pixel " + std::to_string(i));
            }
        }
        const auto [beta, ctx] = solve_weighted_ls(ortho, 3, fit);
        const LossValue lv = geometric_loss_parabola(beta, scene.gt_curves[k], loss);
        result.loss += lv.value;
        // Weights pass through the transform unchanged; pixel coordinates are
        // constants, so the coordinate gradients stop there.
        const FitGradients fg = backward_fit(ctx, UpstreamGrad{lv.grad});
        std::vector<double> ds(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) ds[i] = 2.0 * s[i] * fg.d_w[i];
        accumulate(result.grad, k, features, ds);
    }
    return result;
}

ChainResult cross_entropy_loss(const WeightGenerator& gen, const SyntheticScene& scene, double label_half_thickness) {
    check_maps(gen, scene);
    const std::vector<double> features = pixel_features(scene);
    ChainResult result;
    result.grad.assign(gen.params().size(), 0.0);
    const double scale = 1.0 / static_cast<double>(scene.pixels() * gen.maps());
    for (std::size_t k = 0; k < gen.maps(); ++k) {
        const std::vector<double> s = raw_scores(gen, features, k);
        const std::vector<double> label = render_label(scene, k, label_half_thickness);
        std::vector<double> ds(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            result.loss += (softplus(s[i]) - label[i] * s[i]) * scale;
            ds[i] = (sigmoid(s[i]) - label[i]) * scale;
        }
        accumulate(result.grad, k, features, ds);
    }
    return result;
}

const char* to_string(EvalMode mode) noexcept { return mode == EvalMode::end_to_end ? "end_to_end" : "two_step"; }

CurveParams fit_weight_map(const SyntheticScene& scene, const std::vector<double>& weights) {
    if (weights.size() != scene.pixels()) throw LengthMismatch("weight map size does not match the scene");
    WeightedPointSet pts = transform_points(scene.image_to_ortho, scene.pixel_grid());
    pts.ws = weights;
    return solve_weighted_ls(pts, 3).first;
}

CurveParams predict_curve(const WeightGenerator& gen, const SyntheticScene& scene, std::size_t k, EvalMode mode,
                          double threshold) {
    check_maps(gen, scene);
    const std::vector<double> s = raw_scores(gen, pixel_features(scene), k);
    const WeightedPointSet ortho = transform_points(scene.image_to_ortho, scene.pixel_grid());
    WeightedPointSet pts;
    if (mode == EvalMode::end_to_end) {
        pts = ortho;
        for (std::size_t i = 0; i < s.size(); ++i) {
            pts.ws[i] = s[i] * s[i];
            if (!std::isfinite(pts.ws[i])) throw DivergedState("generator weight overflowed at pixel " + std::to_string(i));
        }
    } else {
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (sigmoid(s[i]) <= threshold) continue;
            pts.xs.push_back(ortho.xs[i]);
            pts.ys.push_back(ortho.ys[i]);
            pts.ws.push_back(1.0);
        }
        if (pts.size() == 0) throw DegenerateSystem("no pixel passes the threshold");
    }
    return solve_weighted_ls(pts, 3).first;
}

EvalResult evaluate(const WeightGenerator& gen, const std::vector<SyntheticScene>& scenes, EvalMode mode,
                    const EvalConfig& cfg) {
    if (scenes.empty()) throw InvalidConfig("evaluation needs at least one scene");
    LossConfig lc;
    lc.t = cfg.t;
    lc.validate();
    EvalResult res;
    double total = 0.0;
    for (const auto& scene : scenes) {
        for (std::size_t k = 0; k < scene.gt_curves.size(); ++k) {
            double err = cfg.error_cap;
            try {
                err = std::min(cfg.error_cap, area_error(predict_curve(gen, scene, k, mode, cfg.threshold),
                                                         scene.gt_curves[k], lc));
            } catch (const DegenerateSystem&) {
                ++res.degenerate;
            }
            total += err;
            ++res.curves;
        }
    }
    res.mean_error = total / static_cast<double>(res.curves);
    return res;
}

const char* to_string(Regime regime) noexcept { return regime == Regime::end_to_end ? "end2end" : "xent"; }

Regime parse_regime(const std::string& name) {
    if (name == "end2end") return Regime::end_to_end;
    if (name == "xent") return Regime::cross_entropy;
    throw InvalidConfig("unknown regime '" + name + "' (expected end2end or xent)");
}

const char* to_string(Optimizer opt) noexcept { return opt == Optimizer::gd ? "gd" : "adam"; }

Optimizer parse_optimizer(const std::string& name) {
    if (name == "gd") return Optimizer::gd;
    if (name == "adam") return Optimizer::adam;
    throw InvalidConfig("unknown optimizer '" + name + "' (expected gd or adam)");
}

void TrainConfig::validate() const {
    if (epochs == 0) throw InvalidConfig("epochs must be >= 1");
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw InvalidConfig("lr must be finite and >= 0");
    if (batch_size == 0) throw InvalidConfig("batch_size must be >= 1");
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidConfig("t must be finite and positive");
    if (!(init_scale >= 0.0)) throw InvalidConfig("init_scale must be >= 0");
    if (!(label_half_thickness > 0.0)) throw InvalidConfig("label_half_thickness must be positive");
    if (!(error_cap > 0.0)) throw InvalidConfig("error_cap must be positive");
}

TrainReport train(Regime regime, const std::vector<SyntheticScene>& train_set,
                  const std::vector<SyntheticScene>& val_set, const TrainConfig& cfg, const WeightGenerator* init) {
    cfg.validate();
    if (train_set.empty() || val_set.empty()) throw InvalidConfig("training needs non-empty train and val sets");
    const auto started = std::chrono::steady_clock::now();
    const std::size_t maps = train_set.front().gt_curves.size();

    TrainReport report;
    report.regime = regime;
    WeightGenerator gen = init ? *init : WeightGenerator::initial(maps, cfg.seed, cfg.init_scale);
    LossConfig lc;
    lc.t = cfg.t;
    EvalConfig ec;
    ec.t = cfg.t;
    ec.error_cap = cfg.error_cap;
    const EvalMode mode = regime == Regime::end_to_end ? EvalMode::end_to_end : EvalMode::two_step;

    Rng rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
    std::vector<double> m1(gen.params().size(), 0.0);
    std::vector<double> m2(gen.params().size(), 0.0);
    std::size_t step = 0;
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        // Fisher-Yates with the portable generator.
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<double> grad(gen.params().size(), 0.0);
            std::size_t used = 0;
            for (std::size_t b = start; b < end; ++b) {
                const SyntheticScene& scene = train_set[order[b]];
                ChainResult cr;
                try {
                    cr = regime == Regime::end_to_end ? end_to_end_loss(gen, scene, lc)
                                                      : cross_entropy_loss(gen, scene, cfg.label_half_thickness);
                } catch (const DegenerateSystem&) {
                    report.skipped_degenerate += scene.gt_curves.size();
                    continue;
                }
                const bool finite = std::isfinite(cr.loss) &&
                                    std::all_of(cr.grad.begin(), cr.grad.end(), [](double g) { return std::isfinite(g); });
                if (!finite) {
                    throw DivergedState("non-finite loss or gradient in epoch " + std::to_string(epoch) + " on scene " +
                                        std::to_string(scene.seed));
                }
                loss_sum += cr.loss;
                ++loss_count;
                ++used;
                for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += cr.grad[j];
            }
            if (used == 0) continue;
            ++step;
            const double bc1 = 1.0 - std::pow(0.9, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(0.999, static_cast<double>(step));
            for (std::size_t j = 0; j < grad.size(); ++j) {
                const double g = grad[j] / static_cast<double>(used);
                if (cfg.optimizer == Optimizer::gd) {
                    gen.params()[j] -= cfg.lr * g;
                } else {
                    m1[j] = 0.9 * m1[j] + 0.1 * g;
                    m2[j] = 0.999 * m2[j] + 0.001 * g * g;
                    gen.params()[j] -= cfg.lr * (m1[j] / bc1) / (std::sqrt(m2[j] / bc2) + 1e-8);
                }
                if (!std::isfinite(gen.params()[j])) {
                    throw DivergedState("generator parameters became non-finite in epoch " + std::to_string(epoch));
                }
            }
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_count ? loss_sum / static_cast<double>(loss_count)
                                    : std::numeric_limits<double>::quiet_NaN();
        rec.val_error = evaluate(gen, val_set, mode, ec).mean_error;
        report.epochs.push_back(rec);
    }
    report.params = gen;
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

void write_report_csv(std::ostream& out, const TrainReport& report) {
    out << "epoch,train_loss,val_error\n";
    for (const auto& e : report.epochs) {
        out << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.val_error) << '\n';
    }
}

void write_params(std::ostream& out, const WeightGenerator& gen) {
    out << "maps " << gen.maps() << '\n';
    for (std::size_t k = 0; k < gen.maps(); ++k) {
        for (std::size_t j = 0; j < kParamsPerMap; ++j) {
            out << (j ? " " : "") << format_double(gen.param(k, j));
        }
        out << '\n';
    }
}

WeightGenerator read_params(std::istream& in) {
    std::string word;
    std::size_t maps = 0;
    if (!(in >> word >> maps) || word != "maps" || maps == 0) {
        throw InvalidConfig("parameter file must start with 'maps K'");
    }
    std::vector<double> params(maps * kParamsPerMap);
    for (double& p : params) {
        if (!(in >> p)) throw InvalidConfig("parameter file is truncated");
    }
    return WeightGenerator(maps, std::move(params));
}

std::vector<SyntheticScene> generate_scenes(std::uint64_t first_seed, std::size_t count, const SceneConfig& cfg) {
    std::vector<SyntheticScene> scenes;
    scenes.reserve(count);
    for (std::size_t i = 0; i < count; ++i) scenes.push_back(generate_scene(first_seed + i, cfg));
    return scenes;
}

double weight_share(const WeightGenerator& gen, const SyntheticScene& scene, const std::vector<std::uint8_t>& mask) {
    const auto sets = forward_weights(gen, scene);
    double inside = 0.0;
    double total = 0.0;
    for (const auto& set : sets) {
        for (std::size_t i = 0; i < set.size(); ++i) {
            total += set.ws[i];
            if (mask[i]) inside += set.ws[i];
        }
    }
    return total > 0.0 ? inside / total : 0.0;
}

double near_curve_share(const WeightGenerator& gen, const SyntheticScene& scene, std::size_t k, double radius_px) {
    const auto sets = forward_weights(gen, scene);
    const std::vector<double> dist = row_distance_to_curve(scene, k);
    double inside = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        total += sets[k].ws[i];
        if (dist[i] <= radius_px) inside += sets[k].ws[i];
    }
    return total > 0.0 ? inside / total : 0.0;
}

}  // namespace dlsq::lane
