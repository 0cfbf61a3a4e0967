#include "dlsq/lane_scene.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "dlsq/errors.hpp"
#include "dlsq/rng.hpp"

namespace dlsq::lane {

Homography CameraModel::ortho_to_image() const {
    // depth z = X + near_depth; u = 0.5 + focal * Y / z; v = v_h + g / z
    const double z0 = near_depth;
    const double g = (1.0 - far_row) / (1.0 / z0 - 1.0 / (1.0 + z0));
    const double v_h = 1.0 - g / z0;
    return Homography({0.5, focal, 0.5 * z0, v_h, 0.0, v_h * z0 + g, 1.0, 0.0, z0});
}

void SceneConfig::validate() const {
    if (height < 16 || width < 16) throw InvalidConfig("scene height and width must be >= 16");
    if (curves < 1) throw InvalidConfig("scene needs at least one curve");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidConfig("horizon must be positive");
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw InvalidConfig("noise must be >= 0");
    if (!(thickness_px > 0.0) || thickness_jitter < 0.0 || thickness_jitter >= thickness_px) {
        throw InvalidConfig("thickness_px must be positive and exceed thickness_jitter");
    }
    if (!(dash_period > 0.0) || !(dash_duty > 0.0) || dash_duty > 1.0) {
        throw InvalidConfig("dash_period must be positive and dash_duty in (0, 1]");
    }
    if (distractor_prob < 0.0 || distractor_prob > 1.0) throw InvalidConfig("distractor_prob must be in [0, 1]");
    if (distractor_radius_min <= 0.0 || distractor_radius_max < distractor_radius_min) {
        throw InvalidConfig("distractor radius range is invalid");
    }
    if (intensity_min <= 0.0 || intensity_min > 1.0) throw InvalidConfig("intensity_min must be in (0, 1]");
    if (lane_width <= 0.0 || offset_jitter < 0.0 || heading_range < 0.0 || curvature_range < 0.0) {
        throw InvalidConfig("lane geometry ranges must be non-negative");
    }
}

WeightedPointSet SyntheticScene::pixel_grid() const {
    WeightedPointSet grid;
    grid.xs.resize(pixels());
    grid.ys.resize(pixels());
    grid.ws.assign(pixels(), 1.0);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            grid.xs[r * width + c] = static_cast<double>(c) / static_cast<double>(width - 1);
            grid.ys[r * width + c] = static_cast<double>(r) / static_cast<double>(height - 1);
        }
    }
    return grid;
}

namespace {

struct PixelPoint {
    double col;
    double row;
};

PixelPoint project(const Homography& ortho_to_image, double along, double lateral, std::size_t h,
                   std::size_t w) {
    const double d = ortho_to_image(2, 0) * along + ortho_to_image(2, 1) * lateral + ortho_to_image(2, 2);
    const double u = (ortho_to_image(0, 0) * along + ortho_to_image(0, 1) * lateral + ortho_to_image(0, 2)) / d;
    const double v = (ortho_to_image(1, 0) * along + ortho_to_image(1, 1) * lateral + ortho_to_image(1, 2)) / d;
    return {u * static_cast<double>(w - 1), v * static_cast<double>(h - 1)};
}

/// Where a projected curve crosses each image row.
struct RowTrace {
    std::vector<double> col;      // NaN where the curve does not cross the row
    std::vector<double> along;    // longitudinal coordinate at the crossing
    std::vector<double> px_per_lateral;
};

double far_limit(const Homography& image_to_ortho) {
    // Longitudinal coordinate of the top image row, probed across its width.
    double far = 0.0;
    for (double u : {0.0, 0.5, 1.0}) {
        const double d = image_to_ortho(2, 0) * u + image_to_ortho(2, 2);
        if (std::abs(d) < 1e-12) continue;
        far = std::max(far, (image_to_ortho(0, 0) * u + image_to_ortho(0, 2)) / d);
    }
    return far;
}

RowTrace trace_rows(const CurveParams& curve, const Homography& image_to_ortho, std::size_t h, std::size_t w) {
    const Homography to_image = image_to_ortho.inverse();
    RowTrace tr;
    tr.col.assign(h, std::numeric_limits<double>::quiet_NaN());
    tr.along.assign(h, 0.0);
    tr.px_per_lateral.assign(h, 0.0);

    const double far = far_limit(image_to_ortho) * 1.05 + 1e-3;
    const std::size_t samples = 32 * h;
    PixelPoint prev = project(to_image, 0.0, curve(0.0), h, w);
    double prev_along = 0.0;
    for (std::size_t s = 1; s <= samples; ++s) {
        const double along = far * static_cast<double>(s) / static_cast<double>(samples);
        const PixelPoint cur = project(to_image, along, curve(along), h, w);
        const double lo = std::min(prev.row, cur.row);
        const double hi = std::max(prev.row, cur.row);
        for (long r = static_cast<long>(std::ceil(lo)); r <= static_cast<long>(std::floor(hi)); ++r) {
            if (r < 0 || r >= static_cast<long>(h) || !std::isnan(tr.col[r])) continue;
            const double f = hi > lo ? (static_cast<double>(r) - prev.row) / (cur.row - prev.row) : 0.0;
            const double a = prev_along + f * (along - prev_along);
            tr.col[r] = prev.col + f * (cur.col - prev.col);
            tr.along[r] = a;
            const double lat = curve(a);
            const double eps = 1e-4;
            tr.px_per_lateral[r] = std::abs(project(to_image, a, lat + eps, h, w).col -
                                            project(to_image, a, lat - eps, h, w).col) /
                                   (2.0 * eps);
        }
        prev = cur;
        prev_along = along;
    }
    return tr;
}

bool curve_in_view(const CurveParams& curve, const Homography& image_to_ortho, double horizon, std::size_t h,
                   std::size_t w) {
    const Homography to_image = image_to_ortho.inverse();
    for (int s = 0; s <= 64; ++s) {
        const double along = horizon * s / 64.0;
        const PixelPoint p = project(to_image, along, curve(along), h, w);
        if (!(p.col >= 0.0 && p.col <= static_cast<double>(w - 1) && p.row >= 0.0 &&
              p.row <= static_cast<double>(h - 1))) {
            return false;
        }
    }
    return true;
}

}  // namespace

SyntheticScene generate_scene(std::uint64_t seed, const SceneConfig& cfg) {
    cfg.validate();
    const std::size_t h = cfg.height;
    const std::size_t w = cfg.width;
    Rng rng(seed);

    SyntheticScene scene;
    scene.height = h;
    scene.width = w;
    scene.seed = seed;
    scene.noise = cfg.noise;
    scene.image_to_ortho = cfg.image_to_ortho;
    // Every pixel must map to a finite ortho point.
    (void)transform_points(cfg.image_to_ortho, scene.pixel_grid());

    constexpr int kMaxAttempts = 1000;
    int attempt = 0;
    for (;; ++attempt) {
        if (attempt == kMaxAttempts) {
            throw InvalidConfig("could not place ground-truth curves inside the view; check lane geometry");
        }
        const double heading = rng.uniform(-cfg.heading_range, cfg.heading_range);
        const double curvature = rng.uniform(-cfg.curvature_range, cfg.curvature_range);
        scene.gt_curves.clear();
        bool ok = true;
        for (std::size_t k = 0; k < cfg.curves; ++k) {
            const double centre = (static_cast<double>(k) - 0.5 * static_cast<double>(cfg.curves - 1)) * cfg.lane_width;
            const double offset = centre + rng.uniform(-cfg.offset_jitter, cfg.offset_jitter);
            CurveParams c{{offset, heading, curvature}};
            ok = ok && curve_in_view(c, cfg.image_to_ortho, cfg.horizon, h, w);
            scene.gt_curves.push_back(std::move(c));
        }
        if (ok) break;
    }

    std::vector<double> signal(h * w, 0.0);
    scene.marking_mask.assign(h * w, 0);
    for (std::size_t k = 0; k < cfg.curves; ++k) {
        const RowTrace tr = trace_rows(scene.gt_curves[k], cfg.image_to_ortho, h, w);
        const double thickness = cfg.thickness_px + rng.uniform(-cfg.thickness_jitter, cfg.thickness_jitter);
        const double intensity = rng.uniform(cfg.intensity_min, 1.0);
        const double phase = rng.uniform(0.0, cfg.dash_period);
        // Marking width is fixed on the road; convert using the scale at the image bottom.
        double bottom_scale = 0.0;
        for (std::size_t r = h; r-- > 0;) {
            if (!std::isnan(tr.col[r])) {
                bottom_scale = tr.px_per_lateral[r];
                break;
            }
        }
        const double road_width = bottom_scale > 0.0 ? thickness / bottom_scale : 0.0;
        for (std::size_t r = 0; r < h; ++r) {
            if (std::isnan(tr.col[r])) continue;
            if (cfg.dashed) {
                const double pos = std::fmod(tr.along[r] + phase, cfg.dash_period) / cfg.dash_period;
                if (pos >= cfg.dash_duty) continue;
            }
            const double half = std::max(0.5, 0.5 * road_width * tr.px_per_lateral[r]);
            const long c_lo = std::max(0L, static_cast<long>(std::floor(tr.col[r] - half - 1.0)));
            const long c_hi = std::min(static_cast<long>(w) - 1, static_cast<long>(std::ceil(tr.col[r] + half + 1.0)));
            for (long c = c_lo; c <= c_hi; ++c) {
                const double cover = std::clamp(half + 0.5 - std::abs(static_cast<double>(c) - tr.col[r]), 0.0, 1.0);
                if (cover <= 0.0) continue;
                double& px = signal[r * w + static_cast<std::size_t>(c)];
                px = std::max(px, cover * intensity);
                scene.marking_mask[r * w + static_cast<std::size_t>(c)] = 1;
            }
        }
    }

    scene.distractor_mask.assign(h * w, 0);
    if (cfg.distractor_max > 0 && rng.uniform() < cfg.distractor_prob) {
        const std::size_t count = 1 + rng.below(cfg.distractor_max);
        for (std::size_t b = 0; b < count; ++b) {
            const double radius = rng.uniform(cfg.distractor_radius_min, cfg.distractor_radius_max);
            const double intensity = rng.uniform(cfg.intensity_min, 1.0);
            for (int tries = 0; tries < 100; ++tries) {
                const double cr = rng.uniform(0.0, static_cast<double>(h - 1));
                const double cc = rng.uniform(0.0, static_cast<double>(w - 1));
                const double clearance = radius + 3.0;
                bool clear = true;
                for (std::size_t r = 0; r < h && clear; ++r) {
                    for (std::size_t c = 0; c < w; ++c) {
                        if (!scene.marking_mask[r * w + c] && !scene.distractor_mask[r * w + c]) continue;
                        if (std::hypot(static_cast<double>(r) - cr, static_cast<double>(c) - cc) <= clearance) {
                            clear = false;
                            break;
                        }
                    }
                }
                if (!clear) continue;
                for (std::size_t r = 0; r < h; ++r) {
                    for (std::size_t c = 0; c < w; ++c) {
                        const double dist = std::hypot(static_cast<double>(r) - cr, static_cast<double>(c) - cc);
                        const double cover = std::clamp(radius + 0.5 - dist, 0.0, 1.0);
                        if (cover <= 0.0) continue;
                        signal[r * w + c] = std::max(signal[r * w + c], cover * intensity);
                        scene.distractor_mask[r * w + c] = 1;
                    }
                }
                break;
            }
        }
    }

    scene.image.resize(h * w);
    for (std::size_t i = 0; i < h * w; ++i) {
        const double noisy = cfg.noise > 0.0 ? signal[i] + cfg.noise * rng.normal() : signal[i];
        scene.image[i] = std::clamp(noisy, 0.0, 1.0);
    }
    return scene;
}

std::vector<double> render_label(const SyntheticScene& scene, std::size_t k, double half_thickness_px) {
    const std::vector<double> dist = row_distance_to_curve(scene, k);
    std::vector<double> label(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) label[i] = dist[i] <= half_thickness_px ? 1.0 : 0.0;
    return label;
}

std::vector<double> row_distance_to_curve(const SyntheticScene& scene, std::size_t k) {
    if (k >= scene.gt_curves.size()) throw InvalidConfig("curve index out of range");
    const RowTrace tr = trace_rows(scene.gt_curves[k], scene.image_to_ortho, scene.height, scene.width);
    std::vector<double> dist(scene.pixels(), std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < scene.height; ++r) {
        if (std::isnan(tr.col[r])) continue;
        for (std::size_t c = 0; c < scene.width; ++c) {
            dist[r * scene.width + c] = std::abs(static_cast<double>(c) - tr.col[r]);
        }
    }
    return dist;
}

namespace {

constexpr char kMagic[5] = {'L', 'S', 'I', 'M', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw InvalidConfig("truncated scene file");
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

double get_f64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw InvalidConfig("truncated scene file");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

void write_scene(std::ostream& out, const SyntheticScene& scene) {
    out.write(kMagic, sizeof kMagic);
    put_u32(out, static_cast<std::uint32_t>(scene.height));
    put_u32(out, static_cast<std::uint32_t>(scene.width));
    put_u32(out, static_cast<std::uint32_t>(scene.gt_curves.size()));
    for (double v : scene.image) put_f64(out, v);
    for (const auto& c : scene.gt_curves) {
        for (std::size_t j = 0; j < 3; ++j) put_f64(out, j < c.size() ? c[j] : 0.0);
    }
    for (double v : scene.image_to_ortho.data()) put_f64(out, v);
}

SyntheticScene read_scene(std::istream& in) {
    char magic[sizeof kMagic];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw InvalidConfig("not a scene file (bad magic)");
    }
    SyntheticScene scene;
    scene.height = get_u32(in);
    scene.width = get_u32(in);
    const std::uint32_t k = get_u32(in);
    if (scene.height == 0 || scene.width == 0 || scene.pixels() > (std::size_t{1} << 28)) {
        throw InvalidConfig("scene file has implausible dimensions");
    }
    scene.image.resize(scene.pixels());
    for (double& v : scene.image) v = get_f64(in);
    scene.gt_curves.resize(k);
    for (auto& c : scene.gt_curves) {
        c.coeffs.resize(3);
        for (double& v : c.coeffs) v = get_f64(in);
    }
    std::array<double, 9> h{};
    for (double& v : h) v = get_f64(in);
    scene.image_to_ortho = Homography(h);
    return scene;
}

std::uint64_t image_checksum(const SyntheticScene& scene) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (double v : scene.image) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) {
            hash ^= (bits >> (8 * i)) & 0xFF;
            hash *= 1099511628211ULL;
        }
    }
    return hash;
}

}  // namespace dlsq::lane
