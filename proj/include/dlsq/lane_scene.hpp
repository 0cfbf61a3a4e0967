#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "dlsq/homography.hpp"
#include "dlsq/types.hpp"

namespace dlsq::lane {

/// Pinhole road camera: builds the image -> ortho homography. Image
/// coordinates are normalized to [0, 1] (upper-left (0, 0)); the ortho frame
/// has the vehicle at longitudinal 0, lateral 0.
struct CameraModel {
    double focal = 0.57;        // lateral spread of the markings in the image
    double near_depth = 0.5;    // depth offset of the image bottom row
    double far_row = 0.05;      // image row reached at longitudinal distance 1

    Homography ortho_to_image() const;
    Homography image_to_ortho() const { return ortho_to_image().inverse(); }
};

struct SceneConfig {
    std::size_t height = 64;
    std::size_t width = 128;
    std::size_t curves = 2;
    /// Horizon t over which the ground-truth curves must stay in view.
    double horizon = 1.0;
    double lane_width = 0.7;
    double offset_jitter = 0.05;
    double heading_range = 0.15;
    double curvature_range = 0.15;
    /// Marking thickness in pixels at the image bottom; shrinks with depth.
    double thickness_px = 3.0;
    double thickness_jitter = 0.5;
    double intensity_min = 0.8;
    bool dashed = true;
    double dash_period = 0.25;
    double dash_duty = 0.6;
    /// Standard deviation of additive Gaussian pixel noise.
    double noise = 0.05;
    /// Probability that a scene carries distractor blobs, and their count range.
    double distractor_prob = 0.5;
    std::size_t distractor_max = 2;
    double distractor_radius_min = 2.0;
    double distractor_radius_max = 4.0;
    Homography image_to_ortho = CameraModel{}.image_to_ortho();

    /// Throws InvalidConfig on out-of-range values (H, W >= 16, K >= 1, noise >= 0, ...).
    void validate() const;
};

/// Rendered road image with ground truth.
struct SyntheticScene {
    std::size_t height = 0;
    std::size_t width = 0;
    /// Row-major intensities in [0, 1].
    std::vector<double> image;
    /// One parabola per lane line, lateral = c0 + c1 * longitudinal + c2 * longitudinal^2.
    std::vector<CurveParams> gt_curves;
    Homography image_to_ortho = Homography::identity();
    std::uint64_t seed = 0;
    double noise = 0.0;
    /// Pixels lit by any lane marking, and by distractor blobs. Not serialized.
    std::vector<std::uint8_t> marking_mask;
    std::vector<std::uint8_t> distractor_mask;

    std::size_t pixels() const noexcept { return height * width; }
    /// Normalized image coordinates of every pixel, row-major, unit weights.
    WeightedPointSet pixel_grid() const;
};

/// Deterministic scene from `seed`. Curve parameters are resampled until every
/// ground-truth curve stays inside the image over [0, horizon].
SyntheticScene generate_scene(std::uint64_t seed, const SceneConfig& cfg);

/// Dense 0/1 label for curve k: the continuous curve drawn with a fixed half-thickness (pixels).
std::vector<double> render_label(const SyntheticScene& scene, std::size_t k, double half_thickness_px);

/// Pixel distance from every pixel to the projected ground-truth curve k,
/// measured along image rows.
std::vector<double> row_distance_to_curve(const SyntheticScene& scene, std::size_t k);

/// Binary scene file: "LSIM1", H, W, K (u32 LE), row-major f64 image,
/// K x 3 coefficients, 9 homography entries (all f64 LE).
void write_scene(std::ostream& out, const SyntheticScene& scene);
SyntheticScene read_scene(std::istream& in);

/// FNV-1a over the raw image bytes; used as a golden checksum.
std::uint64_t image_checksum(const SyntheticScene& scene);

}  // namespace dlsq::lane
