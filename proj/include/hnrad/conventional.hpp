#ifndef HNRAD_CONVENTIONAL_HPP
#define HNRAD_CONVENTIONAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hnrad/connected.hpp"
#include "hnrad/errors.hpp"
#include "hnrad/volume.hpp"

namespace hnrad {

// Radius of the 1 cm^3 SUVpeak sphere.
inline double peak_sphere_radius_mm() { return std::cbrt(3000.0 / (4.0 * kPi)); }

/// The ten conventional PET/CT features. GTVp geometry is optional because a
/// predicted mask can miss the primary tumor entirely; such patients are
/// recorded as missing, never as zero.
struct ConventionalFeatures {
    std::optional<double> tumor_volume_ml;
    std::optional<double> diameter_mm;
    int num_nodes = 0;
    double suv_max = 0;
    double suv_mean = 0;
    double suv_peak = 0;
    double mtv25_ml = 0;
    double mtv40_ml = 0;
    double tlg25 = 0;
    double tlg40 = 0;
};

inline const std::vector<std::string>& conventional_feature_names() {
    static const std::vector<std::string> names = {
        "tumor_volume_ml", "diameter_mm", "num_nodes", "suv_max", "suv_mean",
        "suv_peak",        "mtv25_ml",    "mtv40_ml",  "tlg25",   "tlg40"};
    return names;
}

/// Voxels labeled GTVp or GTVn, as linear indices.
inline std::vector<int64_t> roi_union(const LabelMask& mask) {
    std::vector<int64_t> roi;
    const int64_t n = mask.geom.voxel_count();
    for (int64_t idx = 0; idx < n; ++idx)
        if (mask.labels[size_t(idx)] == 1 || mask.labels[size_t(idx)] == 2) roi.push_back(idx);
    if (roi.empty()) throw empty_roi_error("mask has no GTVp or GTVn voxels");
    return roi;
}

inline std::pair<double, double> suv_statistics(const VoxelGrid& pet, const std::vector<int64_t>& roi) {
    if (roi.empty()) throw empty_roi_error("suv_statistics: empty ROI");
    double maxv = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const int64_t idx : roi) {
        const double v = double(pet.values[size_t(idx)]);
        maxv = std::max(maxv, v);
        sum += v;
    }
    return {maxv, sum / double(roi.size())};
}

namespace detail {

// Index offsets whose centers fall within `radius_mm` of a voxel center.
inline std::vector<Index3> sphere_offsets(const Vec3& spacing, double radius_mm) {
    std::vector<Index3> offsets;
    const int rx = int(std::floor(radius_mm / spacing[0]));
    const int ry = int(std::floor(radius_mm / spacing[1]));
    const int rz = int(std::floor(radius_mm / spacing[2]));
    const double r2 = radius_mm * radius_mm;
    for (int dz = -rz; dz <= rz; ++dz)
        for (int dy = -ry; dy <= ry; ++dy)
            for (int dx = -rx; dx <= rx; ++dx) {
                const double d2 = dx * spacing[0] * dx * spacing[0] + dy * spacing[1] * dy * spacing[1] +
                                  dz * spacing[2] * dz * spacing[2];
                if (d2 <= r2) offsets.push_back({dx, dy, dz});
            }
    return offsets;
}

inline double sphere_mean(const VoxelGrid& grid, const Index3& center, const std::vector<Index3>& offsets) {
    double sum = 0.0;
    int64_t count = 0;
    for (const auto& o : offsets) {
        const int i = center[0] + o[0], j = center[1] + o[1], k = center[2] + o[2];
        if (!grid.geom.in_bounds(i, j, k)) continue;
        sum += double(grid.at(i, j, k));
        ++count;
    }
    return count > 0 ? sum / double(count) : 0.0;
}

} // namespace detail

/// SUVpeak: the largest mean over 1 cm^3 spheres centered at each ROI voxel.
/// Sphere membership is by voxel-center distance; out-of-volume samples are
/// excluded from the mean.
inline double suv_peak(const VoxelGrid& pet, const std::vector<int64_t>& roi) {
    if (roi.empty()) throw empty_roi_error("suv_peak: empty ROI");
    const auto offsets = detail::sphere_offsets(pet.geom.spacing, peak_sphere_radius_mm());
    double best = -std::numeric_limits<double>::infinity();
    for (const int64_t idx : roi)
        best = std::max(best, detail::sphere_mean(pet, pet.geom.coords(idx), offsets));
    return best;
}

struct MtvResult {
    double volume_ml = 0.0;
    std::vector<int64_t> subroi;
};

/// Metabolic tumor volume above an absolute SUV threshold.
inline MtvResult mtv_absolute(const VoxelGrid& pet, const std::vector<int64_t>& roi, double threshold = 2.5) {
    if (roi.empty()) throw empty_roi_error("mtv: empty ROI");
    MtvResult r;
    for (const int64_t idx : roi)
        if (double(pet.values[size_t(idx)]) >= threshold) r.subroi.push_back(idx);
    r.volume_ml = double(r.subroi.size()) * pet.geom.voxel_volume_mm3() / 1000.0;
    return r;
}

/// Metabolic tumor volume above a fraction of SUVmax over the ROI.
inline MtvResult mtv_relative(const VoxelGrid& pet, const std::vector<int64_t>& roi, double fraction = 0.40) {
    const double suv_max = suv_statistics(pet, roi).first;
    return mtv_absolute(pet, roi, fraction * suv_max);
}

/// Total lesion glycolysis: MTV times the mean SUV inside that MTV region.
inline double tlg(const VoxelGrid& pet, const std::vector<int64_t>& mtv_subroi, double volume_ml) {
    if (mtv_subroi.empty()) return 0.0;
    double sum = 0.0;
    for (const int64_t idx : mtv_subroi) sum += double(pet.values[size_t(idx)]);
    return volume_ml * (sum / double(mtv_subroi.size()));
}

namespace detail {

// The farthest pair of voxel centers is attained on 6-face surface voxels.
inline std::vector<int64_t> surface_voxels(const LabelMask& mask, const std::vector<int64_t>& voxels,
                                           uint8_t label) {
    std::vector<int64_t> surface;
    for (const int64_t idx : voxels) {
        const Index3 c = mask.geom.coords(idx);
        bool boundary = false;
        for (const auto& o : neighbor_offsets(Connectivity::faces6)) {
            const int i = c[0] + o[0], j = c[1] + o[1], k = c[2] + o[2];
            if (!mask.geom.in_bounds(i, j, k) || mask.at(i, j, k) != label) {
                boundary = true;
                break;
            }
        }
        if (boundary) surface.push_back(idx);
    }
    return surface;
}

inline double max_pairwise_distance(const GridGeometry& geom, const std::vector<int64_t>& voxels) {
    std::vector<Vec3> pts;
    pts.reserve(voxels.size());
    for (const int64_t idx : voxels) pts.push_back(geom.voxel_to_world(geom.coords(idx)));
    double best2 = 0.0;
    for (size_t a = 0; a < pts.size(); ++a)
        for (size_t b = a + 1; b < pts.size(); ++b) {
            const Vec3 d = pts[a] - pts[b];
            best2 = std::max(best2, dot(d, d));
        }
    return std::sqrt(best2);
}

} // namespace detail

/// Primary-tumor volume (ml) and maximum 3D diameter (mm) over label-1 voxels.
inline std::pair<double, double> tumor_geometry(const LabelMask& mask) {
    std::vector<int64_t> gtvp;
    const int64_t n = mask.geom.voxel_count();
    for (int64_t idx = 0; idx < n; ++idx)
        if (mask.labels[size_t(idx)] == 1) gtvp.push_back(idx);
    if (gtvp.empty()) throw empty_roi_error("mask has no GTVp voxels");

    const double volume_ml = double(gtvp.size()) * mask.geom.voxel_volume_mm3() / 1000.0;
    const auto surface = detail::surface_voxels(mask, gtvp, 1);
    return {volume_ml, detail::max_pairwise_distance(mask.geom, surface)};
}

/// Number of 26-connected components among GTVn voxels.
inline int count_nodes(const LabelMask& mask, Connectivity conn = Connectivity::full26) {
    const auto components = connected_components(
        mask.geom.dims, [&](int64_t idx) { return mask.labels[size_t(idx)] == 2; }, conn);
    return int(components.size());
}

/// All ten conventional features from a PET grid and a predicted mask.
/// Throws empty_roi_error when the GTVp+GTVn union is empty; a missing GTVp
/// alone leaves the two geometry features unset.
inline ConventionalFeatures extract_conventional(const VoxelGrid& pet, const LabelMask& mask) {
    require_same_geometry(pet.geom, mask.geom, "extract_conventional");
    ConventionalFeatures f;
    const auto roi = roi_union(mask);

    try {
        const auto [volume, diameter] = tumor_geometry(mask);
        f.tumor_volume_ml = volume;
        f.diameter_mm = diameter;
    } catch (const empty_roi_error&) {
        // GTVp absent from the predicted mask; recorded as missing.
    }
    f.num_nodes = count_nodes(mask);

    const auto [suv_max, suv_mean] = suv_statistics(pet, roi);
    f.suv_max = suv_max;
    f.suv_mean = suv_mean;
    f.suv_peak = suv_peak(pet, roi);

    const MtvResult mtv25 = mtv_absolute(pet, roi, 2.5);
    const MtvResult mtv40 = mtv_relative(pet, roi, 0.40);
    f.mtv25_ml = mtv25.volume_ml;
    f.mtv40_ml = mtv40.volume_ml;
    f.tlg25 = tlg(pet, mtv25.subroi, mtv25.volume_ml);
    f.tlg40 = tlg(pet, mtv40.subroi, mtv40.volume_ml);
    return f;
}

} // namespace hnrad

#endif
