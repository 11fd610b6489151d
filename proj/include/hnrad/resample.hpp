#ifndef HNRAD_RESAMPLE_HPP
#define HNRAD_RESAMPLE_HPP

#include <cmath>
#include <cstdint>

#include "hnrad/errors.hpp"
#include "hnrad/volume.hpp"

namespace hnrad {

enum class Interp { linear, nearest };

namespace detail {

// Continuous-index mapping from an output grid into an input grid:
// ci(v_out) = B * v_out + c, precomposed so the per-voxel loop is cheap.
struct IndexMap {
    Mat3 b;
    Vec3 c;

    static IndexMap between(const GridGeometry& out, const GridGeometry& in) {
        const Mat3 min_inv = in.index_to_world_matrix().inverse();
        IndexMap m;
        m.b = min_inv * out.index_to_world_matrix();
        m.c = min_inv * (out.origin - in.origin);
        return m;
    }

    Vec3 apply(double i, double j, double k) const { return b * Vec3{i, j, k} + c; }
};

// A sample is in-support when its output cell, mapped into input index space,
// overlaps the input voxel extent [-0.5, dim-0.5] dilated by half an input
// voxel; `margin` carries that slack per input axis. In-support coordinates
// are clamped to the center hull, so cells at the volume edge interpolate the
// edge values; everything farther out -> fill.
inline bool in_support(const GridGeometry& g, const Vec3& ci, const Vec3& margin) {
    constexpr double eps = 1e-9;
    for (int a = 0; a < 3; ++a)
        if (ci[a] < -0.5 - margin[a] - eps || ci[a] > double(g.dims[a]) - 0.5 + margin[a] + eps)
            return false;
    return true;
}

inline float sample_linear(const VoxelGrid& g, const Vec3& ci, const Vec3& margin, float fill) {
    if (!in_support(g.geom, ci, margin)) return fill;
    int i0[3], i1[3];
    double f[3];
    for (int a = 0; a < 3; ++a) {
        const double p = std::min(std::max(ci[a], 0.0), double(g.geom.dims[a] - 1));
        i0[a] = std::min(int(std::floor(p)), std::max(0, g.geom.dims[a] - 2));
        i1[a] = std::min(i0[a] + 1, g.geom.dims[a] - 1);
        f[a] = p - double(i0[a]);
    }
    double acc = 0.0;
    for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
                const double w = (dx ? f[0] : 1.0 - f[0]) * (dy ? f[1] : 1.0 - f[1]) * (dz ? f[2] : 1.0 - f[2]);
                if (w == 0.0) continue;
                acc += w * double(g.at(dx ? i1[0] : i0[0], dy ? i1[1] : i0[1], dz ? i1[2] : i0[2]));
            }
    return float(acc);
}

template <typename Grid, typename T>
inline T sample_nearest(const Grid& g, const Vec3& ci, const Vec3& margin, T fill) {
    if (!in_support(g.geom, ci, margin)) return fill;
    int idx[3];
    for (int a = 0; a < 3; ++a) {
        const long long r = std::llround(std::min(std::max(ci[a], 0.0), double(g.geom.dims[a] - 1)));
        idx[a] = int(r);
    }
    return g.at(idx[0], idx[1], idx[2]);
}

inline GridGeometry resampled_geometry(const GridGeometry& in, const Vec3& target_spacing) {
    for (int a = 0; a < 3; ++a)
        if (!(target_spacing[a] > 0.0)) throw geometry_error("target spacing must be positive");
    GridGeometry out = in;
    out.spacing = target_spacing;
    for (int a = 0; a < 3; ++a) {
        const double extent = double(in.dims[a]) * in.spacing[a];
        out.dims[a] = std::max(1, int(std::ceil(extent / target_spacing[a] - 1e-9)));
    }
    return out;
}

inline GridGeometry box_geometry(const BoundingBoxMM& box, const Vec3& out_spacing) {
    GridGeometry g;
    g.orientation = Mat3::identity();
    g.spacing = out_spacing;
    for (int a = 0; a < 3; ++a) {
        if (!(out_spacing[a] > 0.0)) throw geometry_error("output spacing must be positive");
        if (!(box.size[a] > 0.0)) throw geometry_error("box size must be positive");
        const double ratio = box.size[a] / out_spacing[a];
        const double rounded = std::round(ratio);
        if (std::abs(ratio - rounded) > 1e-6)
            throw geometry_error("box size is not divisible by the output spacing");
        g.dims[a] = int(rounded);
        g.origin[a] = box.center[a] - box.size[a] / 2.0 + out_spacing[a] / 2.0;
    }
    return g;
}

// Half-extent of one output cell along each input index axis, plus half an
// input voxel of edge-clamp slack.
inline Vec3 cell_margin(const IndexMap& map) {
    Vec3 m{0.5, 0.5, 0.5};
    for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 3; ++c) m[a] += 0.5 * std::abs(map.b.m[a][c]);
    return m;
}

inline VoxelGrid sample_onto(const VoxelGrid& in, const GridGeometry& out_geom, Interp method) {
    VoxelGrid out = make_grid(out_geom);
    const IndexMap map = IndexMap::between(out_geom, in.geom);
    const Vec3 margin = cell_margin(map);
    int64_t n = 0;
    for (int k = 0; k < out_geom.dims[2]; ++k)
        for (int j = 0; j < out_geom.dims[1]; ++j)
            for (int i = 0; i < out_geom.dims[0]; ++i, ++n) {
                const Vec3 ci = map.apply(i, j, k);
                out.values[size_t(n)] = method == Interp::linear
                                            ? sample_linear(in, ci, margin, 0.0f)
                                            : sample_nearest(in, ci, margin, 0.0f);
            }
    return out;
}

inline LabelMask sample_onto(const LabelMask& in, const GridGeometry& out_geom, Interp method) {
    if (method != Interp::nearest)
        throw method_error("label masks must be resampled with nearest interpolation");
    LabelMask out = make_mask(out_geom);
    const IndexMap map = IndexMap::between(out_geom, in.geom);
    const Vec3 margin = cell_margin(map);
    int64_t n = 0;
    for (int k = 0; k < out_geom.dims[2]; ++k)
        for (int j = 0; j < out_geom.dims[1]; ++j)
            for (int i = 0; i < out_geom.dims[0]; ++i, ++n)
                out.labels[size_t(n)] = sample_nearest(in, map.apply(i, j, k), margin, uint8_t(0));
    return out;
}

} // namespace detail

/// Resample onto the same origin with a new spacing. Output dims cover the
/// input physical extent (ceil). Samples are taken at output voxel centers;
/// anything outside the input support becomes 0 / background.
inline VoxelGrid resample(const VoxelGrid& grid, const Vec3& target_spacing, Interp method) {
    return detail::sample_onto(grid, detail::resampled_geometry(grid.geom, target_spacing), method);
}

inline LabelMask resample(const LabelMask& mask, const Vec3& target_spacing, Interp method) {
    return detail::sample_onto(mask, detail::resampled_geometry(mask.geom, target_spacing), method);
}

inline VoxelGrid resample(const VoxelGrid& grid, double iso_spacing, Interp method) {
    return resample(grid, Vec3{iso_spacing, iso_spacing, iso_spacing}, method);
}

inline LabelMask resample(const LabelMask& mask, double iso_spacing, Interp method) {
    return resample(mask, Vec3{iso_spacing, iso_spacing, iso_spacing}, method);
}

/// Crop onto a world-axis-aligned box at the given spacing (the 224 mm box at
/// 1 mm yields exactly 224^3 voxels). Regions outside the input are 0/background.
inline VoxelGrid crop_to_box(const VoxelGrid& grid, const BoundingBoxMM& box, const Vec3& out_spacing,
                             Interp method = Interp::linear) {
    return detail::sample_onto(grid, detail::box_geometry(box, out_spacing), method);
}

inline LabelMask crop_to_box(const LabelMask& mask, const BoundingBoxMM& box, const Vec3& out_spacing) {
    return detail::sample_onto(mask, detail::box_geometry(box, out_spacing), Interp::nearest);
}

} // namespace hnrad

#endif
