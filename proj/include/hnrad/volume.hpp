#ifndef HNRAD_VOLUME_HPP
#define HNRAD_VOLUME_HPP

#include <cstdint>
#include <vector>

#include "hnrad/geometry.hpp"

namespace hnrad {

/// 3D scalar field with physical geometry. PET values are SUV, CT values HU.
struct VoxelGrid {
    GridGeometry geom;
    std::vector<float> values; // x-fastest storage, size = voxel_count

    float at(int i, int j, int k) const { return values[size_t(geom.index(i, j, k))]; }
    float& at(int i, int j, int k) { return values[size_t(geom.index(i, j, k))]; }
};

/// Integer-labeled grid: 0 background, 1 GTVp, 2 GTVn.
struct LabelMask {
    GridGeometry geom;
    std::vector<uint8_t> labels;

    uint8_t at(int i, int j, int k) const { return labels[size_t(geom.index(i, j, k))]; }
    uint8_t& at(int i, int j, int k) { return labels[size_t(geom.index(i, j, k))]; }
};

/// Axis-aligned box in world millimeters.
struct BoundingBoxMM {
    Vec3 center{0, 0, 0};
    Vec3 size{0, 0, 0};

    bool contains(const Vec3& w) const {
        for (int a = 0; a < 3; ++a)
            if (std::abs(w[a] - center[a]) > size[a] / 2.0) return false;
        return true;
    }
};

inline VoxelGrid make_grid(const GridGeometry& g, float fill = 0.0f) {
    g.validate();
    return VoxelGrid{g, std::vector<float>(size_t(g.voxel_count()), fill)};
}

inline LabelMask make_mask(const GridGeometry& g, uint8_t fill = 0) {
    g.validate();
    return LabelMask{g, std::vector<uint8_t>(size_t(g.voxel_count()), fill)};
}

} // namespace hnrad

#endif
