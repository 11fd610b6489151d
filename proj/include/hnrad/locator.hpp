#ifndef HNRAD_LOCATOR_HPP
#define HNRAD_LOCATOR_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hnrad/connected.hpp"
#include "hnrad/volume.hpp"

namespace hnrad {

constexpr double kBoxSizeMM = 224.0;
constexpr double kBoxShiftMM = 30.0; // inferior and anterior shift from the brain pole

struct BrainRegion {
    std::vector<int64_t> voxels;  // linear indices into the PET grid
    Vec3 lowest_mm{0, 0, 0};      // world position of the most inferior voxel
};

struct LocatorResult {
    enum class Mode { automatic, override_, failed };

    BoundingBoxMM box;
    Mode mode = Mode::failed;
    std::optional<Vec3> brain_lowest_mm;
    std::vector<std::pair<std::string, bool>> checks; // name -> passed

    bool checks_passed() const {
        for (const auto& [name, ok] : checks)
            if (!ok) return false;
        return true;
    }
};

inline const char* to_string(LocatorResult::Mode m) {
    switch (m) {
        case LocatorResult::Mode::automatic: return "automatic";
        case LocatorResult::Mode::override_: return "override";
        default: return "failed";
    }
}

namespace detail {

// Voxel axis most aligned with world z, and whether increasing index moves superior.
inline std::pair<int, int> superior_axis(const GridGeometry& g) {
    int axis = 0;
    double best = -1.0;
    for (int a = 0; a < 3; ++a) {
        const double z = std::abs(g.orientation.m[2][a]);
        if (z > best) {
            best = z;
            axis = a;
        }
    }
    const int sign = g.orientation.m[2][axis] >= 0.0 ? 1 : -1;
    return {axis, sign};
}

} // namespace detail

/// Find the brain as the largest 26-connected component of PET voxels above
/// `suv_threshold`, restricted to the superior `top_fraction` of axial slices.
/// Throws empty_roi_error when nothing exceeds the threshold (detection failure).
inline BrainRegion detect_brain(const VoxelGrid& pet, double suv_threshold = 3.0,
                                double top_fraction = 0.3) {
    if (!(top_fraction > 0.0) || top_fraction > 1.0)
        throw error("top_fraction must be in (0, 1]");

    const auto [axis, sign] = detail::superior_axis(pet.geom);
    const int n_slices = pet.geom.dims[axis];
    const int n_top = std::min(n_slices, std::max(1, int(std::ceil(top_fraction * n_slices - 1e-9))));

    auto slice_of = [&, axis = axis](int64_t idx) {
        const Index3 c = pet.geom.coords(idx);
        return c[size_t(axis)];
    };
    auto in_top = [&, sign = sign](int64_t idx) {
        const int s = slice_of(idx);
        return sign > 0 ? s >= n_slices - n_top : s < n_top;
    };
    auto candidate = [&](int64_t idx) {
        return in_top(idx) && double(pet.values[size_t(idx)]) > suv_threshold;
    };

    const auto components = connected_components(pet.geom.dims, candidate, Connectivity::full26);
    if (components.empty())
        throw empty_roi_error("brain detection failed: no PET voxel above threshold in the top slices");

    size_t best = 0;
    for (size_t c = 1; c < components.size(); ++c)
        if (components[c].size() > components[best].size()) best = c;

    BrainRegion region;
    region.voxels = components[best];

    double lowest_z = std::numeric_limits<double>::infinity();
    int64_t lowest_idx = -1;
    for (const int64_t idx : region.voxels) {
        const Vec3 w = pet.geom.voxel_to_world(pet.geom.coords(idx));
        if (w[2] < lowest_z - 1e-12 || (std::abs(w[2] - lowest_z) <= 1e-12 && idx < lowest_idx)) {
            lowest_z = w[2];
            lowest_idx = idx;
        }
    }
    region.lowest_mm = pet.geom.voxel_to_world(pet.geom.coords(lowest_idx));
    return region;
}

/// 224 mm box centered 30 mm inferior and 30 mm anterior of the brain pole.
inline BoundingBoxMM place_box(const Vec3& brain_lowest_mm) {
    BoundingBoxMM box;
    box.center = {brain_lowest_mm[0], brain_lowest_mm[1] + kBoxShiftMM, brain_lowest_mm[2] - kBoxShiftMM};
    box.size = {kBoxSizeMM, kBoxSizeMM, kBoxSizeMM};
    return box;
}

struct ContainmentReport {
    bool pass = true;
    int64_t outside_gtvp = 0;
    int64_t outside_gtvn = 0;
};

/// World-space test that every GTVp/GTVn voxel center lies inside the box.
inline ContainmentReport validate_containment(const BoundingBoxMM& box, const LabelMask& mask) {
    ContainmentReport report;
    const int64_t n = mask.geom.voxel_count();
    for (int64_t idx = 0; idx < n; ++idx) {
        const uint8_t label = mask.labels[size_t(idx)];
        if (label != 1 && label != 2) continue;
        const Vec3 w = mask.geom.voxel_to_world(mask.geom.coords(idx));
        if (!box.contains(w)) {
            if (label == 1)
                ++report.outside_gtvp;
            else
                ++report.outside_gtvn;
        }
    }
    report.pass = report.outside_gtvp == 0 && report.outside_gtvn == 0;
    return report;
}

struct SanityFlags {
    bool pet_all_zero = false;
    bool ct_all_zero = false;
    bool pet_negative_values = false;
    bool pet_suv_max_below = false;   // SUVmax < 0.5
    bool ct_range_implausible = false; // max < -500 or min > 500 HU

    bool pass() const {
        return !pet_all_zero && !ct_all_zero && !pet_negative_values && !pet_suv_max_below &&
               !ct_range_implausible;
    }

    std::vector<std::pair<std::string, bool>> as_checks() const {
        return {{"pet_not_all_zero", !pet_all_zero},
                {"ct_not_all_zero", !ct_all_zero},
                {"pet_non_negative", !pet_negative_values},
                {"pet_suv_max_at_least_0.5", !pet_suv_max_below},
                {"ct_range_plausible", !ct_range_implausible}};
    }
};

/// Intensity-range sanity checks used on cases without ground-truth masks.
inline SanityFlags sanity_check(const VoxelGrid& pet, const VoxelGrid& ct) {
    SanityFlags f;
    double pet_min = std::numeric_limits<double>::infinity(), pet_max = -pet_min;
    for (const float v : pet.values) {
        pet_min = std::min(pet_min, double(v));
        pet_max = std::max(pet_max, double(v));
    }
    double ct_min = std::numeric_limits<double>::infinity(), ct_max = -ct_min;
    for (const float v : ct.values) {
        ct_min = std::min(ct_min, double(v));
        ct_max = std::max(ct_max, double(v));
    }
    f.pet_all_zero = pet_min == 0.0 && pet_max == 0.0;
    f.ct_all_zero = ct_min == 0.0 && ct_max == 0.0;
    f.pet_negative_values = pet_min < 0.0;
    f.pet_suv_max_below = pet_max < 0.5;
    f.ct_range_implausible = ct_max < -500.0 || ct_min > 500.0;
    return f;
}

/// Manual placement: a 224 mm box at the given center, no checks.
inline LocatorResult override_box(const Vec3& center_mm) {
    LocatorResult r;
    r.box.center = center_mm;
    r.box.size = {kBoxSizeMM, kBoxSizeMM, kBoxSizeMM};
    r.mode = LocatorResult::Mode::override_;
    return r;
}

/// Full automatic localization: sanity checks, brain detection, box placement,
/// optional containment check against a ground-truth mask. Detection failure
/// yields mode=failed instead of throwing so batch runs can continue.
inline LocatorResult locate(const VoxelGrid& pet, const VoxelGrid& ct, const LabelMask* truth_mask,
                            double suv_threshold = 3.0, double top_fraction = 0.3) {
    LocatorResult r;
    const SanityFlags sanity = sanity_check(pet, ct);
    r.checks = sanity.as_checks();
    if (sanity.pet_all_zero) {
        r.mode = LocatorResult::Mode::failed;
        return r;
    }
    try {
        const BrainRegion brain = detect_brain(pet, suv_threshold, top_fraction);
        r.brain_lowest_mm = brain.lowest_mm;
        r.box = place_box(brain.lowest_mm);
        r.mode = LocatorResult::Mode::automatic;
    } catch (const empty_roi_error&) {
        r.mode = LocatorResult::Mode::failed;
        r.checks.emplace_back("brain_detected", false);
        return r;
    }
    r.checks.emplace_back("brain_detected", true);
    if (truth_mask) {
        const ContainmentReport c = validate_containment(r.box, *truth_mask);
        r.checks.emplace_back("gtv_contained", c.pass);
    }
    return r;
}

} // namespace hnrad

#endif
