#ifndef HNRAD_DISCRETIZE_HPP
#define HNRAD_DISCRETIZE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "hnrad/errors.hpp"
#include "hnrad/volume.hpp"

namespace hnrad {

/// Fixed-bin-number level assignment over an intensity range:
///   level(x) = min(n, floor(n * (x - min)/(max - min)) + 1)
/// A constant set maps to level 1.
inline std::vector<int> fbn_levels(const std::vector<double>& values, int n_bins) {
    if (n_bins < 2) throw error("fbn_levels: need at least 2 bins");
    if (values.empty()) throw empty_roi_error("fbn_levels: empty ROI");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<int> levels(values.size(), 1);
    if (hi <= lo) return levels;
    const double scale = double(n_bins) / (hi - lo);
    for (size_t i = 0; i < values.size(); ++i)
        levels[i] = std::min(n_bins, int(std::floor((values[i] - lo) * scale)) + 1);
    return levels;
}

/// ROI intensities discretized onto a tight bounding-box grid.
/// `levels` is 0 outside the ROI and in 1..n_bins inside.
struct DiscretizedROI {
    Index3 dims{0, 0, 0};
    Vec3 spacing{1, 1, 1};
    std::vector<int> levels;
    int n_bins = 64;
    int64_t roi_count = 0;

    int64_t index(int i, int j, int k) const {
        return int64_t(i) + int64_t(dims[0]) * (int64_t(j) + int64_t(dims[1]) * int64_t(k));
    }

    int at(int i, int j, int k) const { return levels[size_t(index(i, j, k))]; }

    bool in_bounds(int i, int j, int k) const {
        return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
    }

    int max_level() const {
        int m = 0;
        for (const int l : levels) m = std::max(m, l);
        return m;
    }

    int64_t voxel_count() const { return int64_t(dims[0]) * dims[1] * dims[2]; }
};

/// Discretize the GTVp+GTVn union of `mask` over `image` with FBN binning.
/// Image and mask must share geometry (normally the 2mm resampled pair).
inline DiscretizedROI discretize_roi(const VoxelGrid& image, const LabelMask& mask, int n_bins = 64) {
    require_same_geometry(image.geom, mask.geom, "discretize_roi");

    Index3 lo{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(),
              std::numeric_limits<int>::max()};
    Index3 hi{-1, -1, -1};
    const Index3 d = mask.geom.dims;
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i) {
                const uint8_t l = mask.at(i, j, k);
                if (l != 1 && l != 2) continue;
                lo = {std::min(lo[0], i), std::min(lo[1], j), std::min(lo[2], k)};
                hi = {std::max(hi[0], i), std::max(hi[1], j), std::max(hi[2], k)};
            }
    if (hi[0] < 0) throw empty_roi_error("discretize_roi: mask has no foreground");

    DiscretizedROI roi;
    roi.dims = {hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1};
    roi.spacing = mask.geom.spacing;
    roi.n_bins = n_bins;
    roi.levels.assign(size_t(roi.voxel_count()), 0);

    std::vector<double> roi_values;
    std::vector<int64_t> roi_box_indices;
    for (int k = lo[2]; k <= hi[2]; ++k)
        for (int j = lo[1]; j <= hi[1]; ++j)
            for (int i = lo[0]; i <= hi[0]; ++i) {
                const uint8_t l = mask.at(i, j, k);
                if (l != 1 && l != 2) continue;
                roi_values.push_back(double(image.at(i, j, k)));
                roi_box_indices.push_back(roi.index(i - lo[0], j - lo[1], k - lo[2]));
            }

    const std::vector<int> levels = fbn_levels(roi_values, n_bins);
    for (size_t n = 0; n < levels.size(); ++n) roi.levels[size_t(roi_box_indices[n])] = levels[n];
    roi.roi_count = int64_t(roi_values.size());
    return roi;
}

} // namespace hnrad

#endif
