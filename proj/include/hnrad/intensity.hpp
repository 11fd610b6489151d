#ifndef HNRAD_INTENSITY_HPP
#define HNRAD_INTENSITY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hnrad/conventional.hpp"
#include "hnrad/discretize.hpp"
#include "hnrad/texture.hpp"

namespace hnrad {

namespace detail {

// Nearest-rank percentile on a sorted copy: P(q) = x_(ceil(q*n)).
inline double percentile_nearest_rank(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw empty_roi_error("percentile of empty set");
    if (q <= 0.0) return sorted.front();
    const size_t rank = size_t(std::ceil(q * double(sorted.size())));
    return sorted[std::min(rank, sorted.size()) - 1];
}

struct Moments {
    double mean = 0, m2 = 0, m3 = 0, m4 = 0;
};

inline Moments central_moments(const std::vector<double>& values) {
    Moments m;
    const double n = double(values.size());
    for (const double v : values) m.mean += v / n;
    for (const double v : values) {
        const double d = v - m.mean;
        m.m2 += d * d / n;
        m.m3 += d * d * d / n;
        m.m4 += d * d * d * d / n;
    }
    return m;
}

} // namespace detail

/// First-order statistics over the raw ROI intensities. Zero-variance sets
/// have skewness/kurtosis/cov defined as 0 and flagged.
inline FeatureList intensity_statistics(const std::vector<double>& values,
                                        std::vector<std::string>* flags = nullptr) {
    if (values.empty()) throw empty_roi_error("intensity_statistics: empty ROI");
    const detail::Moments m = detail::central_moments(values);

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double p10 = detail::percentile_nearest_rank(sorted, 0.10);
    const double p25 = detail::percentile_nearest_rank(sorted, 0.25);
    const double median = detail::percentile_nearest_rank(sorted, 0.50);
    const double p75 = detail::percentile_nearest_rank(sorted, 0.75);
    const double p90 = detail::percentile_nearest_rank(sorted, 0.90);

    double skewness = 0.0, kurtosis = 0.0, cov = 0.0;
    if (m.m2 > 0.0) {
        skewness = m.m3 / std::pow(m.m2, 1.5);
        kurtosis = m.m4 / (m.m2 * m.m2) - 3.0;
        if (m.mean != 0.0) cov = std::sqrt(m.m2) / m.mean;
    } else if (flags) {
        flags->push_back("statistics degenerate (zero variance), skewness/kurtosis set to 0");
    }

    double mad = 0.0, energy = 0.0;
    for (const double v : values) {
        mad += std::abs(v - m.mean) / double(values.size());
        energy += v * v;
    }

    // Robust MAD over the [p10, p90] sub-sample.
    double rmad = 0.0;
    {
        std::vector<double> sub;
        for (const double v : values)
            if (v >= p10 && v <= p90) sub.push_back(v);
        if (!sub.empty()) {
            double sub_mean = 0.0;
            for (const double v : sub) sub_mean += v / double(sub.size());
            for (const double v : sub) rmad += std::abs(v - sub_mean) / double(sub.size());
        }
    }

    return {{"mean", m.mean},
            {"variance", m.m2},
            {"skewness", skewness},
            {"kurtosis", kurtosis},
            {"median", median},
            {"minimum", sorted.front()},
            {"p10", p10},
            {"p25", p25},
            {"p75", p75},
            {"p90", p90},
            {"maximum", sorted.back()},
            {"iqr", p75 - p25},
            {"range", sorted.back() - sorted.front()},
            {"mad", mad},
            {"rmad", rmad},
            {"energy", energy},
            {"rms", std::sqrt(energy / double(values.size()))},
            {"cov", cov}};
}

/// Intensity-histogram features over the discretized levels.
inline FeatureList intensity_histogram_features(const DiscretizedROI& roi,
                                                std::vector<std::string>* flags = nullptr) {
    std::vector<double> levels;
    levels.reserve(size_t(roi.roi_count));
    for (const int l : roi.levels)
        if (l > 0) levels.push_back(double(l));
    if (levels.empty()) throw empty_roi_error("intensity_histogram: empty ROI");

    const detail::Moments m = detail::central_moments(levels);
    std::vector<double> sorted = levels;
    std::sort(sorted.begin(), sorted.end());
    const double p10 = detail::percentile_nearest_rank(sorted, 0.10);
    const double p25 = detail::percentile_nearest_rank(sorted, 0.25);
    const double median = detail::percentile_nearest_rank(sorted, 0.50);
    const double p75 = detail::percentile_nearest_rank(sorted, 0.75);
    const double p90 = detail::percentile_nearest_rank(sorted, 0.90);

    double skewness = 0.0, kurtosis = 0.0;
    if (m.m2 > 0.0) {
        skewness = m.m3 / std::pow(m.m2, 1.5);
        kurtosis = m.m4 / (m.m2 * m.m2) - 3.0;
    } else if (flags) {
        flags->push_back("intensity histogram degenerate (single level)");
    }

    // Histogram over levels 1..max.
    const int ng = int(sorted.back());
    std::vector<double> hist(size_t(ng) + 1, 0.0);
    for (const double l : levels) hist[size_t(l)] += 1.0;

    double entropy = 0.0, uniformity = 0.0;
    int mode = 1;
    double mode_count = -1.0;
    double mad = 0.0;
    for (int l = 1; l <= ng; ++l) {
        const double p = hist[size_t(l)] / double(levels.size());
        entropy -= p * detail::log2_safe(p);
        uniformity += p * p;
        if (hist[size_t(l)] > mode_count) {
            mode_count = hist[size_t(l)];
            mode = l;
        }
    }
    for (const double l : levels) mad += std::abs(l - m.mean) / double(levels.size());

    const double qcod_den = p75 + p25;
    const double qcod = qcod_den != 0.0 ? (p75 - p25) / qcod_den : 0.0;

    return {{"mean", m.mean},
            {"variance", m.m2},
            {"skewness", skewness},
            {"kurtosis", kurtosis},
            {"median", median},
            {"minimum", sorted.front()},
            {"p10", p10},
            {"p90", p90},
            {"maximum", sorted.back()},
            {"mode", double(mode)},
            {"iqr", p75 - p25},
            {"range", sorted.back() - sorted.front()},
            {"mad", mad},
            {"entropy", entropy},
            {"uniformity", uniformity},
            {"qcod", qcod}};
}

/// Mean intensity in a 1 cm^3 sphere centered at the maximum-intensity ROI
/// voxel (ties broken toward the smallest storage index). Sphere samples are
/// clipped to the volume.
inline double local_intensity_peak(const VoxelGrid& image, const std::vector<int64_t>& roi) {
    if (roi.empty()) throw empty_roi_error("local_intensity_peak: empty ROI");
    int64_t best_idx = roi.front();
    float best_val = image.values[size_t(best_idx)];
    for (const int64_t idx : roi) {
        const float v = image.values[size_t(idx)];
        if (v > best_val || (v == best_val && idx < best_idx)) {
            best_val = v;
            best_idx = idx;
        }
    }
    const auto offsets = detail::sphere_offsets(image.geom.spacing, peak_sphere_radius_mm());
    return detail::sphere_mean(image, image.geom.coords(best_idx), offsets);
}

/// Largest sphere mean over all ROI voxels (the global analogue of the peak).
inline double global_intensity_peak(const VoxelGrid& image, const std::vector<int64_t>& roi) {
    return suv_peak(image, roi);
}

} // namespace hnrad

#endif
