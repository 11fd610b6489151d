#ifndef HNRAD_TEXTURE_HPP
#define HNRAD_TEXTURE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hnrad/connected.hpp"
#include "hnrad/discretize.hpp"
#include "hnrad/errors.hpp"

namespace hnrad {

using FeatureList = std::vector<std::pair<std::string, double>>;

// The 13 unique 3D direction offsets at Chebyshev distance 1 (up to sign).
inline const std::array<Index3, 13>& texture_directions() {
    static const std::array<Index3, 13> dirs = {{{1, 0, 0},
                                                 {0, 1, 0},
                                                 {0, 0, 1},
                                                 {1, 1, 0},
                                                 {1, -1, 0},
                                                 {1, 0, 1},
                                                 {1, 0, -1},
                                                 {0, 1, 1},
                                                 {0, 1, -1},
                                                 {1, 1, 1},
                                                 {1, 1, -1},
                                                 {1, -1, 1},
                                                 {1, -1, -1}}};
    return dirs;
}

namespace detail {

inline double log2_safe(double p) { return p > 0.0 ? std::log2(p) : 0.0; }

// Zones: maximal 26-connected sets of equal level inside the ROI.
inline std::vector<std::vector<int64_t>> level_zones(const DiscretizedROI& roi,
                                                     Connectivity conn = Connectivity::full26) {
    std::vector<std::vector<int64_t>> zones;
    std::vector<uint8_t> visited(roi.levels.size(), 0);
    const auto& offsets = neighbor_offsets(conn);
    std::vector<int64_t> stack;
    const int64_t n = roi.voxel_count();
    for (int64_t seed = 0; seed < n; ++seed) {
        if (visited[size_t(seed)] || roi.levels[size_t(seed)] == 0) continue;
        const int level = roi.levels[size_t(seed)];
        zones.emplace_back();
        stack.clear();
        stack.push_back(seed);
        visited[size_t(seed)] = 1;
        while (!stack.empty()) {
            const int64_t cur = stack.back();
            stack.pop_back();
            zones.back().push_back(cur);
            const int ci = int(cur % roi.dims[0]);
            const int cj = int((cur / roi.dims[0]) % roi.dims[1]);
            const int ck = int(cur / (int64_t(roi.dims[0]) * roi.dims[1]));
            for (const auto& o : offsets) {
                const int ni = ci + o[0], nj = cj + o[1], nk = ck + o[2];
                if (!roi.in_bounds(ni, nj, nk)) continue;
                const int64_t nid = roi.index(ni, nj, nk);
                if (visited[size_t(nid)] || roi.levels[size_t(nid)] != level) continue;
                visited[size_t(nid)] = 1;
                stack.push_back(nid);
            }
        }
    }
    return zones;
}

// Shared reduction for the zone matrices s(i, w) (w = zone size or distance).
// All sixteen features follow the same i^2 / w^2 weighting pattern.
struct ZoneMatrixFeatures {
    double small_emph = 0, large_emph = 0;
    double low_gl = 0, high_gl = 0;
    double small_low = 0, small_high = 0, large_low = 0, large_high = 0;
    double glnu = 0, glnu_norm = 0, wnu = 0, wnu_norm = 0;
    double percentage = 0, gl_var = 0, w_var = 0, entropy = 0;
};

inline ZoneMatrixFeatures zone_matrix_features(const std::map<std::pair<int, int>, double>& counts,
                                               int64_t roi_voxels) {
    ZoneMatrixFeatures f;
    double nz = 0;
    std::map<int, double> by_level, by_w;
    for (const auto& [key, c] : counts) {
        nz += c;
        by_level[key.first] += c;
        by_w[key.second] += c;
    }
    if (nz <= 0) return f;

    double mu_i = 0, mu_w = 0;
    for (const auto& [key, c] : counts) {
        const double i = key.first, w = key.second;
        f.small_emph += c / (w * w);
        f.large_emph += c * w * w;
        f.low_gl += c / (i * i);
        f.high_gl += c * i * i;
        f.small_low += c / (i * i * w * w);
        f.small_high += c * i * i / (w * w);
        f.large_low += c * w * w / (i * i);
        f.large_high += c * i * i * w * w;
        mu_i += c * i / nz;
        mu_w += c * w / nz;
        const double p = c / nz;
        f.entropy -= p * log2_safe(p);
    }
    for (const auto& [i, c] : by_level) f.glnu += c * c;
    for (const auto& [w, c] : by_w) f.wnu += c * c;
    for (const auto& [key, c] : counts) {
        f.gl_var += (key.first - mu_i) * (key.first - mu_i) * c / nz;
        f.w_var += (key.second - mu_w) * (key.second - mu_w) * c / nz;
    }

    f.small_emph /= nz;
    f.large_emph /= nz;
    f.low_gl /= nz;
    f.high_gl /= nz;
    f.small_low /= nz;
    f.small_high /= nz;
    f.large_low /= nz;
    f.large_high /= nz;
    f.glnu_norm = f.glnu / (nz * nz);
    f.glnu /= nz;
    f.wnu_norm = f.wnu / (nz * nz);
    f.wnu /= nz;
    f.percentage = nz / double(roi_voxels);
    return f;
}

} // namespace detail

/// GLCM features averaged over the 13 directions (distance 1, symmetric
/// matrices). A direction without co-occurring pairs is skipped; a constant
/// ROI has zero marginal variance and correlation is defined as 1 (flagged).
inline FeatureList glcm_features(const DiscretizedROI& roi, std::vector<std::string>* flags = nullptr) {
    const int ng = roi.max_level();
    if (ng == 0) throw empty_roi_error("glcm: empty ROI");

    const std::vector<std::string> feature_names = {"joint maximum",
                                              "joint average",
                                              "joint variance",
                                              "joint entropy",
                                              "difference average",
                                              "difference variance",
                                              "difference entropy",
                                              "sum average",
                                              "sum variance",
                                              "sum entropy",
                                              "energy",
                                              "contrast",
                                              "dissimilarity",
                                              "inverse difference",
                                              "inverse difference normalized",
                                              "inverse difference moment",
                                              "inverse difference moment normalized",
                                              "inverse variance",
                                              "correlation1",
                                              "autocorrelation",
                                              "cluster tendency",
                                              "cluster shade",
                                              "cluster prominence"};

    std::vector<double> sums(feature_names.size(), 0.0);
    int used_directions = 0;
    bool degenerate_correlation = false;

    std::vector<double> p(size_t(ng) * size_t(ng));
    for (const auto& dir : texture_directions()) {
        std::fill(p.begin(), p.end(), 0.0);
        double total = 0.0;
        for (int k = 0; k < roi.dims[2]; ++k)
            for (int j = 0; j < roi.dims[1]; ++j)
                for (int i = 0; i < roi.dims[0]; ++i) {
                    const int a = roi.at(i, j, k);
                    if (a == 0) continue;
                    const int ni = i + dir[0], nj = j + dir[1], nk = k + dir[2];
                    if (!roi.in_bounds(ni, nj, nk)) continue;
                    const int b = roi.at(ni, nj, nk);
                    if (b == 0) continue;
                    p[size_t(a - 1) * size_t(ng) + size_t(b - 1)] += 1.0;
                    p[size_t(b - 1) * size_t(ng) + size_t(a - 1)] += 1.0;
                    total += 2.0;
                }
        if (total == 0.0) continue;
        ++used_directions;
        for (auto& v : p) v /= total;

        std::vector<double> px(size_t(ng), 0.0);
        for (int a = 0; a < ng; ++a)
            for (int b = 0; b < ng; ++b) px[size_t(a)] += p[size_t(a) * size_t(ng) + size_t(b)];

        double mu = 0.0;
        for (int a = 0; a < ng; ++a) mu += (a + 1) * px[size_t(a)];
        double sigma2 = 0.0;
        for (int a = 0; a < ng; ++a) sigma2 += (a + 1 - mu) * (a + 1 - mu) * px[size_t(a)];

        std::vector<double> p_sum(size_t(2 * ng + 1), 0.0), p_diff(size_t(ng), 0.0);
        double joint_max = 0, joint_var = 0, joint_ent = 0, energy = 0, contrast = 0, dissim = 0;
        double inv_diff = 0, inv_diff_n = 0, idm = 0, idm_n = 0, inv_var = 0, autocorr = 0;
        double clus_t = 0, clus_s = 0, clus_p = 0, ij_sum = 0;
        for (int a = 0; a < ng; ++a)
            for (int b = 0; b < ng; ++b) {
                const double pij = p[size_t(a) * size_t(ng) + size_t(b)];
                if (pij == 0.0) continue;
                const double i = a + 1, jj = b + 1;
                joint_max = std::max(joint_max, pij);
                joint_var += (i - mu) * (i - mu) * pij;
                joint_ent -= pij * detail::log2_safe(pij);
                energy += pij * pij;
                const double d = std::abs(i - jj);
                contrast += d * d * pij;
                dissim += d * pij;
                inv_diff += pij / (1.0 + d);
                inv_diff_n += pij / (1.0 + d / ng);
                idm += pij / (1.0 + d * d);
                idm_n += pij / (1.0 + d * d / (double(ng) * ng));
                if (a != b) inv_var += pij / (d * d);
                autocorr += i * jj * pij;
                const double s = i + jj - 2.0 * mu;
                clus_t += s * s * pij;
                clus_s += s * s * s * pij;
                clus_p += s * s * s * s * pij;
                ij_sum += i * jj * pij;
                p_sum[size_t(a + b)] += pij;        // s = i + j in 2..2ng  (index i+j-2)
                p_diff[size_t(std::abs(a - b))] += pij;
            }

        double diff_avg = 0, diff_var = 0, diff_ent = 0;
        for (int d = 0; d < ng; ++d) diff_avg += d * p_diff[size_t(d)];
        for (int d = 0; d < ng; ++d) {
            diff_var += (d - diff_avg) * (d - diff_avg) * p_diff[size_t(d)];
            diff_ent -= p_diff[size_t(d)] * detail::log2_safe(p_diff[size_t(d)]);
        }
        double sum_avg = 0, sum_var = 0, sum_ent = 0;
        for (int s = 0; s <= 2 * (ng - 1); ++s) sum_avg += (s + 2) * p_sum[size_t(s)];
        for (int s = 0; s <= 2 * (ng - 1); ++s) {
            sum_var += (s + 2 - sum_avg) * (s + 2 - sum_avg) * p_sum[size_t(s)];
            sum_ent -= p_sum[size_t(s)] * detail::log2_safe(p_sum[size_t(s)]);
        }

        double correlation;
        if (sigma2 > 1e-12) {
            correlation = (ij_sum - mu * mu) / sigma2;
        } else {
            correlation = 1.0;
            degenerate_correlation = true;
        }

        const double dir_values[] = {joint_max, mu,       joint_var, joint_ent, diff_avg, diff_var,
                                     diff_ent,  sum_avg,  sum_var,   sum_ent,   energy,   contrast,
                                     dissim,    inv_diff, inv_diff_n, idm,      idm_n,    inv_var,
                                     correlation, autocorr, clus_t,  clus_s,    clus_p};
        for (size_t f = 0; f < feature_names.size(); ++f) sums[f] += dir_values[f];
    }

    if (used_directions == 0)
        throw undefined_feature_error("glcm: no direction has a co-occurring pair");
    if (degenerate_correlation && flags)
        flags->push_back("glcm correlation degenerate (constant ROI), set to 1");

    FeatureList out;
    for (size_t f = 0; f < feature_names.size(); ++f)
        out.emplace_back(feature_names[f], sums[f] / used_directions);
    return out;
}

/// Gray-level run-length features averaged over the 13 directions.
inline FeatureList glrlm_features(const DiscretizedROI& roi) {
    const int ng = roi.max_level();
    if (ng == 0) throw empty_roi_error("glrlm: empty ROI");

    const std::vector<std::string> names = {
        "sre",  "lre",       "lgre", "hgre",      "srlge",          "srhge",
        "lrlge", "lrhge",    "glnu", "glnu norm", "rlnu",           "rlnu norm",
        "run percentage",    "gl variance",       "rl variance",    "run entropy"};
    std::vector<double> sums(names.size(), 0.0);

    for (const auto& dir : texture_directions()) {
        std::map<std::pair<int, int>, double> runs; // (level, length) -> count
        for (int k = 0; k < roi.dims[2]; ++k)
            for (int j = 0; j < roi.dims[1]; ++j)
                for (int i = 0; i < roi.dims[0]; ++i) {
                    const int level = roi.at(i, j, k);
                    if (level == 0) continue;
                    const int pi = i - dir[0], pj = j - dir[1], pk = k - dir[2];
                    if (roi.in_bounds(pi, pj, pk) && roi.at(pi, pj, pk) == level) continue; // not a start
                    int len = 1;
                    int ci = i + dir[0], cj = j + dir[1], ck = k + dir[2];
                    while (roi.in_bounds(ci, cj, ck) && roi.at(ci, cj, ck) == level) {
                        ++len;
                        ci += dir[0];
                        cj += dir[1];
                        ck += dir[2];
                    }
                    runs[{level, len}] += 1.0;
                }

        const detail::ZoneMatrixFeatures z = detail::zone_matrix_features(runs, roi.roi_count);
        const double dir_values[] = {z.small_emph, z.large_emph, z.low_gl,    z.high_gl,
                                     z.small_low,  z.small_high, z.large_low, z.large_high,
                                     z.glnu,       z.glnu_norm,  z.wnu,       z.wnu_norm,
                                     z.percentage, z.gl_var,     z.w_var,     z.entropy};
        for (size_t f = 0; f < names.size(); ++f) sums[f] += dir_values[f];
    }

    FeatureList out;
    for (size_t f = 0; f < names.size(); ++f) out.emplace_back(names[f], sums[f] / 13.0);
    return out;
}

/// Gray-level size-zone features (26-connected zones of equal level).
inline FeatureList glszm_features(const DiscretizedROI& roi) {
    if (roi.roi_count == 0) throw empty_roi_error("glszm: empty ROI");
    std::map<std::pair<int, int>, double> zones; // (level, size) -> count
    for (const auto& zone : detail::level_zones(roi))
        zones[{roi.levels[size_t(zone.front())], int(zone.size())}] += 1.0;

    const detail::ZoneMatrixFeatures z = detail::zone_matrix_features(zones, roi.roi_count);
    return {{"sze", z.small_emph},
            {"lze", z.large_emph},
            {"lgze", z.low_gl},
            {"hgze", z.high_gl},
            {"szlge", z.small_low},
            {"szhge", z.small_high},
            {"lzlge", z.large_low},
            {"lzhge", z.large_high},
            {"glnu", z.glnu},
            {"glnu norm", z.glnu_norm},
            {"zsnu", z.wnu},
            {"zsnu norm", z.wnu_norm},
            {"zone percentage", z.percentage},
            {"gl variance", z.gl_var},
            {"zone size variance", z.w_var},
            {"zone size entropy", z.entropy}};
}

/// Gray-level distance-zone features. Zone distance is the minimum over the
/// zone's voxels of the Chebyshev distance to the nearest non-ROI voxel
/// (grid border counts as non-ROI), with a minimum of 1.
inline FeatureList gldzm_features(const DiscretizedROI& roi) {
    if (roi.roi_count == 0) throw empty_roi_error("gldzm: empty ROI");

    const std::vector<int> dist = chebyshev_distance_map(
        roi.dims, [&](int64_t idx) { return roi.levels[size_t(idx)] == 0; }, true);

    std::map<std::pair<int, int>, double> zones; // (level, distance) -> count
    for (const auto& zone : detail::level_zones(roi)) {
        int zone_dist = std::numeric_limits<int>::max();
        for (const int64_t idx : zone) zone_dist = std::min(zone_dist, dist[size_t(idx)]);
        zones[{roi.levels[size_t(zone.front())], std::max(1, zone_dist)}] += 1.0;
    }

    const detail::ZoneMatrixFeatures z = detail::zone_matrix_features(zones, roi.roi_count);
    return {{"sde", z.small_emph},
            {"lde", z.large_emph},
            {"lgze", z.low_gl},
            {"hgze", z.high_gl},
            {"sdlge", z.small_low},
            {"sdhge", z.small_high},
            {"ldlge", z.large_low},
            {"ldhge", z.large_high},
            {"glnu", z.glnu},
            {"glnu norm", z.glnu_norm},
            {"zdnu", z.wnu},
            {"zdnu norm", z.wnu_norm},
            {"zone percentage", z.percentage},
            {"gl variance", z.gl_var},
            {"zone distance variance", z.w_var},
            {"zone distance entropy", z.entropy}};
}

/// Neighbourhood grey tone difference features. Voxels without any in-ROI
/// 26-neighbour are excluded. When the total difference mass is zero
/// (constant or single-voxel ROI), coarseness is capped at 1e6 and flagged.
inline FeatureList ngtdm_features(const DiscretizedROI& roi, std::vector<std::string>* flags = nullptr) {
    const int ng = roi.max_level();
    if (ng == 0) throw empty_roi_error("ngtdm: empty ROI");

    std::vector<double> n_i(size_t(ng) + 1, 0.0), s_i(size_t(ng) + 1, 0.0);
    const auto& offsets = detail::neighbor_offsets(Connectivity::full26);
    for (int k = 0; k < roi.dims[2]; ++k)
        for (int j = 0; j < roi.dims[1]; ++j)
            for (int i = 0; i < roi.dims[0]; ++i) {
                const int level = roi.at(i, j, k);
                if (level == 0) continue;
                double sum = 0.0;
                int count = 0;
                for (const auto& o : offsets) {
                    const int ni = i + o[0], nj = j + o[1], nk = k + o[2];
                    if (!roi.in_bounds(ni, nj, nk)) continue;
                    const int nl = roi.at(ni, nj, nk);
                    if (nl == 0) continue;
                    sum += nl;
                    ++count;
                }
                if (count == 0) continue;
                n_i[size_t(level)] += 1.0;
                s_i[size_t(level)] += std::abs(level - sum / count);
            }

    double n_total = 0.0;
    for (const double c : n_i) n_total += c;

    FeatureList out;
    if (n_total == 0.0) {
        // Isolated voxels only; all difference features degenerate.
        if (flags) flags->push_back("ngtdm degenerate (no voxel has ROI neighbours)");
        out = {{"coarseness", 1e6}, {"contrast", 0.0}, {"busyness", 0.0}, {"complexity", 0.0},
               {"strength", 0.0}};
        return out;
    }

    std::vector<double> p(size_t(ng) + 1, 0.0);
    for (int l = 1; l <= ng; ++l) p[size_t(l)] = n_i[size_t(l)] / n_total;

    double ps_sum = 0.0, s_sum = 0.0;
    int present = 0;
    for (int l = 1; l <= ng; ++l) {
        ps_sum += p[size_t(l)] * s_i[size_t(l)];
        s_sum += s_i[size_t(l)];
        if (p[size_t(l)] > 0.0) ++present;
    }

    double coarseness;
    if (ps_sum > 0.0) {
        coarseness = std::min(1e6, 1.0 / ps_sum);
    } else {
        coarseness = 1e6;
        if (flags) flags->push_back("ngtdm coarseness capped at 1e6 (constant ROI)");
    }

    double contrast = 0.0;
    if (present > 1) {
        double pair_sum = 0.0;
        for (int a = 1; a <= ng; ++a)
            for (int b = 1; b <= ng; ++b)
                pair_sum += p[size_t(a)] * p[size_t(b)] * (a - b) * (a - b);
        contrast = pair_sum / (double(present) * (present - 1)) * (s_sum / n_total);
    }

    double busy_den = 0.0;
    for (int a = 1; a <= ng; ++a)
        for (int b = 1; b <= ng; ++b) {
            if (p[size_t(a)] == 0.0 || p[size_t(b)] == 0.0) continue;
            busy_den += std::abs(a * p[size_t(a)] - b * p[size_t(b)]);
        }
    const double busyness = busy_den > 0.0 ? ps_sum / busy_den : 0.0;

    double complexity = 0.0;
    for (int a = 1; a <= ng; ++a)
        for (int b = 1; b <= ng; ++b) {
            if (p[size_t(a)] == 0.0 || p[size_t(b)] == 0.0) continue;
            complexity += std::abs(a - b) *
                          (p[size_t(a)] * s_i[size_t(a)] + p[size_t(b)] * s_i[size_t(b)]) /
                          (p[size_t(a)] + p[size_t(b)]);
        }
    complexity /= n_total;

    double strength = 0.0;
    if (s_sum > 0.0) {
        for (int a = 1; a <= ng; ++a)
            for (int b = 1; b <= ng; ++b) {
                if (p[size_t(a)] == 0.0 || p[size_t(b)] == 0.0) continue;
                strength += (p[size_t(a)] + p[size_t(b)]) * (a - b) * (a - b);
            }
        strength /= s_sum;
    }

    out = {{"coarseness", coarseness},
           {"contrast", contrast},
           {"busyness", busyness},
           {"complexity", complexity},
           {"strength", strength}};
    return out;
}

/// Neighbouring grey level dependence features with coarseness parameter
/// alpha = 0: the dependence count of a voxel is the number of in-ROI
/// 26-neighbours with the same level. Emphasis weights use k+1 so that an
/// isolated voxel (dependence 0) stays finite.
inline FeatureList ngldm_features(const DiscretizedROI& roi) {
    const int ng = roi.max_level();
    if (ng == 0) throw empty_roi_error("ngldm: empty ROI");

    std::map<std::pair<int, int>, double> m; // (level, dependence) -> count
    const auto& offsets = detail::neighbor_offsets(Connectivity::full26);
    for (int k = 0; k < roi.dims[2]; ++k)
        for (int j = 0; j < roi.dims[1]; ++j)
            for (int i = 0; i < roi.dims[0]; ++i) {
                const int level = roi.at(i, j, k);
                if (level == 0) continue;
                int dep = 0;
                for (const auto& o : offsets) {
                    const int ni = i + o[0], nj = j + o[1], nk = k + o[2];
                    if (!roi.in_bounds(ni, nj, nk)) continue;
                    if (roi.at(ni, nj, nk) == level) ++dep;
                }
                m[{level, dep}] += 1.0;
            }

    const double n = double(roi.roi_count);
    double lde = 0, hde = 0, lgce = 0, hgce = 0, ldlge = 0, ldhge = 0, hdlge = 0, hdhge = 0;
    double gl_mu = 0, dc_mu = 0, entropy = 0, energy = 0;
    std::map<int, double> by_level, by_dep;
    for (const auto& [key, c] : m) {
        const double i = key.first;
        const double kk = key.second + 1.0;
        lde += c / (kk * kk);
        hde += c * kk * kk;
        lgce += c / (i * i);
        hgce += c * i * i;
        ldlge += c / (i * i * kk * kk);
        ldhge += c * i * i / (kk * kk);
        hdlge += c * kk * kk / (i * i);
        hdhge += c * i * i * kk * kk;
        gl_mu += c * i / n;
        dc_mu += c * kk / n;
        const double p = c / n;
        entropy -= p * detail::log2_safe(p);
        energy += p * p;
        by_level[key.first] += c;
        by_dep[key.second] += c;
    }
    double glnu = 0, dcnu = 0;
    for (const auto& [l, c] : by_level) glnu += c * c;
    for (const auto& [d, c] : by_dep) dcnu += c * c;
    double gl_var = 0, dc_var = 0;
    for (const auto& [key, c] : m) {
        gl_var += (key.first - gl_mu) * (key.first - gl_mu) * c / n;
        dc_var += (key.second + 1.0 - dc_mu) * (key.second + 1.0 - dc_mu) * c / n;
    }

    return {{"lde", lde / n},
            {"hde", hde / n},
            {"lgce", lgce / n},
            {"hgce", hgce / n},
            {"ldlge", ldlge / n},
            {"ldhge", ldhge / n},
            {"hdlge", hdlge / n},
            {"hdhge", hdhge / n},
            {"glnu", glnu / n},
            {"glnu norm", glnu / (n * n)},
            {"dcnu", dcnu / n},
            {"dcnu norm", dcnu / (n * n)},
            {"gl variance", gl_var},
            {"dc variance", dc_var},
            {"dc entropy", entropy},
            {"dc energy", energy}};
}

} // namespace hnrad

#endif
