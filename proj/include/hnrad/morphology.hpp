#ifndef HNRAD_MORPHOLOGY_HPP
#define HNRAD_MORPHOLOGY_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hnrad/marching_cubes.hpp"
#include "hnrad/texture.hpp"

namespace hnrad {

/// Shape features of the binary ROI. The surface mesh comes from marching
/// cubes at iso 0.5; a single-voxel ROI falls back to voxel-face area and
/// voxel volume (flagged approximate).
inline FeatureList morphology_features(const DiscretizedROI& roi,
                                       std::vector<std::string>* flags = nullptr) {
    if (roi.roi_count == 0) throw empty_roi_error("morphology: empty ROI");
    const Vec3 sp = roi.spacing;
    const double voxel_volume = sp[0] * sp[1] * sp[2];

    double area, volume;
    if (roi.roi_count == 1) {
        area = 2.0 * (sp[0] * sp[1] + sp[1] * sp[2] + sp[0] * sp[2]);
        volume = voxel_volume;
        if (flags) flags->push_back("morphology approximate (single voxel, voxel-face fallback)");
    } else {
        mc::TriMesh mesh = mc::extract_binary_mesh(roi.dims, roi.spacing,
                                                   [&](int i, int j, int k) { return roi.at(i, j, k) > 0; });
        mc::taubin_smooth(mesh);
        area = mc::mesh_area(mesh);
        volume = mc::mesh_volume(mesh);
    }

    const double sphere_equiv = std::cbrt(36.0 * kPi * volume * volume); // (36 pi V^2)^(1/3)
    const double disproportion = area / sphere_equiv;
    const double sphericity = sphere_equiv / area;

    // Maximum 3D diameter over 6-face surface voxels (exact, see conventional).
    std::vector<Vec3> surface_pts;
    std::vector<Vec3> all_pts;
    for (int k = 0; k < roi.dims[2]; ++k)
        for (int j = 0; j < roi.dims[1]; ++j)
            for (int i = 0; i < roi.dims[0]; ++i) {
                if (roi.at(i, j, k) == 0) continue;
                const Vec3 p{i * sp[0], j * sp[1], k * sp[2]};
                all_pts.push_back(p);
                bool boundary = false;
                for (const auto& o : detail::neighbor_offsets(Connectivity::faces6)) {
                    const int ni = i + o[0], nj = j + o[1], nk = k + o[2];
                    if (!roi.in_bounds(ni, nj, nk) || roi.at(ni, nj, nk) == 0) {
                        boundary = true;
                        break;
                    }
                }
                if (boundary) surface_pts.push_back(p);
            }
    double diameter2 = 0.0;
    for (size_t a = 0; a < surface_pts.size(); ++a)
        for (size_t b = a + 1; b < surface_pts.size(); ++b) {
            const Vec3 d = surface_pts[a] - surface_pts[b];
            diameter2 = std::max(diameter2, dot(d, d));
        }

    // Principal-axis elongation and flatness from the voxel-center covariance.
    double elongation = 1.0, flatness = 1.0;
    if (all_pts.size() > 1) {
        Eigen::Vector3d mean = Eigen::Vector3d::Zero();
        for (const auto& p : all_pts) mean += Eigen::Vector3d(p[0], p[1], p[2]);
        mean /= double(all_pts.size());
        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        for (const auto& p : all_pts) {
            const Eigen::Vector3d d = Eigen::Vector3d(p[0], p[1], p[2]) - mean;
            cov += d * d.transpose();
        }
        cov /= double(all_pts.size());
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
        const Eigen::Vector3d ev = eig.eigenvalues(); // ascending
        const double l1 = std::max(ev[2], 0.0), l2 = std::max(ev[1], 0.0), l3 = std::max(ev[0], 0.0);
        if (l1 > 0.0) {
            elongation = std::sqrt(l2 / l1);
            flatness = std::sqrt(l3 / l1);
        }
    }

    return {{"volume", volume},
            {"voxel volume", double(roi.roi_count) * voxel_volume},
            {"surface area", area},
            {"surface to volume ratio", area / volume},
            {"sphericity", sphericity},
            {"spherical disproportion", disproportion},
            {"compactness 1", volume / (std::sqrt(kPi) * std::pow(area, 1.5))},
            {"compactness 2", 36.0 * kPi * volume * volume / (area * area * area)},
            {"maximum diameter", std::sqrt(diameter2)},
            {"elongation", elongation},
            {"flatness", flatness}};
}

} // namespace hnrad

#endif
