#ifndef HNRAD_RADIOMICS_HPP
#define HNRAD_RADIOMICS_HPP

#include <string>
#include <utility>
#include <vector>

#include "hnrad/discretize.hpp"
#include "hnrad/intensity.hpp"
#include "hnrad/morphology.hpp"
#include "hnrad/resample.hpp"
#include "hnrad/texture.hpp"

namespace hnrad {

struct RadiomicsParams {
    double spacing = 2.0; // isotropic resampling in mm
    int n_bins = 64;      // fixed bin number
};

struct RadiomicsResult {
    FeatureList features;            // "<MOD>-<family>-<feature>" -> value
    std::vector<std::string> flags;  // degenerate conventions encountered
};

/// Resample an image (linear) and its mask (nearest) to the isotropic
/// extraction grid. Throws empty_roi_error when no foreground survives.
inline std::pair<VoxelGrid, LabelMask> prepare_roi(const VoxelGrid& image, const LabelMask& mask,
                                                   double spacing) {
    require_same_geometry(image.geom, mask.geom, "prepare_roi");
    VoxelGrid img = resample(image, spacing, Interp::linear);
    LabelMask msk = resample(mask, spacing, Interp::nearest);
    bool any = false;
    for (const uint8_t l : msk.labels)
        if (l == 1 || l == 2) {
            any = true;
            break;
        }
    if (!any) throw empty_roi_error("prepare_roi: ROI vanished under resampling");
    return {std::move(img), std::move(msk)};
}

namespace detail {

inline void append_family(FeatureList& out, const std::string& modality, const std::string& family,
                          const FeatureList& features) {
    for (const auto& [name, value] : features)
        out.emplace_back(modality + "-" + family + "-" + name, value);
}

} // namespace detail

/// All feature families for one modality. The image/mask pair is resampled to
/// the extraction grid here; pass the full-resolution inputs.
inline RadiomicsResult extract_modality(const VoxelGrid& image, const LabelMask& mask,
                                        const std::string& modality,
                                        const RadiomicsParams& params = {}) {
    auto [img, msk] = prepare_roi(image, mask, params.spacing);
    const DiscretizedROI roi = discretize_roi(img, msk, params.n_bins);

    std::vector<int64_t> roi_voxels;
    std::vector<double> roi_values;
    const int64_t n = msk.geom.voxel_count();
    for (int64_t idx = 0; idx < n; ++idx) {
        const uint8_t l = msk.labels[size_t(idx)];
        if (l != 1 && l != 2) continue;
        roi_voxels.push_back(idx);
        roi_values.push_back(double(img.values[size_t(idx)]));
    }

    RadiomicsResult r;
    detail::append_family(r.features, modality, "Morphology", morphology_features(roi, &r.flags));
    detail::append_family(r.features, modality, "Statistic", intensity_statistics(roi_values, &r.flags));
    detail::append_family(r.features, modality, "IH", intensity_histogram_features(roi, &r.flags));
    r.features.emplace_back(modality + "-Local-peak", local_intensity_peak(img, roi_voxels));
    r.features.emplace_back(modality + "-Local-global peak", global_intensity_peak(img, roi_voxels));
    detail::append_family(r.features, modality, "GLCM", glcm_features(roi, &r.flags));
    detail::append_family(r.features, modality, "GLRLM", glrlm_features(roi));
    detail::append_family(r.features, modality, "GLSZM", glszm_features(roi));
    detail::append_family(r.features, modality, "GLDZM", gldzm_features(roi));
    detail::append_family(r.features, modality, "NGTDM", ngtdm_features(roi, &r.flags));
    detail::append_family(r.features, modality, "NGLDM", ngldm_features(roi));
    return r;
}

/// PET + CT extraction over the GTVp+GTVn union mask (one region).
inline RadiomicsResult extract_all(const VoxelGrid& pet, const VoxelGrid& ct, const LabelMask& mask,
                                   const RadiomicsParams& params = {}) {
    RadiomicsResult pet_r = extract_modality(pet, mask, "PET", params);
    const RadiomicsResult ct_r = extract_modality(ct, mask, "CT", params);
    RadiomicsResult out;
    out.features = std::move(pet_r.features);
    out.features.insert(out.features.end(), ct_r.features.begin(), ct_r.features.end());
    out.flags = std::move(pet_r.flags);
    for (const auto& f : ct_r.flags) out.flags.push_back(f);
    return out;
}

} // namespace hnrad

#endif
