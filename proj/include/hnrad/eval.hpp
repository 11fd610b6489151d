#ifndef HNRAD_EVAL_HPP
#define HNRAD_EVAL_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hnrad/errors.hpp"
#include "hnrad/volume.hpp"

namespace hnrad {

/// Per-case Dice for one label: 2|P.T| / (|P|+|T|); both-empty counts as a
/// perfect 1.0, exactly-one-empty as 0.0.
inline double dice(const LabelMask& pred, const LabelMask& truth, int label) {
    require_same_geometry(pred.geom, truth.geom, "dice");
    int64_t p = 0, t = 0, overlap = 0;
    const int64_t n = pred.geom.voxel_count();
    for (int64_t i = 0; i < n; ++i) {
        const bool in_p = pred.labels[size_t(i)] == label;
        const bool in_t = truth.labels[size_t(i)] == label;
        p += in_p;
        t += in_t;
        overlap += in_p && in_t;
    }
    if (p + t == 0) return 1.0;
    return 2.0 * double(overlap) / double(p + t);
}

struct DiceCaseCounts {
    std::string id;
    int64_t pred_gtvp = 0, truth_gtvp = 0, overlap_gtvp = 0;
    int64_t pred_gtvn = 0, truth_gtvn = 0, overlap_gtvn = 0;

    double dice_gtvp() const {
        return pred_gtvp + truth_gtvp == 0
                   ? 1.0
                   : 2.0 * double(overlap_gtvp) / double(pred_gtvp + truth_gtvp);
    }
    double dice_gtvn() const {
        return pred_gtvn + truth_gtvn == 0
                   ? 1.0
                   : 2.0 * double(overlap_gtvn) / double(pred_gtvn + truth_gtvn);
    }
};

/// Cohort Dice report: per-case scores plus the aggregated form that sums
/// intersections and sizes over all cases before dividing. Empty-vs-empty
/// cases contribute nothing to the aggregated sums.
struct DiceReport {
    std::vector<DiceCaseCounts> cases;

    double aggregated(int label) const {
        int64_t num = 0, den = 0;
        for (const auto& c : cases) {
            num += 2 * (label == 1 ? c.overlap_gtvp : c.overlap_gtvn);
            den += label == 1 ? c.pred_gtvp + c.truth_gtvp : c.pred_gtvn + c.truth_gtvn;
        }
        return den == 0 ? 1.0 : double(num) / double(den);
    }

    double mean_aggregated() const { return 0.5 * (aggregated(1) + aggregated(2)); }

    double mean_per_case(int label) const {
        if (cases.empty()) return 1.0;
        double s = 0;
        for (const auto& c : cases) s += label == 1 ? c.dice_gtvp() : c.dice_gtvn();
        return s / double(cases.size());
    }
};

inline DiceCaseCounts dice_case_counts(const LabelMask& pred, const LabelMask& truth,
                                       const std::string& id = "") {
    require_same_geometry(pred.geom, truth.geom, "dice");
    DiceCaseCounts c;
    c.id = id;
    const int64_t n = pred.geom.voxel_count();
    for (int64_t i = 0; i < n; ++i) {
        const uint8_t pl = pred.labels[size_t(i)], tl = truth.labels[size_t(i)];
        c.pred_gtvp += pl == 1;
        c.truth_gtvp += tl == 1;
        c.overlap_gtvp += pl == 1 && tl == 1;
        c.pred_gtvn += pl == 2;
        c.truth_gtvn += tl == 2;
        c.overlap_gtvn += pl == 2 && tl == 2;
    }
    return c;
}

inline DiceReport aggregated_dice(const std::vector<std::pair<const LabelMask*, const LabelMask*>>& cases) {
    if (cases.empty()) throw error("aggregated_dice: no cases");
    DiceReport report;
    int case_no = 0;
    for (const auto& [pred, truth] : cases)
        report.cases.push_back(dice_case_counts(*pred, *truth, "case" + std::to_string(case_no++)));
    return report;
}

// ----------------------------------------------------------- soft losses ---

/// Probabilistic segmentation of one case: per-voxel class probabilities
/// (voxel-major, K classes) against a one-hot ground truth given as the class
/// index per voxel.
struct SoftSegmentation {
    int n_classes = 3;
    std::vector<double> probabilities; // size = n_voxels * n_classes
    std::vector<int> truth;            // size = n_voxels, values in [0, n_classes)

    int64_t n_voxels() const { return int64_t(truth.size()); }

    void validate() const {
        if (n_classes < 2) throw error("soft segmentation: need at least 2 classes");
        if (probabilities.size() != truth.size() * size_t(n_classes))
            throw error("soft segmentation: probability/truth size mismatch");
        for (size_t v = 0; v < truth.size(); ++v) {
            if (truth[v] < 0 || truth[v] >= n_classes)
                throw label_error("soft segmentation: truth class out of range");
            double sum = 0;
            for (int k = 0; k < n_classes; ++k) {
                const double p = probabilities[v * size_t(n_classes) + size_t(k)];
                if (p < -1e-12 || !std::isfinite(p))
                    throw error("soft segmentation: invalid probability");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-6)
                throw error("soft segmentation: probabilities do not sum to 1");
        }
    }
};

/// Soft Dice loss: minus the mean over classes of the per-class overlap ratio
/// sum(u*v) / (sum(u) + sum(v)). A perfect prediction with every class
/// present scores -0.5 * (classes present) / K; classes with an empty
/// denominator contribute 0 and are flagged.
inline double soft_dice_loss(const SoftSegmentation& s, std::vector<std::string>* flags = nullptr) {
    s.validate();
    const int k_count = s.n_classes;
    double total = 0;
    for (int k = 0; k < k_count; ++k) {
        double num = 0, den = 0;
        for (int64_t v = 0; v < s.n_voxels(); ++v) {
            const double u = s.probabilities[size_t(v) * size_t(k_count) + size_t(k)];
            const bool t = s.truth[size_t(v)] == k;
            num += t ? u : 0.0;
            den += u + (t ? 1.0 : 0.0);
        }
        if (den <= 0.0) {
            if (flags) flags->push_back("soft dice: class " + std::to_string(k) + " empty, contributes 0");
            continue;
        }
        total += num / den;
    }
    return -total / double(k_count);
}

/// Mean voxel-wise cross-entropy against the one-hot truth (natural log).
/// Zero probability at a truth voxel is clamped to 1e-12 and flagged.
inline double cross_entropy(const SoftSegmentation& s, std::vector<std::string>* flags = nullptr) {
    s.validate();
    double total = 0;
    bool clamped = false;
    for (int64_t v = 0; v < s.n_voxels(); ++v) {
        double u = s.probabilities[size_t(v) * size_t(s.n_classes) + size_t(s.truth[size_t(v)])];
        if (u < 1e-12) {
            u = 1e-12;
            clamped = true;
        }
        total -= std::log(u);
    }
    if (clamped && flags) flags->push_back("cross entropy: zero probability clamped at 1e-12");
    return total / double(s.n_voxels());
}

/// Training objective of the segmentation network: soft Dice plus
/// cross-entropy.
inline double total_loss(const SoftSegmentation& s, std::vector<std::string>* flags = nullptr) {
    return soft_dice_loss(s, flags) + cross_entropy(s, flags);
}

} // namespace hnrad

#endif
