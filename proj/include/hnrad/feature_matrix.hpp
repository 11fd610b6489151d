#ifndef HNRAD_FEATURE_MATRIX_HPP
#define HNRAD_FEATURE_MATRIX_HPP

#include <cmath>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "hnrad/csv.hpp"
#include "hnrad/errors.hpp"

namespace hnrad {

struct Covariates {
    double gender = 0; // 0/1
    double age = 0;    // years
    double weight = 0; // kg
};

/// Per-patient clinical row. Survival is optional (test patients).
struct ClinicalRow {
    std::string patient_id;
    std::string center;
    Covariates covariates;
    std::optional<double> rfs_time;
    std::optional<bool> rfs_event;
};

/// Patients x features table with batch labels and biological covariates.
struct FeatureMatrix {
    std::vector<std::string> patient_ids;
    std::vector<std::string> feature_names;
    Eigen::MatrixXd values; // rows follow patient_ids, cols follow feature_names
    std::vector<std::string> center;
    std::vector<Covariates> covariates;

    int64_t n_patients() const { return int64_t(patient_ids.size()); }
    int64_t n_features() const { return int64_t(feature_names.size()); }

    int feature_index(const std::string& name) const {
        for (size_t c = 0; c < feature_names.size(); ++c)
            if (feature_names[c] == name) return int(c);
        return -1;
    }

    FeatureMatrix select_features(const std::vector<std::string>& names) const {
        FeatureMatrix out;
        out.patient_ids = patient_ids;
        out.center = center;
        out.covariates = covariates;
        out.feature_names = names;
        out.values.resize(values.rows(), Eigen::Index(names.size()));
        for (size_t c = 0; c < names.size(); ++c) {
            const int idx = feature_index(names[c]);
            if (idx < 0) throw schema_error("unknown feature '" + names[c] + "'");
            out.values.col(Eigen::Index(c)) = values.col(idx);
        }
        return out;
    }

    FeatureMatrix select_rows(const std::vector<int64_t>& rows) const {
        FeatureMatrix out;
        out.feature_names = feature_names;
        out.values.resize(Eigen::Index(rows.size()), values.cols());
        for (size_t r = 0; r < rows.size(); ++r) {
            out.patient_ids.push_back(patient_ids[size_t(rows[r])]);
            out.center.push_back(center[size_t(rows[r])]);
            out.covariates.push_back(covariates[size_t(rows[r])]);
            out.values.row(Eigen::Index(r)) = values.row(Eigen::Index(rows[r]));
        }
        return out;
    }
};

// ----------------------------------------------------------- clinical I/O --

/// Clinical CSV schema: patient_id, center, gender, age, weight, rfs_time,
/// rfs_event. Extra columns are ignored (with a warning); survival fields may
/// be empty. Gender accepts 0/1 or M/F.
inline std::vector<ClinicalRow> read_clinical_csv(const std::string& path,
                                                  std::vector<std::string>* warnings = nullptr) {
    const CsvTable t = read_csv(path);
    static const std::vector<std::string> known = {"patient_id", "center",   "gender", "age",
                                                   "weight",     "rfs_time", "rfs_event"};
    for (const auto& col : t.header) {
        bool ok = false;
        for (const auto& k : known) ok |= col == k;
        if (!ok && warnings) warnings->push_back("clinical column '" + col + "' ignored");
    }
    const int c_id = t.require_column("patient_id");
    const int c_center = t.require_column("center");
    const int c_gender = t.require_column("gender");
    const int c_age = t.require_column("age");
    const int c_weight = t.require_column("weight");
    const int c_time = t.column("rfs_time");
    const int c_event = t.column("rfs_event");

    std::vector<ClinicalRow> rows;
    for (const auto& r : t.rows) {
        ClinicalRow row;
        row.patient_id = r[size_t(c_id)];
        row.center = r[size_t(c_center)];
        const std::string& g = r[size_t(c_gender)];
        if (g == "M" || g == "m")
            row.covariates.gender = 1.0;
        else if (g == "F" || g == "f")
            row.covariates.gender = 0.0;
        else
            row.covariates.gender = parse_double(g, "gender");
        row.covariates.age = parse_double(r[size_t(c_age)], "age");
        row.covariates.weight = parse_double(r[size_t(c_weight)], "weight");
        if (c_time >= 0 && !r[size_t(c_time)].empty())
            row.rfs_time = parse_double(r[size_t(c_time)], "rfs_time");
        if (c_event >= 0 && !r[size_t(c_event)].empty())
            row.rfs_event = parse_double(r[size_t(c_event)], "rfs_event") != 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

// ----------------------------------------------------------- features I/O --

/// Features CSV: patient_id column plus one numeric column per feature.
/// Empty cells load as NaN (missing).
inline FeatureMatrix read_features_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int c_id = t.require_column("patient_id");
    FeatureMatrix m;
    for (size_t c = 0; c < t.header.size(); ++c)
        if (int(c) != c_id) m.feature_names.push_back(t.header[c]);
    m.values.resize(Eigen::Index(t.rows.size()), Eigen::Index(m.feature_names.size()));
    for (size_t r = 0; r < t.rows.size(); ++r) {
        m.patient_ids.push_back(t.rows[r][size_t(c_id)]);
        Eigen::Index cc = 0;
        for (size_t c = 0; c < t.header.size(); ++c) {
            if (int(c) == c_id) continue;
            const std::string& cell = t.rows[r][c];
            m.values(Eigen::Index(r), cc++) =
                cell.empty() ? std::nan("") : parse_double(cell, t.header[c]);
        }
    }
    m.center.resize(m.patient_ids.size());
    m.covariates.resize(m.patient_ids.size());
    return m;
}

inline void write_features_csv(const std::string& path, const FeatureMatrix& m,
                               const std::string& comment = "") {
    CsvTable t;
    t.header.push_back("patient_id");
    for (const auto& n : m.feature_names) t.header.push_back(n);
    for (int64_t r = 0; r < m.n_patients(); ++r) {
        std::vector<std::string> row;
        row.push_back(m.patient_ids[size_t(r)]);
        for (int64_t c = 0; c < m.n_features(); ++c) {
            const double v = m.values(Eigen::Index(r), Eigen::Index(c));
            row.push_back(std::isnan(v) ? "" : format_double(v));
        }
        t.rows.push_back(std::move(row));
    }
    write_csv(path, t, comment);
}

/// Attach center and covariates from clinical rows, matching on patient_id.
inline void join_clinical(FeatureMatrix& m, const std::vector<ClinicalRow>& clinical) {
    std::unordered_map<std::string, const ClinicalRow*> by_id;
    for (const auto& row : clinical) by_id[row.patient_id] = &row;
    for (size_t r = 0; r < m.patient_ids.size(); ++r) {
        auto it = by_id.find(m.patient_ids[r]);
        if (it == by_id.end())
            throw schema_error("patient '" + m.patient_ids[r] + "' missing from clinical table");
        m.center[r] = it->second->center;
        m.covariates[r] = it->second->covariates;
    }
}

/// Merge feature tables column-wise on patient_id (same patients required).
inline FeatureMatrix merge_features(const FeatureMatrix& a, const FeatureMatrix& b) {
    std::unordered_map<std::string, int64_t> b_row;
    for (size_t r = 0; r < b.patient_ids.size(); ++r) b_row[b.patient_ids[r]] = int64_t(r);
    FeatureMatrix out = a;
    for (const auto& n : b.feature_names) {
        if (out.feature_index(n) >= 0) throw schema_error("duplicate feature '" + n + "' in merge");
        out.feature_names.push_back(n);
    }
    out.values.conservativeResize(a.values.rows(), a.values.cols() + b.values.cols());
    for (size_t r = 0; r < a.patient_ids.size(); ++r) {
        auto it = b_row.find(a.patient_ids[r]);
        if (it == b_row.end())
            throw schema_error("patient '" + a.patient_ids[r] + "' missing from merged table");
        out.values.block(Eigen::Index(r), a.values.cols(), 1, b.values.cols()) =
            b.values.row(Eigen::Index(it->second));
    }
    return out;
}

} // namespace hnrad

#endif
