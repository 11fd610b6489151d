#ifndef HNRAD_PIPELINE_HPP
#define HNRAD_PIPELINE_HPP

#include <atomic>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "hnrad/combat.hpp"
#include "hnrad/conventional.hpp"
#include "hnrad/eval.hpp"
#include "hnrad/feature_matrix.hpp"
#include "hnrad/folds.hpp"
#include "hnrad/locator.hpp"
#include "hnrad/nifti.hpp"
#include "hnrad/radiomics.hpp"
#include "hnrad/resample.hpp"
#include "hnrad/survival.hpp"

namespace hnrad {

// ---------------------------------------------------------------- manifest --

/// One manifest row: where a patient's files live plus clinical data.
struct PatientRecord {
    std::string patient_id;
    std::string center;
    std::string pet_path, ct_path, mask_path;
    std::string truth_mask_path; // optional
    Covariates covariates;
    std::optional<double> rfs_time;
    std::optional<bool> rfs_event;

    std::optional<SurvivalRecord> survival() const {
        if (rfs_time && rfs_event) return SurvivalRecord{*rfs_time, *rfs_event};
        return std::nullopt;
    }
};

/// Manifest CSV: patient_id, center, pet, ct, mask [, truth_mask], gender,
/// age, weight [, rfs_time, rfs_event]. Survival cells may be empty.
inline std::vector<PatientRecord> read_manifest_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const int c_id = t.require_column("patient_id");
    const int c_center = t.require_column("center");
    const int c_pet = t.require_column("pet");
    const int c_ct = t.require_column("ct");
    const int c_mask = t.require_column("mask");
    const int c_truth = t.column("truth_mask");
    const int c_gender = t.require_column("gender");
    const int c_age = t.require_column("age");
    const int c_weight = t.require_column("weight");
    const int c_time = t.column("rfs_time");
    const int c_event = t.column("rfs_event");

    std::vector<PatientRecord> records;
    std::set<std::string> seen;
    for (const auto& r : t.rows) {
        PatientRecord p;
        p.patient_id = r[size_t(c_id)];
        if (!seen.insert(p.patient_id).second)
            throw schema_error("duplicate patient_id '" + p.patient_id + "' in manifest");
        p.center = r[size_t(c_center)];
        p.pet_path = r[size_t(c_pet)];
        p.ct_path = r[size_t(c_ct)];
        p.mask_path = r[size_t(c_mask)];
        if (c_truth >= 0) p.truth_mask_path = r[size_t(c_truth)];
        const std::string& g = r[size_t(c_gender)];
        p.covariates.gender = (g == "M" || g == "m")   ? 1.0
                              : (g == "F" || g == "f") ? 0.0
                                                       : parse_double(g, "gender");
        p.covariates.age = parse_double(r[size_t(c_age)], "age");
        p.covariates.weight = parse_double(r[size_t(c_weight)], "weight");
        if (c_time >= 0 && !r[size_t(c_time)].empty())
            p.rfs_time = parse_double(r[size_t(c_time)], "rfs_time");
        if (c_event >= 0 && !r[size_t(c_event)].empty())
            p.rfs_event = parse_double(r[size_t(c_event)], "rfs_event") != 0.0;
        records.push_back(std::move(p));
    }
    return records;
}

// ----------------------------------------------------------- batch extract --

struct ExtractConfig {
    bool run_locator = true; // locate + crop to the 224mm box before extraction
    double suv_threshold = 3.0;
    double top_fraction = 0.3;
    double crop_spacing = 1.0;
    RadiomicsParams radiomics;
    bool want_conventional = true;
    bool want_radiomics = true;
    int threads = 1;
};

struct PatientFailure {
    std::string patient_id;
    std::string stage; // load | locate | crop | conventional | radiomics
    std::string message;
};

struct LocatorOutcome {
    std::string patient_id;
    LocatorResult result;
};

struct BatchExtractResult {
    FeatureMatrix conventional; // empty when not requested
    FeatureMatrix radiomics;
    std::vector<PatientFailure> failures;
    std::vector<LocatorOutcome> locator;
    std::vector<std::string> flagged; // patients with degenerate feature conventions
};

namespace detail {

struct PatientExtraction {
    bool ok = false;
    PatientFailure failure;
    std::optional<LocatorResult> locator;
    std::vector<double> conventional_row;
    FeatureList radiomics_row;
    bool flagged = false;
};

inline std::vector<double> conventional_row(const ConventionalFeatures& f) {
    auto opt = [](const std::optional<double>& v) {
        return v ? *v : std::numeric_limits<double>::quiet_NaN();
    };
    return {opt(f.tumor_volume_ml), opt(f.diameter_mm), double(f.num_nodes), f.suv_max,
            f.suv_mean,             f.suv_peak,         f.mtv25_ml,          f.mtv40_ml,
            f.tlg25,                f.tlg40};
}

inline PatientExtraction extract_one(const PatientRecord& p, const ExtractConfig& cfg) {
    PatientExtraction out;
    std::string stage = "load";
    try {
        VoxelGrid pet = load_scalar_volume(p.pet_path);
        VoxelGrid ct = load_scalar_volume(p.ct_path);
        LabelMask mask = load_label_mask(p.mask_path);

        if (cfg.run_locator) {
            stage = "locate";
            const LabelMask* truth = nullptr;
            LabelMask truth_mask;
            if (!p.truth_mask_path.empty()) {
                truth_mask = load_label_mask(p.truth_mask_path);
                truth = &truth_mask;
            }
            const LocatorResult loc = locate(pet, ct, truth, cfg.suv_threshold, cfg.top_fraction);
            out.locator = loc;
            if (loc.mode == LocatorResult::Mode::failed)
                throw pipeline_error("automatic localization failed; provide an override center");

            stage = "crop";
            const Vec3 sp{cfg.crop_spacing, cfg.crop_spacing, cfg.crop_spacing};
            pet = crop_to_box(pet, loc.box, sp);
            ct = crop_to_box(ct, loc.box, sp);
            mask = crop_to_box(mask, loc.box, sp);
        }

        if (cfg.want_conventional) {
            stage = "conventional";
            const ConventionalFeatures f = extract_conventional(pet, mask);
            out.conventional_row = conventional_row(f);
            out.flagged |= !f.tumor_volume_ml.has_value();
        }
        if (cfg.want_radiomics) {
            stage = "radiomics";
            RadiomicsResult r = extract_all(pet, ct, mask, cfg.radiomics);
            out.radiomics_row = std::move(r.features);
            out.flagged |= !r.flags.empty();
        }
        out.ok = true;
    } catch (const std::exception& e) {
        out.failure = {p.patient_id, stage, e.what()};
    }
    return out;
}

} // namespace detail

/// Locate, crop, and extract features for every manifest row. Failures are
/// isolated per patient and reported; an entirely failed batch is fatal.
/// Output rows follow manifest order regardless of the worker count.
inline BatchExtractResult batch_extract(const std::vector<PatientRecord>& manifest,
                                        const ExtractConfig& cfg = {}) {
    if (manifest.empty()) throw pipeline_error("batch_extract: empty manifest");

    std::vector<detail::PatientExtraction> per_patient(manifest.size());
    const int threads = std::max(1, std::min<int>(cfg.threads, int(manifest.size())));
    if (threads == 1) {
        for (size_t i = 0; i < manifest.size(); ++i)
            per_patient[i] = detail::extract_one(manifest[i], cfg);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < manifest.size(); i = next.fetch_add(1))
                    per_patient[i] = detail::extract_one(manifest[i], cfg);
            });
        for (auto& t : pool) t.join();
    }

    BatchExtractResult result;
    result.conventional.feature_names = conventional_feature_names();
    std::vector<std::vector<double>> conv_rows;
    std::vector<std::vector<double>> rad_rows;
    for (size_t i = 0; i < manifest.size(); ++i) {
        auto& pe = per_patient[i];
        if (pe.locator) result.locator.push_back({manifest[i].patient_id, *pe.locator});
        if (!pe.ok) {
            result.failures.push_back(pe.failure);
            continue;
        }
        if (pe.flagged) result.flagged.push_back(manifest[i].patient_id);
        const auto& p = manifest[i];
        if (cfg.want_conventional) {
            result.conventional.patient_ids.push_back(p.patient_id);
            result.conventional.center.push_back(p.center);
            result.conventional.covariates.push_back(p.covariates);
            conv_rows.push_back(pe.conventional_row);
        }
        if (cfg.want_radiomics) {
            if (result.radiomics.feature_names.empty())
                for (const auto& [name, value] : pe.radiomics_row)
                    result.radiomics.feature_names.push_back(name);
            result.radiomics.patient_ids.push_back(p.patient_id);
            result.radiomics.center.push_back(p.center);
            result.radiomics.covariates.push_back(p.covariates);
            std::vector<double> row;
            row.reserve(pe.radiomics_row.size());
            for (const auto& [name, value] : pe.radiomics_row) row.push_back(value);
            rad_rows.push_back(std::move(row));
        }
    }
    if (result.failures.size() == manifest.size())
        throw pipeline_error("batch_extract: every patient failed");

    auto fill = [](FeatureMatrix& m, const std::vector<std::vector<double>>& rows) {
        m.values.resize(Eigen::Index(rows.size()), Eigen::Index(m.feature_names.size()));
        for (size_t r = 0; r < rows.size(); ++r)
            for (size_t c = 0; c < rows[r].size(); ++c)
                m.values(Eigen::Index(r), Eigen::Index(c)) = rows[r][c];
    };
    if (cfg.want_conventional) fill(result.conventional, conv_rows);
    if (cfg.want_radiomics) fill(result.radiomics, rad_rows);
    return result;
}

// --------------------------------------------------------------- recipes ---

enum class Recipe { conventional, radiomics_combat, combined };

inline const char* to_string(Recipe r) {
    switch (r) {
        case Recipe::conventional: return "conventional";
        case Recipe::radiomics_combat: return "radiomics-combat";
        default: return "combined";
    }
}

inline bool is_conventional_feature(const std::string& name) {
    for (const auto& n : conventional_feature_names())
        if (n == name) return true;
    return false;
}

inline bool is_radiomics_feature(const std::string& name) {
    return name.rfind("PET-", 0) == 0 || name.rfind("CT-", 0) == 0;
}

struct RunModelConfig {
    uint64_t seed = 20220901;
    double univariate_threshold = 0.50;
    double rho_max = 0.60;
    int lasso_grid_size = 50;
    double lasso_min_ratio = 0.01;
    bool refit_unpenalized = true; // refit the Lasso selection with an unpenalized Cox model
    std::string held_center = "MDA";
    int fold5_size = 97;
    Ties ties = Ties::breslow;
};

struct ModelBundle {
    Recipe recipe = Recipe::conventional;
    CoxModel model;
    SelectionReport selection;
    FoldAssignment folds;
    std::vector<double> fold_cindex; // one per fold with evaluable pairs
    double mean_fold_cindex = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> train_cindex;
    std::optional<double> test_cindex;
    std::vector<std::pair<std::string, double>> train_risks;
    std::vector<std::pair<std::string, double>> test_risks;
    std::vector<std::string> warnings;
};

namespace detail {

// Training rows usable for model fitting: survival present and all selected
// feature values finite.
inline std::vector<int64_t> complete_rows(const FeatureMatrix& m,
                                          const std::vector<std::optional<SurvivalRecord>>& survival,
                                          std::vector<std::string>* warnings) {
    std::vector<int64_t> rows;
    for (int64_t r = 0; r < m.n_patients(); ++r) {
        if (!survival[size_t(r)]) continue;
        bool finite = true;
        for (int64_t c = 0; c < m.n_features(); ++c)
            if (!std::isfinite(m.values(r, c))) {
                finite = false;
                break;
            }
        if (finite)
            rows.push_back(r);
        else if (warnings)
            warnings->push_back("patient '" + m.patient_ids[size_t(r)] +
                                "' dropped from fitting (missing feature values)");
    }
    return rows;
}

inline std::vector<std::string> drop_degenerate_columns(FeatureMatrix& m,
                                                        std::vector<std::string>* warnings) {
    std::vector<std::string> keep;
    for (int64_t c = 0; c < m.n_features(); ++c) {
        const auto col = m.values.col(c);
        const bool finite = col.allFinite();
        const double var = finite ? (col.array() - col.mean()).square().mean() : 0.0;
        if (finite && var > 1e-24) {
            keep.push_back(m.feature_names[size_t(c)]);
        } else if (warnings) {
            warnings->push_back("feature '" + m.feature_names[size_t(c)] +
                                "' dropped (missing values or zero variance)");
        }
    }
    m = m.select_features(keep);
    return keep;
}

struct SelectionOutcome {
    SelectionReport report;
    std::optional<LassoResult> lasso;
};

// The univariate -> correlation [-> lasso] cascade shared by the recipes.
inline SelectionOutcome select_features(const FeatureMatrix& train,
                                        const std::vector<SurvivalRecord>& records, bool with_lasso,
                                        const std::vector<int>& fold_ids, const RunModelConfig& cfg) {
    SelectionOutcome out;
    out.report = univariate_filter(train, records, cfg.univariate_threshold);
    out.report.rho_max = cfg.rho_max;
    if (out.report.kept_after_univariate.empty())
        throw pipeline_error("feature selection: univariate filter kept nothing");

    out.report.kept_after_correlation =
        correlation_prune(train, out.report, out.report.kept_after_univariate, cfg.rho_max);
    if (out.report.kept_after_correlation.empty())
        throw pipeline_error("feature selection: correlation pruning kept nothing");

    if (with_lasso && out.report.kept_after_correlation.size() > 1) {
        const FeatureMatrix pruned = train.select_features(out.report.kept_after_correlation);
        out.lasso = lasso_cox(pruned.values, records, pruned.feature_names, {}, 5,
                              fold_ids.empty() ? nullptr : &fold_ids);
        out.report.kept_after_lasso = out.lasso->selected;
        out.report.lasso_lambda = out.lasso->best_lambda;
        if (out.report.kept_after_lasso.empty())
            throw pipeline_error("feature selection: lasso kept nothing");
    } else if (with_lasso) {
        out.report.kept_after_lasso = out.report.kept_after_correlation;
    }
    return out;
}

} // namespace detail

/// Fit one of the three prognostic recipes and score both cohorts.
///   conventional      univariate filter + correlation pruning + CoxPH
///   radiomics-combat  joint ComBat + univariate + correlation + Lasso + CoxPH
///   combined          radiomics without ComBat + conventional set + CoxPH
/// Feature tables must carry center labels and covariates (join_clinical).
/// Survival vectors align with the feature rows; rows without survival are
/// never used for fitting.
inline ModelBundle run_model(Recipe recipe, const FeatureMatrix& train_features,
                             const std::vector<std::optional<SurvivalRecord>>& train_survival,
                             const FeatureMatrix& test_features,
                             const std::vector<std::optional<SurvivalRecord>>& test_survival,
                             const RunModelConfig& cfg = {}) {
    if (train_survival.size() != size_t(train_features.n_patients()) ||
        test_survival.size() != size_t(test_features.n_patients()))
        throw pipeline_error("run_model: survival vector does not align with features");

    ModelBundle bundle;
    bundle.recipe = recipe;

    // Fold assignment over training rows that carry survival.
    std::vector<std::pair<std::string, std::string>> fold_patients;
    for (int64_t r = 0; r < train_features.n_patients(); ++r)
        if (train_survival[size_t(r)])
            fold_patients.emplace_back(train_features.patient_ids[size_t(r)],
                                       train_features.center[size_t(r)]);
    bundle.folds = assign_folds(fold_patients, cfg.seed, cfg.held_center, cfg.fold5_size);
    for (const auto& w : bundle.folds.warnings) bundle.warnings.push_back(w);

    auto split_by_kind = [&](const FeatureMatrix& m, bool radiomics) {
        std::vector<std::string> names;
        for (const auto& n : m.feature_names)
            if (radiomics ? is_radiomics_feature(n) : is_conventional_feature(n)) names.push_back(n);
        return m.select_features(names);
    };

    // Assemble the modelling table per recipe.
    FeatureMatrix train_table, test_table;
    SelectionReport selection;
    std::optional<LassoResult> lasso_fit;
    std::vector<std::string> final_features;

    auto fit_rows = [&](const FeatureMatrix& m) {
        return detail::complete_rows(m, train_survival, &bundle.warnings);
    };
    auto records_for = [&](const std::vector<int64_t>& rows) {
        std::vector<SurvivalRecord> rec;
        for (const int64_t r : rows) rec.push_back(*train_survival[size_t(r)]);
        return rec;
    };
    auto fold_ids_for = [&](const FeatureMatrix& m, const std::vector<int64_t>& rows) {
        std::vector<int> ids;
        for (const int64_t r : rows) {
            auto it = bundle.folds.fold_of.find(m.patient_ids[size_t(r)]);
            ids.push_back(it == bundle.folds.fold_of.end() ? 0 : it->second);
        }
        return ids;
    };

    if (recipe == Recipe::conventional) {
        train_table = split_by_kind(train_features, false);
        test_table = split_by_kind(test_features, false);
        if (train_table.n_features() == 0)
            throw pipeline_error("conventional recipe: no conventional feature columns");
        const auto rows = fit_rows(train_table);
        if (rows.size() < 4) throw pipeline_error("conventional recipe: too few complete rows");
        const FeatureMatrix sel_table = train_table.select_rows(rows);
        selection = detail::select_features(sel_table, records_for(rows), false, {}, cfg).report;
        final_features = selection.kept_after_correlation;
    } else if (recipe == Recipe::radiomics_combat) {
        FeatureMatrix train_rad = split_by_kind(train_features, true);
        FeatureMatrix test_rad = split_by_kind(test_features, true);
        if (train_rad.n_features() == 0)
            throw pipeline_error("radiomics recipe: no radiomics feature columns");
        const auto kept = detail::drop_degenerate_columns(train_rad, &bundle.warnings);
        test_rad = test_rad.select_features(kept);
        // Harmonize training and test jointly by center, then select and
        // fit on the training side only.
        const auto [train_h, test_h] = joint_fit_transform(train_rad, test_rad);
        train_table = train_h;
        test_table = test_h;
        const auto rows = fit_rows(train_table);
        if (rows.size() < 8) throw pipeline_error("radiomics recipe: too few complete rows");
        const FeatureMatrix sel_table = train_table.select_rows(rows);
        detail::SelectionOutcome out = detail::select_features(
            sel_table, records_for(rows), true, fold_ids_for(train_table, rows), cfg);
        selection = out.report;
        lasso_fit = std::move(out.lasso);
        final_features = selection.kept_after_lasso;
    } else { // combined
        FeatureMatrix train_rad = split_by_kind(train_features, true);
        if (train_rad.n_features() == 0)
            throw pipeline_error("combined recipe: no radiomics feature columns");
        detail::drop_degenerate_columns(train_rad, &bundle.warnings);
        const auto rad_rows = detail::complete_rows(train_rad, train_survival, &bundle.warnings);
        if (rad_rows.size() < 8) throw pipeline_error("combined recipe: too few complete rows");
        const SelectionReport rad_sel =
            detail::select_features(train_rad.select_rows(rad_rows), records_for(rad_rows), true,
                                    fold_ids_for(train_rad, rad_rows), cfg)
                .report;

        FeatureMatrix train_conv = split_by_kind(train_features, false);
        const auto conv_rows = detail::complete_rows(train_conv, train_survival, &bundle.warnings);
        const SelectionReport conv_sel =
            detail::select_features(train_conv.select_rows(conv_rows), records_for(conv_rows),
                                    false, {}, cfg)
                .report;

        selection = rad_sel;
        for (const auto& [name, c] : conv_sel.univariate) selection.univariate.emplace_back(name, c);
        for (const auto& n : conv_sel.kept_after_univariate)
            selection.kept_after_univariate.push_back(n);
        for (const auto& n : conv_sel.kept_after_correlation)
            selection.kept_after_correlation.push_back(n);

        final_features = rad_sel.kept_after_lasso;
        for (const auto& n : conv_sel.kept_after_correlation) final_features.push_back(n);
        selection.kept_after_lasso = final_features;

        train_table = train_features.select_features(final_features);
        test_table = test_features.select_features(final_features);
    }

    // Final multivariate Cox on all usable training rows.
    FeatureMatrix model_train = train_table.select_features(final_features);
    const auto model_rows = detail::complete_rows(model_train, train_survival, &bundle.warnings);
    const FeatureMatrix fit_table = model_train.select_rows(model_rows);
    const auto fit_records = records_for(model_rows);

    CoxOptions cox_opt;
    cox_opt.ties = cfg.ties;
    if (!cfg.refit_unpenalized && lasso_fit) {
        // Keep the penalized coefficients at the chosen lambda instead of an
        // unpenalized refit: restrict the path column to its nonzero entries.
        const FeatureMatrix pruned = train_table.select_features(selection.kept_after_correlation);
        CoxModel penalized;
        for (size_t j = 0; j < pruned.feature_names.size(); ++j) {
            const double b = lasso_fit->path(Eigen::Index(j), lasso_fit->best_index);
            if (b == 0.0) continue;
            penalized.feature_names.push_back(pruned.feature_names[j]);
            penalized.coefficients.conservativeResize(penalized.coefficients.size() + 1);
            penalized.coefficients[penalized.coefficients.size() - 1] = b;
            penalized.mean.conservativeResize(penalized.mean.size() + 1);
            penalized.mean[penalized.mean.size() - 1] = lasso_fit->mean[Eigen::Index(j)];
            penalized.sd.conservativeResize(penalized.sd.size() + 1);
            penalized.sd[penalized.sd.size() - 1] = lasso_fit->sd[Eigen::Index(j)];
        }
        penalized.converged = true;
        bundle.model = std::move(penalized);
    } else {
        bundle.model = cox_fit(fit_table.values, fit_records, fit_table.feature_names, cox_opt);
        if (!bundle.model.converged)
            bundle.warnings.push_back("final Cox fit did not converge within the iteration budget");
    }

    // Risks for every row with complete features.
    auto score_all = [&](const FeatureMatrix& m) {
        std::vector<std::pair<std::string, double>> out;
        const FeatureMatrix sel = m.select_features(final_features);
        for (int64_t r = 0; r < sel.n_patients(); ++r) {
            bool finite = true;
            for (int64_t c = 0; c < sel.n_features(); ++c)
                if (!std::isfinite(sel.values(r, c))) finite = false;
            if (!finite) continue;
            double s = 0;
            for (int64_t c = 0; c < sel.n_features(); ++c)
                s += bundle.model.coefficients[c] * (sel.values(r, c) - bundle.model.mean[c]) /
                     bundle.model.sd[c];
            out.emplace_back(sel.patient_ids[size_t(r)], s);
        }
        return out;
    };
    bundle.train_risks = score_all(train_table);
    bundle.test_risks = score_all(test_table);

    // Training C-index.
    {
        std::vector<double> risks;
        for (const int64_t r : model_rows) {
            double s = 0;
            for (int64_t c = 0; c < fit_table.n_features(); ++c)
                s += bundle.model.coefficients[c] *
                     (model_train.values(r, c) - bundle.model.mean[c]) / bundle.model.sd[c];
            risks.push_back(s);
        }
        try {
            bundle.train_cindex = concordance_index(risks, fit_records);
        } catch (const fit_error&) {
        }
    }

    // Per-fold validation: refit the selected features on the other folds.
    double fold_sum = 0;
    int fold_count = 0;
    for (int f = 1; f <= 5; ++f) {
        std::vector<int64_t> in_fold, out_fold;
        for (size_t i = 0; i < model_rows.size(); ++i) {
            const std::string& id = model_train.patient_ids[size_t(model_rows[i])];
            auto it = bundle.folds.fold_of.find(id);
            const int fold = it == bundle.folds.fold_of.end() ? 0 : it->second;
            (fold == f ? in_fold : out_fold).push_back(int64_t(i));
        }
        if (in_fold.size() < 2 || out_fold.size() < 8) continue;
        try {
            Eigen::MatrixXd xt(out_fold.size(), fit_table.n_features());
            std::vector<SurvivalRecord> rt;
            for (size_t i = 0; i < out_fold.size(); ++i) {
                xt.row(Eigen::Index(i)) = fit_table.values.row(Eigen::Index(out_fold[i]));
                rt.push_back(fit_records[size_t(out_fold[i])]);
            }
            const CoxModel fold_model = cox_fit(xt, rt, fit_table.feature_names, cox_opt);
            std::vector<double> risks;
            std::vector<SurvivalRecord> rv;
            for (const int64_t i : in_fold) {
                risks.push_back(fold_model.risk_score_row(fit_table.values.row(Eigen::Index(i))));
                rv.push_back(fit_records[size_t(i)]);
            }
            bundle.fold_cindex.push_back(concordance_index(risks, rv));
            fold_sum += bundle.fold_cindex.back();
            ++fold_count;
        } catch (const error& e) {
            bundle.warnings.push_back("fold " + std::to_string(f) + " skipped: " + e.what());
        }
    }
    if (fold_count > 0) bundle.mean_fold_cindex = fold_sum / fold_count;

    // Test C-index where outcomes exist.
    {
        std::vector<double> risks;
        std::vector<SurvivalRecord> rec;
        const FeatureMatrix sel = test_table.select_features(final_features);
        for (int64_t r = 0; r < sel.n_patients(); ++r) {
            if (!test_survival[size_t(r)]) continue;
            bool finite = true;
            for (int64_t c = 0; c < sel.n_features(); ++c)
                if (!std::isfinite(sel.values(r, c))) finite = false;
            if (!finite) continue;
            double s = 0;
            for (int64_t c = 0; c < sel.n_features(); ++c)
                s += bundle.model.coefficients[c] * (sel.values(r, c) - bundle.model.mean[c]) /
                     bundle.model.sd[c];
            risks.push_back(s);
            rec.push_back(*test_survival[size_t(r)]);
        }
        if (!rec.empty()) {
            try {
                bundle.test_cindex = concordance_index(risks, rec);
            } catch (const fit_error&) {
            }
        }
    }
    return bundle;
}

} // namespace hnrad

#endif
