// hnrad: head-and-neck PET/CT radiomics and prognosis pipeline.
//
// Subcommands: locate, crop, extract-conventional, extract-radiomics,
// harmonize, folds, fit, predict, evaluate-seg, evaluate-prognosis.
// Every flag can also come from a key=value config file via --config.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hnrad/combat.hpp"
#include "hnrad/eval.hpp"
#include "hnrad/pipeline.hpp"

using json = nlohmann::json;
using namespace hnrad;

namespace {

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string g_config_hash = "0";

std::string artifact_comment(uint64_t seed) {
    return "config_hash=" + g_config_hash + " seed=" + std::to_string(seed);
}

Vec3 parse_xyz(const std::string& s) {
    Vec3 v{};
    std::stringstream ss(s);
    std::string part;
    for (int a = 0; a < 3; ++a) {
        if (!std::getline(ss, part, ',')) throw CLI::ValidationError("expected x,y,z");
        v[size_t(a)] = std::stod(part);
    }
    return v;
}

json locator_to_json(const std::string& patient_id, const LocatorResult& r) {
    json j;
    j["config_hash"] = g_config_hash;
    if (!patient_id.empty()) j["patient_id"] = patient_id;
    j["mode"] = to_string(r.mode);
    if (r.mode != LocatorResult::Mode::failed) {
        j["box"] = {{"center", r.box.center}, {"size", r.box.size}};
    }
    if (r.brain_lowest_mm) j["brain_lowest_mm"] = *r.brain_lowest_mm;
    json checks = json::array();
    for (const auto& [name, ok] : r.checks) checks.push_back({{"name", name}, {"passed", ok}});
    j["checks"] = checks;
    j["checks_passed"] = r.checks_passed();
    return j;
}

void write_json(const std::string& path, const json& j) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream f(path);
    if (!f) throw io_error("cannot open " + path + " for writing");
    f << j.dump(2) << "\n";
}

// Features possibly spread over several CSVs, merged on patient_id.
FeatureMatrix load_feature_tables(const std::vector<std::string>& paths) {
    if (paths.empty()) throw schema_error("no feature tables given");
    FeatureMatrix m = read_features_csv(paths[0]);
    for (size_t i = 1; i < paths.size(); ++i) m = merge_features(m, read_features_csv(paths[i]));
    return m;
}

struct Cohort {
    FeatureMatrix features;
    std::vector<std::optional<SurvivalRecord>> survival;
};

Cohort load_cohort(const std::vector<std::string>& feature_paths, const std::string& clinical_path,
                   std::vector<std::string>* warnings) {
    Cohort c;
    c.features = load_feature_tables(feature_paths);
    const auto clinical = read_clinical_csv(clinical_path, warnings);
    join_clinical(c.features, clinical);
    std::map<std::string, const ClinicalRow*> by_id;
    for (const auto& row : clinical) by_id[row.patient_id] = &row;
    for (const auto& id : c.features.patient_ids) {
        const ClinicalRow* row = by_id.at(id);
        if (row->rfs_time && row->rfs_event)
            c.survival.push_back(SurvivalRecord{*row->rfs_time, *row->rfs_event});
        else
            c.survival.push_back(std::nullopt);
    }
    return c;
}

json model_to_json(const ModelBundle& bundle, uint64_t seed) {
    json j;
    j["config_hash"] = g_config_hash;
    j["seed"] = seed;
    j["recipe"] = to_string(bundle.recipe);
    j["features"] = bundle.model.feature_names;
    j["coefficients"] = std::vector<double>(
        bundle.model.coefficients.data(),
        bundle.model.coefficients.data() + bundle.model.coefficients.size());
    j["means"] = std::vector<double>(bundle.model.mean.data(),
                                     bundle.model.mean.data() + bundle.model.mean.size());
    j["sds"] = std::vector<double>(bundle.model.sd.data(),
                                   bundle.model.sd.data() + bundle.model.sd.size());
    j["fit"] = {{"log_partial_likelihood", bundle.model.log_partial_likelihood},
                {"iterations", bundle.model.iterations},
                {"converged", bundle.model.converged}};

    json sel;
    json uni = json::array();
    for (const auto& [name, c] : bundle.selection.univariate)
        uni.push_back({{"feature", name}, {"cindex", c}});
    sel["univariate"] = uni;
    sel["kept_after_univariate"] = bundle.selection.kept_after_univariate;
    sel["kept_after_correlation"] = bundle.selection.kept_after_correlation;
    sel["kept_after_lasso"] = bundle.selection.kept_after_lasso;
    sel["thresholds"] = {{"univariate_cindex", bundle.selection.univariate_threshold},
                         {"rho_max", bundle.selection.rho_max}};
    if (std::isfinite(bundle.selection.lasso_lambda))
        sel["thresholds"]["lasso_lambda"] = bundle.selection.lasso_lambda;
    j["selection"] = sel;

    j["cv"] = {{"fold_sizes", bundle.folds.sizes()},
               {"fold_cindex", bundle.fold_cindex},
               {"mean_fold_cindex", bundle.mean_fold_cindex}};
    if (bundle.train_cindex) j["train_cindex"] = *bundle.train_cindex;
    if (bundle.test_cindex) j["test_cindex"] = *bundle.test_cindex;
    j["warnings"] = bundle.warnings;
    return j;
}

CoxModel model_from_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw io_error("cannot open " + path);
    json j;
    f >> j;
    CoxModel m;
    m.feature_names = j.at("features").get<std::vector<std::string>>();
    const auto coefs = j.at("coefficients").get<std::vector<double>>();
    const auto means = j.at("means").get<std::vector<double>>();
    const auto sds = j.at("sds").get<std::vector<double>>();
    if (coefs.size() != m.feature_names.size() || means.size() != coefs.size() ||
        sds.size() != coefs.size())
        throw schema_error(path + ": inconsistent model arrays");
    m.coefficients = Eigen::Map<const Eigen::VectorXd>(coefs.data(), Eigen::Index(coefs.size()));
    m.mean = Eigen::Map<const Eigen::VectorXd>(means.data(), Eigen::Index(means.size()));
    m.sd = Eigen::Map<const Eigen::VectorXd>(sds.data(), Eigen::Index(sds.size()));
    m.converged = true;
    return m;
}

void write_risks_csv(const std::string& path,
                     const std::vector<std::pair<std::string, double>>& risks, uint64_t seed) {
    CsvTable t;
    t.header = {"patient_id", "risk"};
    for (const auto& [id, r] : risks) t.rows.push_back({id, format_double(r)});
    write_csv(path, t, artifact_comment(seed));
}

std::vector<PatientRecord> single_patient_manifest(const std::string& id, const std::string& pet,
                                                   const std::string& ct, const std::string& mask) {
    PatientRecord p;
    p.patient_id = id.empty() ? std::filesystem::path(pet).stem().string() : id;
    p.center = "";
    p.pet_path = pet;
    p.ct_path = ct;
    p.mask_path = mask;
    return {p};
}

int run_extract(const std::string& manifest_path, const std::string& pet, const std::string& ct,
                const std::string& mask, const std::string& patient_id, bool no_locate,
                const ExtractConfig& cfg_in, bool conventional, const std::string& out,
                const std::string& failures_path, uint64_t seed) {
    ExtractConfig cfg = cfg_in;
    cfg.run_locator = !no_locate;
    cfg.want_conventional = conventional;
    cfg.want_radiomics = !conventional;

    std::vector<PatientRecord> manifest;
    if (!manifest_path.empty()) {
        manifest = read_manifest_csv(manifest_path);
    } else {
        if (pet.empty() || mask.empty())
            throw schema_error("give either --manifest or --pet/--mask (and --ct for radiomics)");
        if (!conventional && ct.empty())
            throw schema_error("extract-radiomics needs --ct in single-patient mode");
        manifest = single_patient_manifest(patient_id, pet, ct.empty() ? pet : ct, mask);
        if (ct.empty()) cfg.run_locator = false; // no CT to sanity-check against
    }

    const BatchExtractResult result = batch_extract(manifest, cfg);
    const FeatureMatrix& table = conventional ? result.conventional : result.radiomics;
    write_features_csv(out, table, artifact_comment(seed));

    json failures = json::array();
    for (const auto& f : result.failures)
        failures.push_back(
            {{"patient_id", f.patient_id}, {"stage", f.stage}, {"message", f.message}});
    if (!failures_path.empty())
        write_json(failures_path, json{{"failures", failures}, {"flagged", result.flagged}});
    for (const auto& f : result.failures)
        std::cerr << "warning: " << f.patient_id << " failed at " << f.stage << ": " << f.message
                  << "\n";
    std::cerr << table.patient_ids.size() << " patients written to " << out << ", "
              << result.failures.size() << " failures\n";
    return result.failures.empty() ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Head-and-neck PET/CT radiomics and recurrence-free-survival pipeline"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Read options from a key=value config file (sections per subcommand)");

    {
        std::string joined;
        for (int i = 1; i < argc; ++i) {
            joined += argv[i];
            joined += ' ';
        }
        std::ostringstream hex;
        hex << std::hex << fnv1a(joined);
        g_config_hash = hex.str();
    }

    uint64_t seed = 20220901;
    app.add_option("--seed", seed, "Seed for all randomized steps");

    // ---- locate -----------------------------------------------------------
    auto* locate_cmd = app.add_subcommand("locate", "Place the 224mm oropharyngeal bounding box");
    std::string lo_pet, lo_ct, lo_mask, lo_override, lo_out;
    double lo_suv = 3.0, lo_frac = 0.3;
    locate_cmd->add_option("--pet", lo_pet, "PET volume (SUV)")->required();
    locate_cmd->add_option("--ct", lo_ct, "CT volume (HU)")->required();
    locate_cmd->add_option("--mask", lo_mask, "Optional ground-truth mask for containment check");
    locate_cmd->add_option("--suv-threshold", lo_suv, "Brain detection SUV threshold");
    locate_cmd->add_option("--top-fraction", lo_frac, "Superior fraction of axial slices searched");
    locate_cmd->add_option("--override-center", lo_override, "Manual box center x,y,z (mm)");
    locate_cmd->add_option("--out", lo_out, "Output JSON (default stdout)");
    locate_cmd->callback([&] {
        if (!lo_override.empty()) {
            write_json(lo_out, locator_to_json("", override_box(parse_xyz(lo_override))));
            return;
        }
        const VoxelGrid pet = load_scalar_volume(lo_pet);
        const VoxelGrid ct = load_scalar_volume(lo_ct);
        LabelMask mask;
        const LabelMask* mask_ptr = nullptr;
        if (!lo_mask.empty()) {
            mask = load_label_mask(lo_mask);
            mask_ptr = &mask;
        }
        const LocatorResult r = locate(pet, ct, mask_ptr, lo_suv, lo_frac);
        write_json(lo_out, locator_to_json("", r));
        if (r.mode == LocatorResult::Mode::failed) throw CLI::RuntimeError(3);
    });

    // ---- crop -------------------------------------------------------------
    auto* crop_cmd = app.add_subcommand("crop", "Crop volumes to the bounding box at 1mm");
    std::string cr_pet, cr_ct, cr_mask, cr_truth, cr_center, cr_locator, cr_outdir, cr_prefix;
    double cr_size = kBoxSizeMM, cr_spacing = 1.0;
    crop_cmd->add_option("--pet", cr_pet, "PET volume")->required();
    crop_cmd->add_option("--ct", cr_ct, "CT volume")->required();
    crop_cmd->add_option("--mask", cr_mask, "Predicted mask");
    crop_cmd->add_option("--truth-mask", cr_truth, "Ground-truth mask");
    crop_cmd->add_option("--center", cr_center, "Box center x,y,z (mm)");
    crop_cmd->add_option("--locator", cr_locator, "Locator result JSON (from `locate`)");
    crop_cmd->add_option("--size", cr_size, "Box edge length (mm)");
    crop_cmd->add_option("--spacing", cr_spacing, "Output voxel spacing (mm)");
    crop_cmd->add_option("--prefix", cr_prefix, "Output filename prefix");
    crop_cmd->add_option("--out-dir", cr_outdir, "Output directory")->required();
    crop_cmd->callback([&] {
        BoundingBoxMM box;
        box.size = {cr_size, cr_size, cr_size};
        if (!cr_center.empty()) {
            box.center = parse_xyz(cr_center);
        } else if (!cr_locator.empty()) {
            std::ifstream f(cr_locator);
            if (!f) throw io_error("cannot open " + cr_locator);
            json j;
            f >> j;
            if (j.at("mode") == "failed") throw pipeline_error("locator result has mode=failed");
            const auto c = j.at("box").at("center").get<std::vector<double>>();
            box.center = {c.at(0), c.at(1), c.at(2)};
        } else {
            throw schema_error("crop needs --center or --locator");
        }
        std::filesystem::create_directories(cr_outdir);
        const Vec3 sp{cr_spacing, cr_spacing, cr_spacing};
        auto path_for = [&](const std::string& name) {
            return (std::filesystem::path(cr_outdir) / (cr_prefix + name + ".nii.gz")).string();
        };
        save_volume(crop_to_box(load_scalar_volume(cr_pet), box, sp), path_for("pet"));
        save_volume(crop_to_box(load_scalar_volume(cr_ct), box, sp), path_for("ct"));
        if (!cr_mask.empty())
            save_volume(crop_to_box(load_label_mask(cr_mask), box, sp), path_for("mask"));
        if (!cr_truth.empty())
            save_volume(crop_to_box(load_label_mask(cr_truth), box, sp), path_for("truth"));
    });

    // ---- extract-conventional / extract-radiomics --------------------------
    struct ExtractArgs {
        std::string manifest, pet, ct, mask, patient_id, out, failures;
        bool no_locate = false;
        int threads = 1;
        double suv = 3.0, frac = 0.3;
    };
    ExtractArgs ec, er;
    int er_bins = 64;
    double er_spacing = 2.0;

    auto add_extract_options = [](CLI::App* cmd, ExtractArgs& a) {
        cmd->add_option("--manifest", a.manifest, "Manifest CSV (batch mode)");
        cmd->add_option("--pet", a.pet, "PET volume (single-patient mode)");
        cmd->add_option("--ct", a.ct, "CT volume");
        cmd->add_option("--mask", a.mask, "Predicted mask");
        cmd->add_option("--patient-id", a.patient_id, "Patient id for single-patient mode");
        cmd->add_flag("--no-locate", a.no_locate, "Inputs are already cropped; skip locate+crop");
        cmd->add_option("--threads", a.threads, "Worker threads for batch mode");
        cmd->add_option("--suv-threshold", a.suv, "Brain detection SUV threshold");
        cmd->add_option("--top-fraction", a.frac, "Superior slice fraction for brain detection");
        cmd->add_option("--failures", a.failures, "Write per-patient failure report JSON here");
        cmd->add_option("--out", a.out, "Output feature CSV")->required();
    };

    auto* conv_cmd =
        app.add_subcommand("extract-conventional", "The ten conventional PET features per patient");
    add_extract_options(conv_cmd, ec);
    conv_cmd->callback([&] {
        ExtractConfig cfg;
        cfg.threads = ec.threads;
        cfg.suv_threshold = ec.suv;
        cfg.top_fraction = ec.frac;
        const int rc = run_extract(ec.manifest, ec.pet, ec.ct, ec.mask, ec.patient_id, ec.no_locate,
                                   cfg, true, ec.out, ec.failures, seed);
        if (rc != 0) throw CLI::RuntimeError(rc);
    });

    auto* rad_cmd = app.add_subcommand("extract-radiomics",
                                       "Texture/morphology/intensity features per patient");
    add_extract_options(rad_cmd, er);
    rad_cmd->add_option("--bins", er_bins, "Fixed bin number for discretization");
    rad_cmd->add_option("--spacing", er_spacing, "Isotropic extraction spacing (mm)");
    rad_cmd->callback([&] {
        ExtractConfig cfg;
        cfg.threads = er.threads;
        cfg.suv_threshold = er.suv;
        cfg.top_fraction = er.frac;
        cfg.radiomics.n_bins = er_bins;
        cfg.radiomics.spacing = er_spacing;
        const int rc = run_extract(er.manifest, er.pet, er.ct, er.mask, er.patient_id, er.no_locate,
                                   cfg, false, er.out, er.failures, seed);
        if (rc != 0) throw CLI::RuntimeError(rc);
    });

    // ---- harmonize ----------------------------------------------------------
    auto* harm_cmd = app.add_subcommand("harmonize", "ComBat harmonization across centers");
    std::vector<std::string> ha_features, ha_test_features;
    std::string ha_clinical, ha_mode = "joint", ha_out, ha_test_out;
    harm_cmd->add_option("--features", ha_features, "Feature CSV (repeatable, merged)")->required();
    harm_cmd->add_option("--test-features", ha_test_features, "Test-set feature CSV (repeatable)");
    harm_cmd->add_option("--clinical", ha_clinical, "Clinical CSV with centers and covariates")
        ->required();
    harm_cmd->add_option("--mode", ha_mode, "joint | train-only")
        ->check(CLI::IsMember({"joint", "train-only"}));
    harm_cmd->add_option("--out", ha_out, "Harmonized training CSV")->required();
    harm_cmd->add_option("--test-out", ha_test_out, "Harmonized test CSV");
    harm_cmd->callback([&] {
        std::vector<std::string> warnings;
        Cohort train = load_cohort(ha_features, ha_clinical, &warnings);
        // Constant-by-construction columns (e.g. the FBN minimum level) carry
        // no batch effect and would abort the fit; drop them up front.
        const auto kept = detail::drop_degenerate_columns(train.features, &warnings);
        if (ha_test_features.empty()) {
            write_features_csv(ha_out, combat_harmonize(train.features), artifact_comment(seed));
        } else {
            Cohort test = load_cohort(ha_test_features, ha_clinical, &warnings);
            test.features = test.features.select_features(kept);
            if (ha_test_out.empty()) throw schema_error("--test-out required with --test-features");
            if (ha_mode == "joint") {
                // The published protocol: one harmonization over train+test.
                // This leaks test-center statistics; train-only freezes the
                // estimates on the training side instead.
                const auto [train_h, test_h] = joint_fit_transform(train.features, test.features);
                write_features_csv(ha_out, train_h, artifact_comment(seed));
                write_features_csv(ha_test_out, test_h, artifact_comment(seed));
            } else {
                const CombatModel model = combat_fit(train.features);
                write_features_csv(ha_out, combat_apply(model, train.features, &warnings),
                                   artifact_comment(seed));
                write_features_csv(ha_test_out, combat_apply(model, test.features, &warnings),
                                   artifact_comment(seed));
            }
        }
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    });

    // ---- folds -------------------------------------------------------------
    auto* folds_cmd = app.add_subcommand("folds", "Assign the five cross-validation folds");
    std::string fo_clinical, fo_out, fo_center = "MDA";
    int fo_size = 97;
    folds_cmd->add_option("--clinical", fo_clinical, "Clinical CSV")->required();
    folds_cmd->add_option("--held-center", fo_center, "Center reserved for fold 5");
    folds_cmd->add_option("--fold5-size", fo_size, "Target size of fold 5");
    folds_cmd->add_option("--out", fo_out, "Output CSV (patient_id,fold)")->required();
    folds_cmd->callback([&] {
        std::vector<std::string> warnings;
        const auto clinical = read_clinical_csv(fo_clinical, &warnings);
        std::vector<std::pair<std::string, std::string>> patients;
        for (const auto& row : clinical)
            if (row.rfs_time && row.rfs_event) patients.emplace_back(row.patient_id, row.center);
        const FoldAssignment fa = assign_folds(patients, seed, fo_center, fo_size);
        CsvTable t;
        t.header = {"patient_id", "fold"};
        for (const auto& row : clinical) {
            auto it = fa.fold_of.find(row.patient_id);
            if (it != fa.fold_of.end())
                t.rows.push_back({row.patient_id, std::to_string(it->second)});
        }
        write_csv(fo_out, t, artifact_comment(seed));
        for (const auto& w : fa.warnings) std::cerr << "warning: " << w << "\n";
    });

    // ---- fit ----------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "Select features and fit a prognostic Cox model");
    std::vector<std::string> fi_features, fi_test_features;
    std::string fi_clinical, fi_test_clinical, fi_model = "conventional";
    std::string fi_out = "model.json", fi_risks, fi_test_risks;
    double fi_uni_thr = 0.50, fi_rho = 0.60;
    bool fi_no_refit = false, fi_efron = false;
    std::string fi_held = "MDA";
    int fi_fold5 = 97;
    fit_cmd->add_option("--features", fi_features, "Training feature CSV (repeatable, merged)")
        ->required();
    fit_cmd->add_option("--clinical", fi_clinical, "Clinical CSV (train + test patients)")
        ->required();
    fit_cmd->add_option("--model", fi_model, "conventional | radiomics-combat | combined")
        ->check(CLI::IsMember({"conventional", "radiomics-combat", "combined"}));
    fit_cmd->add_option("--test-features", fi_test_features, "Test feature CSV (repeatable)");
    fit_cmd->add_option("--test-clinical", fi_test_clinical,
                        "Clinical CSV for the test set (defaults to --clinical)");
    fit_cmd->add_option("--univariate-threshold", fi_uni_thr, "Keep features with C-index above");
    fit_cmd->add_option("--rho-max", fi_rho, "Absolute Pearson correlation pruning threshold");
    fit_cmd->add_flag("--no-refit", fi_no_refit, "Keep penalized Lasso coefficients (no refit)");
    fit_cmd->add_flag("--efron", fi_efron, "Efron tie handling instead of Breslow");
    fit_cmd->add_option("--held-center", fi_held, "Center reserved for fold 5");
    fit_cmd->add_option("--fold5-size", fi_fold5, "Target size of fold 5");
    fit_cmd->add_option("--out", fi_out, "Model JSON");
    fit_cmd->add_option("--risks", fi_risks, "Training risk CSV");
    fit_cmd->add_option("--test-risks", fi_test_risks, "Test risk CSV");
    fit_cmd->callback([&] {
        std::vector<std::string> warnings;
        Cohort train = load_cohort(fi_features, fi_clinical, &warnings);
        Cohort test;
        if (!fi_test_features.empty()) {
            test = load_cohort(fi_test_features,
                               fi_test_clinical.empty() ? fi_clinical : fi_test_clinical, &warnings);
        } else {
            test.features.feature_names = train.features.feature_names;
            test.features.values.resize(0, train.features.values.cols());
        }

        RunModelConfig cfg;
        cfg.seed = seed;
        cfg.univariate_threshold = fi_uni_thr;
        cfg.rho_max = fi_rho;
        cfg.refit_unpenalized = !fi_no_refit;
        cfg.ties = fi_efron ? Ties::efron : Ties::breslow;
        cfg.held_center = fi_held;
        cfg.fold5_size = fi_fold5;

        const Recipe recipe = fi_model == "conventional"       ? Recipe::conventional
                              : fi_model == "radiomics-combat" ? Recipe::radiomics_combat
                                                               : Recipe::combined;
        const ModelBundle bundle =
            run_model(recipe, train.features, train.survival, test.features, test.survival, cfg);

        write_json(fi_out, model_to_json(bundle, seed));
        if (!fi_risks.empty()) write_risks_csv(fi_risks, bundle.train_risks, seed);
        if (!fi_test_risks.empty()) write_risks_csv(fi_test_risks, bundle.test_risks, seed);
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        for (const auto& w : bundle.warnings) std::cerr << "warning: " << w << "\n";
        std::cerr << "model: " << bundle.model.feature_names.size() << " features";
        if (bundle.train_cindex) std::cerr << ", train C-index " << *bundle.train_cindex;
        if (std::isfinite(bundle.mean_fold_cindex))
            std::cerr << ", mean fold C-index " << bundle.mean_fold_cindex;
        if (bundle.test_cindex) std::cerr << ", test C-index " << *bundle.test_cindex;
        std::cerr << "\n";
    });

    // ---- predict -------------------------------------------------------------
    auto* pred_cmd = app.add_subcommand("predict", "Score patients with a fitted model");
    std::vector<std::string> pr_features;
    std::string pr_model, pr_out;
    pred_cmd->add_option("--model", pr_model, "Model JSON from `fit`")->required();
    pred_cmd->add_option("--features", pr_features, "Feature CSV (repeatable, merged)")->required();
    pred_cmd->add_option("--out", pr_out, "Risk CSV")->required();
    pred_cmd->callback([&] {
        const CoxModel model = model_from_json(pr_model);
        const FeatureMatrix m = load_feature_tables(pr_features);
        const std::vector<double> risks = risk_scores(model, m);
        std::vector<std::pair<std::string, double>> rows;
        for (size_t i = 0; i < m.patient_ids.size(); ++i)
            rows.emplace_back(m.patient_ids[i], risks[i]);
        write_risks_csv(pr_out, rows, seed);
    });

    // ---- evaluate-seg ---------------------------------------------------------
    auto* seg_cmd = app.add_subcommand("evaluate-seg", "Per-case and aggregated Dice");
    std::string se_pred, se_truth, se_out;
    seg_cmd->add_option("--pred-dir", se_pred, "Directory of predicted masks")->required();
    seg_cmd->add_option("--truth-dir", se_truth, "Directory of ground-truth masks")->required();
    seg_cmd->add_option("--out", se_out, "Report JSON (default stdout)");
    seg_cmd->callback([&] {
        std::vector<std::string> names;
        for (const auto& entry : std::filesystem::directory_iterator(se_pred)) {
            const std::string name = entry.path().filename().string();
            if (nifti::ends_with(name, ".nii") || nifti::ends_with(name, ".nii.gz"))
                names.push_back(name);
        }
        std::sort(names.begin(), names.end());
        if (names.empty()) throw pipeline_error("no .nii/.nii.gz files in " + se_pred);

        DiceReport report;
        json skipped = json::array();
        for (const auto& name : names) {
            const auto truth_path = std::filesystem::path(se_truth) / name;
            if (!std::filesystem::exists(truth_path)) {
                skipped.push_back(name);
                continue;
            }
            const LabelMask pred = load_label_mask((std::filesystem::path(se_pred) / name).string());
            const LabelMask truth = load_label_mask(truth_path.string());
            report.cases.push_back(dice_case_counts(pred, truth, name));
        }
        if (report.cases.empty()) throw pipeline_error("no prediction/truth pairs matched by name");

        json j;
        j["config_hash"] = g_config_hash;
        j["seed"] = seed;
        json cases = json::array();
        for (const auto& c : report.cases)
            cases.push_back(
                {{"case", c.id}, {"dice_gtvp", c.dice_gtvp()}, {"dice_gtvn", c.dice_gtvn()}});
        j["cases"] = cases;
        j["aggregated"] = {{"gtvp", report.aggregated(1)},
                           {"gtvn", report.aggregated(2)},
                           {"mean", report.mean_aggregated()}};
        j["mean_per_case"] = {{"gtvp", report.mean_per_case(1)}, {"gtvn", report.mean_per_case(2)}};
        j["skipped"] = skipped;
        write_json(se_out, j);
    });

    // ---- evaluate-prognosis ----------------------------------------------------
    auto* prog_cmd = app.add_subcommand("evaluate-prognosis", "C-index of predicted risks");
    std::string ep_risks, ep_clinical, ep_out;
    prog_cmd->add_option("--risks", ep_risks, "Risk CSV (patient_id,risk)")->required();
    prog_cmd->add_option("--clinical", ep_clinical, "Clinical CSV with rfs_time/rfs_event")
        ->required();
    prog_cmd->add_option("--out", ep_out, "Output JSON (default stdout)");
    prog_cmd->callback([&] {
        const CsvTable t = read_csv(ep_risks);
        const int c_id = t.require_column("patient_id");
        const int c_risk = t.require_column("risk");
        std::vector<std::string> warnings;
        const auto clinical = read_clinical_csv(ep_clinical, &warnings);
        std::map<std::string, const ClinicalRow*> by_id;
        for (const auto& row : clinical) by_id[row.patient_id] = &row;

        std::vector<double> risks;
        std::vector<SurvivalRecord> records;
        int without_outcome = 0;
        for (const auto& row : t.rows) {
            auto it = by_id.find(row[size_t(c_id)]);
            if (it == by_id.end())
                throw schema_error("patient '" + row[size_t(c_id)] + "' missing from clinical table");
            if (!it->second->rfs_time || !it->second->rfs_event) {
                ++without_outcome;
                continue;
            }
            risks.push_back(parse_double(row[size_t(c_risk)], "risk"));
            records.push_back({*it->second->rfs_time, *it->second->rfs_event});
        }
        json j;
        j["config_hash"] = g_config_hash;
        j["seed"] = seed;
        j["patients_scored"] = risks.size();
        j["patients_without_outcome"] = without_outcome;
        j["cindex"] = concordance_index(risks, records);
        write_json(ep_out, j);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
