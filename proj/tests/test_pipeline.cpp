#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "hnrad/pipeline.hpp"

#include "helpers.hpp"

using namespace hnrad;
using hnrad_tests::geometry;
using hnrad_tests::temp_path;

namespace {

struct SyntheticCohort {
    FeatureMatrix features;
    std::vector<std::optional<SurvivalRecord>> survival;
};

// Multi-center cohort: two "radiomics" features carry the hazard, the rest is
// noise; every radiomics feature receives a per-center location shift.
SyntheticCohort synthetic_cohort(int n, const std::vector<std::string>& centers,
                                 const std::vector<int>& center_counts, uint64_t seed,
                                 int n_noise = 18, int n_without_survival = 0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0, 1);
    std::uniform_real_distribution<double> shift(-3.0, 3.0);
    std::uniform_real_distribution<double> u(1e-12, 1.0);

    SyntheticCohort cohort;
    FeatureMatrix& m = cohort.features;
    m.feature_names = {"PET-GLCM-sig1", "CT-GLSZM-sig2"};
    for (int g = 0; g < n_noise; ++g) m.feature_names.push_back("PET-NGTDM-n" + std::to_string(g));
    const int p = int(m.feature_names.size());

    std::map<std::string, std::vector<double>> center_shift;
    for (const auto& c : centers) {
        std::vector<double> s(static_cast<size_t>(p));
        for (auto& v : s) v = shift(rng);
        center_shift[c] = s;
    }

    m.values.resize(n, p);
    int row = 0;
    for (size_t c = 0; c < centers.size(); ++c) {
        for (int i = 0; i < center_counts[c] && row < n; ++i, ++row) {
            m.patient_ids.push_back(centers[c] + "-" + std::to_string(row));
            m.center.push_back(centers[c]);
            Covariates cov;
            cov.gender = double(rng() % 2);
            cov.age = 40 + double(rng() % 40);
            cov.weight = 50 + double(rng() % 60);
            m.covariates.push_back(cov);

            const double bio1 = nd(rng), bio2 = nd(rng);
            m.values(row, 0) = bio1 + center_shift[centers[c]][0];
            m.values(row, 1) = bio2 + center_shift[centers[c]][1];
            for (int g = 2; g < p; ++g)
                m.values(row, g) = nd(rng) + center_shift[centers[c]][size_t(g)];

            const double hazard = 0.08 * std::exp(2.0 * bio1 - 1.7 * bio2);
            const double t = -std::log(u(rng)) / hazard;
            const double censor = 25.0;
            cohort.survival.push_back(SurvivalRecord{std::min(t, censor), t <= censor});
        }
    }
    for (int i = 0; i < n_without_survival && i < n; ++i)
        cohort.survival[size_t(i * 7 % n)] = std::nullopt;
    return cohort;
}

} // namespace

TEST_CASE("assign_folds") {
    SUBCASE("489 patients with 197 MDA give (98,98,98,98,97)") {
        std::vector<std::pair<std::string, std::string>> patients;
        for (int i = 0; i < 197; ++i) patients.emplace_back("M" + std::to_string(i), "MDA");
        for (int i = 0; i < 292; ++i)
            patients.emplace_back("O" + std::to_string(i), "C" + std::to_string(i % 6));
        const FoldAssignment fa = assign_folds(patients, 20220901);
        CHECK(fa.sizes() == std::vector<int>{98, 98, 98, 98, 97});
        for (const auto& [id, f] : fa.fold_of)
            if (f == 5) CHECK(id[0] == 'M');
        CHECK(fa.warnings.empty());
    }

    SUBCASE("deterministic per seed, different across seeds") {
        std::vector<std::pair<std::string, std::string>> patients;
        for (int i = 0; i < 300; ++i)
            patients.emplace_back("P" + std::to_string(i), i < 120 ? "MDA" : "X");
        const FoldAssignment a = assign_folds(patients, 7);
        const FoldAssignment b = assign_folds(patients, 7);
        const FoldAssignment c = assign_folds(patients, 8);
        CHECK(a.fold_of == b.fold_of);
        CHECK(a.fold_of != c.fold_of);
        CHECK(a.sizes()[4] == 97);
        CHECK(c.sizes()[4] == 97);
    }

    SUBCASE("fewer than 97 held-center patients takes all of them, with a warning") {
        std::vector<std::pair<std::string, std::string>> patients;
        for (int i = 0; i < 150; ++i)
            patients.emplace_back("P" + std::to_string(i), i < 40 ? "MDA" : "X");
        const FoldAssignment fa = assign_folds(patients, 1);
        CHECK(fa.sizes()[4] == 40);
        CHECK(!fa.warnings.empty());
        int sum = 0;
        for (const int s : fa.sizes()) sum += s;
        CHECK(sum == 150);
        for (int f = 0; f < 4; ++f) {
            CHECK(fa.sizes()[size_t(f)] >= 110 / 4);
            CHECK(fa.sizes()[size_t(f)] <= 110 / 4 + 1);
        }
    }
}

TEST_CASE("run_model: radiomics-combat recovers the signal across centers") {
    const std::vector<std::string> train_centers = {"MDA", "A", "B", "C", "D", "E", "F"};
    const std::vector<int> train_counts = {197, 60, 50, 50, 45, 45, 42}; // 489
    SyntheticCohort train = synthetic_cohort(489, train_centers, train_counts, 101);
    SyntheticCohort test = synthetic_cohort(150, {"MDA", "G", "H"}, {60, 50, 40}, 202);
    for (auto& id : test.features.patient_ids) id = "T" + id;

    const ModelBundle bundle = run_model(Recipe::radiomics_combat, train.features, train.survival,
                                         test.features, test.survival);

    CHECK(bundle.folds.sizes() == std::vector<int>{98, 98, 98, 98, 97});
    bool sig1 = false, sig2 = false;
    for (const auto& f : bundle.model.feature_names) {
        sig1 |= f == "PET-GLCM-sig1";
        sig2 |= f == "CT-GLSZM-sig2";
    }
    CHECK(sig1);
    CHECK(sig2);
    REQUIRE(bundle.test_cindex.has_value());
    CHECK(*bundle.test_cindex >= 0.80);
    REQUIRE(bundle.train_cindex.has_value());
    CHECK(*bundle.train_cindex >= 0.80);
    CHECK(std::isfinite(bundle.mean_fold_cindex));

    // Selection nesting invariant.
    CHECK(bundle.selection.kept_after_lasso.size() <=
          bundle.selection.kept_after_correlation.size());
    CHECK(bundle.selection.kept_after_correlation.size() <=
          bundle.selection.kept_after_univariate.size());

    SUBCASE("deterministic across runs") {
        const ModelBundle again = run_model(Recipe::radiomics_combat, train.features,
                                            train.survival, test.features, test.survival);
        REQUIRE(again.model.coefficients.size() == bundle.model.coefficients.size());
        CHECK((again.model.coefficients - bundle.model.coefficients).cwiseAbs().maxCoeff() == 0.0);
        CHECK(again.test_cindex == bundle.test_cindex);
    }
}

TEST_CASE("run_model: conventional recipe stays within the conventional schema") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd(0, 1);
    std::uniform_real_distribution<double> u(1e-12, 1.0);
    const int n = 300;

    FeatureMatrix m;
    m.feature_names = conventional_feature_names();
    const int p = int(m.feature_names.size());
    m.values.resize(n, p);
    std::vector<std::optional<SurvivalRecord>> survival;
    for (int i = 0; i < n; ++i) {
        m.patient_ids.push_back("P" + std::to_string(i));
        m.center.push_back(i % 3 == 0 ? "MDA" : "B");
        m.covariates.push_back({double(i % 2), 60.0, 75.0});
        for (int g = 0; g < p; ++g) m.values(i, g) = nd(rng);
        const double hazard = 0.08 * std::exp(1.4 * m.values(i, m.feature_index("tlg25")));
        const double t = -std::log(u(rng)) / hazard;
        survival.push_back(SurvivalRecord{std::min(t, 20.0), t <= 20.0});
    }
    FeatureMatrix test = m.select_rows({0, 1, 2, 3, 4, 5, 6, 7});
    for (auto& id : test.patient_ids) id += "_t";
    std::vector<std::optional<SurvivalRecord>> test_survival(test.patient_ids.size(),
                                                             std::nullopt);

    const ModelBundle bundle = run_model(Recipe::conventional, m, survival, test, test_survival);
    for (const auto& f : bundle.model.feature_names) CHECK(is_conventional_feature(f));
    bool has_tlg25 = false;
    for (const auto& f : bundle.model.feature_names) has_tlg25 |= f == "tlg25";
    CHECK(has_tlg25);
    CHECK_FALSE(bundle.test_cindex.has_value()); // no outcomes in the test table
    CHECK(bundle.test_risks.size() == test.patient_ids.size());
}

TEST_CASE("run_model: combined recipe unions radiomics and conventional sets") {
    SyntheticCohort train = synthetic_cohort(300, {"MDA", "A", "B"}, {120, 100, 80}, 55, 10);
    // Conventional columns, one informative (correlated with the sig1 signal).
    FeatureMatrix conv;
    conv.feature_names = conventional_feature_names();
    conv.patient_ids = train.features.patient_ids;
    conv.center = train.features.center;
    conv.covariates = train.features.covariates;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd(0, 1);
    conv.values.resize(train.features.values.rows(), Eigen::Index(conv.feature_names.size()));
    for (int64_t r = 0; r < conv.values.rows(); ++r) {
        for (int64_t c = 0; c < conv.values.cols(); ++c) conv.values(r, c) = nd(rng);
        conv.values(r, conv.feature_index("num_nodes")) =
            train.features.values(r, 0) + 0.3 * nd(rng);
    }
    const FeatureMatrix full = merge_features(train.features, conv);

    SyntheticCohort test = synthetic_cohort(80, {"MDA", "G"}, {40, 40}, 66, 10);
    for (auto& id : test.features.patient_ids) id = "T" + id;
    FeatureMatrix test_conv;
    test_conv.feature_names = conv.feature_names;
    test_conv.patient_ids = test.features.patient_ids;
    test_conv.center = test.features.center;
    test_conv.covariates = test.features.covariates;
    test_conv.values.resize(test.features.values.rows(), Eigen::Index(conv.feature_names.size()));
    for (int64_t r = 0; r < test_conv.values.rows(); ++r)
        for (int64_t c = 0; c < test_conv.values.cols(); ++c) test_conv.values(r, c) = nd(rng);
    const FeatureMatrix test_full = merge_features(test.features, test_conv);

    const ModelBundle bundle =
        run_model(Recipe::combined, full, train.survival, test_full, test.survival);
    bool any_rad = false, any_conv = false;
    for (const auto& f : bundle.model.feature_names) {
        any_rad |= is_radiomics_feature(f);
        any_conv |= is_conventional_feature(f);
    }
    CHECK(any_rad);
    CHECK(any_conv);
}

TEST_CASE("batch_extract on a synthetic three-patient batch") {
    std::vector<PatientRecord> manifest;
    const Index3 dims{64, 64, 96};
    for (int p = 0; p < 3; ++p) {
        VoxelGrid pet = make_grid(geometry(dims), 0.4f);
        VoxelGrid ct = make_grid(geometry(dims), 30.0f);
        ct.values[0] = -700.0f;
        LabelMask mask = make_mask(geometry(dims));

        // Brain: bright ball near the top.
        const int bz = 80 + p;
        for (int k = bz - 6; k <= bz + 6; ++k)
            for (int j = 26; j <= 38; ++j)
                for (int i = 26; i <= 38; ++i)
                    if ((i - 32) * (i - 32) + (j - 32) * (j - 32) + (k - bz) * (k - bz) <= 36)
                        pet.at(i, j, k) = 9.0f;
        // GTVp blob and one GTVn node well below the brain.
        for (int k = 40; k <= 44; ++k)
            for (int j = 30; j <= 34; ++j)
                for (int i = 30; i <= 34; ++i) {
                    mask.at(i, j, k) = 1;
                    pet.at(i, j, k) = float(4.0 + p + ((i + j + k) % 3));
                }
        for (int k = 36; k <= 37; ++k)
            for (int j = 40; j <= 41; ++j)
                for (int i = 40; i <= 41; ++i) {
                    mask.at(i, j, k) = 2;
                    pet.at(i, j, k) = 3.5f;
                }

        PatientRecord rec;
        rec.patient_id = "PH" + std::to_string(p);
        rec.center = p == 0 ? "MDA" : "B";
        rec.pet_path = temp_path("pet" + std::to_string(p) + ".nii.gz");
        rec.ct_path = temp_path("ct" + std::to_string(p) + ".nii.gz");
        rec.mask_path = temp_path("mask" + std::to_string(p) + ".nii.gz");
        rec.covariates = {1.0, 60.0, 80.0};
        rec.rfs_time = 12.0;
        rec.rfs_event = true;
        save_volume(pet, rec.pet_path);
        save_volume(ct, rec.ct_path);
        save_volume(mask, rec.mask_path);
        manifest.push_back(rec);
    }

    ExtractConfig cfg;
    cfg.threads = 2;
    const BatchExtractResult result = batch_extract(manifest, cfg);

    CHECK(result.failures.empty());
    CHECK(result.conventional.patient_ids.size() == 3);
    CHECK(result.radiomics.patient_ids.size() == 3);
    CHECK(result.conventional.feature_names == conventional_feature_names());
    CHECK(result.radiomics.n_features() > 200);
    for (int64_t r = 0; r < 3; ++r) {
        CHECK(result.conventional.values(r, 2) == doctest::Approx(1.0)); // num_nodes
        CHECK(result.conventional.values(r, 3) > 3.0);                   // suv_max
    }
    REQUIRE(result.locator.size() == 3);
    for (const auto& lo : result.locator) {
        CHECK(lo.result.mode == LocatorResult::Mode::automatic);
        for (int a = 0; a < 3; ++a) CHECK(lo.result.box.size[a] == doctest::Approx(224.0));
    }

    SUBCASE("corrupt file is isolated, batch continues") {
        std::vector<PatientRecord> broken = manifest;
        broken[1].pet_path = temp_path("corrupt.nii");
        {
            std::ofstream f(broken[1].pet_path, std::ios::binary);
            f << "garbage";
        }
        const BatchExtractResult partial = batch_extract(broken, cfg);
        CHECK(partial.conventional.patient_ids.size() == 2);
        REQUIRE(partial.failures.size() == 1);
        CHECK(partial.failures[0].patient_id == "PH1");
        CHECK(partial.failures[0].stage == "load");
    }

    SUBCASE("re-running over unchanged inputs is idempotent") {
        const BatchExtractResult again = batch_extract(manifest, cfg);
        REQUIRE(again.radiomics.values.rows() == result.radiomics.values.rows());
        CHECK((again.radiomics.values - result.radiomics.values).cwiseAbs().maxCoeff() == 0.0);
        CHECK((again.conventional.values - result.conventional.values).cwiseAbs().maxCoeff() ==
              0.0);
    }

    SUBCASE("empty manifest is fatal") {
        CHECK_THROWS_AS(batch_extract({}, cfg), pipeline_error);
    }
}

TEST_CASE("manifest CSV round trip") {
    const std::string path = temp_path("manifest.csv");
    {
        std::ofstream f(path);
        f << "patient_id,center,pet,ct,mask,truth_mask,gender,age,weight,rfs_time,rfs_event\n";
        f << "P1,MDA,/a/pet.nii,/a/ct.nii,/a/mask.nii,,M,61.5,82,14.2,1\n";
        f << "P2,CHUM,/b/pet.nii,/b/ct.nii,/b/mask.nii,/b/truth.nii,0,55,70,,\n";
    }
    const auto manifest = read_manifest_csv(path);
    REQUIRE(manifest.size() == 2);
    CHECK(manifest[0].covariates.gender == 1.0);
    CHECK(manifest[0].survival().has_value());
    CHECK(manifest[0].survival()->time == doctest::Approx(14.2));
    CHECK(manifest[1].truth_mask_path == "/b/truth.nii");
    CHECK_FALSE(manifest[1].survival().has_value());

    SUBCASE("duplicate ids rejected") {
        const std::string dup = temp_path("dup.csv");
        {
            std::ofstream f(dup);
            f << "patient_id,center,pet,ct,mask,gender,age,weight\n";
            f << "P1,A,x,y,z,1,60,70\nP1,B,x,y,z,0,50,60\n";
        }
        CHECK_THROWS_AS(read_manifest_csv(dup), schema_error);
    }
}
