#ifndef HNRAD_COMBAT_HPP
#define HNRAD_COMBAT_HPP

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hnrad/errors.hpp"
#include "hnrad/feature_matrix.hpp"
#include "hnrad/geometry.hpp"

namespace hnrad {

/// Frozen harmonization estimates: location/scale standardization per feature
/// plus empirical-Bayes batch effects per center.
struct CombatModel {
    std::vector<std::string> feature_names;
    std::vector<std::string> batches; // center labels, fit order
    bool use_gender = true, use_age = true, use_weight = true;
    double age_mean = 0, age_sd = 1, weight_mean = 0, weight_sd = 1;
    Eigen::VectorXd alpha;           // G    grand intercept
    Eigen::MatrixXd beta_cov;        // C x G covariate effects (C = kept covariates)
    Eigen::VectorXd sigma;           // G    pooled residual SD
    Eigen::MatrixXd gamma_star;      // B x G EB batch locations
    Eigen::MatrixXd delta_star;      // B x G EB batch scales (variances)

    int batch_index(const std::string& center) const {
        for (size_t b = 0; b < batches.size(); ++b)
            if (batches[b] == center) return int(b);
        return -1;
    }
};

namespace detail {

struct CombatDesign {
    std::vector<std::string> batches;
    std::vector<int> batch_of;     // per row
    Eigen::MatrixXd covariates;    // n x C (kept columns, standardized)
    bool use_gender, use_age, use_weight;
    double age_mean, age_sd, weight_mean, weight_sd;
};

inline CombatDesign build_design(const FeatureMatrix& m) {
    CombatDesign d;
    const int64_t n = m.n_patients();
    d.batch_of.resize(size_t(n));
    std::map<std::string, int> batch_ids;
    for (int64_t r = 0; r < n; ++r) {
        const std::string& c = m.center[size_t(r)];
        auto [it, inserted] = batch_ids.try_emplace(c, int(d.batches.size()));
        if (inserted) d.batches.push_back(c);
        d.batch_of[size_t(r)] = it->second;
    }

    auto moments = [&](auto getter) {
        double mean = 0, var = 0;
        for (int64_t r = 0; r < n; ++r) mean += getter(m.covariates[size_t(r)]) / double(n);
        for (int64_t r = 0; r < n; ++r) {
            const double dd = getter(m.covariates[size_t(r)]) - mean;
            var += dd * dd / double(n);
        }
        return std::pair<double, double>{mean, std::sqrt(var)};
    };
    const auto [gm, gs] = moments([](const Covariates& c) { return c.gender; });
    const auto [am, as] = moments([](const Covariates& c) { return c.age; });
    const auto [wm, ws] = moments([](const Covariates& c) { return c.weight; });
    // Constant covariates are collinear with the batch block; drop them.
    d.use_gender = gs > 1e-12;
    d.use_age = as > 1e-12;
    d.use_weight = ws > 1e-12;
    d.age_mean = am;
    d.age_sd = as > 1e-12 ? as : 1.0;
    d.weight_mean = wm;
    d.weight_sd = ws > 1e-12 ? ws : 1.0;

    const int n_cov = int(d.use_gender) + int(d.use_age) + int(d.use_weight);
    d.covariates.resize(n, n_cov);
    for (int64_t r = 0; r < n; ++r) {
        const Covariates& c = m.covariates[size_t(r)];
        int col = 0;
        if (d.use_gender) d.covariates(r, col++) = c.gender;
        if (d.use_age) d.covariates(r, col++) = (c.age - d.age_mean) / d.age_sd;
        if (d.use_weight) d.covariates(r, col++) = (c.weight - d.weight_mean) / d.weight_sd;
    }
    return d;
}

// Non-parametric empirical Bayes: each other feature's naive batch estimate,
// weighted by the likelihood of this feature's standardized batch data under
// it. Monte-Carlo integration over the empirical prior (leave-one-out).
inline void nonparametric_eb(const Eigen::VectorXd& gamma_hat, const Eigen::VectorXd& delta_hat,
                             const Eigen::VectorXd& z_sum, const Eigen::VectorXd& z_sq_sum,
                             double n_batch, Eigen::VectorXd& gamma_star,
                             Eigen::VectorXd& delta_star) {
    const int g_count = int(gamma_hat.size());
    gamma_star.resize(g_count);
    delta_star.resize(g_count);
    std::vector<double> log_w(static_cast<size_t>(g_count));

    for (int g = 0; g < g_count; ++g) {
        double max_lw = -std::numeric_limits<double>::infinity();
        for (int d = 0; d < g_count; ++d) {
            if (d == g || delta_hat[d] <= 1e-12) {
                log_w[size_t(d)] = -std::numeric_limits<double>::infinity();
                continue;
            }
            // sum_j (z_j - gamma_d)^2 = sum z^2 - 2 gamma_d sum z + n gamma_d^2
            const double ss =
                z_sq_sum[g] - 2.0 * gamma_hat[d] * z_sum[g] + n_batch * gamma_hat[d] * gamma_hat[d];
            const double lw =
                -0.5 * n_batch * std::log(2.0 * kPi * delta_hat[d]) - ss / (2.0 * delta_hat[d]);
            log_w[size_t(d)] = lw;
            max_lw = std::max(max_lw, lw);
        }
        if (!std::isfinite(max_lw)) {
            // No usable donor (single feature, or all donors degenerate).
            gamma_star[g] = gamma_hat[g];
            delta_star[g] = std::max(delta_hat[g], 1e-12);
            continue;
        }
        double w_sum = 0, g_acc = 0, d_acc = 0;
        for (int d = 0; d < g_count; ++d) {
            if (!std::isfinite(log_w[size_t(d)])) continue;
            const double w = std::exp(log_w[size_t(d)] - max_lw);
            w_sum += w;
            g_acc += w * gamma_hat[d];
            d_acc += w * delta_hat[d];
        }
        gamma_star[g] = g_acc / w_sum;
        delta_star[g] = d_acc / w_sum;
    }
}

} // namespace detail

/// Fit ComBat estimates on a feature matrix. Requires every batch to have at
/// least two patients, finite values, and positive per-feature variance.
/// A single batch is permitted (harmonization is then a near-identity).
inline CombatModel combat_fit(const FeatureMatrix& m, Eigen::MatrixXd* z_out = nullptr,
                              std::vector<int>* batch_of_out = nullptr) {
    const int64_t n = m.n_patients();
    const int64_t g_count = m.n_features();
    if (n < 2) throw batch_size_error("combat: need at least two patients");
    if (!m.values.allFinite()) throw fit_error("combat: missing or non-finite feature values");

    const detail::CombatDesign dsg = detail::build_design(m);
    const int n_batch = int(dsg.batches.size());
    std::vector<int64_t> batch_sizes(size_t(n_batch), 0);
    for (const int b : dsg.batch_of) ++batch_sizes[size_t(b)];
    for (int b = 0; b < n_batch; ++b)
        if (batch_sizes[size_t(b)] < 2)
            throw batch_size_error("combat: batch '" + dsg.batches[size_t(b)] +
                                   "' has fewer than 2 patients");

    for (int64_t g = 0; g < g_count; ++g) {
        const double var = (m.values.col(g).array() - m.values.col(g).mean()).square().mean();
        if (var <= 0.0)
            throw fit_error("combat: feature '" + m.feature_names[size_t(g)] + "' has zero variance");
    }

    // Full design: batch one-hots then covariates.
    const int n_cov = int(dsg.covariates.cols());
    Eigen::MatrixXd design(n, n_batch + n_cov);
    design.setZero();
    for (int64_t r = 0; r < n; ++r) design(r, dsg.batch_of[size_t(r)]) = 1.0;
    design.rightCols(n_cov) = dsg.covariates;

    const Eigen::MatrixXd dtd = design.transpose() * design;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(dtd);
    if (lu.rank() < dtd.rows())
        throw design_error("combat: singular design (a batch is nested in a covariate?)");
    const Eigen::MatrixXd coef = lu.solve(design.transpose() * m.values); // (B+C) x G

    CombatModel model;
    model.feature_names = m.feature_names;
    model.batches = dsg.batches;
    model.use_gender = dsg.use_gender;
    model.use_age = dsg.use_age;
    model.use_weight = dsg.use_weight;
    model.age_mean = dsg.age_mean;
    model.age_sd = dsg.age_sd;
    model.weight_mean = dsg.weight_mean;
    model.weight_sd = dsg.weight_sd;
    model.beta_cov = coef.bottomRows(n_cov);

    // Grand intercept: batch effects weighted by batch size.
    model.alpha.resize(g_count);
    for (int64_t g = 0; g < g_count; ++g) {
        double a = 0;
        for (int b = 0; b < n_batch; ++b)
            a += double(batch_sizes[size_t(b)]) / double(n) * coef(b, g);
        model.alpha[g] = a;
    }

    // Pooled residual SD from the full fit (batch effects included).
    const Eigen::MatrixXd residual = m.values - design * coef;
    model.sigma = (residual.array().square().colwise().mean()).sqrt();
    for (int64_t g = 0; g < g_count; ++g)
        if (model.sigma[g] <= 0.0)
            throw fit_error("combat: feature '" + m.feature_names[size_t(g)] +
                            "' is fully explained by the design (zero residual)");

    // Standardize: remove intercept and covariates, keep batch effects.
    Eigen::MatrixXd z = m.values;
    z.rowwise() -= model.alpha.transpose();
    z -= dsg.covariates * model.beta_cov;
    z.array().rowwise() /= model.sigma.transpose().array();

    // Naive per-batch estimates, then non-parametric EB shrinkage.
    model.gamma_star.resize(n_batch, g_count);
    model.delta_star.resize(n_batch, g_count);
    for (int b = 0; b < n_batch; ++b) {
        const double nb = double(batch_sizes[size_t(b)]);
        Eigen::VectorXd z_sum = Eigen::VectorXd::Zero(g_count);
        Eigen::VectorXd z_sq = Eigen::VectorXd::Zero(g_count);
        for (int64_t r = 0; r < n; ++r) {
            if (dsg.batch_of[size_t(r)] != b) continue;
            z_sum += z.row(r).transpose();
            z_sq += z.row(r).array().square().matrix().transpose();
        }
        const Eigen::VectorXd gamma_hat = z_sum / nb;
        const Eigen::VectorXd delta_hat =
            (z_sq / nb - gamma_hat.array().square().matrix()).cwiseMax(0.0);

        Eigen::VectorXd gamma_s, delta_s;
        detail::nonparametric_eb(gamma_hat, delta_hat, z_sum, z_sq, nb, gamma_s, delta_s);
        model.gamma_star.row(b) = gamma_s.transpose();
        model.delta_star.row(b) = delta_s.transpose();
    }

    if (z_out) *z_out = std::move(z);
    if (batch_of_out) *batch_of_out = dsg.batch_of;
    return model;
}

/// Remove the fitted batch effects and restore intercept + covariate signal.
inline FeatureMatrix combat_harmonize(const FeatureMatrix& m) {
    Eigen::MatrixXd z;
    std::vector<int> batch_of;
    const CombatModel model = combat_fit(m, &z, &batch_of);

    const detail::CombatDesign dsg = detail::build_design(m); // same standardization as the fit
    FeatureMatrix out = m;
    for (int64_t r = 0; r < m.n_patients(); ++r) {
        const int b = batch_of[size_t(r)];
        for (int64_t g = 0; g < m.n_features(); ++g) {
            const double dstar = std::sqrt(std::max(model.delta_star(b, g), 1e-24));
            const double z_adj = (z(r, g) - model.gamma_star(b, g)) / dstar;
            double xb = model.alpha[g];
            for (int c = 0; c < dsg.covariates.cols(); ++c)
                xb += dsg.covariates(r, c) * model.beta_cov(c, g);
            out.values(r, g) = model.sigma[g] * z_adj + xb;
        }
    }
    return out;
}

/// Apply frozen estimates to new rows. Rows from centers unseen in the fit
/// are left unadjusted and reported in `warnings`.
inline FeatureMatrix combat_apply(const CombatModel& model, const FeatureMatrix& m,
                                  std::vector<std::string>* warnings = nullptr) {
    if (m.feature_names != model.feature_names)
        throw schema_error("combat_apply: feature names do not match the fitted model");
    FeatureMatrix out = m;
    for (int64_t r = 0; r < m.n_patients(); ++r) {
        const int b = model.batch_index(m.center[size_t(r)]);
        if (b < 0) {
            if (warnings)
                warnings->push_back("center '" + m.center[size_t(r)] +
                                    "' unseen at fit time; row left unadjusted");
            continue;
        }
        const Covariates& c = m.covariates[size_t(r)];
        std::vector<double> cov;
        if (model.use_gender) cov.push_back(c.gender);
        if (model.use_age) cov.push_back((c.age - model.age_mean) / model.age_sd);
        if (model.use_weight) cov.push_back((c.weight - model.weight_mean) / model.weight_sd);
        for (int64_t g = 0; g < m.n_features(); ++g) {
            double xb = model.alpha[g];
            for (size_t cc = 0; cc < cov.size(); ++cc) xb += cov[cc] * model.beta_cov(int(cc), g);
            const double z = (m.values(r, g) - xb) / model.sigma[g];
            const double dstar = std::sqrt(std::max(model.delta_star(b, g), 1e-24));
            out.values(r, g) = model.sigma[g] * (z - model.gamma_star(b, g)) / dstar + xb;
        }
    }
    return out;
}

/// The joint train+test harmonization used by the prognostic pipeline: the
/// two tables are concatenated, harmonized once, and split back in order.
/// NOTE: this pools test-set center statistics into the harmonization by
/// design (center labels are known for test patients, outcomes are not);
/// use combat_fit + combat_apply for a train-only protocol.
inline std::pair<FeatureMatrix, FeatureMatrix> joint_fit_transform(const FeatureMatrix& train,
                                                                   const FeatureMatrix& test) {
    if (train.feature_names != test.feature_names)
        throw schema_error("joint_fit_transform: feature name mismatch");
    for (const auto& id : test.patient_ids)
        for (const auto& tid : train.patient_ids)
            if (id == tid) throw schema_error("joint_fit_transform: patient '" + id + "' in both sets");

    FeatureMatrix joint;
    joint.feature_names = train.feature_names;
    joint.patient_ids = train.patient_ids;
    joint.patient_ids.insert(joint.patient_ids.end(), test.patient_ids.begin(),
                             test.patient_ids.end());
    joint.center = train.center;
    joint.center.insert(joint.center.end(), test.center.begin(), test.center.end());
    joint.covariates = train.covariates;
    joint.covariates.insert(joint.covariates.end(), test.covariates.begin(),
                            test.covariates.end());
    joint.values.resize(train.values.rows() + test.values.rows(), train.values.cols());
    joint.values.topRows(train.values.rows()) = train.values;
    joint.values.bottomRows(test.values.rows()) = test.values;

    const FeatureMatrix harmonized = combat_harmonize(joint);

    FeatureMatrix train_out = train, test_out = test;
    train_out.values = harmonized.values.topRows(train.values.rows());
    test_out.values = harmonized.values.bottomRows(test.values.rows());
    return {train_out, test_out};
}

} // namespace hnrad

#endif
