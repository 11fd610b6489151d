#ifndef HNRAD_SURVIVAL_HPP
#define HNRAD_SURVIVAL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hnrad/errors.hpp"
#include "hnrad/feature_matrix.hpp"

namespace hnrad {

/// Recurrence-free survival outcome: time to event or censoring.
struct SurvivalRecord {
    double time = 0;    // > 0
    bool event = false; // true = recurrence observed
};

inline void validate_records(const std::vector<SurvivalRecord>& records) {
    for (const auto& r : records)
        if (!(r.time > 0.0) || !std::isfinite(r.time))
            throw fit_error("survival time must be positive and finite");
}

// ------------------------------------------------------------- C-index -----

/// Harrell's concordance index. Permissible pair: time_i < time_j with an
/// observed event at time_i. Concordant when risk_i > risk_j; tied risks
/// count one half. Throws when no pair is permissible.
inline double concordance_index(const std::vector<double>& risks,
                                const std::vector<SurvivalRecord>& records) {
    if (risks.size() != records.size()) throw fit_error("concordance: size mismatch");
    validate_records(records);
    const size_t n = records.size();

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return records[a].time < records[b].time; });

    int64_t permissible = 0;
    double score = 0.0;
    for (size_t a = 0; a < n; ++a) {
        const size_t i = order[a];
        if (!records[i].event) continue;
        for (size_t b = a + 1; b < n; ++b) {
            const size_t j = order[b];
            if (records[j].time <= records[i].time) continue; // tied times are not permissible
            ++permissible;
            if (risks[i] > risks[j])
                score += 1.0;
            else if (risks[i] == risks[j])
                score += 0.5;
        }
    }
    if (permissible == 0) throw fit_error("concordance: no permissible pairs (all censored?)");
    return score / double(permissible);
}

// ------------------------------------------------------- Cox likelihood ----

enum class Ties { breslow, efron };

namespace detail {

struct CoxOrder {
    std::vector<size_t> by_time_desc;
    // Groups of equal time, ascending; each group lists subject indices and
    // which of them are events.
    struct Group {
        double time;
        std::vector<size_t> members;
        std::vector<size_t> events;
    };
    std::vector<Group> groups_asc;
};

inline CoxOrder build_order(const std::vector<SurvivalRecord>& records) {
    CoxOrder ord;
    const size_t n = records.size();
    ord.by_time_desc.resize(n);
    std::iota(ord.by_time_desc.begin(), ord.by_time_desc.end(), 0);
    std::sort(ord.by_time_desc.begin(), ord.by_time_desc.end(), [&](size_t a, size_t b) {
        if (records[a].time != records[b].time) return records[a].time > records[b].time;
        return a < b;
    });
    for (size_t p = 0; p < n;) {
        size_t q = p;
        CoxOrder::Group g;
        g.time = records[ord.by_time_desc[p]].time;
        while (q < n && records[ord.by_time_desc[q]].time == g.time) {
            const size_t idx = ord.by_time_desc[q];
            g.members.push_back(idx);
            if (records[idx].event) g.events.push_back(idx);
            ++q;
        }
        ord.groups_asc.push_back(std::move(g));
        p = q;
    }
    std::reverse(ord.groups_asc.begin(), ord.groups_asc.end()); // ascending time
    return ord;
}

struct CoxDerivatives {
    double loglik = 0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd neg_hessian; // observed information, positive semi-definite
};

// Breslow or Efron partial likelihood with analytic first/second derivatives.
// Walks event-time groups from the largest time down, accumulating the risk
// set sums S0, S1, S2.
inline CoxDerivatives cox_derivatives(const Eigen::MatrixXd& x,
                                      const std::vector<SurvivalRecord>& records,
                                      const Eigen::VectorXd& beta, Ties ties, bool want_hessian) {
    const Eigen::Index p = x.cols();
    const Eigen::VectorXd eta = x * beta;
    const Eigen::VectorXd w = eta.array().exp();

    CoxDerivatives d;
    d.gradient = Eigen::VectorXd::Zero(p);
    if (want_hessian) d.neg_hessian = Eigen::MatrixXd::Zero(p, p);

    const CoxOrder ord = build_order(records);
    double s0 = 0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd s2;
    if (want_hessian) s2 = Eigen::MatrixXd::Zero(p, p);

    for (auto git = ord.groups_asc.rbegin(); git != ord.groups_asc.rend(); ++git) {
        for (const size_t i : git->members) {
            s0 += w[Eigen::Index(i)];
            s1 += w[Eigen::Index(i)] * x.row(Eigen::Index(i)).transpose();
            if (want_hessian)
                s2 += w[Eigen::Index(i)] * x.row(Eigen::Index(i)).transpose() * x.row(Eigen::Index(i));
        }
        const size_t d_count = git->events.size();
        if (d_count == 0) continue;

        double t0 = 0;
        Eigen::VectorXd t1 = Eigen::VectorXd::Zero(p);
        Eigen::MatrixXd t2;
        if (want_hessian) t2 = Eigen::MatrixXd::Zero(p, p);
        for (const size_t i : git->events) {
            d.loglik += eta[Eigen::Index(i)];
            d.gradient += x.row(Eigen::Index(i)).transpose();
            if (ties == Ties::efron) {
                t0 += w[Eigen::Index(i)];
                t1 += w[Eigen::Index(i)] * x.row(Eigen::Index(i)).transpose();
                if (want_hessian)
                    t2 += w[Eigen::Index(i)] * x.row(Eigen::Index(i)).transpose() *
                          x.row(Eigen::Index(i));
            }
        }

        for (size_t l = 0; l < d_count; ++l) {
            const double frac = ties == Ties::efron ? double(l) / double(d_count) : 0.0;
            const double den = s0 - frac * t0;
            const Eigen::VectorXd num1 = ties == Ties::efron ? (s1 - frac * t1).eval() : s1;
            d.loglik -= std::log(den);
            d.gradient -= num1 / den;
            if (want_hessian) {
                const Eigen::MatrixXd num2 = ties == Ties::efron ? (s2 - frac * t2).eval() : s2;
                const Eigen::VectorXd m = num1 / den;
                d.neg_hessian += num2 / den - m * m.transpose();
            }
            if (ties == Ties::breslow) break;
        }
        if (ties == Ties::breslow) {
            // Breslow: d identical risk-set terms.
            const double den = s0;
            d.loglik -= double(d_count - 1) * std::log(den);
            d.gradient -= double(d_count - 1) * (s1 / den);
            if (want_hessian) {
                const Eigen::VectorXd m = s1 / den;
                d.neg_hessian += double(d_count - 1) * (s2 / den - m * m.transpose());
            }
        }
    }
    return d;
}

} // namespace detail

inline double cox_log_likelihood(const Eigen::MatrixXd& x, const std::vector<SurvivalRecord>& records,
                                 const Eigen::VectorXd& beta, Ties ties = Ties::breslow) {
    return detail::cox_derivatives(x, records, beta, ties, false).loglik;
}

inline Eigen::VectorXd cox_gradient(const Eigen::MatrixXd& x,
                                    const std::vector<SurvivalRecord>& records,
                                    const Eigen::VectorXd& beta, Ties ties = Ties::breslow) {
    return detail::cox_derivatives(x, records, beta, ties, false).gradient;
}

// ------------------------------------------------------------- Cox model ---

/// Cox proportional-hazards model. Coefficients live on the internally
/// standardized feature scale; `mean`/`sd` reproduce risk scores from raw
/// inputs. `llik_trace` records the Newton iterates (non-decreasing).
struct CoxModel {
    std::vector<std::string> feature_names;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;
    double log_partial_likelihood = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> llik_trace;

    double raw_coefficient(Eigen::Index j) const { return coefficients[j] / sd[j]; }

    double risk_score_row(const Eigen::RowVectorXd& raw) const {
        double s = 0;
        for (Eigen::Index j = 0; j < coefficients.size(); ++j)
            s += coefficients[j] * (raw[j] - mean[j]) / sd[j];
        return s;
    }
};

struct CoxOptions {
    double ridge_eps = 0.0;
    Ties ties = Ties::breslow;
    double tol = 1e-9;
    int max_iterations = 100;
};

/// Newton-Raphson maximization of the partial log-likelihood with
/// step-halving. Features are standardized internally; zero-variance
/// features and cohorts with fewer than two events are rejected.
inline CoxModel cox_fit(const Eigen::MatrixXd& x_raw, const std::vector<SurvivalRecord>& records,
                        const std::vector<std::string>& names, const CoxOptions& opt = {}) {
    const Eigen::Index n = x_raw.rows(), p = x_raw.cols();
    if (p < 1) throw fit_error("cox_fit: no features");
    if (int64_t(records.size()) != int64_t(n)) throw fit_error("cox_fit: size mismatch");
    if (names.size() != size_t(p)) throw fit_error("cox_fit: name count mismatch");
    validate_records(records);
    int n_events = 0;
    for (const auto& r : records) n_events += r.event ? 1 : 0;
    if (n_events < 2) throw fit_error("cox_fit: need at least two events");
    if (!x_raw.allFinite()) throw fit_error("cox_fit: non-finite feature values");

    CoxModel model;
    model.feature_names = names;
    model.mean = x_raw.colwise().mean();
    model.sd.resize(p);
    Eigen::MatrixXd x = x_raw;
    for (Eigen::Index j = 0; j < p; ++j) {
        x.col(j).array() -= model.mean[j];
        const double sd = std::sqrt(x.col(j).array().square().mean());
        if (sd < 1e-12)
            throw fit_error("cox_fit: feature '" + names[size_t(j)] + "' has zero variance");
        model.sd[j] = sd;
        x.col(j) /= sd;
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    auto penalized = [&](const Eigen::VectorXd& b) {
        return cox_log_likelihood(x, records, b, opt.ties) -
               0.5 * opt.ridge_eps * b.squaredNorm();
    };

    double llik = penalized(beta);
    model.llik_trace.push_back(llik);
    bool converged = false;
    int iter = 0;
    for (; iter < opt.max_iterations; ++iter) {
        detail::CoxDerivatives d = detail::cox_derivatives(x, records, beta, opt.ties, true);
        Eigen::VectorXd g = d.gradient - opt.ridge_eps * beta;
        Eigen::MatrixXd info = d.neg_hessian;
        info.diagonal().array() += opt.ridge_eps + 1e-12;

        Eigen::VectorXd step = info.ldlt().solve(g);
        if (!step.allFinite()) throw fit_error("cox_fit: singular information matrix");

        double scale = 1.0;
        Eigen::VectorXd candidate;
        double new_llik = -std::numeric_limits<double>::infinity();
        for (int h = 0; h < 40; ++h) {
            candidate = beta + scale * step;
            new_llik = penalized(candidate);
            if (std::isfinite(new_llik) && new_llik >= llik - 1e-13) break;
            scale *= 0.5;
        }
        if (!(new_llik >= llik - 1e-13)) break; // no ascent direction left

        beta = candidate;
        model.llik_trace.push_back(new_llik);
        if (std::abs(new_llik - llik) < opt.tol) {
            llik = new_llik;
            converged = true;
            ++iter;
            break;
        }
        llik = new_llik;
    }

    model.coefficients = beta;
    model.log_partial_likelihood = cox_log_likelihood(x, records, beta, opt.ties);
    model.iterations = iter;
    model.converged = converged;
    return model;
}

/// Linear predictor for one patient, features matched by name.
inline double risk_score(const CoxModel& model, const std::map<std::string, double>& x) {
    double s = 0;
    for (size_t j = 0; j < model.feature_names.size(); ++j) {
        auto it = x.find(model.feature_names[j]);
        if (it == x.end())
            throw schema_error("risk_score: missing feature '" + model.feature_names[j] + "'");
        s += model.coefficients[Eigen::Index(j)] * (it->second - model.mean[Eigen::Index(j)]) /
             model.sd[Eigen::Index(j)];
    }
    return s;
}

/// Batch scoring from a feature matrix (columns selected by model names).
inline std::vector<double> risk_scores(const CoxModel& model, const FeatureMatrix& m) {
    std::vector<int> cols;
    for (const auto& name : model.feature_names) {
        const int idx = m.feature_index(name);
        if (idx < 0) throw schema_error("risk_scores: missing feature '" + name + "'");
        cols.push_back(idx);
    }
    std::vector<double> out(size_t(m.n_patients()), 0.0);
    for (int64_t r = 0; r < m.n_patients(); ++r) {
        double s = 0;
        for (size_t j = 0; j < cols.size(); ++j)
            s += model.coefficients[Eigen::Index(j)] *
                 (m.values(Eigen::Index(r), cols[j]) - model.mean[Eigen::Index(j)]) /
                 model.sd[Eigen::Index(j)];
        out[size_t(r)] = s;
    }
    return out;
}

// ------------------------------------------------------ feature selection --

struct SelectionReport {
    std::vector<std::pair<std::string, double>> univariate; // feature -> training C-index
    std::vector<std::string> kept_after_univariate;
    std::vector<std::string> kept_after_correlation;
    std::vector<std::string> kept_after_lasso; // empty when Lasso is not part of the recipe
    double univariate_threshold = 0.50;
    double rho_max = 0.60;
    double lasso_lambda = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::string> warnings;
};

/// Univariate Cox filter: per feature, fit a one-variable model and keep the
/// feature when the training C-index of its risk scores exceeds `threshold`.
/// Features that fail to fit are dropped with a warning, never kept.
inline SelectionReport univariate_filter(const FeatureMatrix& m,
                                         const std::vector<SurvivalRecord>& records,
                                         double threshold = 0.50) {
    SelectionReport report;
    report.univariate_threshold = threshold;
    for (int64_t g = 0; g < m.n_features(); ++g) {
        const std::string& name = m.feature_names[size_t(g)];
        try {
            const CoxModel uni = cox_fit(m.values.col(g), records, {name});
            std::vector<double> risks(size_t(m.n_patients()));
            for (int64_t r = 0; r < m.n_patients(); ++r)
                risks[size_t(r)] = uni.coefficients[0] * (m.values(r, g) - uni.mean[0]) / uni.sd[0];
            const double c = concordance_index(risks, records);
            report.univariate.emplace_back(name, c);
            if (c > threshold) report.kept_after_univariate.push_back(name);
        } catch (const error& e) {
            report.warnings.push_back("univariate fit dropped '" + name + "': " + e.what());
        }
    }
    return report;
}

/// Greedy redundancy pruning: visit features by descending univariate
/// C-index (ties by name); keep a feature iff its absolute Pearson
/// correlation with every already-kept feature stays below `rho_max`.
inline std::vector<std::string> correlation_prune(const FeatureMatrix& m,
                                                  const SelectionReport& univariate_report,
                                                  const std::vector<std::string>& candidates,
                                                  double rho_max = 0.60) {
    std::map<std::string, double> cindex;
    for (const auto& [name, c] : univariate_report.univariate) cindex[name] = c;

    std::vector<std::string> order = candidates;
    std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
        const double ca = cindex.count(a) ? cindex.at(a) : -1.0;
        const double cb = cindex.count(b) ? cindex.at(b) : -1.0;
        if (ca != cb) return ca > cb;
        return a < b;
    });

    auto pearson = [&](int a, int b) {
        const auto ca = m.values.col(a).array() - m.values.col(a).mean();
        const auto cb = m.values.col(b).array() - m.values.col(b).mean();
        const double den = std::sqrt(ca.square().sum() * cb.square().sum());
        return den > 0 ? (ca * cb).sum() / den : 0.0;
    };

    std::vector<std::string> kept;
    for (const auto& name : order) {
        const int col = m.feature_index(name);
        if (col < 0) continue;
        bool ok = true;
        for (const auto& k : kept)
            if (std::abs(pearson(col, m.feature_index(k))) >= rho_max) {
                ok = false;
                break;
            }
        if (ok) kept.push_back(name);
    }
    return kept;
}

// ------------------------------------------------------------- Lasso-Cox ---

struct LassoResult {
    std::vector<double> lambda_grid;    // descending
    Eigen::MatrixXd path;               // p x L, standardized coefficients
    std::vector<double> cv_mean_cindex; // per lambda (NaN when CV skipped)
    int best_index = 0;
    double best_lambda = 0;
    std::vector<std::string> selected;  // nonzero at best lambda
    Eigen::VectorXd mean, sd;           // full-data standardization
};

namespace detail {

// Coordinate descent for the L1-penalized Cox partial likelihood on
// standardized features, via the usual IRLS quadratic approximation with
// diagonal weights. Warm-started along the lambda path.
inline void lasso_cd(const Eigen::MatrixXd& x, const std::vector<SurvivalRecord>& records,
                     double lambda, Eigen::VectorXd& beta) {
    const Eigen::Index n = x.rows(), p = x.cols();
    const CoxOrder ord = build_order(records);

    for (int outer = 0; outer < 100; ++outer) {
        const Eigen::VectorXd eta = x * beta;
        const Eigen::VectorXd ew = eta.array().exp();

        // Cumulative hazard sums over event times <= t_i.
        double s0 = 0;
        std::vector<double> group_s0(ord.groups_asc.size());
        for (size_t g = ord.groups_asc.size(); g-- > 0;) {
            for (const size_t i : ord.groups_asc[g].members) s0 += ew[Eigen::Index(i)];
            group_s0[g] = s0;
        }
        Eigen::VectorXd chaz1 = Eigen::VectorXd::Zero(n), chaz2 = Eigen::VectorXd::Zero(n);
        double acc1 = 0, acc2 = 0;
        for (size_t g = 0; g < ord.groups_asc.size(); ++g) {
            const double d_count = double(ord.groups_asc[g].events.size());
            if (d_count > 0) {
                acc1 += d_count / group_s0[g];
                acc2 += d_count / (group_s0[g] * group_s0[g]);
            }
            for (const size_t i : ord.groups_asc[g].members) {
                chaz1[Eigen::Index(i)] = acc1;
                chaz2[Eigen::Index(i)] = acc2;
            }
        }

        Eigen::VectorXd u(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double e = ew[i];
            u[i] = (records[size_t(i)].event ? 1.0 : 0.0) - e * chaz1[i];
            w[i] = std::max(e * chaz1[i] - e * e * chaz2[i], 1e-9);
        }
        const Eigen::VectorXd z = eta + (u.array() / w.array()).matrix();

        // Penalized weighted least squares by coordinate descent.
        Eigen::VectorXd b = beta;
        Eigen::VectorXd fitted = x * b;
        const Eigen::VectorXd wx2 =
            (x.array().square().colwise() * w.array()).colwise().sum().transpose();
        for (int inner = 0; inner < 1000; ++inner) {
            double max_delta = 0;
            for (Eigen::Index j = 0; j < p; ++j) {
                const double old = b[j];
                const double rho =
                    (w.array() * x.col(j).array() * (z - fitted + x.col(j) * old).array()).sum();
                double nb = 0;
                if (rho > lambda)
                    nb = (rho - lambda) / wx2[j];
                else if (rho < -lambda)
                    nb = (rho + lambda) / wx2[j];
                if (nb != old) {
                    fitted += x.col(j) * (nb - old);
                    b[j] = nb;
                    max_delta = std::max(max_delta, std::abs(nb - old));
                }
            }
            if (max_delta < 1e-8) break;
        }

        const double outer_delta = (b - beta).cwiseAbs().maxCoeff();
        beta = b;
        if (outer_delta < 1e-7) break;
    }
}

} // namespace detail

/// Largest penalty with an all-zero solution: max_j |d/dbeta_j loglik(0)|.
inline double lasso_lambda_max(const Eigen::MatrixXd& x_std,
                               const std::vector<SurvivalRecord>& records) {
    return cox_gradient(x_std, records, Eigen::VectorXd::Zero(x_std.cols()))
        .cwiseAbs()
        .maxCoeff();
}

inline std::vector<double> default_lambda_grid(double lambda_max, int size = 50,
                                               double min_ratio = 0.01) {
    std::vector<double> grid(static_cast<size_t>(size));
    for (int i = 0; i < size; ++i)
        grid[size_t(i)] = lambda_max * std::pow(min_ratio, double(i) / double(size - 1));
    return grid;
}

/// L1-penalized Cox path with lambda chosen by maximum mean cross-validated
/// C-index. Features are standardized internally (population sd). Fold ids
/// may come from the pipeline's fold assignment; by default patients are
/// dealt round-robin in time order, deterministically.
inline LassoResult lasso_cox(const Eigen::MatrixXd& x_raw,
                             const std::vector<SurvivalRecord>& records,
                             const std::vector<std::string>& names,
                             std::vector<double> lambda_grid = {}, int folds = 5,
                             const std::vector<int>* fold_ids = nullptr) {
    const Eigen::Index n = x_raw.rows(), p = x_raw.cols();
    if (names.size() != size_t(p)) throw fit_error("lasso_cox: name count mismatch");
    validate_records(records);

    // Standardize on the full data.
    Eigen::VectorXd mean = x_raw.colwise().mean();
    Eigen::VectorXd sd(p);
    Eigen::MatrixXd x = x_raw;
    for (Eigen::Index j = 0; j < p; ++j) {
        x.col(j).array() -= mean[j];
        sd[j] = std::sqrt(x.col(j).array().square().mean());
        if (sd[j] < 1e-12)
            throw fit_error("lasso_cox: feature '" + names[size_t(j)] + "' has zero variance");
        x.col(j) /= sd[j];
    }

    LassoResult result;
    if (lambda_grid.empty())
        lambda_grid = default_lambda_grid(lasso_lambda_max(x, records));
    for (size_t i = 1; i < lambda_grid.size(); ++i)
        if (lambda_grid[i] > lambda_grid[i - 1]) throw fit_error("lasso_cox: grid must descend");
    result.lambda_grid = lambda_grid;
    const int n_lambda = int(lambda_grid.size());

    // Full-data path with warm starts.
    result.path.resize(p, n_lambda);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    for (int l = 0; l < n_lambda; ++l) {
        detail::lasso_cd(x, records, lambda_grid[size_t(l)], beta);
        result.path.col(l) = beta;
    }
    if (result.path.cwiseAbs().maxCoeff() == 0.0)
        throw fit_error("lasso_cox: all-zero solution at every lambda");

    // Deterministic fold assignment when none is provided.
    std::vector<int> assignment(static_cast<size_t>(n));
    if (fold_ids) {
        if (fold_ids->size() != size_t(n)) throw fit_error("lasso_cox: fold id size mismatch");
        assignment = *fold_ids;
    } else {
        std::vector<size_t> order(static_cast<size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            if (records[a].time != records[b].time) return records[a].time < records[b].time;
            return a < b;
        });
        for (size_t r = 0; r < order.size(); ++r) assignment[order[r]] = int(r % size_t(folds));
    }
    std::vector<int> distinct = assignment;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    // Cross-validated C-index per lambda.
    result.cv_mean_cindex.assign(size_t(n_lambda), 0.0);
    std::vector<int> cv_counts(size_t(n_lambda), 0);
    for (const int fold : distinct) {
        std::vector<Eigen::Index> train_rows, test_rows;
        for (Eigen::Index r = 0; r < n; ++r)
            (assignment[size_t(r)] == fold ? test_rows : train_rows).push_back(r);
        if (train_rows.size() < 4 || test_rows.empty()) continue;

        Eigen::MatrixXd xt(train_rows.size(), p);
        std::vector<SurvivalRecord> rt;
        for (size_t r = 0; r < train_rows.size(); ++r) {
            xt.row(Eigen::Index(r)) = x_raw.row(train_rows[r]);
            rt.push_back(records[size_t(train_rows[r])]);
        }
        // Standardize with the fold-train statistics.
        Eigen::VectorXd fmean = xt.colwise().mean();
        Eigen::VectorXd fsd(p);
        for (Eigen::Index j = 0; j < p; ++j) {
            xt.col(j).array() -= fmean[j];
            fsd[j] = std::sqrt(xt.col(j).array().square().mean());
            if (fsd[j] < 1e-12) fsd[j] = 1.0;
            xt.col(j) /= fsd[j];
        }

        Eigen::VectorXd fb = Eigen::VectorXd::Zero(p);
        for (int l = 0; l < n_lambda; ++l) {
            detail::lasso_cd(xt, rt, lambda_grid[size_t(l)], fb);
            std::vector<double> risks(test_rows.size());
            std::vector<SurvivalRecord> rtest;
            for (size_t r = 0; r < test_rows.size(); ++r) {
                double s = 0;
                for (Eigen::Index j = 0; j < p; ++j)
                    s += fb[j] * (x_raw(test_rows[r], j) - fmean[j]) / fsd[j];
                risks[r] = s;
                rtest.push_back(records[size_t(test_rows[r])]);
            }
            try {
                result.cv_mean_cindex[size_t(l)] += concordance_index(risks, rtest);
                ++cv_counts[size_t(l)];
            } catch (const fit_error&) {
                // fold without permissible pairs contributes nothing
            }
        }
    }
    for (int l = 0; l < n_lambda; ++l)
        result.cv_mean_cindex[size_t(l)] =
            cv_counts[size_t(l)] > 0
                ? result.cv_mean_cindex[size_t(l)] / cv_counts[size_t(l)]
                : std::numeric_limits<double>::quiet_NaN();

    // Largest lambda attaining the best mean CV C-index (grid is descending).
    int best = 0;
    double best_c = -1;
    for (int l = 0; l < n_lambda; ++l) {
        const double c = result.cv_mean_cindex[size_t(l)];
        if (std::isfinite(c) && c > best_c + 1e-12) {
            best_c = c;
            best = l;
        }
    }
    result.best_index = best;
    result.best_lambda = lambda_grid[size_t(best)];
    for (Eigen::Index j = 0; j < p; ++j)
        if (result.path(j, best) != 0.0) result.selected.push_back(names[size_t(j)]);
    result.mean = mean;
    result.sd = sd;
    return result;
}

} // namespace hnrad

#endif
