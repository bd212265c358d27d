#include "shortform/regress.hpp"

#include "shortform/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace shortform {

namespace {

constexpr double kCollinearityTol = 1e-10;

Eigen::MatrixXd with_intercept(const DesignMatrix& d) {
    Eigen::MatrixXd X(d.n(), d.p() + 1);
    X.col(0).setOnes();
    if (d.p() > 0) X.rightCols(d.p()) = d.predictors;
    return X;
}

void check_design(const DesignMatrix& d) {
    if (d.response.size() == 0) throw std::invalid_argument("fit_ols: empty response");
    if (d.predictors.cols() > 0 && d.predictors.rows() != d.response.size())
        throw std::invalid_argument("fit_ols: predictor rows must match response length");
    if (!d.response.allFinite() || (d.p() > 0 && !d.predictors.allFinite()))
        throw std::invalid_argument("fit_ols: non-finite entries in design");
    if (!d.names.empty() && static_cast<int>(d.names.size()) != d.p())
        throw std::invalid_argument("fit_ols: names size must match predictor count");
}

}  // namespace

std::string DesignMatrix::column_name(int j) const {
    if (j >= 0 && j < static_cast<int>(names.size())) return names[j];
    return "x" + std::to_string(j + 1);
}

double FitResult::predict_row(const Eigen::VectorXd& x) const {
    if (x.size() != p) throw std::invalid_argument("predict_row: wrong predictor count");
    double v = coefficients[0];
    for (int j = 0; j < p; ++j) v += coefficients[j + 1] * x[j];
    return v;
}

FitResult fit_ols(const DesignMatrix& design) {
    check_design(design);
    const int n = design.n();
    const int p = design.p();
    if (n <= p + 1) throw std::invalid_argument("fit_ols: need n > p + 1 for inference");

    const Eigen::MatrixXd X = with_intercept(design);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
    const auto& sv = svd.singularValues();
    if (sv[0] <= 0.0 || sv[sv.size() - 1] / sv[0] < kCollinearityTol) {
        // Name the columns a pivoted QR ranks as dependent.
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> cpqr(X);
        cpqr.setThreshold(kCollinearityTol);
        const int rank = static_cast<int>(cpqr.rank());
        const auto& perm = cpqr.colsPermutation().indices();
        std::vector<std::string> offenders;
        for (int i = rank; i < perm.size(); ++i) {
            const int col = perm[i];
            offenders.push_back(col == 0 ? std::string("intercept")
                                         : design.column_name(col - 1));
        }
        if (offenders.empty()) offenders.push_back(design.column_name(p - 1));
        std::ostringstream msg;
        msg << "fit_ols: design is collinear; dependent columns:";
        for (const auto& c : offenders) msg << ' ' << c;
        throw CollinearityError(msg.str(), offenders);
    }

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    FitResult fit;
    fit.n = n;
    fit.p = p;
    fit.coefficients = qr.solve(design.response);

    const Eigen::VectorXd fitted = X * fit.coefficients;
    const Eigen::VectorXd resid = design.response - fitted;
    fit.rss = resid.squaredNorm();
    const double ybar = design.response.mean();
    fit.tss = (design.response.array() - ybar).matrix().squaredNorm();
    fit.df_residual = n - p - 1;
    const double sigma2 = fit.rss / fit.df_residual;
    fit.residual_std_error = std::sqrt(sigma2);

    // diag((X'X)^-1) via R^-1: entry i is the squared norm of row i of R^-1.
    const Eigen::MatrixXd R =
        qr.matrixQR().topRows(p + 1).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p + 1, p + 1));

    fit.std_errors.resize(p + 1);
    fit.t_values.resize(p + 1);
    fit.p_values.resize(p + 1);
    for (int i = 0; i <= p; ++i) {
        fit.std_errors[i] = std::sqrt(sigma2 * Rinv.row(i).squaredNorm());
        if (fit.std_errors[i] > 0.0) {
            fit.t_values[i] = fit.coefficients[i] / fit.std_errors[i];
            fit.p_values[i] = stats::t_two_sided_p(fit.t_values[i], fit.df_residual);
        } else {
            fit.t_values[i] = std::numeric_limits<double>::quiet_NaN();
            fit.p_values[i] = std::numeric_limits<double>::quiet_NaN();
        }
    }

    fit.r_squared = fit.tss > 0.0 ? 1.0 - fit.rss / fit.tss : 0.0;
    fit.adj_r_squared =
        1.0 - (1.0 - fit.r_squared) * (n - 1) / static_cast<double>(n - p - 1);

    const FTestResult ft = f_test(fit.r_squared, n, p);
    fit.f_statistic = ft.f;
    fit.f_p_value = ft.p_value;
    fit.f_saturated = ft.saturated;
    return fit;
}

FTestResult f_test(double r_squared, int n, int p) {
    if (p < 0) throw std::invalid_argument("f_test: negative predictor count");
    FTestResult out;
    if (p == 0) return out;
    if (n - p - 1 < 1) throw std::invalid_argument("f_test: no residual degrees of freedom");
    if (r_squared >= 1.0 - 1e-12) {
        out.f = std::numeric_limits<double>::infinity();
        out.p_value = 0.0;
        out.saturated = true;
        return out;
    }
    if (r_squared < 0.0) r_squared = 0.0;
    out.f = (r_squared / p) / ((1.0 - r_squared) / (n - p - 1));
    out.p_value = stats::f_upper_p(out.f, p, n - p - 1);
    return out;
}

FTestResult f_test(const FitResult& fit, int n, int p) {
    return f_test(fit.r_squared, n, p);
}

double mae(const FitResult& fit, const DesignMatrix& test) {
    if (test.n() == 0) throw std::invalid_argument("mae: empty test set");
    if (test.p() != fit.p) throw std::invalid_argument("mae: predictor count mismatch");
    double total = 0.0;
    for (int i = 0; i < test.n(); ++i) {
        const double pred = fit.predict_row(test.predictors.row(i).transpose());
        total += std::fabs(pred - test.response[i]);
    }
    return total / test.n();
}

double mape_percent(const FitResult& fit, const DesignMatrix& test) {
    if (test.n() == 0) throw std::invalid_argument("mape_percent: empty test set");
    if (test.p() != fit.p) throw std::invalid_argument("mape_percent: predictor count mismatch");
    double total = 0.0;
    int used = 0;
    for (int i = 0; i < test.n(); ++i) {
        if (test.response[i] == 0.0) continue;
        const double pred = fit.predict_row(test.predictors.row(i).transpose());
        total += std::fabs((pred - test.response[i]) / test.response[i]);
        ++used;
    }
    if (used == 0) throw std::invalid_argument("mape_percent: every test response is zero");
    return 100.0 * total / used;
}

PairedTestResult paired_t(const std::vector<double>& before,
                          const std::vector<double>& after) {
    if (before.size() != after.size())
        throw std::invalid_argument("paired_t: length mismatch");
    if (before.size() < 2) throw std::invalid_argument("paired_t: need n >= 2");
    const int n = static_cast<int>(before.size());
    std::vector<double> diffs(before.size());
    for (size_t i = 0; i < before.size(); ++i) diffs[i] = before[i] - after[i];

    PairedTestResult out;
    out.n = n;
    out.df = n - 1;
    out.mean_diff = stats::mean(diffs);
    out.sd_diff = stats::sample_sd(diffs);
    const double root_n = std::sqrt(static_cast<double>(n));
    if (out.sd_diff == 0.0) {
        if (out.mean_diff == 0.0) {
            out.t = 0.0;
            out.p = 1.0;
            out.cohen_d = 0.0;
        } else {
            out.degenerate = true;
            out.t = out.mean_diff > 0 ? std::numeric_limits<double>::infinity()
                                      : -std::numeric_limits<double>::infinity();
            out.p = 0.0;
            out.cohen_d = out.t;
        }
        return out;
    }
    out.t = out.mean_diff / (out.sd_diff / root_n);
    out.p = stats::t_two_sided_p(out.t, out.df);
    out.cohen_d = out.t / root_n;
    return out;
}

double vif(const DesignMatrix& design, int j) {
    const int p = design.p();
    if (p < 2) throw std::invalid_argument("vif: need at least two predictors");
    if (j < 0 || j >= p) throw std::invalid_argument("vif: column out of range");

    DesignMatrix sub;
    sub.predictors.resize(design.n(), p - 1);
    int col = 0;
    for (int k = 0; k < p; ++k) {
        if (k == j) continue;
        sub.predictors.col(col++) = design.predictors.col(k);
    }
    sub.response = design.predictors.col(j);

    double r2;
    try {
        r2 = fit_ols(sub).r_squared;
    } catch (const CollinearityError&) {
        return std::numeric_limits<double>::infinity();
    }
    if (r2 >= 1.0 - 1e-12) return std::numeric_limits<double>::infinity();
    return 1.0 / (1.0 - r2);
}

Diagnostics diagnostics(const FitResult& fit, const DesignMatrix& design) {
    if (design.p() != fit.p || design.n() != fit.n)
        throw std::invalid_argument("diagnostics: design does not match fit");
    Diagnostics out;
    const Eigen::MatrixXd X = with_intercept(design);
    out.fitted = X * fit.coefficients;
    out.residuals = design.response - out.fitted;

    const int n = design.n();
    std::vector<double> sorted(out.residuals.data(), out.residuals.data() + n);
    std::sort(sorted.begin(), sorted.end());
    out.qq_pairs.reserve(n);
    for (int i = 1; i <= n; ++i) {
        const double q = stats::normal_quantile((i - 0.5) / n);
        out.qq_pairs.emplace_back(q, sorted[i - 1]);
    }
    return out;
}

}  // namespace shortform
