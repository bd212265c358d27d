#pragma once

// Independent reference implementations used only by tests. Each one takes a
// deliberately different computational route from the library code it checks:
// explicit normal equations instead of QR, direct density integration instead
// of continued fractions.

#include "shortform/regress.hpp"
#include "shortform/severity.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracles {

struct NormalEqFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd std_errors;
    double rss = 0.0;
    double r_squared = 0.0;
};

inline NormalEqFit normal_equations_fit(const shortform::DesignMatrix& d) {
    const int n = d.n();
    const int p = d.p();
    Eigen::MatrixXd X(n, p + 1);
    X.col(0).setOnes();
    if (p > 0) X.rightCols(p) = d.predictors;

    const Eigen::MatrixXd A = X.transpose() * X;
    const Eigen::MatrixXd Ainv = A.inverse();
    NormalEqFit fit;
    fit.coefficients = Ainv * (X.transpose() * d.response);
    const Eigen::VectorXd resid = d.response - X * fit.coefficients;
    fit.rss = resid.squaredNorm();
    const double ybar = d.response.mean();
    const double tss = (d.response.array() - ybar).matrix().squaredNorm();
    fit.r_squared = tss > 0.0 ? 1.0 - fit.rss / tss : 0.0;
    const double sigma2 = fit.rss / (n - p - 1);
    fit.std_errors.resize(p + 1);
    for (int i = 0; i <= p; ++i) fit.std_errors[i] = std::sqrt(sigma2 * Ainv(i, i));
    return fit;
}

inline double simpson_step(const std::function<double(double)>& f, double a,
                           double b, double fa, double fm, double fb,
                           double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol = 1e-12, int depth = 60) {
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, depth);
}

inline double t_density(double x, double nu) {
    return std::exp(std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) -
                    0.5 * std::log(nu * M_PI) -
                    (nu + 1.0) / 2.0 * std::log1p(x * x / nu));
}

// Two-sided t tail by integrating the density over [|t|, inf), with the tail
// mapped to [0, 1) through s = |t| + u/(1-u).
inline double t_two_sided_by_integration(double t, int df) {
    const double a = std::fabs(t);
    if (a == 0.0) return 1.0;
    const double nu = df;
    auto g = [&](double u) {
        const double one_minus = 1.0 - u;
        const double s = a + u / one_minus;
        return t_density(s, nu) / (one_minus * one_minus);
    };
    return 2.0 * adaptive_simpson(g, 0.0, 1.0 - 1e-9);
}

inline double f_density(double x, double d1, double d2) {
    const double lb = std::lgamma(d1 / 2.0) + std::lgamma(d2 / 2.0) -
                      std::lgamma((d1 + d2) / 2.0);
    const double lp = (d1 / 2.0) * std::log(d1 / d2) +
                      (d1 / 2.0 - 1.0) * std::log(x) -
                      ((d1 + d2) / 2.0) * std::log1p(d1 * x / d2) - lb;
    return std::exp(lp);
}

inline double f_upper_by_integration(double f0, int d1, int d2) {
    if (f0 <= 0.0) return 1.0;
    auto g = [&](double u) {
        const double one_minus = 1.0 - u;
        const double s = f0 + u / one_minus;
        return f_density(s, d1, d2) / (one_minus * one_minus);
    };
    return adaptive_simpson(g, 0.0, 1.0 - 1e-9);
}

// Upper critical value of the two-sided t test at level alpha, by bisection.
inline double t_critical(double alpha, int df,
                         const std::function<double(double, int)>& two_sided_p) {
    double lo = 0.0, hi = 1e3;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (two_sided_p(mid, df) > alpha)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct NaiveStructured {
    long long total = 0;
    long long qualified = 0;
    std::vector<long long> freq;
};

// Literal five-deep nested enumeration scoring each candidate through the
// public accuracy routine; the library's odometer walk must agree with it
// candidate for candidate.
inline NaiveStructured naive_structured(const shortform::QuestionnaireSchema& schema,
                                        const std::vector<shortform::SeveritySample>& samples,
                                        const shortform::SeverityScale& scale,
                                        double threshold,
                                        const shortform::AccuracyWeighting& weighting) {
    NaiveStructured out;
    out.freq.assign(static_cast<size_t>(schema.total_items()), 0);
    std::vector<int> offsets(static_cast<size_t>(schema.subtest_count()));
    int running = 0;
    for (int s = 0; s < schema.subtest_count(); ++s) {
        offsets[static_cast<size_t>(s)] = running;
        running += schema.subtests()[static_cast<size_t>(s)].item_count;
    }
    const auto count = [&](int s) {
        return schema.subtests()[static_cast<size_t>(s)].item_count;
    };
    for (int a = 0; a < count(0); ++a)
        for (int b = 0; b < count(1); ++b)
            for (int c = 0; c < count(2); ++c)
                for (int d = 0; d < count(3); ++d) {
                    const int q0 = offsets[0] + a, q1 = offsets[1] + b;
                    const int q2 = offsets[2] + c, q3 = offsets[3] + d;
                    for (int extra = 0; extra < schema.total_items(); ++extra) {
                        if (extra == q0 || extra == q1 || extra == q2 || extra == q3)
                            continue;
                        ++out.total;
                        const std::vector<int> subset{q0, q1, q2, q3, extra};
                        const double acc = shortform::subset_accuracy(schema, samples, subset,
                                                                      scale, weighting);
                        if (acc >= threshold) {
                            ++out.qualified;
                            for (int item : subset) ++out.freq[static_cast<size_t>(item)];
                        }
                    }
                }
    return out;
}

}  // namespace oracles
