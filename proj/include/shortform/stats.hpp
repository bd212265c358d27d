#pragma once

#include <utility>
#include <vector>

namespace shortform::stats {

// Standard normal CDF.
double normal_cdf(double x);

// Inverse standard normal CDF (Wichura's PPND16 rational approximation,
// accurate to ~1e-15). p must lie in (0, 1).
double normal_quantile(double p);

// Regularized incomplete beta function I_x(a, b), evaluated by Lentz's
// continued fraction with the usual symmetry split. Absolute accuracy is
// well under 1e-12 for the (a, b) ranges that t and F tails need.
double regularized_ibeta(double a, double b, double x);

// Two-sided p-value P(|T_df| >= |t|). df >= 1.
double t_two_sided_p(double t, int df);

// Upper tail P(T_df >= t).
double t_upper_p(double t, int df);

// Upper tail of the F distribution, P(F_{d1,d2} >= f).
double f_upper_p(double f, int d1, int d2);

double mean(const std::vector<double>& v);
// Sample standard deviation (n-1 denominator); requires n >= 2.
double sample_sd(const std::vector<double>& v);

// Sample Pearson correlation of two equal-length vectors.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace shortform::stats
