#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace shortform {

// Predictor matrix without an intercept column; the fit adds the intercept
// implicitly. `names` is optional display metadata (size p when present).
struct DesignMatrix {
    Eigen::MatrixXd predictors;
    Eigen::VectorXd response;
    std::vector<std::string> names;

    int n() const { return static_cast<int>(response.size()); }
    int p() const { return static_cast<int>(predictors.cols()); }
    std::string column_name(int j) const;
};

class CollinearityError : public std::runtime_error {
  public:
    CollinearityError(std::string message, std::vector<std::string> columns)
        : std::runtime_error(std::move(message)), columns_(std::move(columns)) {}
    const std::vector<std::string>& columns() const { return columns_; }

  private:
    std::vector<std::string> columns_;
};

// Index 0 of every coefficient-indexed vector is the intercept.
struct FitResult {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd std_errors;
    Eigen::VectorXd t_values;
    Eigen::VectorXd p_values;
    double rss = 0.0;
    double tss = 0.0;
    double residual_std_error = 0.0;
    int df_residual = 0;
    double r_squared = 0.0;
    double adj_r_squared = 0.0;
    double f_statistic = 0.0;
    double f_p_value = 1.0;
    bool f_saturated = false;
    int n = 0;
    int p = 0;

    double predict_row(const Eigen::VectorXd& x) const;
};

struct FTestResult {
    double f = 0.0;
    double p_value = 1.0;
    bool saturated = false;
};

struct PairedTestResult {
    double t = 0.0;
    int df = 0;
    double p = 1.0;
    double cohen_d = 0.0;
    double mean_diff = 0.0;
    double sd_diff = 0.0;
    bool degenerate = false;
    int n = 0;
};

struct Diagnostics {
    Eigen::VectorXd fitted;
    Eigen::VectorXd residuals;
    // (theoretical normal quantile, ordered residual), ascending
    std::vector<std::pair<double, double>> qq_pairs;
};

// Least squares with intercept, solved by Householder QR. Standard errors come
// from the residual variance times the diagonal of (X'X)^-1. Throws
// CollinearityError when the smallest singular value of the design (intercept
// included) falls below 1e-10 times the largest.
FitResult fit_ols(const DesignMatrix& design);

FTestResult f_test(double r_squared, int n, int p);
FTestResult f_test(const FitResult& fit, int n, int p);

// Mean absolute prediction error over test rows, in response units.
double mae(const FitResult& fit, const DesignMatrix& test);

// Mean absolute percentage error over test rows with nonzero response;
// throws if every test response is zero.
double mape_percent(const FitResult& fit, const DesignMatrix& test);

// Matched-pairs t test on differences before - after.
PairedTestResult paired_t(const std::vector<double>& before,
                          const std::vector<double>& after);

// Variance inflation factor of column j from regressing it on the remaining
// predictors (with intercept). Returns +infinity when that fit is perfect.
double vif(const DesignMatrix& design, int j);

Diagnostics diagnostics(const FitResult& fit, const DesignMatrix& design);

}  // namespace shortform
