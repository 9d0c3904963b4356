#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace fincascade {

/// Expected loss, 95% value at risk and expected shortfall of a loss sample.
///
/// var95 is the order statistic at 1-based rank ceil(0.95 N), no interpolation.
/// es95 is the mean of the worst ceil(0.05 N) samples.
struct RiskSummary {
    double el = 0.0;
    double var95 = 0.0;
    double es95 = 0.0;
    std::size_t n = 0;
};

/// Throws std::invalid_argument on empty input.
RiskSummary risk_measures(std::span<const double> samples);

/// Linear-interpolation quantile (type 7) of already sorted data.
double sorted_quantile(std::span<const double> sorted, double p);

struct BoxStats {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double iqr = 0.0;
    /// Most extreme samples within 1.5 IQR of the quartiles.
    double whisker_low = 0.0;
    double whisker_high = 0.0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    std::size_t n = 0;
    std::size_t outliers = 0;
};

BoxStats box_stats(std::span<const double> samples);

/// Empirical survival function: for every distinct value x, the fraction of samples >= x.
std::vector<std::pair<double, double>> ccdf(std::span<const double> samples);

/// Fraction of samples strictly above `threshold`.
double fraction_above(std::span<const double> samples, double threshold);

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_stderr = 0.0;
    std::size_t n = 0;
    /// Fit done on (ln x, ln y); slope is then a power-law exponent.
    bool log_log = false;
};

/// Ordinary least squares with intercept. Requires |x| = |y| >= 3, non-constant x, and strictly
/// positive data when log_log is set. Throws std::invalid_argument otherwise.
FitResult ols_fit(std::span<const double> x, std::span<const double> y, bool log_log = false);

struct WelchResult {
    double t_statistic = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 1.0;
};

/// Two-sided Welch unequal-variance t test. Needs >= 2 samples per side and not both variances zero.
WelchResult welch_test(std::span<const double> a, std::span<const double> b);

}  // namespace fincascade
