#include "fincascade/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace fincascade {

RiskSummary risk_measures(std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("risk_measures needs at least one sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    RiskSummary summary;
    summary.n = n;
    summary.el = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);

    // ceil(0.95 n) and ceil(0.05 n) in integer arithmetic.
    const std::size_t var_rank = std::max<std::size_t>(1, (95 * n + 99) / 100);
    const std::size_t tail = std::max<std::size_t>(1, (5 * n + 99) / 100);
    summary.var95 = sorted[var_rank - 1];
    double tail_sum = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) tail_sum += sorted[i];
    summary.es95 = tail_sum / static_cast<double>(tail);
    return summary;
}

double sorted_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("box_stats of empty sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    BoxStats box;
    box.n = sorted.size();
    box.q1 = sorted_quantile(sorted, 0.25);
    box.median = sorted_quantile(sorted, 0.5);
    box.q3 = sorted_quantile(sorted, 0.75);
    box.iqr = box.q3 - box.q1;
    box.min = sorted.front();
    box.max = sorted.back();
    box.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(box.n);
    const double low_fence = box.q1 - 1.5 * box.iqr;
    const double high_fence = box.q3 + 1.5 * box.iqr;
    box.whisker_low = *std::lower_bound(sorted.begin(), sorted.end(), low_fence);
    box.whisker_high = *(std::upper_bound(sorted.begin(), sorted.end(), high_fence) - 1);
    box.outliers = static_cast<std::size_t>(
        std::count_if(sorted.begin(), sorted.end(), [&](double x) { return x < low_fence || x > high_fence; }));
    return box;
}

std::vector<std::pair<double, double>> ccdf(std::span<const double> samples) {
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, double>> out;
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i > 0 && sorted[i] == sorted[i - 1]) continue;
        out.emplace_back(sorted[i], static_cast<double>(sorted.size() - i) / n);
    }
    return out;
}

double fraction_above(std::span<const double> samples, double threshold) {
    if (samples.empty()) return 0.0;
    const auto above = std::count_if(samples.begin(), samples.end(), [&](double x) { return x > threshold; });
    return static_cast<double>(above) / static_cast<double>(samples.size());
}

FitResult ols_fit(std::span<const double> x_in, std::span<const double> y_in, bool log_log) {
    if (x_in.size() != y_in.size()) throw std::invalid_argument("ols_fit: x and y lengths differ");
    if (x_in.size() < 3) throw std::invalid_argument("ols_fit: need at least 3 points");
    std::vector<double> x(x_in.begin(), x_in.end());
    std::vector<double> y(y_in.begin(), y_in.end());
    if (log_log) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("ols_fit: log-log needs positive data");
            x[i] = std::log(x[i]);
            y[i] = std::log(y[i]);
        }
    }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("ols_fit: x has zero variance");

    FitResult fit;
    fit.n = x.size();
    fit.log_log = log_log;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        sse += r * r;
    }
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
    fit.slope_stderr = std::sqrt(sse / (n - 2.0) / sxx);
    return fit;
}

WelchResult welch_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_test: need at least 2 samples per group");
    auto moments = [](std::span<const double> s) {
        const double n = static_cast<double>(s.size());
        const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : s) ss += (v - mean) * (v - mean);
        return std::pair{mean, ss / (n - 1.0)};
    };
    const auto [ma, va] = moments(a);
    const auto [mb, vb] = moments(b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double sa = va / na;
    const double sb = vb / nb;
    if (!(sa + sb > 0.0)) throw std::invalid_argument("welch_test: both samples have zero variance");

    WelchResult result;
    result.t_statistic = (ma - mb) / std::sqrt(sa + sb);
    result.degrees_of_freedom = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    const boost::math::students_t dist(result.degrees_of_freedom);
    result.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(result.t_statistic)));
    result.p_value = std::min(result.p_value, 1.0);
    return result;
}

}  // namespace fincascade
