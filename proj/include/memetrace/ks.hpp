#pragma once

#include <span>

namespace memetrace {

struct KsResult {
    double D = 0.0;
    double p = 1.0;
    bool significant = false;  // p < alpha
};

inline constexpr double kKsAlpha = 0.01;

/// Survival function of the Kolmogorov distribution, P(K > x).
double kolmogorov_sf(double x);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// Q(sqrt(nm / (n + m)) D). Throws InvalidInput on an empty sample.
KsResult ks_two_sample(std::span<const double> x, std::span<const double> y, double alpha = kKsAlpha);

} // namespace memetrace
