#include "memetrace/ks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "memetrace/errors.hpp"

namespace memetrace {

double kolmogorov_sf(double x) {
    if (x <= 0.0) return 1.0;
    // Small x: the Jacobi-theta form converges in a handful of terms.
    if (x < 1.18) {
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double cdf = 0.0;
        for (int j = 1; j <= 50; ++j) {
            const double odd = 2.0 * j - 1.0;
            const double term = std::exp(-odd * odd * pi2 / (8.0 * x * x));
            cdf += term;
            if (term < 1e-17 * cdf) break;
        }
        cdf *= std::sqrt(2.0 * std::numbers::pi) / x;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sf = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * x * x);
        sf += (j % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-17) break;
    }
    return std::clamp(sf, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> x, std::span<const double> y, double alpha) {
    if (x.empty() || y.empty()) throw InvalidInput("ks_two_sample: both samples must be non-empty");
    std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double n = static_cast<double>(a.size()), m = static_cast<double>(b.size());

    // Walk the merged support, evaluating both ECDFs after each distinct value.
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    // Once one sample is exhausted the remaining gap only shrinks toward 0.

    KsResult r;
    r.D = d;
    r.p = kolmogorov_sf(std::sqrt(n * m / (n + m)) * d);
    r.significant = r.p < alpha;
    return r;
}

} // namespace memetrace
