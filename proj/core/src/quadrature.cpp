#include "grushin/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "grushin/error.hpp"

namespace grushin {

// Newton iteration on L_n with the usual asymptotic starting guesses.
QuadratureRule gauss_laguerre(std::size_t n) {
    if (n < 1) throw DomainError("gauss_laguerre: need at least one node");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double nd = static_cast<double>(n);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0) {
            z = 3.0 / (1.0 + 2.4 * nd);
        } else if (i == 1) {
            z += 15.0 / (1.0 + 2.5 * nd);
        } else {
            const double ai = static_cast<double>(i - 1);
            z += ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - rule.nodes[i - 2]);
        }
        double p1 = 0.0, p2 = 0.0, pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            p1 = 1.0;
            p2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                const double jd = static_cast<double>(j);
                p1 = ((2.0 * jd + 1.0 - z) * p2 - jd * p3) / (jd + 1.0);
            }
            pp = nd * (p1 - p2) / z;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::abs(z)) break;
        }
        // p2 holds L_{n-1}(z) here.
        rule.nodes[i] = z;
        rule.weights[i] = -1.0 / (pp * nd * p2);
    }
    return rule;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace grushin
