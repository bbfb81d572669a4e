#pragma once

#include <cstddef>
#include <vector>

namespace grushin {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Laguerre rule for int_0^inf e^{-s} g(s) ds.
QuadratureRule gauss_laguerre(std::size_t n);

/// Standard normal CDF.
double normal_cdf(double z);

}  // namespace grushin
