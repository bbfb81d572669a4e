#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "grushin/grid.hpp"

namespace grushin {

enum class YScheme {
    /// Y += X(t_i) dW2_i with left-endpoint X.
    euler,
    /// Y = mu2 + sqrt(sum X(t_i)^2 dt) Z, the conditional law given the X path.
    conditional,
};

struct SimConfig {
    double t = 1.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
    std::size_t n_paths = 100000;
    std::size_t n_steps = 64;
    std::uint64_t seed = 1;
    YScheme scheme = YScheme::euler;

    /// Throws DomainError unless t > 0, n_paths >= 100, n_steps >= 16.
    void validate() const;
};

struct EndpointSample {
    std::vector<double> xs;
    std::vector<double> ys;
    /// sum_i X(t_i)^2 dt per path (discrete Itô isometry integrand).
    std::vector<double> quadratic_variation;

    std::size_t size() const noexcept { return xs.size(); }
};

/// Simulates (X_t, Y_t) for dX = dW1, dY = X dW2 from (mu1, mu2).
/// Each path draws from its own substream keyed by (seed, path index).
EndpointSample simulate_endpoints(const SimConfig& cfg);

struct MomentHalfWidths {
    std::array<double, 2> mean{};
    std::array<std::array<double, 2>, 2> cov{};
    double y_kurtosis = 0.0;
};

struct MomentSummary {
    std::array<double, 2> mean{};
    std::array<std::array<double, 2>, 2> cov{};
    /// E[(Y - mean)^4] / Var(Y)^2 - 3
    double y_kurtosis = 0.0;
    /// 95% confidence half widths (asymptotic for means and covariances,
    /// batch means over 20 batches for the kurtosis).
    MomentHalfWidths half_widths;
};

/// Throws PreconditionError for fewer than 100 samples and DegenerateError
/// for a zero-variance component.
MomentSummary moment_summary(const EndpointSample& sample);

struct KdeResult {
    GridFunction density;
    /// True when the grid misses the central 99% range of either coordinate.
    bool coverage_warning = false;
};

/// Product-Gaussian kernel density estimate of the endpoint law on grid.
KdeResult empirical_density(const EndpointSample& sample, const Grid2D& grid, std::array<double, 2> bandwidth);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov distribution.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

}  // namespace grushin
