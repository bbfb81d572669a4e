#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "grushin/grid.hpp"
#include "grushin/kernel.hpp"
#include "grushin/sde.hpp"

namespace grushin {

struct ReportConfig {
    double t = 1.0;
    double mu1 = 1.0;
    double mu2 = 0.0;
    /// Kernel whose mass is reported as the headline "mass" field.
    KernelKind kind = PaperClosedForm{};
    std::vector<double> mass_times{0.1, 1.0, 10.0};
    std::size_t sim_paths = 200000;
    std::size_t sim_steps = 256;
    std::size_t bridge_paths = 10000;
    std::size_t bridge_steps = 64;
    std::uint64_t seed = 1;
    std::size_t grid_points = 41;
};

/// Densities of the endpoint law on a common grid: KDE of a simulation,
/// BridgeMC, and the two closed forms.
struct DensityComparison {
    Grid2D grid;
    GridFunction kde;
    GridFunction bridge;
    GridFunction bridge_se;
    GridFunction paper;
    GridFunction moment;
    bool kde_coverage_warning = false;
};

/// Grid for comparing densities at params: half widths 5 sqrt(t) in x and
/// 5 max(t, (1 + |mu1|) sqrt(t)) in y.
Grid2D comparison_grid(const KernelParams& params, std::size_t n);

/// Scott's rule sigma n^{-1/6} per coordinate.
std::array<double, 2> scott_bandwidth(const EndpointSample& sample);

DensityComparison compare_densities(const EndpointSample& sample, const Kernel& bridge, const KernelParams& params,
                                    std::size_t n);

/// sum |a - b| hx hy over the grid.
double l1_distance(const GridFunction& a, const GridFunction& b);

struct HeatResidual {
    double relative_sup = 0.0;  ///< sup |d_t K - L K| / sup |d_t K|
    double relative_l2 = 0.0;   ///< same ratio in the discrete L^2 norm
};

/// Forward-equation residual d_t K - (1/2)(K_xx + x^2 K_yy) in the target
/// variables on a space-time grid (t / 2, t, 2 t), by central differences.
HeatResidual heat_residual(const KernelKind& kind, const KernelParams& params, std::size_t n = 41);

struct ValidationReport {
    std::string json;      ///< machine-readable; doubles in shortest round-trip form
    std::string markdown;  ///< human-readable summary of the same numbers
    double mass = 0.0;     ///< mass of cfg.kind at cfg.t
    double mass_se = 0.0;
};

/// Runs every kernel diagnostic; each check reports a value and an interval
/// and none of them aborts the report.
ValidationReport validation_report(const ReportConfig& cfg);

}  // namespace grushin
