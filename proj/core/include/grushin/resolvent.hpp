#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "grushin/grid.hpp"
#include "grushin/kernel.hpp"

namespace grushin {

enum class TimeScheme {
    /// Gauss-Laguerre in lambda t; exact for e^{-lambda t} times polynomials.
    gauss_laguerre,
    /// Log-uniform nodes t_min .. t_max with the trapezoid rule in log t,
    /// for integrands with t^{-a} behaviour near t = 0.
    dyadic_adaptive,
};

struct TimeQuadrature {
    std::size_t n_nodes = 24;
    TimeScheme scheme = TimeScheme::gauss_laguerre;
    /// Lower cutoff for dyadic_adaptive; 0 selects (min(hx, hy) / 10)^2.
    double t_min = 0.0;
};

struct ResolventConfig {
    double lambda = 1.0;
    KernelKind kind = PaperClosedForm{};
    TimeQuadrature time;

    /// Throws DomainError unless lambda > 0 and n_nodes >= 16.
    void validate() const;
};

struct TimeNode {
    double t;
    double weight;  ///< includes the e^{-lambda t} factor
};

/// Nodes and weights approximating int_0^inf e^{-lambda t} g(t) dt by sum w_j g(t_j).
std::vector<TimeNode> time_nodes(const ResolventConfig& cfg, double min_spacing);

struct ResolventDiagnostics {
    bool truncation_warning = false;
    /// max |f| on the grid boundary relative to max |f|.
    double boundary_ratio = 0.0;
    /// Crude bound on the mass lost outside the box: boundary_ratio * sup|f| / lambda.
    double tail_bound = 0.0;
    std::size_t time_nodes = 0;
};

struct ResolventFields {
    GridFunction u;
    std::optional<GridFunction> du_dx;
    std::optional<GridFunction> du_dy;
};

/// u = (lambda - L)^{-1} f = int_0^inf e^{-lambda t} int K(t; source -> target) f(source) dt.
///
/// The source integral treats f as its piecewise-linear interpolant on the grid
/// (zero outside), so each time node reduces to Gaussian (or Gaussian-mixture)
/// expectations of hat functions, which have closed forms. This keeps the
/// short-time layer where the kernel is narrower than the grid exact.
///
/// Throws DomainError for lambda <= 0.
GridFunction apply_resolvent(const Kernel& kernel, const GridFunction& f, const ResolventConfig& cfg,
                             ResolventDiagnostics* diag = nullptr);
GridFunction apply_resolvent(const GridFunction& f, const ResolventConfig& cfg, ResolventDiagnostics* diag = nullptr);

/// u together with (d_x u, d_y u), obtained by differentiating the kernel
/// weights under the integral. Closed forms only (UnsupportedError otherwise).
ResolventFields resolvent_with_gradients(const Kernel& kernel, const GridFunction& f, const ResolventConfig& cfg,
                                         ResolventDiagnostics* diag = nullptr);
std::pair<GridFunction, GridFunction> resolvent_gradients(const GridFunction& f, const ResolventConfig& cfg);

// ---------------------------------------------------------------------------
// Picard iteration for (lambda - L) u + b . grad u = f

struct PicardReport {
    std::size_t n_iters = 0;
    /// ||u_n - u_{n-1}||_inf + ||d_x(u_n - u_{n-1})||_inf + ||d_y(u_n - u_{n-1})||_inf
    std::vector<double> diff_norms;
    /// diff_norms[k+1] / diff_norms[k]
    std::vector<double> contraction_ratios;
    bool converged = false;
    double lambda = 0.0;
    /// Smallest lambda of a doubling scan whose ratios are all < 1 (0 if not scanned).
    double lambda0_estimate = 0.0;
    /// Smallest lambda of the same scan whose ratios are all <= 1/2 (0 if not scanned).
    double lambda_half_estimate = 0.0;
};

struct PicardOptions {
    double tol = 1e-8;
    /// Also stop once the update falls below rel_tol times the first update.
    double rel_tol = 0.0;
    std::size_t max_iter = 50;
    /// Throw NonContractionError after this many consecutive ratios > 1 (0 disables).
    std::size_t divergence_streak = 3;
};

struct PicardResult {
    GridFunction u;
    PicardReport report;
};

/// u_0 = 0, u_n = (lambda - L)^{-1}(f - b . grad u_{n-1}).
///
/// Gradients come from kernel differentiation for closed forms and from
/// central differences of u for BridgeMC. cfg.lambda is overridden by lambda.
PicardResult picard_solve(const GridFunction& f, const std::pair<GridFunction, GridFunction>& b, double lambda,
                          const PicardOptions& opts, const ResolventConfig& cfg);

struct Lambda0Scan {
    std::vector<double> lambdas;
    std::vector<double> max_ratios;
    double lambda0 = 0.0;      ///< first lambda with all ratios < 1
    double lambda_half = 0.0;  ///< first lambda with all ratios <= 1/2
};

/// Doubling scan lambda_start, 2 lambda_start, ... running up to `iters` Picard
/// steps each (stopping early once the update drops by 1e-9). Ratios keep
/// growing for several steps as the error loses smoothness, so `iters` should
/// be well above the transient.
Lambda0Scan scan_lambda0(const GridFunction& f, const std::pair<GridFunction, GridFunction>& b,
                         const ResolventConfig& cfg, double lambda_start, std::size_t max_doublings,
                         std::size_t iters = 30);

}  // namespace grushin
