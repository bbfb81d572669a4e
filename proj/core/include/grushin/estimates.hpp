#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "grushin/grid.hpp"
#include "grushin/kernel.hpp"
#include "grushin/resolvent.hpp"

namespace grushin {

// ---------------------------------------------------------------------------
// Young exponents

struct YoungExponents {
    double p = 1.0, q = 1.0, r = 1.0;
    double m = 1.0, n = 1.0;
};

/// m = 1 / (1 + 1/r - 1/q), n = 1 / (1 + 1/r - 1/p), so that
/// 1 + 1/r = 1/n + 1/p = 1/m + 1/q. Exponents may be kInf.
/// Throws DomainError if p, q, r < 1 or a derived exponent falls below 1.
YoungExponents young_exponents(double p, double q, double r);

// ---------------------------------------------------------------------------
// Log-log regression

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Least squares of log y on log x. Throws PreconditionError on fewer than two
/// points or non-positive data.
LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Separable test functions f(x, y) = f1(x) f2(y)

/// Every family carries the envelope e^{-(x^2 + y^2) / width^2} (e^{-y^2 / width^2}
/// for step_x); width defaults to 1.
enum class FamilyId {
    gauss,    ///< envelope only
    hermite,  ///< H_k(x) H_k(y) times envelope, physicists' H_k, k = param
    step_x,   ///< 1{|x| <= param} e^{-y^2 / width^2}
    kink_y,   ///< |y|^param times envelope, Hölder of order param in y
    power_x,  ///< |x|^{-param} times envelope, in L^p for p < 1/param
};

struct TestFamily {
    FamilyId id = FamilyId::gauss;
    double param = 1.0;
    double width = 1.0;
};

/// "name[:param[:width]]", e.g. "hermite:2", "step_x:1", "kink_y:0.5:3",
/// "power_x:0.45". For gauss the single parameter is the width ("gauss:3").
TestFamily parse_family(const std::string& text);
std::string family_name(const TestFamily& fam);

/// Samples the family on the grid. power_x takes its cell average at x = 0.
GridFunction sample_family(const TestFamily& fam, const Grid2D& grid);

/// Exact L^r(R^2) norm where a closed form exists (gauss, step_x, kink_y);
/// NaN otherwise.
double analytic_lr_norm(const TestFamily& fam, double r);

// ---------------------------------------------------------------------------
// Decay scans

enum class ScanTarget { u, grad_x_u, grad_y_u, grad2_x_u, grad2_y_u };
enum class ScanNorm { sup, lr, holder };
enum class Verdict { consistent, upper_bound_respected, discrepant };

std::string target_name(ScanTarget t);
std::string norm_name(ScanNorm n);
std::string verdict_name(Verdict v);
ScanTarget parse_target(const std::string& text);
ScanNorm parse_norm(const std::string& text);

struct ClaimedExponent {
    double value = 0.0;
    std::string source;  ///< short description of the estimate
    /// Other printed exponents for the same quantity (checked, not fitted).
    std::vector<std::pair<std::string, double>> alternatives;
};

/// Exponent of lambda claimed for the target in the given norm.
///
/// sup:    u -1 (also -1/2), grad_x_u -1/2, grad_y_u -beta
/// holder: grad_x_u -(1/2 - beta), grad_y_u 0 (only 0 < delta < beta ^ (1 - beta) is claimed)
/// lr:     u -1 - 3/(2r) + 1/(2p) + 1/q, grad_x_u one half more, grad2_x_u one less,
///         grad_y_u -s - 3/(2r) + 1/(2p), grad2_y_u one more than grad_y_u.
/// Throws UnsupportedError for other combinations.
ClaimedExponent claimed_exponent(ScanTarget target, ScanNorm norm, const MixedNormSpec& spec);

struct DecayScanOptions {
    Grid2D grid = Grid2D::centered(0.0, 0.0, 6.0, 6.0, 97, 97);
    TimeQuadrature time{};
    double tolerance = 0.15;
    HolderAxis holder_axis = HolderAxis::both;
    std::uint64_t seed = 0x5EED;
};

struct DecayScanResult {
    std::vector<double> lambdas;
    std::vector<double> norms;
    double fitted_slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double claimed_exponent = 0.0;
    std::string claim_source;
    Verdict verdict = Verdict::discrepant;
    /// Verdict of each alternative claim, in claimed_exponent() order.
    std::vector<std::pair<std::string, Verdict>> alternative_verdicts;
};

Verdict classify_slope(double slope, double claim, double tol);

/// Solves (lambda - L) u = f for each lambda, takes the requested norm of the
/// target field and fits the log-log slope.
///
/// lambdas must be increasing, geometric with ratio 2, at least 4 points,
/// spanning a factor >= 16 (PreconditionError otherwise). Norms below 1e-14
/// raise DegenerateError.
DecayScanResult decay_scan(ScanTarget target, ScanNorm norm, const MixedNormSpec& spec, const TestFamily& family,
                           std::span<const double> lambdas, const KernelKind& kind,
                           const DecayScanOptions& opts = {});

/// Target field for one lambda (used by decay_scan).
GridFunction scan_field(ScanTarget target, const Kernel& kernel, const GridFunction& f, const ResolventConfig& cfg);

/// Columns lambda, norm, log_lambda, log_norm with 17 significant digits.
void write_scan_csv(const DecayScanResult& res, std::ostream& os);

/// "a:ratio:b" geometric list, e.g. "1:2:16" -> 1 2 4 8 16.
std::vector<double> parse_geometric(const std::string& text);

// ---------------------------------------------------------------------------
// Constants of the L^r estimates

struct ConstantValue {
    double value = 0.0;
    double refined = 0.0;    ///< same integral at a tighter tolerance
    bool diverged = false;   ///< grows without bound as the domain is extended
    bool finite = true;
};

struct Constants {
    ConstantValue c1;
    ConstantValue c2;
};

/// C1 = (int (int e^{-p' x^2 - p'(y - x^2)^2} dx)^{q'/p'} dy)^{1/q'} and
/// C2 = 2 (int (int |y - x^2|^p |y|^{sp + p/q} e^{...} dx)^{q'/p'} dy)^{1/q'}
/// with unit-norm f factors, by nested adaptive Gauss-Kronrod quadrature.
/// Requires p, q > 1 and 0 < s < 1 (DomainError otherwise).
Constants eval_constants(double p, double q, double s);

/// Inner x-integral of C1 at fixed y; use_symmetry integrates over x >= 0 and doubles.
double c1_inner_integral(double p, double y, bool use_symmetry);

}  // namespace grushin
