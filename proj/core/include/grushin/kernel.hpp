#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "grushin/grid.hpp"

namespace grushin {

/// Time and start point (mu1, mu2) of a transition density.
class KernelParams {
public:
    /// Throws DomainError unless t > 0 and all values are finite.
    KernelParams(double t, double mu1, double mu2);

    double t() const noexcept { return t_; }
    double mu1() const noexcept { return mu1_; }
    double mu2() const noexcept { return mu2_; }

private:
    double t_, mu1_, mu2_;
};

/// (2 pi t^{3/2})^{-1} exp{-(x-mu1)^2/t - [mu1(x-mu1) - y + mu2]^2/t^2}, verbatim.
/// Integrates to 1/2 over the plane.
struct PaperClosedForm {};

/// Bivariate normal with mean (mu1, mu2) and covariance
/// [[t, mu1 t], [mu1 t, mu1^2 t + t^2/2]].
struct MomentGaussian {};

/// Monte-Carlo estimate of the true transition density of dX = dW1,
/// dY = X dW2 via Brownian bridges. Requires n_paths >= 100, n_steps >= 16.
struct BridgeMC {
    std::size_t n_paths = 10000;
    std::size_t n_steps = 64;
    std::uint64_t seed = 7;
};

using KernelKind = std::variant<PaperClosedForm, MomentGaussian, BridgeMC>;

std::string kind_name(const KernelKind& kind);
bool is_closed_form(const KernelKind& kind) noexcept;

struct KernelValue {
    double value = 0.0;
    double std_error = 0.0;  ///< exactly 0 for closed forms
};

struct KernelGradient {
    double dx = 0.0;
    double dy = 0.0;
};

/// Integrated squares of standard Brownian bridges on [0, 1], one entry per path.
///
/// For a bridge from a to b over [0, t] written as a(1-s/t) + b s/t + sqrt(t) B(s/t),
/// the trapezoid sum of its square on n_steps cells is
///   t [a^2 d00 + 2ab d01 + b^2 d11] + 2 t^{3/2} [a c1 + b c2] + t^2 c0,
/// so one ensemble serves every start point, end point and time
/// (common random numbers across query points).
class BridgeEnsemble {
public:
    explicit BridgeEnsemble(const BridgeMC& cfg);

    std::size_t size() const noexcept { return c0_.size(); }
    const BridgeMC& config() const noexcept { return cfg_; }

    /// Trapezoid integral of the squared bridge path from a to b over [0, t].
    double integrated_square(std::size_t k, double a, double b, double t) const noexcept {
        const double st = std::sqrt(t);
        return t * (a * a * d00_ + 2.0 * a * b * d01_ + b * b * d11_) +
               2.0 * t * st * (a * c1_[k] + b * c2_[k]) + t * t * c0_[k];
    }

    void integrated_squares(double a, double b, double t, std::span<double> out) const noexcept;

private:
    BridgeMC cfg_;
    std::vector<double> c0_, c1_, c2_;
    double d00_ = 0.0, d01_ = 0.0, d11_ = 0.0;
};

/// A kernel kind together with any state it needs (the bridge ensemble).
/// Evaluation is const and safe to call concurrently.
class Kernel {
public:
    explicit Kernel(KernelKind kind);

    const KernelKind& kind() const noexcept { return kind_; }
    bool closed_form() const noexcept { return is_closed_form(kind_); }
    /// Bridge ensemble, or nullptr for closed forms.
    const BridgeEnsemble* ensemble() const noexcept { return ensemble_.get(); }

    KernelValue eval(const KernelParams& p, double x, double y) const;
    /// Exact analytic gradient in the field variables (x, y).
    /// Throws UnsupportedError for BridgeMC.
    KernelGradient grad(const KernelParams& p, double x, double y) const;

private:
    KernelKind kind_;
    std::shared_ptr<const BridgeEnsemble> ensemble_;
};

KernelValue eval_kernel(const KernelKind& kind, const KernelParams& params, double x, double y);
KernelGradient eval_kernel_grad(const KernelKind& kind, const KernelParams& params, double x, double y);

/// Required quadrature half widths around (mu1, mu2) for kernel_mass.
std::pair<double, double> required_mass_halfwidths(const KernelParams& params);

/// Default quadrature box: half widths 10 sqrt(t) and 10 max(t, (1+|mu1|) sqrt(t)).
Grid2D default_mass_box(const KernelParams& params, std::size_t nx = 401, std::size_t ny = 401);

/// Integral of K over quad_box by Simpson's rule (trapezoid on even counts).
/// For BridgeMC, std_error combines the standard error across paths with a
/// quadrature error estimate (Simpson minus trapezoid on the same nodes).
/// Throws PreconditionError if the box is narrower than required_mass_halfwidths.
KernelValue kernel_mass(const Kernel& kernel, const KernelParams& params, const Grid2D& quad_box);

enum class KernelDerivative { none, grad_x, grad_y };
enum class NormDomain { single_axis, full_plane };
enum class NormScaling { raw, peak_normalized };

struct NormDecayOptions {
    NormDomain domain = NormDomain::single_axis;
    /// peak_normalized divides by the kernel's peak value so that only the
    /// shape (x ~ sqrt(t), y ~ t) contributes to the time dependence.
    NormScaling scaling = NormScaling::peak_normalized;
    std::size_t points = 2001;
};

/// L^r norms of K, d_x K or d_y K for each t.
///
/// single_axis integrates over x (none, grad_x) at y = mu2, or over y (grad_y)
/// at x = mu1. Closed forms only; r >= 1.
std::vector<std::pair<double, double>> kernel_norm_decay(const KernelKind& kind, KernelDerivative derivative,
                                                         double r, std::span<const double> t_list,
                                                         std::pair<double, double> mu,
                                                         const NormDecayOptions& opts = {});

/// Composite Simpson weights for n uniformly spaced nodes with spacing h
/// (trapezoid when n is even).
std::vector<double> simpson_weights(std::size_t n, double h);

}  // namespace grushin
