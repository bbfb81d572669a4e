#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "grushin/error.hpp"
#include "grushin/estimates.hpp"
#include "grushin/kernel.hpp"
#include "grushin/parallel.hpp"

using namespace grushin;

namespace {
constexpr double kPi = std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Independent bivariate normal density.
double bvn(double x, double y, double mx, double my, double sxx, double sxy, double syy) {
    const double det = sxx * syy - sxy * sxy;
    const double dx = x - mx, dy = y - my;
    const double q = (syy * dx * dx - 2 * sxy * dx * dy + sxx * dy * dy) / det;
    return std::exp(-0.5 * q) / (2 * kPi * std::sqrt(det));
}
}  // namespace

TEST_CASE("closed-form kernel substitution values") {
    const KernelParams p(1, 0, 0);
    CHECK(rel(eval_kernel(PaperClosedForm{}, p, 0, 0).value, 1 / (2 * kPi)) < 1e-14);
    CHECK(rel(eval_kernel(PaperClosedForm{}, p, 1, 0).value, std::exp(-1.0) / (2 * kPi)) < 1e-14);
    CHECK(eval_kernel(PaperClosedForm{}, p, 1, 0).std_error == 0.0);
}

TEST_CASE("moment gaussian against a scalar bivariate normal") {
    const KernelParams p(1, 1, 0);
    const double v = eval_kernel(MomentGaussian{}, p, 1, 1).value;
    CHECK(rel(v, std::exp(-1.0) / (2 * kPi * std::sqrt(0.5))) < 1e-13);
    CHECK(v == doctest::Approx(0.082806).epsilon(1e-5));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-2, 2);
    for (int k = 0; k < 50; ++k) {
        const double t = 0.2 + std::abs(U(rng)), m1 = U(rng), m2 = U(rng), x = U(rng), y = U(rng);
        const double ref = bvn(x, y, m1, m2, t, m1 * t, m1 * m1 * t + 0.5 * t * t);
        CHECK(rel(eval_kernel(MomentGaussian{}, KernelParams(t, m1, m2), x, y).value, ref) < 1e-12);
    }
}

TEST_CASE("params and kind validation") {
    CHECK_THROWS_AS(KernelParams(0, 0, 0), DomainError);
    CHECK_THROWS_AS(KernelParams(-1, 0, 0), DomainError);
    CHECK_THROWS_AS(KernelParams(1, std::nan(""), 0), DomainError);
    CHECK_THROWS_AS(Kernel(BridgeMC{50, 64, 1}), DomainError);
    CHECK_THROWS_AS(Kernel(BridgeMC{1000, 8, 1}), DomainError);
    CHECK_THROWS_AS(eval_kernel_grad(BridgeMC{200, 16, 1}, KernelParams(1, 0, 0), 0, 0), UnsupportedError);
}

TEST_CASE("gradient examples and the y-prefactor") {
    const KernelParams p(1, 0, 0);
    const auto g0 = eval_kernel_grad(PaperClosedForm{}, p, 0, 0);
    CHECK(g0.dx == 0.0);
    CHECK(g0.dy == 0.0);
    CHECK(eval_kernel_grad(PaperClosedForm{}, p, 1, 0).dx == doctest::Approx(-0.1170996).epsilon(1e-6));
    const double k01 = eval_kernel(PaperClosedForm{}, p, 0, 1).value;
    const double dy = eval_kernel_grad(PaperClosedForm{}, p, 0, 1).dy;
    const double h = 1e-5;
    const double fd =
        (eval_kernel(PaperClosedForm{}, p, 0, 1 + h).value - eval_kernel(PaperClosedForm{}, p, 0, 1 - h).value) / (2 * h);
    CHECK(rel(dy, fd) < 1e-8);
    CHECK(rel(dy, -2 * k01) < 1e-14);
    // The printed prefactor -(y / t^2) K is off by a factor 2.
    CHECK(rel(dy / (-1.0 * k01), 2.0) < 1e-14);
}

TEST_CASE("gradients match central differences on random points") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-2, 2);
    for (const KernelKind& kind : {KernelKind{PaperClosedForm{}}, KernelKind{MomentGaussian{}}}) {
        double worst = 0;
        for (int k = 0; k < 300; ++k) {
            const double t = 0.3 + 0.5 * std::abs(U(rng)), m1 = U(rng), m2 = U(rng);
            const KernelParams p(t, m1, m2);
            const double x = m1 + 0.5 * U(rng) * std::sqrt(t), y = m2 + m1 * (x - m1) + 0.5 * U(rng) * t;
            const auto g = eval_kernel_grad(kind, p, x, y);
            const double hx = 1e-5 * std::max(1.0, std::abs(x)), hy = 1e-5 * std::max(1.0, std::abs(y));
            const double fx = (eval_kernel(kind, p, x + hx, y).value - eval_kernel(kind, p, x - hx, y).value) / (2 * hx);
            const double fy = (eval_kernel(kind, p, x, y + hy).value - eval_kernel(kind, p, x, y - hy).value) / (2 * hy);
            const double scale = std::hypot(g.dx, g.dy);
            worst = std::max({worst, std::abs(g.dx - fx) / scale, std::abs(g.dy - fy) / scale});
        }
        CHECK(worst < 1e-5);
    }
}

TEST_CASE("reflection symmetry and anisotropic scaling") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-2, 2);
    for (int k = 0; k < 100; ++k) {
        const double t = 0.1 + std::abs(U(rng)), m1 = U(rng), m2 = U(rng), x = U(rng), y = U(rng);
        const KernelParams p(t, m1, m2);
        const double a = eval_kernel(PaperClosedForm{}, p, x, y).value;
        CHECK(rel(eval_kernel(PaperClosedForm{}, p, 2 * m1 - x, 2 * m2 - y).value, a) < 1e-11);
        const KernelParams p0(t, 0, 0), p1(1, 0, 0);
        CHECK(rel(eval_kernel(PaperClosedForm{}, p0, x, y).value,
                  std::pow(t, -1.5) * eval_kernel(PaperClosedForm{}, p1, x / std::sqrt(t), y / t).value) < 1e-12);
        CHECK(eval_kernel(MomentGaussian{}, KernelParams(t, 0, m2), -x, y).value ==
              doctest::Approx(eval_kernel(MomentGaussian{}, KernelParams(t, 0, m2), x, y).value).epsilon(1e-13));
    }
}

TEST_CASE("bridge axis symmetry at mu1 = 0 within MC error") {
    const Kernel k(BridgeMC{4000, 32, 9});
    const KernelParams p(1, 0, 0.5);
    for (double x : {0.3, 1.1})
        for (double dy : {0.2, 0.7}) {
            const auto a = k.eval(p, x, 0.5 + dy), b = k.eval(p, -x, 0.5 - dy);
            CHECK(std::abs(a.value - b.value) <= 3 * std::hypot(a.std_error, b.std_error) + 1e-15);
            CHECK(a.value >= 0.0);
        }
}

TEST_CASE("bridge x-marginal is the exact Brownian density") {
    const Kernel k(BridgeMC{2000, 32, 4});
    const KernelParams p(1, 0, 0);
    for (double x : {0.0, 0.7, -1.5}) {
        const std::size_t n = 801;
        const double hw = 12.0;
        const auto w = simpson_weights(n, 2 * hw / (n - 1));
        double m = 0;
        for (std::size_t j = 0; j < n; ++j) m += w[j] * k.eval(p, x, -hw + 2 * hw * j / (n - 1)).value;
        const double px = std::exp(-0.5 * x * x) / std::sqrt(2 * kPi);
        CHECK(m == doctest::Approx(px).epsilon(2e-3));
    }
}

TEST_CASE("mass diagnostics") {
    for (double t : {0.1, 1.0, 10.0}) {
        const KernelParams p(t, 0.7, -0.3);
        const auto box = default_mass_box(p);
        CHECK(std::abs(kernel_mass(Kernel(PaperClosedForm{}), p, box).value - 0.5) < 1e-6);
        CHECK(std::abs(kernel_mass(Kernel(MomentGaussian{}), p, box).value - 1.0) < 1e-8);
    }
    const KernelParams p(1, 0, 0);
    // Y has heavy tails where X is far out, so the y box is taller than the default.
    const auto mb = kernel_mass(Kernel(BridgeMC{10000, 64, 7}), p, Grid2D::centered(0, 0, 10, 25, 401, 1001));
    CHECK(mb.std_error > 0);
    CHECK(std::abs(mb.value - 1.0) <= 3 * mb.std_error + 1e-12);
    CHECK_THROWS_AS(kernel_mass(Kernel(MomentGaussian{}), p, Grid2D::centered(0, 0, 2, 2, 41, 41)), PreconditionError);
}

TEST_CASE("bridge evaluation is independent of the thread count") {
    const KernelParams p(0.8, 0.4, 0.1);
    set_num_threads(1);
    const Kernel a(BridgeMC{3000, 32, 21});
    set_num_threads(4);
    const Kernel b(BridgeMC{3000, 32, 21});
    set_num_threads(1);
    for (double x : {-0.5, 0.4, 1.3}) CHECK(a.eval(p, x, 0.2).value == b.eval(p, x, 0.2).value);
}

TEST_CASE("norm decay slopes") {
    std::vector<double> ts;
    for (int e = -4; e <= 4; ++e) ts.push_back(std::ldexp(1.0, e));
    auto slope = [&](KernelDerivative d, double r, const NormDecayOptions& o) {
        const auto s = kernel_norm_decay(PaperClosedForm{}, d, r, ts, {0, 0}, o);
        std::vector<double> t, v;
        for (auto [a, b] : s) t.push_back(a), v.push_back(b);
        return fit_loglog(t, v).slope;
    };
    CHECK(slope(KernelDerivative::grad_x, 2, {}) == doctest::Approx(-0.25).epsilon(0.05 / 0.25));
    CHECK(std::abs(slope(KernelDerivative::grad_y, 1, {})) <= 0.05);
    NormDecayOptions full{NormDomain::full_plane, NormScaling::raw, 401};
    const auto s = kernel_norm_decay(PaperClosedForm{}, KernelDerivative::none, 1, ts, {0, 0}, full);
    for (auto [t, v] : s) CHECK(v == doctest::Approx(0.5).epsilon(0.01));
    CHECK_THROWS_AS(kernel_norm_decay(PaperClosedForm{}, KernelDerivative::none, 0.5, ts, {0, 0}), DomainError);
    CHECK_THROWS_AS(kernel_norm_decay(BridgeMC{}, KernelDerivative::none, 1, ts, {0, 0}), UnsupportedError);
}
