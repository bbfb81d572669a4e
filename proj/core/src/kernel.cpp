#include "grushin/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "grushin/error.hpp"
#include "grushin/parallel.hpp"
#include "grushin/rng.hpp"

namespace grushin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kInvSqrtTwoPi = 1.0 / std::sqrt(kTwoPi);

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

double normal_pdf(double z, double var) { return kInvSqrtTwoPi / std::sqrt(var) * std::exp(-0.5 * z * z / var); }

struct PaperTerms {
    double value, q;
};

PaperTerms paper_eval(const KernelParams& p, double x, double y) {
    const double t = p.t();
    const double dx = x - p.mu1();
    const double q = p.mu1() * dx - y + p.mu2();
    const double v = std::exp(-dx * dx / t - q * q / (t * t)) / (kTwoPi * t * std::sqrt(t));
    return {v, q};
}

struct Bivariate {
    double sxx, sxy, syy, det;
};

Bivariate moment_cov(const KernelParams& p) {
    const double t = p.t(), m = p.mu1();
    Bivariate c{t, m * t, m * m * t + 0.5 * t * t, 0.0};
    c.det = c.sxx * c.syy - c.sxy * c.sxy;
    return c;
}

double moment_eval(const KernelParams& p, double x, double y, double* gx = nullptr, double* gy = nullptr) {
    const auto c = moment_cov(p);
    const double dx = x - p.mu1(), dy = y - p.mu2();
    // Sigma^{-1} (dx, dy)
    const double ax = (c.syy * dx - c.sxy * dy) / c.det;
    const double ay = (-c.sxy * dx + c.sxx * dy) / c.det;
    const double v = std::exp(-0.5 * (dx * ax + dy * ay)) / (kTwoPi * std::sqrt(c.det));
    if (gx) *gx = -ax * v;
    if (gy) *gy = -ay * v;
    return v;
}

void validate_bridge(const BridgeMC& b) {
    if (b.n_paths < 100) throw DomainError("BridgeMC: n_paths must be >= 100");
    if (b.n_steps < 16) throw DomainError("BridgeMC: n_steps must be >= 16");
}

}  // namespace

KernelParams::KernelParams(double t, double mu1, double mu2) : t_(t), mu1_(mu1), mu2_(mu2) {
    require_finite(t, "KernelParams: t");
    require_finite(mu1, "KernelParams: mu1");
    require_finite(mu2, "KernelParams: mu2");
    if (!(t > 0.0)) throw DomainError("KernelParams: t must be > 0");
}

std::string kind_name(const KernelKind& kind) {
    struct V {
        std::string operator()(const PaperClosedForm&) const { return "paper"; }
        std::string operator()(const MomentGaussian&) const { return "moment"; }
        std::string operator()(const BridgeMC&) const { return "bridge"; }
    };
    return std::visit(V{}, kind);
}

bool is_closed_form(const KernelKind& kind) noexcept { return !std::holds_alternative<BridgeMC>(kind); }

// ---------------------------------------------------------------------------

BridgeEnsemble::BridgeEnsemble(const BridgeMC& cfg) : cfg_(cfg) {
    validate_bridge(cfg);
    const std::size_t n = cfg.n_steps;
    const double dtau = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i <= n; ++i) {
        const double tau = static_cast<double>(i) * dtau;
        const double w = (i == 0 || i == n) ? 0.5 * dtau : dtau;
        d00_ += w * (1.0 - tau) * (1.0 - tau);
        d01_ += w * (1.0 - tau) * tau;
        d11_ += w * tau * tau;
    }

    c0_.assign(cfg.n_paths, 0.0);
    c1_.assign(cfg.n_paths, 0.0);
    c2_.assign(cfg.n_paths, 0.0);
    parallel_for(cfg.n_paths, [&](std::size_t k) {
        StreamRng rng(cfg.seed, k);
        std::normal_distribution<double> normal(0.0, std::sqrt(dtau));
        std::vector<double> w(n + 1, 0.0);
        for (std::size_t i = 1; i <= n; ++i) w[i] = w[i - 1] + normal(rng);
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        // Bridge endpoints are zero, so the trapezoid reduces to interior nodes.
        for (std::size_t i = 1; i < n; ++i) {
            const double tau = static_cast<double>(i) * dtau;
            const double b = w[i] - tau * w[n];
            s0 += b * b;
            s1 += (1.0 - tau) * b;
            s2 += tau * b;
        }
        c0_[k] = s0 * dtau;
        c1_[k] = s1 * dtau;
        c2_[k] = s2 * dtau;
    });
}

void BridgeEnsemble::integrated_squares(double a, double b, double t, std::span<double> out) const noexcept {
    for (std::size_t k = 0; k < out.size() && k < size(); ++k) out[k] = integrated_square(k, a, b, t);
}

// ---------------------------------------------------------------------------

Kernel::Kernel(KernelKind kind) : kind_(std::move(kind)) {
    if (const auto* b = std::get_if<BridgeMC>(&kind_)) ensemble_ = std::make_shared<const BridgeEnsemble>(*b);
}

KernelValue Kernel::eval(const KernelParams& p, double x, double y) const {
    require_finite(x, "eval_kernel: x");
    require_finite(y, "eval_kernel: y");
    if (std::holds_alternative<PaperClosedForm>(kind_)) return {paper_eval(p, x, y).value, 0.0};
    if (std::holds_alternative<MomentGaussian>(kind_)) return {moment_eval(p, x, y), 0.0};

    const auto& ens = *ensemble_;
    const double px = normal_pdf(x - p.mu1(), p.t());
    const double dy = y - p.mu2();
    double sum = 0.0, sum2 = 0.0;
    std::size_t positive = 0;
    for (std::size_t k = 0; k < ens.size(); ++k) {
        const double v = ens.integrated_square(k, p.mu1(), x, p.t());
        if (!(v > 0.0)) continue;
        ++positive;
        const double phi = normal_pdf(dy, v);
        sum += phi;
        sum2 += phi * phi;
    }
    if (positive == 0)
        throw DegenerateError("BridgeMC: every bridge has zero integrated square; increase n_steps");
    const double n = static_cast<double>(ens.size());
    const double mean = sum / n;
    const double var = std::max(0.0, sum2 / n - mean * mean) * n / (n - 1.0);
    return {px * mean, px * std::sqrt(var / n)};
}

KernelGradient Kernel::grad(const KernelParams& p, double x, double y) const {
    require_finite(x, "eval_kernel_grad: x");
    require_finite(y, "eval_kernel_grad: y");
    if (std::holds_alternative<PaperClosedForm>(kind_)) {
        const auto [k, q] = paper_eval(p, x, y);
        const double t = p.t();
        const double dlx = -2.0 * (x - p.mu1()) / t - 2.0 * p.mu1() * q / (t * t);
        const double dly = 2.0 * q / (t * t);
        return {dlx * k, dly * k};
    }
    if (std::holds_alternative<MomentGaussian>(kind_)) {
        KernelGradient g;
        moment_eval(p, x, y, &g.dx, &g.dy);
        return g;
    }
    throw UnsupportedError("eval_kernel_grad: BridgeMC has no analytic gradient; use finite differences");
}

KernelValue eval_kernel(const KernelKind& kind, const KernelParams& params, double x, double y) {
    return Kernel(kind).eval(params, x, y);
}

KernelGradient eval_kernel_grad(const KernelKind& kind, const KernelParams& params, double x, double y) {
    if (!is_closed_form(kind))
        throw UnsupportedError("eval_kernel_grad: BridgeMC has no analytic gradient; use finite differences");
    return Kernel(kind).grad(params, x, y);
}

// ---------------------------------------------------------------------------

std::vector<double> simpson_weights(std::size_t n, double h) {
    std::vector<double> w(n, h);
    if (n < 2) return w;
    if (n % 2 == 0 || n < 3) {
        w.front() = w.back() = 0.5 * h;
        return w;
    }
    for (std::size_t i = 0; i < n; ++i) w[i] = (i == 0 || i + 1 == n) ? h / 3.0 : (i % 2 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
    return w;
}

std::pair<double, double> required_mass_halfwidths(const KernelParams& p) {
    const double st = std::sqrt(p.t());
    return {8.0 * st, 8.0 * std::max(p.t(), std::abs(p.mu1()) * st)};
}

Grid2D default_mass_box(const KernelParams& p, std::size_t nx, std::size_t ny) {
    const double st = std::sqrt(p.t());
    return Grid2D::centered(p.mu1(), p.mu2(), 10.0 * st, 10.0 * std::max(p.t(), (1.0 + std::abs(p.mu1())) * st), nx, ny);
}

KernelValue kernel_mass(const Kernel& kernel, const KernelParams& p, const Grid2D& box) {
    const auto [need_x, need_y] = required_mass_halfwidths(p);
    const double have_x = std::min(p.mu1() - box.x0(), box.x1() - p.mu1());
    const double have_y = std::min(p.mu2() - box.y0(), box.y1() - p.mu2());
    if (have_x < need_x || have_y < need_y) {
        std::ostringstream msg;
        msg.precision(6);
        msg << "kernel_mass: quadrature box too small; need half widths >= (" << need_x << ", " << need_y
            << ") around (mu1, mu2), have (" << have_x << ", " << have_y << ")";
        throw PreconditionError(msg.str());
    }
    const auto wx = simpson_weights(box.nx(), box.hx());
    const auto wy = simpson_weights(box.ny(), box.hy());

    if (kernel.closed_form()) {
        std::vector<double> cols(box.nx(), 0.0);
        parallel_for(box.nx(), [&](std::size_t i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < box.ny(); ++j) acc += wy[j] * kernel.eval(p, box.x(i), box.y(j)).value;
            cols[i] = wx[i] * acc;
        });
        double total = 0.0;
        for (double c : cols) total += c;
        return {total, 0.0};
    }

    // Every bridge path carries unit mass, so the spread across paths is tiny
    // and the quadrature bias dominates. The reported uncertainty combines the
    // path standard error with |Simpson - trapezoid| on the same nodes.
    const auto& ens = *kernel.ensemble();
    std::vector<double> px(box.nx());
    for (std::size_t i = 0; i < box.nx(); ++i) px[i] = normal_pdf(box.x(i) - p.mu1(), p.t());
    auto trap = [](std::size_t n, double h) {
        std::vector<double> w(n, h);
        w.front() = w.back() = 0.5 * h;
        return w;
    };
    const auto tx = trap(box.nx(), box.hx()), ty = trap(box.ny(), box.hy());
    std::vector<double> per_path(ens.size(), 0.0), per_path_trap(ens.size(), 0.0);
    const double hy = box.hy();
    parallel_for(ens.size(), [&](std::size_t k) {
        double acc = 0.0, acc_t = 0.0;
        for (std::size_t i = 0; i < box.nx(); ++i) {
            const double v = ens.integrated_square(k, p.mu1(), box.x(i), p.t());
            if (!(v > 0.0)) continue;
            const double reach = 12.0 * std::sqrt(v);
            const auto jlo = static_cast<std::size_t>(std::max(0.0, std::floor((p.mu2() - reach - box.y0()) / hy)));
            const auto jhi = std::min(box.ny(), static_cast<std::size_t>(std::max(0.0, std::ceil((p.mu2() + reach - box.y0()) / hy))) + 1);
            double inner = 0.0, inner_t = 0.0;
            for (std::size_t j = jlo; j < jhi; ++j) {
                const double phi = normal_pdf(box.y(j) - p.mu2(), v);
                inner += wy[j] * phi;
                inner_t += ty[j] * phi;
            }
            acc += wx[i] * px[i] * inner;
            acc_t += tx[i] * px[i] * inner_t;
        }
        per_path[k] = acc;
        per_path_trap[k] = acc_t;
    });
    const double n = static_cast<double>(ens.size());
    double mean = 0.0, mean_t = 0.0;
    for (std::size_t k = 0; k < per_path.size(); ++k) {
        mean += per_path[k];
        mean_t += per_path_trap[k];
    }
    mean /= n;
    mean_t /= n;
    double var = 0.0;
    for (double m : per_path) var += (m - mean) * (m - mean);
    var /= (n - 1.0);
    const double quad = mean - mean_t;
    return {mean, std::sqrt(var / n + quad * quad)};
}

// ---------------------------------------------------------------------------

std::vector<std::pair<double, double>> kernel_norm_decay(const KernelKind& kind, KernelDerivative derivative,
                                                         double r, std::span<const double> t_list,
                                                         std::pair<double, double> mu,
                                                         const NormDecayOptions& opts) {
    if (std::isnan(r) || r < 1.0) throw DomainError("kernel_norm_decay: r must be >= 1");
    if (!is_closed_form(kind)) throw UnsupportedError("kernel_norm_decay: closed-form kernels only");
    const Kernel kernel(kind);

    auto field = [&](const KernelParams& p, double x, double y) {
        switch (derivative) {
            case KernelDerivative::none: return kernel.eval(p, x, y).value;
            case KernelDerivative::grad_x: return kernel.grad(p, x, y).dx;
            case KernelDerivative::grad_y: return kernel.grad(p, x, y).dy;
        }
        return 0.0;
    };
    auto accumulate = [&](double& acc, double w, double v) {
        if (std::isinf(r))
            acc = std::max(acc, std::abs(v));
        else
            acc += w * std::pow(std::abs(v), r);
    };
    auto finish = [&](double acc) { return std::isinf(r) ? acc : std::pow(acc, 1.0 / r); };

    std::vector<std::pair<double, double>> out;
    out.reserve(t_list.size());
    for (double t : t_list) {
        const KernelParams p(t, mu.first, mu.second);
        const double scale = opts.scaling == NormScaling::peak_normalized
                                 ? 1.0 / kernel.eval(p, mu.first, mu.second).value
                                 : 1.0;
        const Grid2D box = default_mass_box(p, 3, 3);
        double acc = 0.0;
        if (opts.domain == NormDomain::single_axis) {
            const std::size_t n = std::max<std::size_t>(opts.points, 3);
            const bool along_y = derivative == KernelDerivative::grad_y;
            const double a = along_y ? box.y0() : box.x0();
            const double b = along_y ? box.y1() : box.x1();
            const double h = (b - a) / static_cast<double>(n - 1);
            const auto w = simpson_weights(n, h);
            for (std::size_t i = 0; i < n; ++i) {
                const double s = a + h * static_cast<double>(i);
                const double v = along_y ? field(p, mu.first, s) : field(p, s, mu.second);
                accumulate(acc, w[i], scale * v);
            }
        } else {
            const std::size_t n = std::clamp<std::size_t>(opts.points, 3, 801) | 1;
            const Grid2D g = default_mass_box(p, n, n);
            const auto wx = simpson_weights(n, g.hx());
            const auto wy = simpson_weights(n, g.hy());
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) accumulate(acc, wx[i] * wy[j], scale * field(p, g.x(i), g.y(j)));
        }
        out.emplace_back(t, finish(acc));
    }
    return out;
}

}  // namespace grushin
