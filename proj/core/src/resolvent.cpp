#include "grushin/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "grushin/error.hpp"
#include "grushin/parallel.hpp"
#include "grushin/quadrature.hpp"

namespace grushin {

void ResolventConfig::validate() const {
    if (!std::isfinite(lambda) || !(lambda > 0.0)) throw DomainError("resolvent: lambda must be > 0");
    if (time.n_nodes < 16) throw DomainError("resolvent: n_nodes must be >= 16");
    if (time.t_min < 0.0) throw DomainError("resolvent: t_min must be >= 0");
}

std::vector<TimeNode> time_nodes(const ResolventConfig& cfg, double min_spacing) {
    cfg.validate();
    const double lam = cfg.lambda;
    std::vector<TimeNode> out;
    if (cfg.time.scheme == TimeScheme::gauss_laguerre) {
        const auto rule = gauss_laguerre(cfg.time.n_nodes);
        for (std::size_t j = 0; j < rule.nodes.size(); ++j)
            if (rule.weights[j] > 0.0) out.push_back({rule.nodes[j] / lam, rule.weights[j] / lam});
        return out;
    }
    const double t_min = cfg.time.t_min > 0.0 ? cfg.time.t_min : std::pow(min_spacing / 10.0, 2);
    const double t_max = std::max(36.0 / lam, 4.0 * t_min);
    const std::size_t n = cfg.time.n_nodes;
    const double s0 = std::log(t_min), s1 = std::log(t_max);
    const double ds = (s1 - s0) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = std::exp(s0 + ds * static_cast<double>(j));
        const double w = (j == 0 || j + 1 == n) ? 0.5 * ds : ds;
        out.push_back({t, w * t * std::exp(-lam * t)});
    }
    // Below t_min the integrand is frozen at its t_min value.
    out.front().weight += -std::expm1(-lam * t_min) / lam;
    return out;
}

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
constexpr double kReach = 9.0;

// E[(Z - u)_+] for Z ~ N(0, s^2).
inline double ramp_expectation(double u, double s) {
    const double z = u / s;
    return s * kInvSqrt2Pi * std::exp(-0.5 * z * z) - u * normal_cdf(-z);
}

// Expectations of unit hat functions centred at m h - shift, m in [lo, hi],
// under N(0, s^2); optionally their derivatives with respect to a shift of the
// Gaussian's mean. Results are added (scaled by `scale`) into w / dw, which are
// indexed by m - lo.
void add_hat_weights(long lo, long hi, double h, double shift, double s, double scale, std::vector<double>& w,
                     std::vector<double>* dw, std::vector<double>& ramp, std::vector<double>& tail) {
    const std::size_t n = static_cast<std::size_t>(hi - lo + 1);
    ramp.resize(n + 2);
    tail.resize(n + 2);
    for (std::size_t k = 0; k < n + 2; ++k) {
        const double e = static_cast<double>(lo - 1 + static_cast<long>(k)) * h - shift;
        ramp[k] = ramp_expectation(e, s);
        if (dw) tail[k] = normal_cdf(-e / s);
    }
    const double inv_h = scale / h;
    for (std::size_t k = 0; k < n; ++k) {
        w[k] += (ramp[k] - 2.0 * ramp[k + 1] + ramp[k + 2]) * inv_h;
        if (dw) (*dw)[k] += (tail[k] - 2.0 * tail[k + 1] + tail[k + 2]) * inv_h;
    }
}

struct ColumnSupport {
    long lo = 0, hi = -1;  // inclusive range of rows with f != 0
};

// Row stencils of centred Gaussians N(0, s^2) on a log-spaced table of s,
// interpolated linearly in log s. Bridge mixtures need one stencil per path,
// and this turns each into a table lookup.
class StencilTable {
public:
    StencilTable() = default;
    StencilTable(double hy, double s_hi) : hy_(hy), s_lo_(1e-3 * hy) {
        const auto n = static_cast<std::size_t>(std::ceil(std::log(std::max(s_hi, s_lo_) / s_lo_) / kLogRatio)) + 2;
        std::vector<double> ramp, tail;
        levels_.resize(n);
        for (std::size_t l = 0; l < n; ++l) {
            const double s = s_lo_ * std::exp(kLogRatio * static_cast<double>(l));
            const long r = static_cast<long>(std::ceil(kReach * s / hy)) + 1;
            levels_[l].reach = r;
            levels_[l].w.assign(static_cast<std::size_t>(2 * r + 1), 0.0);
            add_hat_weights(-r, r, hy, 0.0, s, 1.0, levels_[l].w, nullptr, ramp, tail);
        }
    }

    /// Adds scale * weights(s) for offsets m in [mlo, mhi] into w (indexed m - mlo).
    void add(double s, double scale, long mlo, long mhi, std::vector<double>& w) const {
        if (s < s_lo_) {
            const double th = s / s_lo_;
            if (0 >= mlo && 0 <= mhi) w[static_cast<std::size_t>(-mlo)] += scale * (1.0 - th);
            add_level(0, scale * th, mlo, mhi, w);
            return;
        }
        const double pos = std::log(s / s_lo_) / kLogRatio;
        const auto l = std::min(static_cast<std::size_t>(pos), levels_.size() - 2);
        const double th = pos - static_cast<double>(l);
        add_level(l, scale * (1.0 - th), mlo, mhi, w);
        add_level(l + 1, scale * th, mlo, mhi, w);
    }

private:
    static constexpr double kLogRatio = 0.01;

    struct Level {
        long reach = 0;
        std::vector<double> w;
    };

    void add_level(std::size_t l, double scale, long mlo, long mhi, std::vector<double>& w) const {
        const auto& lv = levels_[l];
        const long a = std::max(mlo, -lv.reach), b = std::min(mhi, lv.reach);
        const double* src = lv.w.data() + (a + lv.reach);
        double* dst = w.data() + (a - mlo);
        for (long m = 0; m <= b - a; ++m) dst[m] += scale * src[m];
    }

    double hy_ = 0.0, s_lo_ = 0.0;
    std::vector<Level> levels_;
};

struct Engine {
    const Kernel& kernel;
    const GridFunction& f;
    std::vector<TimeNode> nodes;
    bool want_grad;
    std::vector<ColumnSupport> support;
    StencilTable table;

    double mass_factor() const { return std::holds_alternative<PaperClosedForm>(kernel.kind()) ? 0.5 : 1.0; }
    double x_variance(double t) const { return std::holds_alternative<PaperClosedForm>(kernel.kind()) ? 0.5 * t : t; }

    void run_column(std::size_t i, double* u, double* ux, double* uy) const {
        const auto& g = f.grid();
        const long nx = static_cast<long>(g.nx()), ny = static_cast<long>(g.ny());
        const double hx = g.hx(), hy = g.hy();
        const double x = g.x(i);
        const double mass = mass_factor();
        const auto* ens = kernel.ensemble();

        std::vector<double> px, dpx, wy, dwy, ramp, tail, acc_u(static_cast<std::size_t>(ny)),
            acc_d(static_cast<std::size_t>(ny));
        std::vector<double> var_k;
        for (const auto& node : nodes) {
            const double t = node.t;
            const double sx = std::sqrt(x_variance(t));
            const long reach_x = static_cast<long>(std::ceil(kReach * sx / hx)) + 1;
            const long ilo = std::max(0L, static_cast<long>(i) - reach_x);
            const long ihi = std::min(nx - 1, static_cast<long>(i) + reach_x);
            const auto nsrc = static_cast<std::size_t>(ihi - ilo + 1);
            px.assign(nsrc, 0.0);
            dpx.assign(nsrc, 0.0);
            // Source hats at x_{i'} under X' ~ N(x, sx^2): offsets (i' - i) hx.
            add_hat_weights(ilo - static_cast<long>(i), ihi - static_cast<long>(i), hx, 0.0, sx, 1.0, px,
                            want_grad ? &dpx : nullptr, ramp, tail);

            for (long ip = ilo; ip <= ihi; ++ip) {
                const auto k = static_cast<std::size_t>(ip - ilo);
                const auto& sup = support[static_cast<std::size_t>(ip)];
                if (sup.hi < sup.lo) continue;
                if (px[k] == 0.0 && (!want_grad || dpx[k] == 0.0)) continue;
                const double xs = g.x(static_cast<std::size_t>(ip));

                // Row offsets m with j + m inside the column support for some target row j.
                long mlo = sup.lo - (ny - 1), mhi = sup.hi;
                double shift = 0.0;
                double s_max;
                if (ens == nullptr) {
                    shift = xs * (xs - x);
                    s_max = t / std::numbers::sqrt2;
                } else {
                    var_k.resize(ens->size());
                    ens->integrated_squares(xs, x, t, var_k);
                    s_max = std::sqrt(*std::max_element(var_k.begin(), var_k.end()));
                }
                mlo = std::max(mlo, static_cast<long>(std::floor((shift - kReach * s_max) / hy)) - 1);
                mhi = std::min(mhi, static_cast<long>(std::ceil((shift + kReach * s_max) / hy)) + 1);
                if (mhi < mlo) continue;
                const auto nm = static_cast<std::size_t>(mhi - mlo + 1);
                wy.assign(nm, 0.0);
                dwy.assign(nm, 0.0);
                if (ens == nullptr) {
                    add_hat_weights(mlo, mhi, hy, shift, s_max, 1.0, wy, want_grad ? &dwy : nullptr, ramp, tail);
                } else {
                    const double inv_n = 1.0 / static_cast<double>(ens->size());
                    for (double v : var_k)
                        if (v > 0.0) table.add(std::sqrt(v), inv_n, mlo, mhi, wy);
                }

                // Apply the stencil down the source column.
                const double* fcol = f.values().data() + static_cast<std::size_t>(ip) * g.ny();
                for (long j = 0; j < ny; ++j) {
                    const long a = std::max(mlo, sup.lo - j), b = std::min(mhi, sup.hi - j);
                    double su = 0.0, sd = 0.0;
                    for (long m = a; m <= b; ++m) {
                        const double fv = fcol[j + m];
                        su += wy[static_cast<std::size_t>(m - mlo)] * fv;
                        if (want_grad) sd += dwy[static_cast<std::size_t>(m - mlo)] * fv;
                    }
                    acc_u[static_cast<std::size_t>(j)] = su;
                    acc_d[static_cast<std::size_t>(j)] = sd;
                }
                const double wu = node.weight * mass * px[k];
                for (long j = 0; j < ny; ++j) u[j] += wu * acc_u[static_cast<std::size_t>(j)];
                if (want_grad) {
                    // The y-centre is y + x'(x' - x), so d/dx of the row weights is -x' d/dshift.
                    const double wdx = node.weight * mass * dpx[k];
                    for (long j = 0; j < ny; ++j) {
                        const auto js = static_cast<std::size_t>(j);
                        ux[j] += wdx * acc_u[js] - wu * xs * acc_d[js];
                        uy[j] += wu * acc_d[js];
                    }
                }
            }
        }
    }
};

ResolventFields run(const Kernel& kernel, const GridFunction& f_in, const ResolventConfig& cfg, bool want_grad,
                    ResolventDiagnostics* diag) {
    cfg.validate();
    if (want_grad && !kernel.closed_form())
        throw UnsupportedError("resolvent_gradients: BridgeMC has no analytic gradient; difference apply_resolvent");
    const GridFunction f = f_in.margin() > 0 ? f_in.with_margin_filled(0.0) : f_in;
    const auto& g = f.grid();

    double fmax = 0.0, fbnd = 0.0;
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j) {
            const double v = std::abs(f(i, j));
            fmax = std::max(fmax, v);
            if (i == 0 || j == 0 || i + 1 == g.nx() || j + 1 == g.ny()) fbnd = std::max(fbnd, v);
        }

    Engine eng{kernel, f, time_nodes(cfg, std::min(g.hx(), g.hy())), want_grad, {}, {}};
    if (const auto* ens = kernel.ensemble()) {
        // The integrated square is convex in its end points, so its maximum
        // over the grid box sits at a corner.
        double v_hi = 0.0;
        std::vector<double> v(ens->size());
        for (const auto& node : eng.nodes)
            for (double a : {g.x0(), g.x1()})
                for (double b : {g.x0(), g.x1()}) {
                    ens->integrated_squares(a, b, node.t, v);
                    v_hi = std::max(v_hi, *std::max_element(v.begin(), v.end()));
                }
        eng.table = StencilTable(g.hy(), std::sqrt(v_hi));
    }
    eng.support.resize(g.nx());
    for (std::size_t i = 0; i < g.nx(); ++i) {
        ColumnSupport s;
        for (std::size_t j = 0; j < g.ny(); ++j)
            if (f(i, j) != 0.0) {
                if (s.hi < s.lo) s.lo = static_cast<long>(j);
                s.hi = static_cast<long>(j);
            }
        eng.support[i] = s;
    }

    std::vector<double> u(g.size(), 0.0), ux, uy;
    if (want_grad) {
        ux.assign(g.size(), 0.0);
        uy.assign(g.size(), 0.0);
    }
    if (fmax > 0.0) {
        parallel_for(g.nx(), [&](std::size_t i) {
            eng.run_column(i, u.data() + i * g.ny(), want_grad ? ux.data() + i * g.ny() : nullptr,
                           want_grad ? uy.data() + i * g.ny() : nullptr);
        });
    }

    if (diag) {
        diag->boundary_ratio = fmax > 0.0 ? fbnd / fmax : 0.0;
        diag->truncation_warning = diag->boundary_ratio >= 1e-12;
        diag->tail_bound = fbnd / cfg.lambda;
        diag->time_nodes = eng.nodes.size();
    }

    ResolventFields out{GridFunction(g, std::move(u)), std::nullopt, std::nullopt};
    if (want_grad) {
        out.du_dx = GridFunction(g, std::move(ux));
        out.du_dy = GridFunction(g, std::move(uy));
    }
    return out;
}

}  // namespace

GridFunction apply_resolvent(const Kernel& kernel, const GridFunction& f, const ResolventConfig& cfg,
                             ResolventDiagnostics* diag) {
    return run(kernel, f, cfg, false, diag).u;
}

GridFunction apply_resolvent(const GridFunction& f, const ResolventConfig& cfg, ResolventDiagnostics* diag) {
    cfg.validate();
    return apply_resolvent(Kernel(cfg.kind), f, cfg, diag);
}

ResolventFields resolvent_with_gradients(const Kernel& kernel, const GridFunction& f, const ResolventConfig& cfg,
                                         ResolventDiagnostics* diag) {
    return run(kernel, f, cfg, true, diag);
}

std::pair<GridFunction, GridFunction> resolvent_gradients(const GridFunction& f, const ResolventConfig& cfg) {
    cfg.validate();
    auto fields = resolvent_with_gradients(Kernel(cfg.kind), f, cfg);
    return {std::move(*fields.du_dx), std::move(*fields.du_dy)};
}

// ---------------------------------------------------------------------------

namespace {

struct Iterate {
    GridFunction u, dx, dy;
};

Iterate resolve_with_grad(const Kernel& kernel, const GridFunction& g, const ResolventConfig& cfg) {
    if (kernel.closed_form()) {
        auto r = resolvent_with_gradients(kernel, g, cfg);
        return {std::move(r.u), std::move(*r.du_dx), std::move(*r.du_dy)};
    }
    GridFunction u = apply_resolvent(kernel, g, cfg);
    GridFunction dx = diff_x(u), dy = diff_y(u);
    return {std::move(u), std::move(dx), std::move(dy)};
}

GridFunction drift_source(const GridFunction& f, const std::pair<GridFunction, GridFunction>& b, const Iterate& it) {
    const auto& g = f.grid();
    const auto dx = it.dx.with_margin_filled(0.0), dy = it.dy.with_margin_filled(0.0);
    std::vector<double> v(g.size());
    const auto fv = f.values(), bx = b.first.values(), by = b.second.values(), gx = dx.values(), gy = dy.values();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = fv[k] - (bx[k] * gx[k] + by[k] * gy[k]);
    return GridFunction(g, std::move(v));
}

double composite_diff(const Iterate& a, const Iterate& b) {
    return sup_norm(a.u.axpby(1.0, b.u, -1.0)) + sup_norm(a.dx.axpby(1.0, b.dx, -1.0)) +
           sup_norm(a.dy.axpby(1.0, b.dy, -1.0));
}

struct PicardRun {
    Iterate last;
    PicardReport report;
    bool diverged = false;
};

PicardRun picard_run(const Kernel& kernel, const GridFunction& f, const std::pair<GridFunction, GridFunction>& b,
                     const ResolventConfig& cfg, const PicardOptions& opts) {
    const auto& g = f.grid();
    if (!(b.first.grid() == g) || !(b.second.grid() == g)) throw PreconditionError("picard_solve: drift grid mismatch");
    if (!std::isfinite(sup_norm(b.first)) || !std::isfinite(sup_norm(b.second)))
        throw DomainError("picard_solve: drift must be bounded");
    const bool no_drift = sup_norm(b.first.with_margin_filled(0.0)) == 0.0 && sup_norm(b.second.with_margin_filled(0.0)) == 0.0;

    PicardRun run{{GridFunction::zeros(g), GridFunction::zeros(g), GridFunction::zeros(g)}, {}, false};
    run.report.lambda = cfg.lambda;
    std::size_t streak = 0;
    for (std::size_t n = 1; n <= opts.max_iter; ++n) {
        Iterate next = resolve_with_grad(kernel, drift_source(f, b, run.last), cfg);
        const double d = composite_diff(next, run.last);
        run.report.diff_norms.push_back(d);
        run.report.n_iters = n;
        run.last = std::move(next);
        const auto& dn = run.report.diff_norms;
        if (dn.size() >= 2 && dn[dn.size() - 2] > 0.0) {
            const double ratio = dn.back() / dn[dn.size() - 2];
            run.report.contraction_ratios.push_back(ratio);
            streak = ratio > 1.0 ? streak + 1 : 0;
        }
        // Without drift the first iterate is already the fixed point.
        if (no_drift || d < opts.tol || d < opts.rel_tol * dn.front()) {
            run.report.converged = true;
            break;
        }
        if (opts.divergence_streak > 0 && streak >= opts.divergence_streak) {
            run.diverged = true;
            break;
        }
    }
    return run;
}

}  // namespace

PicardResult picard_solve(const GridFunction& f, const std::pair<GridFunction, GridFunction>& b, double lambda,
                          const PicardOptions& opts, const ResolventConfig& cfg_in) {
    ResolventConfig cfg = cfg_in;
    cfg.lambda = lambda;
    cfg.validate();
    const Kernel kernel(cfg.kind);
    auto run = picard_run(kernel, f, b, cfg, opts);
    if (run.diverged) {
        std::ostringstream msg;
        msg << "picard_solve: no contraction at lambda = " << lambda << " (" << opts.divergence_streak
            << " consecutive ratios > 1); increase lambda, e.g. via scan_lambda0";
        throw NonContractionError(msg.str(), lambda);
    }
    return {std::move(run.last.u), std::move(run.report)};
}

Lambda0Scan scan_lambda0(const GridFunction& f, const std::pair<GridFunction, GridFunction>& b,
                         const ResolventConfig& cfg_in, double lambda_start, std::size_t max_doublings,
                         std::size_t iters) {
    if (!(lambda_start > 0.0)) throw DomainError("scan_lambda0: lambda_start must be > 0");
    ResolventConfig cfg = cfg_in;
    const Kernel kernel(cfg.kind);
    PicardOptions opts;
    opts.tol = 0.0;
    opts.rel_tol = 1e-9;
    opts.max_iter = std::max<std::size_t>(iters, 3);
    opts.divergence_streak = 0;
    Lambda0Scan scan;
    double lam = lambda_start;
    for (std::size_t k = 0; k <= max_doublings; ++k, lam *= 2.0) {
        cfg.lambda = lam;
        const auto run = picard_run(kernel, f, b, cfg, opts);
        const auto& r = run.report.contraction_ratios;
        const double worst = r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
        scan.lambdas.push_back(lam);
        scan.max_ratios.push_back(worst);
        if (scan.lambda0 == 0.0 && worst < 1.0) scan.lambda0 = lam;
        if (scan.lambda_half == 0.0 && worst <= 0.5) {
            scan.lambda_half = lam;
            break;
        }
    }
    return scan;
}

}  // namespace grushin
