#include "grushin/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "grushin/error.hpp"

namespace grushin {

namespace {

double inv(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

YoungExponents young_exponents(double p, double q, double r) {
    for (double e : {p, q, r})
        if (std::isnan(e) || e < 1.0) throw DomainError("young_exponents: p, q, r must be >= 1");
    YoungExponents y{p, q, r, 0.0, 0.0};
    const double im = 1.0 + inv(r) - inv(q);
    const double in = 1.0 + inv(r) - inv(p);
    if (im > 1.0)
        throw DomainError("young_exponents: m = 1/(1 + 1/r - 1/q) < 1 since 1/r > 1/q (r=" + fmt(r) + ", q=" + fmt(q) +
                          ")");
    if (in > 1.0)
        throw DomainError("young_exponents: n = 1/(1 + 1/r - 1/p) < 1 since 1/r > 1/p (r=" + fmt(r) + ", p=" + fmt(p) +
                          ")");
    y.m = im > 0.0 ? 1.0 / im : kInf;
    y.n = in > 0.0 ? 1.0 / in : kInf;
    return y;
}

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw PreconditionError("fit_loglog: need >= 2 paired points");
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!(x[k] > 0.0) || !(y[k] > 0.0)) throw PreconditionError("fit_loglog: data must be positive");
        lx[k] = std::log(x[k]);
        ly[k] = std::log(y[k]);
        sx += lx[k];
        sy += ly[k];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (lx[k] - mx) * (lx[k] - mx);
        sxy += (lx[k] - mx) * (ly[k] - my);
        syy += (ly[k] - my) * (ly[k] - my);
    }
    if (!(sxx > 0.0)) throw PreconditionError("fit_loglog: x values must not all coincide");
    LogLogFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
    return fit;
}

// ---------------------------------------------------------------------------

TestFamily parse_family(const std::string& text) {
    std::vector<std::string> parts;
    {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(item);
    }
    if (parts.empty() || parts.size() > 3) throw PreconditionError("bad test family '" + text + "'");
    const std::string& name = parts[0];
    TestFamily fam;
    double def = 0.0;
    if (name == "gauss") fam.id = FamilyId::gauss, def = 1.0;
    else if (name == "hermite") fam.id = FamilyId::hermite, def = 2.0;
    else if (name == "step_x") fam.id = FamilyId::step_x, def = 1.0;
    else if (name == "kink_y") fam.id = FamilyId::kink_y, def = 0.5;
    else if (name == "power_x") fam.id = FamilyId::power_x, def = 0.45;
    else throw PreconditionError("unknown test family '" + name + "'");
    fam.param = def;
    try {
        if (parts.size() > 1) fam.param = std::stod(parts[1]);
        if (parts.size() > 2) fam.width = std::stod(parts[2]);
    } catch (const std::exception&) {
        throw PreconditionError("bad test family parameter in '" + text + "'");
    }
    if (fam.id == FamilyId::gauss) fam.width = fam.param;
    if (!(fam.width > 0)) throw DomainError("test family width must be > 0");
    switch (fam.id) {
        case FamilyId::hermite:
            if (fam.param < 0 || fam.param != std::floor(fam.param) || fam.param > 20)
                throw DomainError("hermite order must be an integer in [0, 20]");
            break;
        case FamilyId::step_x:
            if (!(fam.param > 0)) throw DomainError("step_x half width must be > 0");
            break;
        case FamilyId::kink_y:
            if (!(fam.param > 0 && fam.param <= 1)) throw DomainError("kink_y exponent must lie in (0, 1]");
            break;
        case FamilyId::power_x:
            if (!(fam.param > 0 && fam.param < 1)) throw DomainError("power_x exponent must lie in (0, 1)");
            break;
        case FamilyId::gauss:
            if (!(fam.param > 0)) throw DomainError("gauss width must be > 0");
            break;
    }
    return fam;
}

std::string family_name(const TestFamily& fam) {
    const std::string w = fam.width == 1.0 ? "" : ":" + fmt(fam.width);
    switch (fam.id) {
        case FamilyId::gauss: return "gauss:" + fmt(fam.width);
        case FamilyId::hermite: return "hermite:" + fmt(fam.param) + w;
        case FamilyId::step_x: return "step_x:" + fmt(fam.param) + w;
        case FamilyId::kink_y: return "kink_y:" + fmt(fam.param) + w;
        case FamilyId::power_x: return "power_x:" + fmt(fam.param) + w;
    }
    return "?";
}

namespace {

double hermite(int k, double x) {
    double h0 = 1.0, h1 = 2.0 * x;
    if (k == 0) return h0;
    for (int j = 1; j < k; ++j) {
        const double h2 = 2.0 * x * h1 - 2.0 * j * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

}  // namespace

GridFunction sample_family(const TestFamily& fam, const Grid2D& grid) {
    const double a = fam.param;
    const double k = 1.0 / (fam.width * fam.width);
    const double half_h = 0.5 * grid.hx();
    switch (fam.id) {
        case FamilyId::gauss:
            return GridFunction::sample(grid, [k](double x, double y) { return std::exp(-k * (x * x + y * y)); });
        case FamilyId::hermite: {
            const int order = static_cast<int>(a);
            return GridFunction::sample(grid, [order, k](double x, double y) {
                return hermite(order, x) * hermite(order, y) * std::exp(-k * (x * x + y * y));
            });
        }
        case FamilyId::step_x:
            return GridFunction::sample(
                grid, [a, k](double x, double y) { return std::abs(x) <= a ? std::exp(-k * y * y) : 0.0; });
        case FamilyId::kink_y:
            return GridFunction::sample(grid, [a, k](double x, double y) {
                return std::pow(std::abs(y), a) * std::exp(-k * (x * x + y * y));
            });
        case FamilyId::power_x:
            return GridFunction::sample(grid, [a, k, half_h](double x, double y) {
                const double ax = std::abs(x);
                const double f1 = ax < 0.5 * half_h ? std::pow(half_h, -a) / (1.0 - a) : std::pow(ax, -a);
                return f1 * std::exp(-k * (x * x + y * y));
            });
    }
    throw PreconditionError("sample_family: unknown family");
}

double analytic_lr_norm(const TestFamily& fam, double r) {
    const double pi = std::numbers::pi;
    const double w = fam.width;
    const double b = fam.param;
    if (std::isinf(r)) {
        switch (fam.id) {
            case FamilyId::gauss:
            case FamilyId::step_x: return 1.0;
            case FamilyId::kink_y: return std::pow(w * w * b / 2.0, b / 2.0) * std::exp(-b / 2.0);
            default: return std::nan("");
        }
    }
    const double g = w * std::sqrt(pi / r);  // int e^{-r x^2 / w^2} dx
    switch (fam.id) {
        case FamilyId::gauss: return std::pow(g * g, 1.0 / r);
        case FamilyId::step_x: return std::pow(2.0 * b * g, 1.0 / r);
        case FamilyId::kink_y: {
            // int |y|^{b r} e^{-r y^2 / w^2} dy = Gamma(e) (w^2 / r)^e, e = (b r + 1) / 2
            const double e = 0.5 * (b * r + 1.0);
            return std::pow(g * std::tgamma(e) * std::pow(w * w / r, e), 1.0 / r);
        }
        default: return std::nan("");
    }
}

// ---------------------------------------------------------------------------

std::string target_name(ScanTarget t) {
    switch (t) {
        case ScanTarget::u: return "u";
        case ScanTarget::grad_x_u: return "grad_x_u";
        case ScanTarget::grad_y_u: return "grad_y_u";
        case ScanTarget::grad2_x_u: return "grad2_x_u";
        case ScanTarget::grad2_y_u: return "grad2_y_u";
    }
    return "?";
}

std::string norm_name(ScanNorm n) {
    switch (n) {
        case ScanNorm::sup: return "sup";
        case ScanNorm::lr: return "lr";
        case ScanNorm::holder: return "holder";
    }
    return "?";
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::consistent: return "consistent";
        case Verdict::upper_bound_respected: return "upper_bound_respected";
        case Verdict::discrepant: return "discrepant";
    }
    return "?";
}

ScanTarget parse_target(const std::string& text) {
    for (auto t : {ScanTarget::u, ScanTarget::grad_x_u, ScanTarget::grad_y_u, ScanTarget::grad2_x_u,
                   ScanTarget::grad2_y_u})
        if (target_name(t) == text) return t;
    throw PreconditionError("unknown scan target '" + text + "'");
}

ScanNorm parse_norm(const std::string& text) {
    for (auto n : {ScanNorm::sup, ScanNorm::lr, ScanNorm::holder})
        if (norm_name(n) == text) return n;
    throw PreconditionError("unknown scan norm '" + text + "'");
}

ClaimedExponent claimed_exponent(ScanTarget target, ScanNorm norm, const MixedNormSpec& spec) {
    const double b = spec.beta;
    if (norm == ScanNorm::sup) {
        switch (target) {
            case ScanTarget::u: return {-1.0, "sup u, computed rate", {{"sup u, stated rate", -0.5}}};
            case ScanTarget::grad_x_u: return {-0.5, "sup grad_x u", {}};
            case ScanTarget::grad_y_u: return {-b, "sup grad_y u, f beta-Hölder in y", {}};
            default: break;
        }
    } else if (norm == ScanNorm::holder) {
        switch (target) {
            case ScanTarget::grad_x_u: return {-(0.5 - b), "[grad_x u]_beta", {}};
            case ScanTarget::grad_y_u: return {0.0, "[grad_y u]_beta, exponent -delta with 0 < delta < min(beta, 1-beta)", {}};
            default: break;
        }
    } else {
        const double base = -1.5 * inv(spec.r) + 0.5 * inv(spec.p);
        switch (target) {
            case ScanTarget::u: return {-1.0 + base + inv(spec.q), "L^r u", {}};
            case ScanTarget::grad_x_u: return {-0.5 + base + inv(spec.q), "L^r grad_x u", {}};
            case ScanTarget::grad2_x_u: return {base + inv(spec.q), "L^r grad2_x u", {}};
            case ScanTarget::grad_y_u: return {-spec.s + base, "L^r grad_y u, f2 in W^{s,q}", {}};
            case ScanTarget::grad2_y_u: return {-spec.s + base + 1.0, "L^r grad2_y u, f2 in W^{s,p}", {}};
        }
    }
    throw UnsupportedError("no claimed exponent for target " + target_name(target) + " in norm " + norm_name(norm));
}

Verdict classify_slope(double slope, double claim, double tol) {
    if (std::abs(slope - claim) <= tol) return Verdict::consistent;
    if (slope <= claim + tol) return Verdict::upper_bound_respected;
    return Verdict::discrepant;
}

GridFunction scan_field(ScanTarget target, const Kernel& kernel, const GridFunction& f, const ResolventConfig& cfg) {
    if (target == ScanTarget::u) return apply_resolvent(kernel, f, cfg);
    if (kernel.closed_form()) {
        auto fields = resolvent_with_gradients(kernel, f, cfg);
        switch (target) {
            case ScanTarget::grad_x_u: return *fields.du_dx;
            case ScanTarget::grad_y_u: return *fields.du_dy;
            case ScanTarget::grad2_x_u: return diff_x(*fields.du_dx);
            case ScanTarget::grad2_y_u: return diff_y(*fields.du_dy);
            default: break;
        }
    }
    const auto u = apply_resolvent(kernel, f, cfg);
    switch (target) {
        case ScanTarget::grad_x_u: return diff_x(u);
        case ScanTarget::grad_y_u: return diff_y(u);
        case ScanTarget::grad2_x_u: return diff_xx(u);
        case ScanTarget::grad2_y_u: return diff_yy(u);
        default: return u;
    }
}

DecayScanResult decay_scan(ScanTarget target, ScanNorm norm, const MixedNormSpec& spec, const TestFamily& family,
                           std::span<const double> lambdas, const KernelKind& kind, const DecayScanOptions& opts) {
    spec.validate();
    if (lambdas.size() < 4) throw PreconditionError("decay_scan: need at least 4 lambdas");
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        if (!(lambdas[k] > 0.0)) throw DomainError("decay_scan: lambdas must be > 0");
        if (k > 0 && std::abs(lambdas[k] / lambdas[k - 1] - 2.0) > 1e-9)
            throw PreconditionError("decay_scan: lambdas must be geometric with ratio 2");
    }
    if (lambdas.back() / lambdas.front() < 16.0 - 1e-9)
        throw PreconditionError("decay_scan: lambdas must span a factor >= 16");

    const auto claim = claimed_exponent(target, norm, spec);
    const Kernel kernel(kind);
    const auto f = sample_family(family, opts.grid);

    DecayScanResult res;
    res.lambdas.assign(lambdas.begin(), lambdas.end());
    for (double lam : lambdas) {
        ResolventConfig cfg;
        cfg.lambda = lam;
        cfg.kind = kind;
        cfg.time = opts.time;
        const auto field = scan_field(target, kernel, f, cfg);
        double v = 0.0;
        switch (norm) {
            case ScanNorm::sup: v = sup_norm(field); break;
            case ScanNorm::lr: v = lp_norm(field, spec.r); break;
            case ScanNorm::holder: v = holder_seminorm(field, spec.beta, opts.holder_axis, opts.seed); break;
        }
        if (!(v >= 1e-14)) throw DegenerateError("decay_scan: norm " + fmt(v) + " below 1e-14 at lambda " + fmt(lam));
        res.norms.push_back(v);
    }
    const auto fit = fit_loglog(res.lambdas, res.norms);
    res.fitted_slope = fit.slope;
    res.intercept = fit.intercept;
    res.r_squared = fit.r_squared;
    res.claimed_exponent = claim.value;
    res.claim_source = claim.source;
    res.verdict = classify_slope(fit.slope, claim.value, opts.tolerance);
    for (const auto& [name, value] : claim.alternatives)
        res.alternative_verdicts.emplace_back(name, classify_slope(fit.slope, value, opts.tolerance));
    return res;
}

void write_scan_csv(const DecayScanResult& res, std::ostream& os) {
    const auto old = os.precision(17);
    os << "lambda,norm,log_lambda,log_norm\n";
    for (std::size_t k = 0; k < res.lambdas.size(); ++k)
        os << res.lambdas[k] << ',' << res.norms[k] << ',' << std::log(res.lambdas[k]) << ','
           << std::log(res.norms[k]) << '\n';
    os.precision(old);
}

std::vector<double> parse_geometric(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            parts.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw PreconditionError("bad lambda list '" + text + "', expected start:ratio:end");
        }
    }
    if (parts.size() != 3 || !(parts[0] > 0) || !(parts[1] > 1) || !(parts[2] >= parts[0]))
        throw PreconditionError("bad lambda list '" + text + "', expected start:ratio:end");
    std::vector<double> out;
    for (double v = parts[0]; v <= parts[2] * (1 + 1e-12); v *= parts[1]) out.push_back(v);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

using boost::math::quadrature::gauss_kronrod;

double integrate(const std::function<double(double)>& g, std::span<const double> breaks, double tol) {
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k)
        if (breaks[k + 1] > breaks[k]) total += gauss_kronrod<double, 31>::integrate(g, breaks[k], breaks[k + 1], 20, tol);
    return total;
}

struct ConstantIntegrand {
    double p, pc, q, qc, s;
    bool with_weight;  // C2 factor |y - x^2|^p |y|^{sp + p/q}

    double inner(double y, double reach, double tol, bool use_symmetry) const {
        const double x_max = std::sqrt(reach / pc);
        const double root = y > 0 ? std::sqrt(y) : 0.0;
        auto g = [&](double x) {
            const double d = y - x * x;
            double v = std::exp(-pc * x * x - pc * d * d);
            if (with_weight) v *= std::pow(std::abs(d), p) * std::pow(std::abs(y), s * p + p / q);
            return v;
        };
        if (use_symmetry) {
            std::vector<double> br{0.0};
            if (root > 0 && root < x_max) br.push_back(root);
            br.push_back(x_max);
            return 2.0 * integrate(g, br, tol);
        }
        std::vector<double> br{-x_max};
        if (root > 0 && root < x_max) br.push_back(-root);
        br.push_back(0.0);
        if (root > 0 && root < x_max) br.push_back(root);
        br.push_back(x_max);
        return integrate(g, br, tol);
    }

    double total(double reach, double tol) const {
        const double w = std::sqrt(reach / pc);
        const double y_hi = reach / pc + w;
        auto outer = [&](double y) {
            const double v = inner(y, reach, tol, true);
            return v > 0 ? std::pow(v, qc / pc) : 0.0;
        };
        const double br[] = {-w, 0.0, 1.0, y_hi};
        return std::pow(integrate(outer, br, tol), 1.0 / qc);
    }
};

ConstantValue evaluate(const ConstantIntegrand& ig, double factor) {
    ConstantValue cv;
    const double base = factor * ig.total(60.0, 1e-8);
    const double refined = factor * ig.total(60.0, 1e-12);
    const double extended = factor * ig.total(120.0, 1e-12);
    cv.value = base;
    cv.refined = refined;
    cv.finite = std::isfinite(base) && std::isfinite(refined);
    cv.diverged = !std::isfinite(extended) || std::abs(extended - refined) > 1e-6 * std::abs(refined);
    return cv;
}

}  // namespace

double c1_inner_integral(double p, double y, bool use_symmetry) {
    if (!(p > 1.0)) throw DomainError("c1_inner_integral: p must be > 1");
    const double pc = std::isinf(p) ? 1.0 : p / (p - 1.0);
    const ConstantIntegrand ig{p, pc, 2.0, 2.0, 0.5, false};
    return ig.inner(y, 60.0, 1e-13, use_symmetry);
}

Constants eval_constants(double p, double q, double s) {
    if (!(p > 1.0) || !(q > 1.0)) throw DomainError("eval_constants: p and q must be > 1 for conjugates to exist");
    if (!(s > 0.0 && s < 1.0)) throw DomainError("eval_constants: s must lie in (0, 1)");
    const double pc = std::isinf(p) ? 1.0 : p / (p - 1.0);
    const double qc = std::isinf(q) ? 1.0 : q / (q - 1.0);
    Constants c;
    c.c1 = evaluate({p, pc, q, qc, s, false}, 1.0);
    c.c2 = evaluate({p, pc, q, qc, s, true}, 2.0);
    return c;
}

}  // namespace grushin
