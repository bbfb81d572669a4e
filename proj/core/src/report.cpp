#include "grushin/report.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <sstream>

#include "grushin/error.hpp"
#include "grushin/parallel.hpp"
#include "json.hpp"

namespace grushin {

using nlohmann::json;

Grid2D comparison_grid(const KernelParams& p, std::size_t n) {
    const double st = std::sqrt(p.t());
    const double hy = 5.0 * std::max(p.t(), (1.0 + std::abs(p.mu1())) * st);
    return Grid2D::centered(p.mu1(), p.mu2(), 5.0 * st, hy, n, n);
}

std::array<double, 2> scott_bandwidth(const EndpointSample& s) {
    const auto m = moment_summary(s);
    const double factor = std::pow(static_cast<double>(s.size()), -1.0 / 6.0);
    return {std::sqrt(m.cov[0][0]) * factor, std::sqrt(m.cov[1][1]) * factor};
}

DensityComparison compare_densities(const EndpointSample& sample, const Kernel& bridge, const KernelParams& p,
                                    std::size_t n) {
    const Grid2D g = comparison_grid(p, n);
    auto kde = empirical_density(sample, g, scott_bandwidth(sample));
    std::vector<double> bv(g.size()), bse(g.size());
    parallel_for(g.nx(), [&](std::size_t i) {
        for (std::size_t j = 0; j < g.ny(); ++j) {
            const auto v = bridge.eval(p, g.x(i), g.y(j));
            bv[i * g.ny() + j] = v.value;
            bse[i * g.ny() + j] = v.std_error;
        }
    });
    const Kernel paper(PaperClosedForm{}), moment(MomentGaussian{});
    return {g,
            std::move(kde.density),
            GridFunction(g, std::move(bv)),
            GridFunction(g, std::move(bse)),
            GridFunction::sample(g, [&](double x, double y) { return paper.eval(p, x, y).value; }),
            GridFunction::sample(g, [&](double x, double y) { return moment.eval(p, x, y).value; }),
            kde.coverage_warning};
}

double l1_distance(const GridFunction& a, const GridFunction& b) {
    if (!(a.grid() == b.grid())) throw PreconditionError("l1_distance: grid mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.values().size(); ++k) s += std::abs(a.values()[k] - b.values()[k]);
    return s * a.grid().hx() * a.grid().hy();
}

HeatResidual heat_residual(const KernelKind& kind, const KernelParams& p, std::size_t n) {
    if (!is_closed_form(kind)) throw UnsupportedError("heat_residual: closed forms only");
    const Kernel k(kind);
    double sup_r = 0, sup_t = 0, l2_r = 0, l2_t = 0;
    for (double t : {0.5 * p.t(), p.t(), 2.0 * p.t()}) {
        const KernelParams q(t, p.mu1(), p.mu2());
        const Grid2D g = comparison_grid(q, n);
        const double dt = 1e-4 * t, dx = 1e-3 * std::sqrt(t), dy = 1e-3 * t;
        const KernelParams qm(t - dt, p.mu1(), p.mu2()), qp(t + dt, p.mu1(), p.mu2());
        for (std::size_t i = 0; i < g.nx(); ++i)
            for (std::size_t j = 0; j < g.ny(); ++j) {
                const double x = g.x(i), y = g.y(j);
                auto K = [&](const KernelParams& r, double a, double b) { return k.eval(r, a, b).value; };
                const double c = K(q, x, y);
                const double kt = (K(qp, x, y) - K(qm, x, y)) / (2.0 * dt);
                const double kxx = (K(q, x + dx, y) - 2.0 * c + K(q, x - dx, y)) / (dx * dx);
                const double kyy = (K(q, x, y + dy) - 2.0 * c + K(q, x, y - dy)) / (dy * dy);
                const double r = kt - 0.5 * (kxx + x * x * kyy);
                sup_r = std::max(sup_r, std::abs(r));
                sup_t = std::max(sup_t, std::abs(kt));
                l2_r += r * r;
                l2_t += kt * kt;
            }
    }
    return {sup_t > 0 ? sup_r / sup_t : 0.0, l2_t > 0 ? std::sqrt(l2_r / l2_t) : 0.0};
}

namespace {

json interval(double value, double half_width) {
    return {{"value", value}, {"ci95", {value - half_width, value + half_width}}};
}

// Each section runs in isolation; a failure is recorded instead of aborting.
template <typename Fn>
void section(json& out, const std::string& name, Fn&& fn) {
    try {
        out[name] = fn();
    } catch (const std::exception& e) {
        out[name] = {{"error", e.what()}};
    }
}

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

}  // namespace

ValidationReport validation_report(const ReportConfig& cfg) {
    const KernelParams params(cfg.t, cfg.mu1, cfg.mu2);
    const BridgeMC bridge_cfg{cfg.bridge_paths, cfg.bridge_steps, cfg.seed};
    const Kernel bridge(bridge_cfg);
    json j;
    j["config"] = {{"t", cfg.t},
                   {"mu", {cfg.mu1, cfg.mu2}},
                   {"kind", kind_name(cfg.kind)},
                   {"mass_times", cfg.mass_times},
                   {"sim_paths", cfg.sim_paths},
                   {"sim_steps", cfg.sim_steps},
                   {"bridge_paths", cfg.bridge_paths},
                   {"bridge_steps", cfg.bridge_steps},
                   {"seed", cfg.seed},
                   {"grid_points", cfg.grid_points}};
    ValidationReport rep;

    section(j, "mass", [&] {
        const Kernel k(cfg.kind);
        const double st = std::sqrt(cfg.t);
        const auto box = k.closed_form() ? default_mass_box(params)
                                         : Grid2D::centered(cfg.mu1, cfg.mu2, 10.0 * st,
                                                            25.0 * std::max(cfg.t, (1.0 + std::abs(cfg.mu1)) * st), 401, 1001);
        const auto m = kernel_mass(k, params, box);
        rep.mass = m.value;
        rep.mass_se = m.std_error;
        const double expected = std::holds_alternative<PaperClosedForm>(cfg.kind) ? 0.5 : 1.0;
        json r = interval(m.value, 3.0 * m.std_error + 1e-4);
        r["std_error"] = m.std_error;
        r["expected"] = expected;
        return r;
    });

    section(j, "mass_by_kind", [&] {
        json arr = json::array();
        for (double t : cfg.mass_times) {
            const KernelParams q(t, cfg.mu1, cfg.mu2);
            const auto box = default_mass_box(q);
            const auto mp = kernel_mass(Kernel(PaperClosedForm{}), q, box);
            const auto mm = kernel_mass(Kernel(MomentGaussian{}), q, box);
            // Bridge paths far out in x give Y heavy tails; a taller box keeps truncation below the MC error.
            const double st = std::sqrt(t);
            const auto tall = Grid2D::centered(cfg.mu1, cfg.mu2, 10.0 * st,
                                               25.0 * std::max(t, (1.0 + std::abs(cfg.mu1)) * st), 401, 1001);
            const auto mb = kernel_mass(bridge, q, tall);
            arr.push_back({{"t", t},
                           {"paper", mp.value},
                           {"moment", mm.value},
                           {"bridge", interval(mb.value, 1.96 * mb.std_error)}});
        }
        return arr;
    });

    section(j, "grad_y_prefactor", [&] {
        // At mu = 0 the exact derivative is -(2 y / t^2) K; the printed form has y / t^2.
        const double t = cfg.t;
        const KernelParams q0(t, 0.0, 0.0);
        const Kernel k(PaperClosedForm{});
        json pts = json::array();
        double worst = 0.0;
        for (double y : {0.25 * t, 0.5 * t, t}) {
            const double x = 0.3 * std::sqrt(t);
            const double K = k.eval(q0, x, y).value;
            const double exact = k.grad(q0, x, y).dy;
            const double h = 1e-5 * t;
            const double fd = (k.eval(q0, x, y + h).value - k.eval(q0, x, y - h).value) / (2.0 * h);
            const double printed = -(y / (t * t)) * K;
            worst = std::max(worst, std::abs(exact - fd) / std::abs(fd));
            pts.push_back({{"x", x}, {"y", y}, {"exact", exact}, {"finite_difference", fd}, {"printed", printed},
                           {"ratio_exact_to_printed", exact / printed}});
        }
        return json{{"points", pts}, {"max_rel_error_exact_vs_fd", worst}};
    });

    EndpointSample sample;
    section(j, "moments", [&] {
        SimConfig sc;
        sc.t = cfg.t;
        sc.mu1 = cfg.mu1;
        sc.mu2 = cfg.mu2;
        sc.n_paths = cfg.sim_paths;
        sc.n_steps = cfg.sim_steps;
        sc.seed = cfg.seed;
        sample = simulate_endpoints(sc);
        const auto m = moment_summary(sample);
        const double t = cfg.t, a = cfg.mu1;
        const double printed[2][2] = {{t, a * t}, {a * t, a * a * t + 0.5 * t * t}};
        const double ito[2][2] = {{t, 0.0}, {0.0, a * a * t + 0.5 * t * t}};
        json cov = json::array();
        for (int r = 0; r < 2; ++r)
            for (int c = r; c < 2; ++c) {
                const double v = m.cov[r][c], hw = m.half_widths.cov[r][c];
                cov.push_back({{"entry", std::to_string(r) + std::to_string(c)},
                               {"measured", interval(v, hw)},
                               {"printed", printed[r][c]},
                               {"printed_in_ci", std::abs(v - printed[r][c]) <= hw},
                               {"ito", ito[r][c]},
                               {"ito_in_ci", std::abs(v - ito[r][c]) <= hw}});
            }
        const double kurt_hw = m.half_widths.y_kurtosis;
        return json{{"mean", {interval(m.mean[0], m.half_widths.mean[0]), interval(m.mean[1], m.half_widths.mean[1])}},
                    {"covariance", cov},
                    {"y_excess_kurtosis",
                     {{"measured", interval(m.y_kurtosis, kurt_hw)},
                      {"gaussian_value", 0.0},
                      {"gaussian_rejected", std::abs(m.y_kurtosis) > kurt_hw}}}};
    });

    section(j, "density_l1", [&] {
        if (sample.size() == 0) throw Error("no simulation sample");
        const auto d = compare_densities(sample, bridge, params, cfg.grid_points);
        double se_sum = 0.0;
        for (double v : d.bridge_se.values()) se_sum += v;
        const double se_l1 = se_sum * d.grid.hx() * d.grid.hy();
        return json{{"grid", {{"x", {d.grid.x0(), d.grid.x1()}}, {"y", {d.grid.y0(), d.grid.y1()}}, {"n", cfg.grid_points}}},
                    {"kde_bridge", interval(l1_distance(d.kde, d.bridge), 1.96 * se_l1)},
                    {"kde_paper", l1_distance(d.kde, d.paper)},
                    {"bridge_paper", interval(l1_distance(d.bridge, d.paper), 1.96 * se_l1)},
                    {"kde_moment", l1_distance(d.kde, d.moment)},
                    {"bridge_moment", interval(l1_distance(d.bridge, d.moment), 1.96 * se_l1)},
                    {"kde_coverage_warning", d.kde_coverage_warning}};
    });

    section(j, "heat_residual", [&] {
        json r;
        for (const KernelKind& k : {KernelKind{PaperClosedForm{}}, KernelKind{MomentGaussian{}}}) {
            const auto h = heat_residual(k, params);
            r[kind_name(k)] = {{"relative_sup", h.relative_sup}, {"relative_l2", h.relative_l2}};
        }
        return r;
    });

    std::ostringstream md;
    md << "# Kernel validation\n\n";
    md << "t = " << cfg.t << ", mu = (" << cfg.mu1 << ", " << cfg.mu2 << ")\n\n";
    auto get = [&](const json& node, const std::string& key) -> std::string {
        if (!node.contains(key)) return "n/a";
        const auto& v = node.at(key);
        if (v.is_number()) return num(v.get<double>());
        if (v.is_object() && v.contains("value")) return num(v.at("value").get<double>());
        return v.dump();
    };
    if (j["mass"].contains("error")) md << "- mass: error " << j["mass"]["error"].get<std::string>() << "\n";
    else md << "- mass (" << kind_name(cfg.kind) << "): " << get(j["mass"], "value") << " (expected "
            << get(j["mass"], "expected") << ")\n";
    if (j["mass_by_kind"].is_array())
        for (const auto& e : j["mass_by_kind"])
            md << "  - t = " << num(e["t"].get<double>()) << ": paper " << get(e, "paper") << ", moment "
               << get(e, "moment") << ", bridge " << get(e, "bridge") << "\n";
    if (j["grad_y_prefactor"].contains("points"))
        md << "- grad_y prefactor: exact / printed = "
           << num(j["grad_y_prefactor"]["points"][0]["ratio_exact_to_printed"].get<double>())
           << ", exact vs finite difference " << get(j["grad_y_prefactor"], "max_rel_error_exact_vs_fd") << "\n";
    if (j["moments"].contains("covariance")) {
        for (const auto& c : j["moments"]["covariance"])
            md << "- cov[" << c["entry"].get<std::string>() << "]: measured " << get(c, "measured") << " CI "
               << c["measured"]["ci95"].dump() << ", printed " << get(c, "printed") << ", Itô " << get(c, "ito")
               << "\n";
        const auto& k = j["moments"]["y_excess_kurtosis"];
        md << "- y excess kurtosis: " << get(k, "measured") << " CI " << k["measured"]["ci95"].dump()
           << (k["gaussian_rejected"].get<bool>() ? " (Gaussian rejected)" : " (consistent with Gaussian)") << "\n";
    }
    if (j["density_l1"].contains("kde_bridge"))
        md << "- L1 distances: KDE-bridge " << get(j["density_l1"], "kde_bridge") << ", KDE-paper "
           << get(j["density_l1"], "kde_paper") << ", bridge-paper " << get(j["density_l1"], "bridge_paper")
           << ", KDE-moment " << get(j["density_l1"], "kde_moment") << "\n";
    if (j["heat_residual"].contains("paper"))
        md << "- forward-equation residual (relative sup): paper " << get(j["heat_residual"]["paper"], "relative_sup")
           << ", moment " << get(j["heat_residual"]["moment"], "relative_sup") << "\n";
    for (const auto& [name, node] : j.items())
        if (node.is_object() && node.contains("error"))
            md << "- " << name << " failed: " << node["error"].get<std::string>() << "\n";

    rep.json = j.dump(2);
    rep.markdown = md.str();
    return rep;
}

}  // namespace grushin
