// grushin-lab: command-line driver for kernels, simulations, resolvents and scans.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "grushin/error.hpp"
#include "grushin/estimates.hpp"
#include "grushin/grid.hpp"
#include "grushin/grid_io.hpp"
#include "grushin/kernel.hpp"
#include "grushin/parallel.hpp"
#include "grushin/report.hpp"
#include "grushin/resolvent.hpp"
#include "grushin/sde.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace grushin;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitNonContraction = 4;
constexpr const char* kVersion = "0.1.0";

struct Globals {
    std::uint64_t seed = 1;
    std::string out = "out";
    int threads = 0;
    int verbosity = 0;
    std::string format = "csv";
};

struct GridOpts {
    double x0 = -4, x1 = 4, y0 = -4, y1 = 4;
    std::size_t nx = 65, ny = 65;

    void add(CLI::App* app) {
        app->add_option("--x0", x0, "grid x lower bound")->capture_default_str();
        app->add_option("--x1", x1, "grid x upper bound")->capture_default_str();
        app->add_option("--y0", y0, "grid y lower bound")->capture_default_str();
        app->add_option("--y1", y1, "grid y upper bound")->capture_default_str();
        app->add_option("--nx", nx, "grid nodes along x")->capture_default_str();
        app->add_option("--ny", ny, "grid nodes along y")->capture_default_str();
    }
    Grid2D grid() const { return Grid2D(x0, x1, y0, y1, nx, ny); }
};

struct KindOpts {
    std::string kind = "paper";
    std::size_t n_paths = 10000;
    std::size_t n_steps = 64;

    void add(CLI::App* app, const std::string& def = "paper") {
        kind = def;
        app->add_option("--kind", kind, "kernel: paper, moment or bridge")
            ->check(CLI::IsMember({"paper", "moment", "bridge"}))
            ->capture_default_str();
        app->add_option("--n-paths", n_paths, "bridge paths (kind=bridge)")->capture_default_str();
        app->add_option("--n-steps", n_steps, "bridge steps per path (kind=bridge)")->capture_default_str();
    }
    KernelKind resolve(std::uint64_t seed) const {
        if (kind == "paper") return PaperClosedForm{};
        if (kind == "moment") return MomentGaussian{};
        if (n_paths < 100 || n_steps < 16) throw DomainError("bridge kernel needs --n-paths >= 100 and --n-steps >= 16");
        return BridgeMC{n_paths, n_steps, seed};
    }
};

struct TimeOpts {
    std::size_t n_nodes = 24;
    std::string scheme = "gauss_laguerre";

    void add(CLI::App* app) {
        app->add_option("--n-nodes", n_nodes, "time quadrature nodes")->capture_default_str();
        app->add_option("--time-scheme", scheme, "gauss_laguerre or dyadic_adaptive")
            ->check(CLI::IsMember({"gauss_laguerre", "dyadic_adaptive"}))
            ->capture_default_str();
    }
    TimeQuadrature resolve() const {
        TimeQuadrature q;
        q.n_nodes = n_nodes;
        q.scheme = scheme == "gauss_laguerre" ? TimeScheme::gauss_laguerre : TimeScheme::dyadic_adaptive;
        return q;
    }
};

void log(const Globals& g, int level, const std::string& msg) {
    if (g.verbosity >= level) std::cerr << msg << '\n';
}

fs::path prepare_out(const Globals& g) {
    fs::path dir(g.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw PreconditionError("cannot create output directory " + dir.string());
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw PreconditionError("cannot write " + path.string());
    os << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_field(const Globals& g, const fs::path& dir, const std::string& stem, const GridFunction& u) {
    if (g.format == "csv" || g.format == "both") write_csv(u, dir / (stem + ".csv"));
    if (g.format == "binary" || g.format == "both") write_binary(u, dir / (stem + ".bin"));
}

// Every option of the app and its chosen subcommand, with the value in effect.
json resolved_options(const CLI::App* app) {
    json j;
    for (const CLI::Option* opt : app->get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string& name = opt->get_lnames().front();
        if (name == "help" || name == "config" || name == "version") continue;
        if (opt->count() > 0) {
            const auto& res = opt->results();
            j[name] = res.size() == 1 ? json(res.front()) : json(res);
        } else if (opt->get_expected_min() == 0 && opt->get_default_str().empty()) {
            j[name] = "false";
        } else {
            j[name] = opt->get_default_str();
        }
    }
    return j;
}

void write_manifest(const fs::path& dir, const CLI::App& app, const CLI::App* sub, const Globals& g,
                    const std::vector<std::string>& args, const json& extra = {}) {
    json m;
    m["tool"] = "grushin-lab";
    m["version"] = kVersion;
    m["command"] = sub->get_name();
    m["argv"] = args;
    m["global"] = resolved_options(&app);
    m["global"]["threads"] = g.threads;
    m["options"] = resolved_options(sub);
    // Same values as a config file that reruns the command.
    std::ostringstream ini;
    for (const auto& [k, v] : m["global"].items())
        if (k != "out" && k != "v") ini << k << '=' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
    ini << '[' << sub->get_name() << "]\n";
    for (const auto& [k, v] : m["options"].items()) ini << k << '=' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
    m["config_ini"] = ini.str();
    if (!extra.is_null()) m["resolved"] = extra;
    write_json(dir / "manifest.json", m);
}

json grid_json(const Grid2D& g) {
    return {{"x", {g.x0(), g.x1()}}, {"y", {g.y0(), g.y1()}}, {"nx", g.nx()}, {"ny", g.ny()}};
}

}  // namespace

namespace {

std::pair<GridFunction, GridFunction> drift_field(const std::string& spec, double scale, const Grid2D& g) {
    if (spec == "zero") return {GridFunction::zeros(g), GridFunction::zeros(g)};
    if (spec == "rotating")
        return {GridFunction::sample(g, [scale](double x, double y) { return scale * std::cos(0.5 * x * y); }),
                GridFunction::sample(g, [scale](double x, double y) { return scale * std::sin(0.5 * x * y); })};
    if (spec.rfind("const:", 0) == 0) {
        double bx = 0, by = 0;
        char comma = 0;
        std::istringstream is(spec.substr(6));
        if (!(is >> bx >> comma >> by) || comma != ',') throw PreconditionError("--b const:bx,by expected");
        return {GridFunction::sample(g, [=](double, double) { return scale * bx; }),
                GridFunction::sample(g, [=](double, double) { return scale * by; })};
    }
    throw PreconditionError("--b must be zero, rotating or const:bx,by");
}

// sup |(lambda - L) u - f| over nodes at least a quarter of the box away from the edge.
json residual_summary(const GridFunction& u, const GridFunction& f, double lambda) {
    const auto Lu = apply_grushin(u);
    const auto& g = u.grid();
    const double qx = 0.25 * (g.x1() - g.x0()), qy = 0.25 * (g.y1() - g.y0());
    double sup_r = 0, sup_f = 0;
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j) {
            sup_f = std::max(sup_f, std::abs(f(i, j)));
            if (!Lu.valid(i, j) || g.x(i) < g.x0() + qx || g.x(i) > g.x1() - qx || g.y(j) < g.y0() + qy ||
                g.y(j) > g.y1() - qy)
                continue;
            sup_r = std::max(sup_r, std::abs(lambda * u(i, j) - Lu(i, j) - f(i, j)));
        }
    return {{"sup_residual_interior", sup_r}, {"sup_f", sup_f}, {"relative", sup_f > 0 ? sup_r / sup_f : 0.0}};
}

std::string plot_script(const std::string& csv, const DecayScanResult& r) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "# Regenerates the log-log plot of a decay scan; needs numpy and matplotlib.\n"
       << "import numpy as np\nimport matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n\n"
       << "d = np.genfromtxt('" << csv << "', delimiter=',', names=True)\n"
       << "slope, intercept = " << r.fitted_slope << ", " << r.intercept << "\n"
       << "claim = " << r.claimed_exponent << "\n"
       << "fig, ax = plt.subplots()\n"
       << "ax.loglog(d['lambda'], d['norm'], 'o', label='measured')\n"
       << "ax.loglog(d['lambda'], np.exp(intercept) * d['lambda'] ** slope, '-', label='fit %.3f' % slope)\n"
       << "ax.loglog(d['lambda'], d['norm'][0] * (d['lambda'] / d['lambda'][0]) ** claim, '--', label='claim %.3f' % claim)\n"
       << "ax.set_xlabel('lambda')\nax.set_ylabel('norm')\nax.legend()\n"
       << "fig.savefig('scan.png', dpi=120)\n";
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"grushin-lab: heat kernels, resolvents and decay estimates for L = (1/2)(d_xx + x^2 d_yy)"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "INI file with one [command] section of key=value lines");
    app.require_subcommand(1);
    app.fallthrough();

    Globals G;
    app.add_option("--seed", G.seed, "base seed for every random stream")->capture_default_str();
    app.add_option("--out,--output-dir", G.out, "output directory")->capture_default_str();
    auto* threads_opt = app.add_option("--threads", G.threads, "worker threads (default $GRUSHIN_LAB_THREADS or 1)");
    app.add_option("--verbosity", G.verbosity, "0 quiet, 1 progress, 2 detail")->capture_default_str();
    app.add_flag("-v", G.verbosity, "raise verbosity");
    app.add_option("--format", G.format, "field output: csv, binary or both")
        ->check(CLI::IsMember({"csv", "binary", "both"}))
        ->capture_default_str();

    // kernel-eval
    auto* ke = app.add_subcommand("kernel-eval", "evaluate a kernel on a grid");
    double ke_t = 1, ke_mu1 = 0, ke_mu2 = 0;
    bool ke_grad = false;
    GridOpts ke_grid;
    KindOpts ke_kind;
    ke_kind.add(ke);
    ke->add_option("--t", ke_t, "time")->capture_default_str();
    ke->add_option("--mu1", ke_mu1, "start x")->capture_default_str();
    ke->add_option("--mu2", ke_mu2, "start y")->capture_default_str();
    ke->add_flag("--grad", ke_grad, "also write d_x K and d_y K (closed forms)");
    ke_grid.add(ke);

    // simulate
    auto* si = app.add_subcommand("simulate", "simulate endpoints of dX = dW1, dY = X dW2");
    SimConfig si_cfg;
    std::string si_scheme = "euler";
    si->add_option("--t", si_cfg.t, "time")->capture_default_str();
    si->add_option("--mu1", si_cfg.mu1, "start x")->capture_default_str();
    si->add_option("--mu2", si_cfg.mu2, "start y")->capture_default_str();
    si->add_option("--n-paths", si_cfg.n_paths, "paths")->capture_default_str();
    si->add_option("--n-steps", si_cfg.n_steps, "time steps per path")->capture_default_str();
    si->add_option("--scheme", si_scheme, "euler or conditional")
        ->check(CLI::IsMember({"euler", "conditional"}))
        ->capture_default_str();

    // validate-kernel
    auto* vk = app.add_subcommand("validate-kernel", "run the kernel diagnostics report");
    ReportConfig vk_cfg;
    std::string vk_kind = "paper";
    vk->add_option("--kind", vk_kind, "kernel whose mass is the headline value")
        ->check(CLI::IsMember({"paper", "moment", "bridge"}))
        ->capture_default_str();
    vk->add_option("--t", vk_cfg.t, "time")->capture_default_str();
    vk->add_option("--mu1", vk_cfg.mu1, "start x")->capture_default_str();
    vk->add_option("--mu2", vk_cfg.mu2, "start y")->capture_default_str();
    vk->add_option("--sim-paths", vk_cfg.sim_paths, "simulated paths for moments and KDE")->capture_default_str();
    vk->add_option("--sim-steps", vk_cfg.sim_steps, "steps per simulated path")->capture_default_str();
    vk->add_option("--bridge-paths", vk_cfg.bridge_paths, "bridge paths")->capture_default_str();
    vk->add_option("--bridge-steps", vk_cfg.bridge_steps, "bridge steps")->capture_default_str();
    vk->add_option("--grid-points", vk_cfg.grid_points, "density comparison grid size")->capture_default_str();

    // resolve
    auto* rs = app.add_subcommand("resolve", "apply (lambda - L)^{-1} to a test function");
    double rs_lambda = 1;
    std::string rs_family = "gauss";
    GridOpts rs_grid;
    KindOpts rs_kind;
    TimeOpts rs_time;
    rs_kind.add(rs);
    rs->add_option("--lambda", rs_lambda, "resolvent parameter")->capture_default_str();
    rs->add_option("--family", rs_family, "test function, e.g. gauss, kink_y:0.5:3")->capture_default_str();
    rs_grid.add(rs);
    rs_time.add(rs);

    // solve-drift
    auto* sd = app.add_subcommand("solve-drift", "Picard iteration for (lambda - L) u + b . grad u = f");
    double sd_lambda = 0, sd_lambda_start = 1, sd_b_scale = 1, sd_tol = 1e-8;
    std::size_t sd_max_iter = 50, sd_doublings = 8;
    std::string sd_b = "rotating", sd_family = "gauss";
    GridOpts sd_grid;
    KindOpts sd_kind;
    TimeOpts sd_time;
    sd_kind.add(sd);
    sd->add_option("--lambda", sd_lambda, "lambda; 0 runs the doubling scan first")->capture_default_str();
    sd->add_option("--lambda-start", sd_lambda_start, "first lambda of the doubling scan")->capture_default_str();
    sd->add_option("--max-doublings", sd_doublings, "doublings in the scan")->capture_default_str();
    sd->add_option("--b", sd_b, "drift: zero, rotating or const:bx,by")->capture_default_str();
    sd->add_option("--b-scale", sd_b_scale, "multiplies the drift")->capture_default_str();
    sd->add_option("--family", sd_family, "right-hand side test function")->capture_default_str();
    sd->add_option("--tol", sd_tol, "stop when the update drops below tol")->capture_default_str();
    sd->add_option("--max-iter", sd_max_iter, "iteration cap")->capture_default_str();
    sd_grid.add(sd);
    sd_time.add(sd);

    // decay-scan
    auto* ds = app.add_subcommand("decay-scan", "fit the lambda-decay exponent of a norm of u or its derivatives");
    std::string ds_target = "u", ds_norm = "sup", ds_family = "gauss", ds_lambdas = "1:2:16", ds_axis = "both";
    double ds_tol = 0.15;
    MixedNormSpec ds_spec;
    GridOpts ds_grid;
    KindOpts ds_kind;
    TimeOpts ds_time;
    ds_kind.add(ds);
    ds->add_option("--target", ds_target, "u, grad_x_u, grad_y_u, grad2_x_u, grad2_y_u")->capture_default_str();
    ds->add_option("--norm", ds_norm, "sup, lr or holder")->capture_default_str();
    ds->add_option("--family", ds_family, "test function")->capture_default_str();
    ds->add_option("--lambdas", ds_lambdas, "start:ratio:end")->capture_default_str();
    ds->add_option("--p", ds_spec.p, "integrability of f1")->capture_default_str();
    ds->add_option("--q", ds_spec.q, "integrability of f2")->capture_default_str();
    ds->add_option("--r", ds_spec.r, "norm exponent for --norm lr")->capture_default_str();
    ds->add_option("--s", ds_spec.s, "Sobolev order of f2")->capture_default_str();
    ds->add_option("--beta", ds_spec.beta, "Hölder exponent")->capture_default_str();
    ds->add_option("--axis", ds_axis, "Hölder pairs: x, y or both")
        ->check(CLI::IsMember({"x", "y", "both"}))
        ->capture_default_str();
    ds->add_option("--tol", ds_tol, "verdict tolerance on the slope")->capture_default_str();
    ds_grid.add(ds);
    ds_time.add(ds);

    // norms
    auto* nm = app.add_subcommand("norms", "norms of a stored grid function");
    std::string nm_input, nm_axis = "both";
    double nm_r = 2, nm_p = 2, nm_q = 2, nm_beta = 0.5;
    nm->add_option("--input", nm_input, "GridFunction file (.csv or .bin)")->required()->check(CLI::ExistingFile);
    nm->add_option("--r", nm_r, "L^r exponent")->capture_default_str();
    nm->add_option("--p", nm_p, "outer exponent of the mixed norm")->capture_default_str();
    nm->add_option("--q", nm_q, "inner exponent of the mixed norm")->capture_default_str();
    nm->add_option("--beta", nm_beta, "Hölder exponent")->capture_default_str();
    nm->add_option("--axis", nm_axis, "Hölder pairs: x, y or both")
        ->check(CLI::IsMember({"x", "y", "both"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    const std::vector<std::string> args(argv, argv + argc);
    CLI::App* sub = app.get_subcommands().front();

    auto axis_of = [](const std::string& a) {
        return a == "x" ? HolderAxis::x : a == "y" ? HolderAxis::y : HolderAxis::both;
    };

    try {
        if (threads_opt->count() == 0) {
            const char* env = std::getenv("GRUSHIN_LAB_THREADS");
            G.threads = env ? std::atoi(env) : 1;
        }
        if (G.threads < 1) throw DomainError("--threads must be >= 1");
        set_num_threads(G.threads);
        const fs::path dir = prepare_out(G);

        if (sub == ke) {
            const KernelParams params(ke_t, ke_mu1, ke_mu2);
            const Kernel kernel(ke_kind.resolve(G.seed));
            const Grid2D g = ke_grid.grid();
            if (ke_grad && !kernel.closed_form()) throw UnsupportedError("--grad is available for closed forms only");
            write_manifest(dir, app, sub, G, args, {{"grid", grid_json(g)}, {"kind", kind_name(kernel.kind())}});
            std::vector<double> v(g.size()), se(g.size()), gx, gy;
            if (ke_grad) {
                gx.resize(g.size());
                gy.resize(g.size());
            }
            parallel_for(g.nx(), [&](std::size_t i) {
                for (std::size_t j = 0; j < g.ny(); ++j) {
                    const auto k = kernel.eval(params, g.x(i), g.y(j));
                    v[i * g.ny() + j] = k.value;
                    se[i * g.ny() + j] = k.std_error;
                    if (ke_grad) {
                        const auto d = kernel.grad(params, g.x(i), g.y(j));
                        gx[i * g.ny() + j] = d.dx;
                        gy[i * g.ny() + j] = d.dy;
                    }
                }
            });
            write_field(G, dir, "kernel", GridFunction(g, std::move(v)));
            if (!kernel.closed_form()) write_field(G, dir, "kernel_se", GridFunction(g, std::move(se)));
            if (ke_grad) {
                write_field(G, dir, "grad_x", GridFunction(g, std::move(gx)));
                write_field(G, dir, "grad_y", GridFunction(g, std::move(gy)));
            }
            log(G, 1, "kernel-eval: wrote " + dir.string());
        } else if (sub == si) {
            si_cfg.seed = G.seed;
            si_cfg.scheme = si_scheme == "euler" ? YScheme::euler : YScheme::conditional;
            si_cfg.validate();
            write_manifest(dir, app, sub, G, args);
            const auto s = simulate_endpoints(si_cfg);
            {
                std::ofstream os(dir / "endpoints.csv");
                os << std::setprecision(17) << "x,y\n";
                for (std::size_t k = 0; k < s.size(); ++k) os << s.xs[k] << ',' << s.ys[k] << '\n';
            }
            const auto m = moment_summary(s);
            json mj;
            mj["n_paths"] = s.size();
            mj["mean"] = m.mean;
            mj["cov"] = m.cov;
            mj["y_excess_kurtosis"] = m.y_kurtosis;
            mj["half_widths_95"] = {{"mean", m.half_widths.mean},
                                    {"cov", m.half_widths.cov},
                                    {"y_excess_kurtosis", m.half_widths.y_kurtosis}};
            const double t = si_cfg.t, a = si_cfg.mu1;
            mj["printed_sigma"] = {{t, a * t}, {a * t, a * a * t + 0.5 * t * t}};
            write_json(dir / "moments.json", mj);
            log(G, 1, "simulate: wrote " + dir.string());
        } else if (sub == vk) {
            vk_cfg.seed = G.seed;
            vk_cfg.kind = vk_kind == "paper"    ? KernelKind{PaperClosedForm{}}
                          : vk_kind == "moment" ? KernelKind{MomentGaussian{}}
                                                : KernelKind{BridgeMC{vk_cfg.bridge_paths, vk_cfg.bridge_steps, G.seed}};
            write_manifest(dir, app, sub, G, args);
            const auto rep = validation_report(vk_cfg);
            write_text(dir / "report.json", rep.json + "\n");
            write_text(dir / "report.md", rep.markdown);
            log(G, 1, rep.markdown);
        } else if (sub == rs) {
            ResolventConfig cfg;
            cfg.lambda = rs_lambda;
            cfg.kind = rs_kind.resolve(G.seed);
            cfg.time = rs_time.resolve();
            cfg.validate();
            const Grid2D g = rs_grid.grid();
            const auto fam = parse_family(rs_family);
            write_manifest(dir, app, sub, G, args, {{"grid", grid_json(g)}, {"family", family_name(fam)}});
            const auto f = sample_family(fam, g);
            ResolventDiagnostics diag;
            const auto u = apply_resolvent(Kernel(cfg.kind), f, cfg, &diag);
            write_field(G, dir, "u", u);
            json summary = residual_summary(u, f, rs_lambda);
            summary["lambda"] = rs_lambda;
            summary["kind"] = kind_name(cfg.kind);
            summary["sup_u"] = sup_norm(u);
            summary["diagnostics"] = {{"truncation_warning", diag.truncation_warning},
                                      {"boundary_ratio", diag.boundary_ratio},
                                      {"tail_bound", diag.tail_bound},
                                      {"time_nodes", diag.time_nodes}};
            write_json(dir / "summary.json", summary);
            log(G, 1, summary.dump(2));
        } else if (sub == sd) {
            ResolventConfig cfg;
            cfg.kind = sd_kind.resolve(G.seed);
            cfg.time = sd_time.resolve();
            const Grid2D g = sd_grid.grid();
            const auto fam = parse_family(sd_family);
            const auto f = sample_family(fam, g);
            const auto b = drift_field(sd_b, sd_b_scale, g);
            json resolved{{"grid", grid_json(g)}, {"family", family_name(fam)}};
            Lambda0Scan scan;
            double lambda = sd_lambda;
            if (!(lambda > 0)) {
                scan = scan_lambda0(f, b, cfg, sd_lambda_start, sd_doublings);
                lambda = scan.lambda_half > 0 ? scan.lambda_half : scan.lambdas.back();
            }
            resolved["lambda"] = lambda;
            write_manifest(dir, app, sub, G, args, resolved);
            PicardOptions opts;
            opts.tol = sd_tol;
            opts.max_iter = sd_max_iter;
            const auto res = picard_solve(f, b, lambda, opts, cfg);
            write_field(G, dir, "u", res.u);
            json rep{{"n_iters", res.report.n_iters},
                     {"diff_norms", res.report.diff_norms},
                     {"contraction_ratios", res.report.contraction_ratios},
                     {"converged", res.report.converged},
                     {"lambda", res.report.lambda},
                     {"lambda0_estimate", scan.lambda0},
                     {"lambda_half_estimate", scan.lambda_half},
                     {"scan", {{"lambdas", scan.lambdas}, {"max_ratios", scan.max_ratios}}}};
            write_json(dir / "picard.json", rep);
            log(G, 1, rep.dump(2));
        } else if (sub == ds) {
            const auto target = parse_target(ds_target);
            const auto norm = parse_norm(ds_norm);
            const auto fam = parse_family(ds_family);
            const auto lambdas = parse_geometric(ds_lambdas);
            DecayScanOptions opts;
            opts.grid = ds_grid.grid();
            opts.time = ds_time.resolve();
            opts.tolerance = ds_tol;
            opts.holder_axis = axis_of(ds_axis);
            opts.seed = G.seed;
            write_manifest(dir, app, sub, G, args,
                           {{"grid", grid_json(opts.grid)}, {"family", family_name(fam)}, {"lambdas", lambdas}});
            const auto r = decay_scan(target, norm, ds_spec, fam, lambdas, ds_kind.resolve(G.seed), opts);
            json rj{{"target", ds_target},
                    {"norm", ds_norm},
                    {"family", family_name(fam)},
                    {"lambdas", r.lambdas},
                    {"norms", r.norms},
                    {"fitted_slope", r.fitted_slope},
                    {"intercept", r.intercept},
                    {"r_squared", r.r_squared},
                    {"claimed_exponent", r.claimed_exponent},
                    {"claim_source", r.claim_source},
                    {"verdict", verdict_name(r.verdict)}};
            for (const auto& [name, v] : r.alternative_verdicts) rj["alternative_verdicts"][name] = verdict_name(v);
            write_json(dir / "scan.json", rj);
            std::ofstream csv(dir / "scan.csv");
            write_scan_csv(r, csv);
            write_text(dir / "plot_scan.py", plot_script("scan.csv", r));
            log(G, 1, rj.dump(2));
        } else if (sub == nm) {
            const fs::path in(nm_input);
            const auto u = in.extension() == ".bin" ? read_binary(in) : read_csv(in);
            write_manifest(dir, app, sub, G, args);
            const auto& g = u.grid();
            const auto wx = simpson_weights(g.nx(), g.hx()), wy = simpson_weights(g.ny(), g.hy());
            double integral = 0.0;
            for (std::size_t i = 0; i < g.nx(); ++i)
                for (std::size_t j = 0; j < g.ny(); ++j) integral += wx[i] * wy[j] * u(i, j);
            json nj{{"sup", sup_norm(u)},
                    {"lr", {{"r", nm_r}, {"value", lp_norm(u, nm_r)}}},
                    {"mixed", {{"p", nm_p}, {"q", nm_q}, {"value", mixed_norm(u, nm_p, nm_q)}}},
                    {"holder", {{"beta", nm_beta}, {"axis", nm_axis}, {"value", holder_seminorm(u, nm_beta, axis_of(nm_axis), G.seed)}}},
                    {"integral", integral}};
            write_json(dir / "norms.json", nj);
            log(G, 1, nj.dump(2));
        }
    } catch (const NonContractionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNonContraction;
    } catch (const PreconditionError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const UnsupportedError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return 0;
}
