#include "grushin/sde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "grushin/error.hpp"
#include "grushin/parallel.hpp"
#include "grushin/rng.hpp"

namespace grushin {

namespace {

constexpr double kZ95 = 1.959963984540054;
// Student t quantile, 19 degrees of freedom, two-sided 95%.
constexpr double kT19 = 2.093024054408263;
constexpr std::size_t kBatches = 20;

// Neumaier-compensated sum in index order; independent of worker count.
double stable_sum(std::span<const double> v) {
    double s = 0.0, c = 0.0;
    for (double x : v) {
        const double t = s + x;
        c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
        s = t;
    }
    return s + c;
}

double mean_of(std::span<const double> v) { return stable_sum(v) / static_cast<double>(v.size()); }

double excess_kurtosis(std::span<const double> y) {
    const double m = mean_of(y);
    double m2 = 0.0, m4 = 0.0;
    for (double v : y) {
        const double d = (v - m) * (v - m);
        m2 += d;
        m4 += d * d;
    }
    m2 /= static_cast<double>(y.size());
    m4 /= static_cast<double>(y.size());
    return m4 / (m2 * m2) - 3.0;
}

}  // namespace

void SimConfig::validate() const {
    if (!std::isfinite(t) || !(t > 0.0)) throw DomainError("SimConfig: t must be > 0");
    if (!std::isfinite(mu1) || !std::isfinite(mu2)) throw DomainError("SimConfig: start point must be finite");
    if (n_paths < 100) throw DomainError("SimConfig: n_paths must be >= 100");
    if (n_steps < 16) throw DomainError("SimConfig: n_steps must be >= 16");
}

EndpointSample simulate_endpoints(const SimConfig& cfg) {
    cfg.validate();
    EndpointSample out;
    out.xs.resize(cfg.n_paths);
    out.ys.resize(cfg.n_paths);
    out.quadratic_variation.resize(cfg.n_paths);
    const double dt = cfg.t / static_cast<double>(cfg.n_steps);
    const double sdt = std::sqrt(dt);

    parallel_for(cfg.n_paths, [&](std::size_t k) {
        StreamRng rng(cfg.seed, k);
        std::normal_distribution<double> normal;
        double x = cfg.mu1, y = cfg.mu2, qv = 0.0;
        for (std::size_t i = 0; i < cfg.n_steps; ++i) {
            const double dw1 = sdt * normal(rng);
            qv += x * x * dt;
            if (cfg.scheme == YScheme::euler) y += x * sdt * normal(rng);
            x += dw1;
        }
        if (cfg.scheme == YScheme::conditional) y += std::sqrt(qv) * normal(rng);
        out.xs[k] = x;
        out.ys[k] = y;
        out.quadratic_variation[k] = qv;
    });
    return out;
}

MomentSummary moment_summary(const EndpointSample& s) {
    const std::size_t n = s.size();
    if (n < 100) throw PreconditionError("moment_summary: need at least 100 samples");
    if (s.ys.size() != n) throw PreconditionError("moment_summary: xs and ys differ in length");
    const double nd = static_cast<double>(n);

    MomentSummary m;
    m.mean = {mean_of(s.xs), mean_of(s.ys)};
    std::vector<double> dxx(n), dyy(n), dxy(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double a = s.xs[k] - m.mean[0], b = s.ys[k] - m.mean[1];
        dxx[k] = a * a;
        dyy[k] = b * b;
        dxy[k] = a * b;
    }
    const double unbias = nd / (nd - 1.0);
    const double cxx = mean_of(dxx), cyy = mean_of(dyy), cxy = mean_of(dxy);
    if (!(cxx > 0.0) || !(cyy > 0.0)) throw DegenerateError("moment_summary: zero-variance sample");
    m.cov = {{{cxx * unbias, cxy * unbias}, {cxy * unbias, cyy * unbias}}};

    auto var_of = [&](const std::vector<double>& v, double mean) {
        double acc = 0.0;
        for (double e : v) acc += (e - mean) * (e - mean);
        return acc / (nd - 1.0);
    };
    m.half_widths.mean = {kZ95 * std::sqrt(m.cov[0][0] / nd), kZ95 * std::sqrt(m.cov[1][1] / nd)};
    m.half_widths.cov[0][0] = kZ95 * std::sqrt(var_of(dxx, cxx) / nd);
    m.half_widths.cov[1][1] = kZ95 * std::sqrt(var_of(dyy, cyy) / nd);
    m.half_widths.cov[0][1] = m.half_widths.cov[1][0] = kZ95 * std::sqrt(var_of(dxy, cxy) / nd);

    m.y_kurtosis = excess_kurtosis(s.ys);
    const std::size_t batch = n / kBatches;
    std::vector<double> bk;
    for (std::size_t b = 0; b < kBatches && batch >= 4; ++b)
        bk.push_back(excess_kurtosis(std::span<const double>(s.ys).subspan(b * batch, batch)));
    if (bk.size() == kBatches) {
        const double bm = mean_of(bk);
        double v = 0.0;
        for (double e : bk) v += (e - bm) * (e - bm);
        v /= static_cast<double>(kBatches - 1);
        m.half_widths.y_kurtosis = kT19 * std::sqrt(v / static_cast<double>(kBatches));
    }
    return m;
}

KdeResult empirical_density(const EndpointSample& s, const Grid2D& grid, std::array<double, 2> bw) {
    if (!(bw[0] > 0.0) || !(bw[1] > 0.0)) throw DomainError("empirical_density: bandwidths must be > 0");
    const std::size_t n = s.size();
    if (n == 0) throw PreconditionError("empirical_density: empty sample");
    const std::size_t nx = grid.nx(), ny = grid.ny();
    const double hx = grid.hx(), hy = grid.hy();
    const double reach = 8.0;

    // Chunks accumulate separately and are summed in chunk order.
    const std::size_t chunk = 4096;
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    std::vector<std::vector<double>> partial(n_chunks);
    parallel_for(n_chunks, [&](std::size_t c) {
        std::vector<double> acc(grid.size(), 0.0);
        std::vector<double> fx(nx), fy(ny);
        for (std::size_t k = c * chunk; k < std::min(n, (c + 1) * chunk); ++k) {
            const double xk = s.xs[k], yk = s.ys[k];
            const long ilo = std::max(0L, static_cast<long>(std::floor((xk - reach * bw[0] - grid.x0()) / hx)));
            const long ihi = std::min(static_cast<long>(nx) - 1, static_cast<long>(std::ceil((xk + reach * bw[0] - grid.x0()) / hx)));
            const long jlo = std::max(0L, static_cast<long>(std::floor((yk - reach * bw[1] - grid.y0()) / hy)));
            const long jhi = std::min(static_cast<long>(ny) - 1, static_cast<long>(std::ceil((yk + reach * bw[1] - grid.y0()) / hy)));
            if (ilo > ihi || jlo > jhi) continue;
            for (long i = ilo; i <= ihi; ++i) {
                const double z = (grid.x(static_cast<std::size_t>(i)) - xk) / bw[0];
                fx[static_cast<std::size_t>(i)] = std::exp(-0.5 * z * z);
            }
            for (long j = jlo; j <= jhi; ++j) {
                const double z = (grid.y(static_cast<std::size_t>(j)) - yk) / bw[1];
                fy[static_cast<std::size_t>(j)] = std::exp(-0.5 * z * z);
            }
            for (long i = ilo; i <= ihi; ++i) {
                const double a = fx[static_cast<std::size_t>(i)];
                double* row = acc.data() + static_cast<std::size_t>(i) * ny;
                for (long j = jlo; j <= jhi; ++j) row[j] += a * fy[static_cast<std::size_t>(j)];
            }
        }
        partial[c] = std::move(acc);
    });
    std::vector<double> dens(grid.size(), 0.0);
    for (const auto& p : partial)
        for (std::size_t q = 0; q < dens.size(); ++q) dens[q] += p[q];
    const double norm = 1.0 / (static_cast<double>(n) * 2.0 * std::numbers::pi * bw[0] * bw[1]);
    for (auto& d : dens) d *= norm;

    auto quantiles = [](std::vector<double> v) {
        const auto lo = static_cast<std::size_t>(0.005 * static_cast<double>(v.size() - 1));
        const auto hi = static_cast<std::size_t>(0.995 * static_cast<double>(v.size() - 1));
        std::nth_element(v.begin(), v.begin() + static_cast<long>(lo), v.end());
        const double a = v[lo];
        std::nth_element(v.begin(), v.begin() + static_cast<long>(hi), v.end());
        return std::pair{a, v[hi]};
    };
    const auto [xa, xb] = quantiles(s.xs);
    const auto [ya, yb] = quantiles(s.ys);
    const bool warn = xa < grid.x0() || xb > grid.x1() || ya < grid.y0() || yb > grid.y1();
    return {GridFunction(grid, std::move(dens)), warn};
}

KsResult ks_two_sample(std::span<const double> a_in, std::span<const double> b_in) {
    if (a_in.empty() || b_in.empty()) throw PreconditionError("ks_two_sample: empty sample");
    std::vector<double> a(a_in.begin(), a_in.end()), b(b_in.begin(), b_in.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = na * nb / (na + nb);
    const double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    // Q_KS(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)
    double p = 0.0;
    if (lam < 0.2) {
        p = 1.0;
    } else {
        for (int k = 1; k <= 100; ++k) {
            const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
            p += term;
            if (std::abs(term) < 1e-12) break;
        }
    }
    return {d, std::clamp(p, 0.0, 1.0)};
}

}  // namespace grushin
