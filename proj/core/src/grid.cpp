#include "grushin/grid.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "grushin/error.hpp"

namespace grushin {

Grid2D::Grid2D(double x0, double x1, double y0, double y1, std::size_t nx, std::size_t ny)
    : x0_(x0), x1_(x1), y0_(y0), y1_(y1), nx_(nx), ny_(ny) {
    if (!std::isfinite(x0) || !std::isfinite(x1) || !std::isfinite(y0) || !std::isfinite(y1))
        throw DomainError("Grid2D: bounds must be finite");
    if (!(x1 > x0) || !(y1 > y0)) throw PreconditionError("Grid2D: require x1 > x0 and y1 > y0");
    if (nx < 3 || ny < 3) throw PreconditionError("Grid2D: require at least 3 points per axis");
}

Grid2D Grid2D::centered(double cx, double cy, double half_x, double half_y, std::size_t nx,
                        std::size_t ny) {
    return Grid2D(cx - half_x, cx + half_x, cy - half_y, cy + half_y, nx, ny);
}

GridFunction::GridFunction(Grid2D grid, std::vector<double> values, std::size_t margin)
    : grid_(grid), values_(std::move(values)), margin_(margin) {
    if (values_.size() != grid_.size())
        throw PreconditionError("GridFunction: value count does not match grid shape");
    for (std::size_t i = 0; i < grid_.nx(); ++i)
        for (std::size_t j = 0; j < grid_.ny(); ++j)
            if (valid(i, j) && !std::isfinite(values_[i * grid_.ny() + j]))
                throw DomainError("GridFunction: non-finite value");
}

GridFunction GridFunction::zeros(const Grid2D& grid) {
    return GridFunction(grid, std::vector<double>(grid.size(), 0.0));
}

GridFunction GridFunction::sample(const Grid2D& grid,
                                  const std::function<double(double, double)>& fn) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.nx(); ++i)
        for (std::size_t j = 0; j < grid.ny(); ++j) v[i * grid.ny() + j] = fn(grid.x(i), grid.y(j));
    return GridFunction(grid, std::move(v));
}

GridFunction GridFunction::axpby(double a, const GridFunction& other, double b) const {
    if (!(other.grid_ == grid_)) throw PreconditionError("GridFunction: grid mismatch");
    std::vector<double> v(values_.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = a * values_[k] + b * other.values_[k];
    return GridFunction(grid_, std::move(v), std::max(margin_, other.margin_));
}

GridFunction GridFunction::scaled(double c) const {
    std::vector<double> v(values_);
    for (auto& e : v) e *= c;
    return GridFunction(grid_, std::move(v), margin_);
}

GridFunction GridFunction::map(const std::function<double(double)>& fn) const {
    std::vector<double> v(values_);
    for (auto& e : v) e = fn(e);
    return GridFunction(grid_, std::move(v), margin_);
}

GridFunction GridFunction::with_margin_filled(double fill) const {
    std::vector<double> v(values_);
    for (std::size_t i = 0; i < grid_.nx(); ++i)
        for (std::size_t j = 0; j < grid_.ny(); ++j)
            if (!valid(i, j)) v[i * grid_.ny() + j] = fill;
    return GridFunction(grid_, std::move(v), 0);
}

void MixedNormSpec::validate() const {
    if (!(p >= 1.0) || !(q >= 1.0) || !(r >= 1.0))
        throw DomainError("MixedNormSpec: exponents p, q, r must be >= 1");
    if (!(s > 0.0 && s < 1.0)) throw DomainError("MixedNormSpec: s must lie in (0, 1)");
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("MixedNormSpec: beta must lie in (0, 1)");
}

// ---------------------------------------------------------------------------

namespace {

template <typename Stencil>
GridFunction difference(const GridFunction& u, std::size_t min_points, Stencil&& stencil) {
    const auto& g = u.grid();
    if (g.nx() < min_points || g.ny() < min_points) {
        std::ostringstream msg;
        msg << "differencing requires at least " << min_points << " points per axis";
        throw PreconditionError(msg.str());
    }
    const std::size_t m = u.margin() + 1;
    if (2 * m >= g.nx() || 2 * m >= g.ny()) throw PreconditionError("differencing: no interior left");
    std::vector<double> v(g.size(), 0.0);
    for (std::size_t i = m; i + m < g.nx(); ++i)
        for (std::size_t j = m; j + m < g.ny(); ++j) v[i * g.ny() + j] = stencil(i, j);
    return GridFunction(g, std::move(v), m);
}

}  // namespace

GridFunction apply_grushin(const GridFunction& u) {
    const auto& g = u.grid();
    const double ihx2 = 1.0 / (g.hx() * g.hx());
    const double ihy2 = 1.0 / (g.hy() * g.hy());
    return difference(u, 5, [&](std::size_t i, std::size_t j) {
        const double uxx = (u(i + 1, j) - 2.0 * u(i, j) + u(i - 1, j)) * ihx2;
        const double uyy = (u(i, j + 1) - 2.0 * u(i, j) + u(i, j - 1)) * ihy2;
        const double x = g.x(i);
        return 0.5 * (uxx + x * x * uyy);
    });
}

GridFunction diff_x(const GridFunction& u) {
    const double s = 0.5 / u.grid().hx();
    return difference(u, 3, [&](std::size_t i, std::size_t j) { return (u(i + 1, j) - u(i - 1, j)) * s; });
}

GridFunction diff_y(const GridFunction& u) {
    const double s = 0.5 / u.grid().hy();
    return difference(u, 3, [&](std::size_t i, std::size_t j) { return (u(i, j + 1) - u(i, j - 1)) * s; });
}

GridFunction diff_xx(const GridFunction& u) {
    const double s = 1.0 / (u.grid().hx() * u.grid().hx());
    return difference(u, 3, [&](std::size_t i, std::size_t j) {
        return (u(i + 1, j) - 2.0 * u(i, j) + u(i - 1, j)) * s;
    });
}

GridFunction diff_yy(const GridFunction& u) {
    const double s = 1.0 / (u.grid().hy() * u.grid().hy());
    return difference(u, 3, [&](std::size_t i, std::size_t j) {
        return (u(i, j + 1) - 2.0 * u(i, j) + u(i, j - 1)) * s;
    });
}

// ---------------------------------------------------------------------------

double sup_norm(const GridFunction& u) {
    const auto& g = u.grid();
    double m = 0.0;
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j)
            if (u.valid(i, j)) m = std::max(m, std::abs(u(i, j)));
    return m;
}

namespace {

void check_exponent(double r, const char* name) {
    if (std::isnan(r) || r < 1.0) throw DomainError(std::string(name) + ": exponent must be >= 1");
}

// L^q norm of a column (fixed i) over valid j.
double column_norm(const GridFunction& u, std::size_t i, double q) {
    const auto& g = u.grid();
    if (std::isinf(q)) {
        double m = 0.0;
        for (std::size_t j = 0; j < g.ny(); ++j)
            if (u.valid(i, j)) m = std::max(m, std::abs(u(i, j)));
        return m;
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < g.ny(); ++j)
        if (u.valid(i, j)) acc += std::pow(std::abs(u(i, j)), q);
    return std::pow(acc * g.hy(), 1.0 / q);
}

}  // namespace

double lp_norm(const GridFunction& u, double r) {
    check_exponent(r, "lp_norm");
    if (std::isinf(r)) return sup_norm(u);
    const auto& g = u.grid();
    double acc = 0.0;
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j)
            if (u.valid(i, j)) acc += std::pow(std::abs(u(i, j)), r);
    return std::pow(acc * g.hx() * g.hy(), 1.0 / r);
}

double mixed_norm(const GridFunction& u, double p, double q) {
    check_exponent(p, "mixed_norm");
    check_exponent(q, "mixed_norm");
    const auto& g = u.grid();
    const std::size_t m = u.margin();
    if (std::isinf(p)) {
        double best = 0.0;
        for (std::size_t i = m; i + m < g.nx(); ++i) best = std::max(best, column_norm(u, i, q));
        return best;
    }
    double acc = 0.0;
    for (std::size_t i = m; i + m < g.nx(); ++i) acc += std::pow(column_norm(u, i, q), p);
    return std::pow(acc * g.hx(), 1.0 / p);
}

// ---------------------------------------------------------------------------
// Hölder quotients

namespace {

constexpr std::size_t kExhaustiveLimit = 64 * 64;
constexpr std::size_t kMinSampledPairs = 100000;

struct Offset {
    long di, dj;
};

// Visits point pairs (P, Q) of the valid interior; fn(du, dx, dy) with dx, dy >= 0.
template <typename Fn>
void for_each_pair(const GridFunction& u, HolderAxis axis, std::uint64_t seed, Fn&& fn) {
    const auto& g = u.grid();
    const long m = static_cast<long>(u.margin());
    const long lo_i = m, hi_i = static_cast<long>(g.nx()) - m;  // [lo, hi)
    const long lo_j = m, hi_j = static_cast<long>(g.ny()) - m;
    const long vx = hi_i - lo_i, vy = hi_j - lo_j;
    if (vx <= 0 || vy <= 0) return;
    const double hx = g.hx(), hy = g.hy();

    auto visit = [&](long i, long j, long di, long dj) {
        const long i2 = i + di, j2 = j + dj;
        if (i2 < lo_i || i2 >= hi_i || j2 < lo_j || j2 >= hi_j) return;
        const double du = std::abs(u(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) -
                                   u(static_cast<std::size_t>(i2), static_cast<std::size_t>(j2)));
        fn(du, std::abs(static_cast<double>(di)) * hx, std::abs(static_cast<double>(dj)) * hy);
    };

    // Along a single axis every line is searched exhaustively when affordable.
    if (axis != HolderAxis::both) {
        const long len = axis == HolderAxis::x ? vx : vy;
        const long lines = axis == HolderAxis::x ? vy : vx;
        const double pair_count = 0.5 * static_cast<double>(len) * static_cast<double>(len) * lines;
        if (pair_count <= 2.0e7) {
            for (long l = 0; l < lines; ++l)
                for (long a = 0; a < len; ++a)
                    for (long b = a + 1; b < len; ++b) {
                        if (axis == HolderAxis::x)
                            visit(lo_i + a, lo_j + l, b - a, 0);
                        else
                            visit(lo_i + l, lo_j + a, 0, b - a);
                    }
            return;
        }
    } else if (static_cast<std::size_t>(vx * vy) <= kExhaustiveLimit) {
        for (long i = lo_i; i < hi_i; ++i)
            for (long j = lo_j; j < hi_j; ++j)
                for (long i2 = i; i2 < hi_i; ++i2)
                    for (long j2 = (i2 == i ? j + 1 : lo_j); j2 < hi_j; ++j2) visit(i, j, i2 - i, j2 - j);
        return;
    }

    // Dyadic stratification by Chebyshev separation: nearest neighbours are
    // visited exhaustively, each coarser band [2^l, 2^(l+1)) is sampled.
    std::vector<Offset> nearest;
    if (axis != HolderAxis::y) nearest.push_back({1, 0});
    if (axis != HolderAxis::x) nearest.push_back({0, 1});
    if (axis == HolderAxis::both) {
        nearest.push_back({1, 1});
        nearest.push_back({1, -1});
    }
    for (long i = lo_i; i < hi_i; ++i)
        for (long j = lo_j; j < hi_j; ++j)
            for (const auto& o : nearest) visit(i, j, o.di, o.dj);

    const long max_sep = std::max(axis == HolderAxis::y ? 1L : vx, axis == HolderAxis::x ? 1L : vy) - 1;
    int levels = 0;
    while ((2L << levels) <= max_sep) ++levels;
    if (levels == 0) return;
    const std::size_t per_level = std::max<std::size_t>(20000, kMinSampledPairs / static_cast<std::size_t>(levels));

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> pick_i(lo_i, hi_i - 1), pick_j(lo_j, hi_j - 1);
    for (int l = 1; l <= levels; ++l) {
        const long rmin = 1L << l, rmax = std::min((1L << (l + 1)) - 1, max_sep);
        if (rmin > rmax) break;
        std::uniform_int_distribution<long> pick_r(rmin, rmax);
        std::uniform_int_distribution<long> pick_o(-rmax, rmax);
        std::uniform_int_distribution<int> pick_side(0, 3);
        for (std::size_t k = 0; k < per_level; ++k) {
            const long i = pick_i(rng), j = pick_j(rng);
            long di = 0, dj = 0;
            if (axis == HolderAxis::x) {
                di = pick_r(rng);
            } else if (axis == HolderAxis::y) {
                dj = pick_r(rng);
            } else {
                // A point on the boundary of the Chebyshev square of radius r.
                const long r = pick_r(rng);
                const long o = std::clamp(pick_o(rng), -r, r);
                switch (pick_side(rng)) {
                    case 0: di = r; dj = o; break;
                    case 1: di = -r; dj = o; break;
                    case 2: di = o; dj = r; break;
                    default: di = o; dj = -r; break;
                }
            }
            visit(i, j, di, dj);
        }
    }
}

}  // namespace

std::vector<double> holder_profile(const GridFunction& u, std::span<const double> exponents,
                                   HolderAxis axis, std::uint64_t seed) {
    for (double e : exponents)
        if (!(e >= 0.0 && e <= 1.0)) throw DomainError("holder_profile: exponents must lie in [0, 1]");
    std::vector<double> best(exponents.size(), 0.0);
    for_each_pair(u, axis, seed, [&](double du, double dx, double dy) {
        if (du == 0.0) return;
        for (std::size_t k = 0; k < exponents.size(); ++k) {
            const double e = exponents[k];
            double denom;
            if (e == 0.0)
                denom = 1.0;
            else if (axis == HolderAxis::x)
                denom = std::pow(dx, e);
            else if (axis == HolderAxis::y)
                denom = std::pow(dy, e);
            else if (e == 1.0)
                denom = dx + dy;
            else
                denom = (dx > 0.0 ? std::pow(dx, e) : 0.0) + (dy > 0.0 ? std::pow(dy, e) : 0.0);
            best[k] = std::max(best[k], du / denom);
        }
    });
    return best;
}

double holder_seminorm(const GridFunction& u, double beta, HolderAxis axis, std::uint64_t seed) {
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("holder_seminorm: beta must lie in (0, 1)");
    const double e[] = {beta};
    return holder_profile(u, e, axis, seed)[0];
}

double sup_x_holder_y(const GridFunction& u, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("sup_x_holder_y: beta must lie in (0, 1)");
    const auto& g = u.grid();
    const std::size_t m = u.margin();
    const double hy = g.hy();
    double best = 0.0;
    for (std::size_t i = m; i + m < g.nx(); ++i)
        for (std::size_t a = m; a + m < g.ny(); ++a)
            for (std::size_t b = a + 1; b + m < g.ny(); ++b) {
                const double d = std::pow(static_cast<double>(b - a) * hy, beta);
                best = std::max(best, std::abs(u(i, a) - u(i, b)) / d);
            }
    return best;
}

namespace {

double slobodeckij_sum(std::span<const double> f, double h, double s, double q, std::size_t stride) {
    const double hs = h * static_cast<double>(stride);
    const double expo = 1.0 + s * q;
    double acc = 0.0;
    for (std::size_t a = 0; a < f.size(); a += stride)
        for (std::size_t b = a + stride; b < f.size(); b += stride) {
            const double d = static_cast<double>(b - a) / static_cast<double>(stride) * hs;
            acc += 2.0 * std::pow(std::abs(f[a] - f[b]), q) / std::pow(d, expo);
        }
    return std::pow(acc * hs * hs, 1.0 / q);
}

}  // namespace

SlobodeckijResult slobodeckij_seminorm(std::span<const double> f, double h, double s, double q) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("slobodeckij_seminorm: s must lie in (0, 1)");
    if (!(q > 1.0)) throw DomainError("slobodeckij_seminorm: q must be > 1");
    if (!(h > 0.0)) throw DomainError("slobodeckij_seminorm: spacing must be positive");
    if (f.size() < 5) throw PreconditionError("slobodeckij_seminorm: need at least 5 samples");
    SlobodeckijResult res;
    res.value = slobodeckij_sum(f, h, s, q, 1);
    res.coarse_value = slobodeckij_sum(f, h, s, q, 2);
    const double scale = std::max(res.value, res.coarse_value);
    res.h_dependent = scale > 0.0 && std::abs(res.value - res.coarse_value) > 0.05 * scale;
    return res;
}

}  // namespace grushin
