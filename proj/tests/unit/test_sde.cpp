#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "grushin/error.hpp"
#include "grushin/parallel.hpp"
#include "grushin/sde.hpp"

using namespace grushin;

namespace {
SimConfig cfg(double t, double m1, std::size_t n, YScheme s = YScheme::euler) {
    SimConfig c;
    c.t = t;
    c.mu1 = m1;
    c.n_paths = n;
    c.n_steps = 64;
    c.seed = 11;
    c.scheme = s;
    return c;
}
}  // namespace

TEST_CASE("endpoints do not depend on the thread count") {
    const auto c = cfg(1, 1, 5000);
    set_num_threads(1);
    const auto a = simulate_endpoints(c);
    set_num_threads(4);
    const auto b = simulate_endpoints(c);
    set_num_threads(1);
    CHECK(a.xs == b.xs);
    CHECK(a.ys == b.ys);
}

TEST_CASE("moments match the Ito law") {
    const auto s = simulate_endpoints(cfg(1, 1, 200000));
    const auto m = moment_summary(s);
    CHECK(std::abs(m.mean[0] - 1.0) <= m.half_widths.mean[0]);
    CHECK(std::abs(m.cov[0][0] - 1.0) <= m.half_widths.cov[0][0]);
    // Var Y = mu1^2 t + t^2 / 2 and Cov(X, Y) = 0.
    CHECK(std::abs(m.cov[1][1] - 1.5) <= m.half_widths.cov[1][1]);
    CHECK(std::abs(m.cov[0][1]) <= m.half_widths.cov[0][1]);
}

TEST_CASE("Var X scales with t") {
    const auto m = moment_summary(simulate_endpoints(cfg(2, 0, 100000)));
    CHECK(std::abs(m.cov[0][0] - 2.0) <= 1.5 * m.half_widths.cov[0][0]);
    CHECK(std::abs(m.cov[1][1] - 2.0) <= 1.5 * m.half_widths.cov[1][1]);
}

TEST_CASE("Y is symmetric about mu2") {
    const auto s = simulate_endpoints(cfg(1, 0.5, 40000));
    std::vector<double> neg(s.ys.size());
    for (std::size_t k = 0; k < s.ys.size(); ++k) neg[k] = -s.ys[k];
    CHECK(ks_two_sample(s.ys, neg).p_value > 1e-3);
}

TEST_CASE("discrete Ito isometry") {
    const auto s = simulate_endpoints(cfg(1, 1, 100000));
    const double n = static_cast<double>(s.size());
    const double ey2 = std::inner_product(s.ys.begin(), s.ys.end(), s.ys.begin(), 0.0) / n;
    const double eqv = std::accumulate(s.quadratic_variation.begin(), s.quadratic_variation.end(), 0.0) / n;
    CHECK(std::abs(ey2 - eqv) < 0.03);
    CHECK(std::abs(eqv - 1.5) < 0.02);
}

TEST_CASE("conditional scheme has the same law as euler") {
    const auto e = simulate_endpoints(cfg(1, 1, 40000));
    const auto c = simulate_endpoints(cfg(1, 1, 40000, YScheme::conditional));
    CHECK(ks_two_sample(e.ys, c.ys).p_value > 1e-3);
}

TEST_CASE("kde integrates to one and warns on a small grid") {
    const auto s = simulate_endpoints(cfg(1, 0, 20000));
    const auto wide = empirical_density(s, Grid2D::centered(0, 0, 8, 12, 81, 161), {0.15, 0.15});
    double mass = 0;
    for (double v : wide.density.values()) mass += v;
    mass *= wide.density.grid().hx() * wide.density.grid().hy();
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-2));
    CHECK_FALSE(wide.coverage_warning);
    const auto small = empirical_density(s, Grid2D::centered(0, 0, 0.5, 0.5, 11, 11), {0.15, 0.15});
    CHECK(small.coverage_warning);
}

TEST_CASE("simulation input validation") {
    CHECK_THROWS_AS(simulate_endpoints(cfg(0, 0, 1000)), DomainError);
    CHECK_THROWS_AS(simulate_endpoints(cfg(1, 0, 10)), DomainError);
    auto c = cfg(1, 0, 1000);
    c.n_steps = 4;
    CHECK_THROWS_AS(simulate_endpoints(c), DomainError);
    EndpointSample tiny;
    tiny.xs = {1, 2};
    tiny.ys = {1, 2};
    CHECK_THROWS_AS(moment_summary(tiny), PreconditionError);
}
