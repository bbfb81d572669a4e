#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "grushin/error.hpp"
#include "grushin/estimates.hpp"

using namespace grushin;

TEST_CASE("young exponents examples") {
    auto e = young_exponents(2, 2, 2);
    CHECK(e.m == doctest::Approx(1.0));
    CHECK(e.n == doctest::Approx(1.0));
    e = young_exponents(1, 1, 1);
    CHECK(e.m == 1.0);
    CHECK(e.n == 1.0);
    e = young_exponents(1, 1, 2);
    CHECK(e.m == doctest::Approx(2.0));
    CHECK(e.n == doctest::Approx(2.0));
    e = young_exponents(kInf, kInf, kInf);
    CHECK(e.m == 1.0);
    CHECK_THROWS_AS(young_exponents(0.5, 2, 2), DomainError);
    // 1/m = 1 + 1 - 1/4 > 1
    CHECK_THROWS_AS(young_exponents(2, 4, 1), DomainError);
    CHECK_THROWS_AS(young_exponents(std::nan(""), 2, 2), DomainError);
}

TEST_CASE("young exponents identities on random triples") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(1, 8);
    int checked = 0;
    for (int k = 0; k < 2000; ++k) {
        const double p = U(rng), q = U(rng), r = U(rng);
        try {
            const auto e = young_exponents(p, q, r);
            CHECK(std::abs(1 + 1 / r - (1 / e.n + 1 / e.p)) < 1e-12);
            CHECK(std::abs(1 + 1 / r - (1 / e.m + 1 / e.q)) < 1e-12);
            ++checked;
        } catch (const DomainError&) {
            CHECK((r < q || r < p));
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("log-log fit recovers a noisy power law") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> N(0, 0.01);
    std::vector<double> x, y;
    for (double l = 1; l <= 64; l *= 2) {
        x.push_back(l);
        y.push_back(3.0 * std::pow(l, -0.75) * std::exp(N(rng)));
    }
    const auto fit = fit_loglog(x, y);
    CHECK(std::abs(fit.slope + 0.75) < 0.02);
    CHECK(std::exp(fit.intercept) == doctest::Approx(3.0).epsilon(0.05));
    CHECK(fit.r_squared > 0.99);
    const std::vector<double> one{1.0}, bad{1.0, -1.0};
    CHECK_THROWS_AS(fit_loglog(one, one), PreconditionError);
    CHECK_THROWS_AS(fit_loglog(bad, bad), PreconditionError);
}

TEST_CASE("claim table") {
    MixedNormSpec s;
    s.p = 2;
    s.q = 2;
    s.r = 2;
    s.s = 0.75;
    s.beta = 0.25;
    CHECK(claimed_exponent(ScanTarget::u, ScanNorm::sup, s).value == -1.0);
    CHECK(claimed_exponent(ScanTarget::u, ScanNorm::sup, s).alternatives.at(0).second == -0.5);
    CHECK(claimed_exponent(ScanTarget::grad_x_u, ScanNorm::sup, s).value == -0.5);
    CHECK(claimed_exponent(ScanTarget::grad_y_u, ScanNorm::sup, s).value == -0.25);
    CHECK(claimed_exponent(ScanTarget::grad_x_u, ScanNorm::holder, s).value == doctest::Approx(-0.25));
    CHECK(claimed_exponent(ScanTarget::u, ScanNorm::lr, s).value == doctest::Approx(-1.0));
    CHECK(claimed_exponent(ScanTarget::grad_x_u, ScanNorm::lr, s).value == doctest::Approx(-0.5));
    CHECK(claimed_exponent(ScanTarget::grad2_x_u, ScanNorm::lr, s).value == doctest::Approx(0.0));
    CHECK(claimed_exponent(ScanTarget::grad_y_u, ScanNorm::lr, s).value == doctest::Approx(-1.25));
    CHECK_THROWS_AS(claimed_exponent(ScanTarget::grad2_x_u, ScanNorm::sup, s), UnsupportedError);
    CHECK(classify_slope(-0.9, -1.0, 0.15) == Verdict::consistent);
    CHECK(classify_slope(-2.0, -1.0, 0.15) == Verdict::upper_bound_respected);
    CHECK(classify_slope(-0.5, -1.0, 0.15) == Verdict::discrepant);
}

TEST_CASE("decay scan preconditions") {
    MixedNormSpec s;
    DecayScanOptions o;
    o.grid = Grid2D::centered(0, 0, 4, 4, 17, 17);
    const std::vector<double> short_list{1, 2, 4}, bad_ratio{1, 3, 9, 27, 81}, narrow{1, 2, 4, 8};
    for (const auto* l : {&short_list, &bad_ratio, &narrow})
        CHECK_THROWS_AS(decay_scan(ScanTarget::u, ScanNorm::sup, s, {}, *l, PaperClosedForm{}, o), PreconditionError);
    // A step narrower than the spacing of an even grid samples to zero.
    o.grid = Grid2D::centered(0, 0, 4, 4, 16, 16);
    const std::vector<double> ok{1, 2, 4, 8, 16};
    CHECK_THROWS_AS(decay_scan(ScanTarget::u, ScanNorm::sup, s, parse_family("step_x:1e-9"), ok, PaperClosedForm{}, o),
                    DegenerateError);
    CHECK(parse_geometric("1:2:16") == ok);
}

TEST_CASE("family parsing and analytic norms") {
    const auto f = parse_family("kink_y:0.5:3");
    CHECK(f.id == FamilyId::kink_y);
    CHECK(f.param == 0.5);
    CHECK(f.width == 3.0);
    CHECK(family_name(f).rfind("kink_y", 0) == 0);
    CHECK(parse_family("gauss:2").width == 2.0);
    CHECK_THROWS(parse_family("nope"));
    CHECK_THROWS(parse_family("power_x:1.5"));
    const auto g = Grid2D::centered(0, 0, 12, 12, 481, 481);
    for (const auto& fam : {parse_family("gauss:2"), parse_family("step_x:1"), parse_family("kink_y:0.5")}) {
        const auto u = sample_family(fam, g);
        for (double r : {1.0, 2.0}) CHECK(lp_norm(u, r) == doctest::Approx(analytic_lr_norm(fam, r)).epsilon(2e-2));
        CHECK(sup_norm(u) == doctest::Approx(analytic_lr_norm(fam, kInf)).epsilon(2e-2));
    }
}

TEST_CASE("constants of the lr estimates") {
    const auto c = eval_constants(2, 2, 0.5);
    CHECK(c.c1.finite);
    CHECK(c.c2.finite);
    CHECK_FALSE(c.c1.diverged);
    // p = q = 2: the shear y -> y - x^2 separates the double integral into (pi / 2)^{1/2}.
    CHECK(c.c1.value == doctest::Approx(std::sqrt(std::acos(-1.0) / 2)).epsilon(1e-9));
    CHECK(std::abs(c.c1.value - c.c1.refined) < 1e-4 * c.c1.value);
    CHECK(std::abs(c.c2.value - c.c2.refined) < 1e-4 * c.c2.value);
    for (double y : {-1.0, 0.3, 2.5})
        CHECK(c1_inner_integral(2, y, true) == doctest::Approx(c1_inner_integral(2, y, false)).epsilon(1e-10));
    CHECK_THROWS_AS(eval_constants(1, 2, 0.5), DomainError);
    CHECK_THROWS_AS(eval_constants(2, 2, 1.0), DomainError);
}
