#include <cmath>
#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "sovkit/errors.hpp"
#include "sovkit/gustafson.hpp"

using namespace sovkit;

namespace {

CPair P(double n, cplx x) { return {0.5 * n + x, -0.5 * n + x}; }

double rel_diff(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

cplx og(const CPair& p) { return oracle::cgamma(p.a, p.abar); }

MBParams first_n2()
{
    return {{P(0, {0.1, 0.1}), P(1, {0.12, -0.2}), P(-1, {0.08, 0.05})},
            {P(0, {0.1, -0.1}), P(1, {0.15, 0.05}), P(-1, {0.1, 0.2})}};
}

MBParams second_n2()
{
    return {{P(0, {0.05, 0.1}), P(1, {0.1, -0.2})}, {P(0, {0.05, -0.1}), P(-1, {0.02, 0.3})}};
}

}  // namespace

TEST_CASE("first identity N=1, symmetric real parameters")
{
    MBParams p{{P(0, 0.2), P(0, 0.2)}, {P(0, 0.2), P(0, 0.2)}};
    // rhs from the oracle: 1! Gamma[0.4]^4 / Gamma[0.8]
    cplx g4 = og(P(0, 0.4));
    cplx expect = g4 * g4 * g4 * g4 / og(P(0, 0.8));
    for (int nm : {8, 16}) {
        MBSpec s;
        s.n_max = nm;
        s.nu_cutoff = 30;
        MBResult r = gustafson_first(1, p, s);
        CHECK(rel_diff(r.rhs, expect) < 1e-12);
        CHECK(rel_diff(r.lhs.value, r.rhs) < 1e-6);
        CHECK(r.contour_shifts == std::vector<double>{0.0});
    }
}

TEST_CASE("first identity N=1, half-integer discrete parts")
{
    MBParams p{{P(0.5, 0.2), P(-0.5, {0.15, 0.1})}, {P(0.5, 0.1), P(-1.5, {0.2, -0.3})}};
    MBSpec s;
    s.sigma = 1;
    MBResult r = gustafson_first(1, p, s);
    CHECK(rel_diff(r.lhs.value, r.rhs) < 1e-6);
}

TEST_CASE("parity-incompatible sigma gives an identically zero integrand")
{
    MBParams p{{P(0, 0.2), P(0, 0.2)}, {P(0, 0.2), P(0, 0.2)}};
    MBSpec s;
    s.sigma = 1;
    MBResult r = gustafson_first(1, p, s);
    CHECK(r.lhs.value == cplx(0.0));
    CHECK(r.lhs.evals == 0);
}

TEST_CASE("first identity N=2, generic complex parameters")
{
    MBParams p = first_n2();
    MBSpec s;
    MBResult r = gustafson_first(2, p, s);
    cplx expect = 2.0;
    for (const auto& z : p.z_list)
        for (const auto& w : p.w_list) expect *= og(z + w);
    CPair tot;
    for (int k = 0; k < 3; ++k) tot = tot + p.z_list[k] + p.w_list[k];
    expect /= og(tot);
    CHECK(rel_diff(r.rhs, expect) < 1e-12);
    CHECK(rel_diff(r.lhs.value, r.rhs) < 1e-4);
}

TEST_CASE("first identity N=2 is invariant under permutations of z and w")
{
    MBParams p = first_n2();
    MBSpec s;
    s.n_max = 30;
    cplx base = gustafson_first(2, p, s).lhs.value;
    MBParams q = p;
    std::swap(q.z_list[0], q.z_list[2]);
    CHECK(rel_diff(gustafson_first(2, q, s).lhs.value, base) < 1e-8);
    q = p;
    std::rotate(q.w_list.begin(), q.w_list.begin() + 1, q.w_list.end());
    CHECK(rel_diff(gustafson_first(2, q, s).lhs.value, base) < 1e-8);
}

TEST_CASE("conjugation-closed parameter sets give a real integral")
{
    MBParams p{{P(1, 0.15), P(-1, 0.15)}, {P(2, 0.2), P(-2, 0.2)}};
    MBResult r = gustafson_first(1, p, MBSpec{});
    CHECK(std::abs(r.lhs.value.imag()) < 1e-8 * std::abs(r.lhs.value));
    CHECK(rel_diff(r.lhs.value, r.rhs) < 1e-6);
}

TEST_CASE("second identity N=1 at zeta = 1")
{
    MBParams p{{P(0, {0.1, 0.1})}, {P(0, {0.1, -0.2})}};
    MBResult r = gustafson_second(1, p, 1.0, MBSpec{});
    // [1]^Z / [2]^{Z+W} = 2^{-(Z+W+Zbar+Wbar)}
    const CPair zw = p.z_list[0] + p.w_list[0];
    cplx expect = std::pow(2.0, -(zw.a + zw.abar)) * og(zw);
    CHECK(rel_diff(r.rhs, expect) < 1e-12);
    CHECK(rel_diff(r.lhs.value, r.rhs) < 1e-6);
}

TEST_CASE("second identity N=1 and N=2 for generic zeta")
{
    MBParams p1{{P(1, {0.1, 0.1})}, {P(0, {0.15, -0.2})}};
    for (cplx zeta : {std::polar(1.0, 0.7), std::polar(1.5, -2.0), std::polar(0.6, 1.2)}) {
        MBResult r = gustafson_second(1, p1, zeta, MBSpec{});
        CHECK(rel_diff(r.lhs.value, r.rhs) < 1e-6);
    }
    MBResult r2 = gustafson_second(2, second_n2(), std::polar(1.5, 0.7), MBSpec{});
    CHECK(rel_diff(r2.lhs.value, r2.rhs) < 1e-4);
}

TEST_CASE("second identity: modulus-one zeta gives a pure phase on the unitary line")
{
    for (double ph : {0.3, -1.1, 2.9}) {
        cplx zeta = std::polar(1.0, ph);
        // Z + conj(Zbar) = 1
        CPair Z{cplx(1.0, 0.4), cplx(0.0, 0.4)};
        CHECK(std::abs(std::abs(zeta_bracket(zeta, Z)) - 1.0) < 1e-14);
    }
}

TEST_CASE("second identity: branch cut and argument checks")
{
    MBParams p{{P(0, 0.1)}, {P(0, 0.1)}};
    CHECK_THROWS_AS(gustafson_second(1, p, -2.0, MBSpec{}), BranchCutHit);
    CHECK_THROWS_AS(gustafson_second(1, p, 0.0, MBSpec{}), BranchCutHit);
    CHECK_THROWS_AS(gustafson_second(2, p, 1.0, MBSpec{}), PreconditionError);
    CHECK_THROWS_AS(gustafson_first(3, p, MBSpec{}), PreconditionError);
}

TEST_CASE("contour checks and convergence domain")
{
    MBParams p{{P(0, 0.2), P(0, 0.2)}, {P(0, 0.2), P(0, 0.2)}};
    MBSpec s;
    s.contour_shifts = {0.2};
    CHECK_THROWS_AS(gustafson_first(1, p, s), PoleOnContour);
    s.contour_shifts = {0.5};
    CHECK_THROWS_AS(gustafson_first(1, p, s), PreconditionError);
    s.contour_shifts = {0.1};
    MBResult r = gustafson_first(1, p, s);
    CHECK(rel_diff(r.lhs.value, r.rhs) < 1e-6);

    // poles of Gamma(z - u) sit left of Re nu = 0: the contour is moved
    MBParams q{{P(0, -0.1), P(0, 0.5)}, {P(0, 0.3), P(0, 0.2)}};
    MBResult rq = gustafson_first(1, q, MBSpec{});
    CHECK(rq.contour_shifts[0] < -0.1);
    CHECK(rel_diff(rq.lhs.value, rq.rhs) < 1e-6);

    MBParams bad{{P(0, 0.6), P(0, 0.6)}, {P(0, 0.6), P(0, 0.6)}};
    CHECK_THROWS_AS(gustafson_first(1, bad, MBSpec{}), ConvergenceDomainViolated);
}

TEST_CASE("truncation tables are monotone")
{
    const std::vector<std::pair<int, double>> steps{{4, 4}, {8, 8}, {16, 16}, {32, 32}};
    MBParams p{{P(0, 0.2), P(0, 0.2)}, {P(0, 0.2), P(0, 0.2)}};
    auto rows = convergence_table([&](const MBSpec& s) { return gustafson_first(1, p, s); }, MBSpec{}, steps);
    REQUIRE(rows.size() == steps.size());
    const double scale = std::abs(gustafson_first_rhs(1, p));
    CHECK(table_monotone(rows, false, 0.0));
    CHECK(table_monotone(rows, true, 1e-9 * scale));
    CHECK(rows.back().accel_err < rows.back().raw_err);

    MBParams p2 = first_n2();
    auto rows2 = convergence_table([&](const MBSpec& s) { return gustafson_first(2, p2, s); }, MBSpec{}, steps);
    const double scale2 = std::abs(gustafson_first_rhs(2, p2));
    CHECK(table_monotone(rows2, false, 0.0));
    CHECK(table_monotone(rows2, true, 1e-9 * scale2));
}

TEST_CASE("J_omega at N=2 against its closed form")
{
    std::vector<SeparatedPoint> x{{2, cplx(0.3, -0.05)}}, xp{{-2, cplx(-0.2, 0.05)}};
    CPair Z{cplx(0.5, 0.3), cplx(0.5, 0.3)};
    MBSpec s;
    s.n_max = 60;
    JOmegaResult j = j_omega_check(x, xp, Z, 0.4, std::polar(1.5, 0.7), s);
    CHECK(rel_diff(j.lhs.value, j.rhs) < 1e-4);
    // same quantity through the second identity after u -> iy
    CHECK(rel_diff(j.rhs_second, j.rhs) < 1e-10);
    CHECK(rel_diff(j.lhs_second, j.lhs.value) < 1e-10);

    // modulus-one zeta
    std::vector<SeparatedPoint> x1{{-2, cplx(0.1, -0.05)}}, xp1{{0, cplx(0.4, 0.05)}};
    s.n_max = 40;
    JOmegaResult j1 = j_omega_check(x1, xp1, Z, 0.4, std::polar(1.0, 0.7), s);
    CHECK(rel_diff(j1.lhs.value, j1.rhs) < 1e-4);
    CHECK(rel_diff(j1.rhs_second, j1.rhs) < 1e-10);

    std::vector<SeparatedPoint> xh{{1, cplx(0.3, -0.05)}}, xph{{-1, cplx(-0.2, 0.05)}};
    CHECK_THROWS_AS(j_omega_check(xh, xph, Z, 0.4, 1.0, s), PreconditionError);
    s.sigma = 1;
    CHECK_THROWS_AS(j_omega_check(xh, xph, Z, 0.4, 1.0, s), PreconditionError);
}

TEST_CASE("J_omega sign rearrangements")
{
    std::mt19937_64 rng(7);
    for (int N : {2, 3, 4})
        for (int sigma : {0, 1})
            for (int k = 0; k < 25; ++k) {
                SignIdentityCheck c = j_omega_sign_identities(N, sigma, rng);
                CHECK(c.mu_rel_err < 1e-10);
                CHECK(c.swap_rel_err < 1e-10);
                CHECK(c.parity_ok);
            }
}
