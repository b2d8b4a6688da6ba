#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "sovkit/diagram_json.hpp"
#include "sovkit/diagrams.hpp"
#include "sovkit/errors.hpp"

using namespace sovkit;

namespace {

ExternalVertex pos(const std::string& l, cplx z) { return {l, false, true, z}; }
ExternalVertex mom(const std::string& l) { return {l, true, false, 0.0}; }
Edge prop(const std::string& f, const std::string& t, FieldExponent e) { return {f, t, e, false}; }
Edge wave(const std::string& p, const std::string& at) { return {p, at, FieldExponent{}, true}; }
FieldExponent ex(double a, double abar) { return make_exponent(a, abar); }

QuadratureSpec quad(double rel = 1e-6)
{
    QuadratureSpec s;
    s.rel_tol = rel;
    s.abs_tol = 1e-12;
    return s;
}

double rel_diff(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// independent evaluation of a closed form with the test-side Gamma
cplx oracle_value(const ClosedFormFactor& f, const Bindings& b)
{
    cplx v = std::pow(kPi, f.pi_power) * std::pow(cplx(0, 1), f.phase_quarter_turns) * double(f.sign);
    for (auto& g : f.gamma_factors) v *= std::pow(oracle::cgamma(g.e.a(), g.e.abar()), double(g.mult));
    for (auto& m : f.momentum_powers) {
        cplx z = b.at(m.plus) - (m.minus.empty() ? cplx(0.0) : b.at(m.minus));
        v *= std::pow(z, -m.e.a()) * std::pow(std::conj(z), -m.e.abar());
    }
    return v;
}

struct Rng {
    std::mt19937_64 g;
    explicit Rng(unsigned long s) : g(s) {}
    double uni(double a, double b) { return std::uniform_real_distribution<double>(a, b)(g); }
    int pick(int a, int b) { return std::uniform_int_distribution<int>(a, b)(g); }
    cplx point() { return {uni(-1.5, 1.5), uni(-1.5, 1.5)}; }
};

std::vector<cplx> spread_points(Rng& r, int n)
{
    for (;;) {
        std::vector<cplx> z;
        for (int i = 0; i < n; ++i) z.push_back(r.point());
        bool ok = true;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < i; ++j) ok = ok && std::abs(z[i] - z[j]) > 0.5;
        if (ok) return z;
    }
}

}  // namespace

TEST_CASE("find_free_vertices")
{
    Diagram d;
    d.external = {pos("z1", 0.0), pos("z2", 1.0)};
    d.internal = {"w"};
    d.edges = {prop("z1", "w", ex(0.75, 0.75)), prop("w", "z2", ex(0.75, 0.75))};
    CHECK(find_free_vertices(d) == std::vector<std::string>{"w"});

    Diagram t;
    t.external = {pos("x", 0.0)};
    t.internal = {"a", "b", "c"};
    t.edges = {prop("a", "b", ex(0.5, 0.5)), prop("b", "c", ex(0.5, 0.5)), prop("c", "a", ex(0.5, 0.5)),
               prop("x", "a", ex(0.5, 0.5)), prop("x", "b", ex(0.5, 0.5)), prop("x", "c", ex(0.5, 0.5))};
    CHECK(find_free_vertices(t).empty());
}

TEST_CASE("apply_chain example")
{
    Diagram d;
    d.external = {pos("z1", 0.0), pos("z2", 1.0)};
    d.internal = {"w"};
    d.edges = {prop("z1", "w", ex(0.75, 0.75)), prop("w", "z2", ex(0.75, 0.75))};
    Diagram r = apply_chain(d, "w");
    REQUIRE(r.edges.size() == 1);
    CHECK(r.internal.empty());
    CHECK(std::abs(r.edges[0].e.a() - 0.5) < 1e-15);
    CHECK(std::abs(r.edges[0].e.abar() - 0.5) < 1e-15);
    CHECK(r.edges[0].from == "z1");
    CHECK(r.edges[0].to == "z2");

    ClosedFormFactor want;
    want.pi_power = 1;
    want.mul_afactor(ex(0.75, 0.75));
    want.mul_afactor(ex(0.75, 0.75));
    want.mul_gamma(ex(0.5, 0.5));
    CHECK(r.prefactor.same_as(want));

    auto lhs = numeric_eval(d, {}, quad(1e-7));
    auto rhs = numeric_eval(r, {}, quad());
    CHECK(rel_diff(lhs.value, rhs.value) < 1e-4);

    Diagram bad = d;
    bad.edges[1] = prop("w", "z2", ex(0.25, 0.25));
    CHECK_THROWS_AS(apply_chain(bad, "w"), DegenerateChain);
    Diagram both_in = d;
    both_in.edges[1] = prop("z2", "w", ex(0.75, 0.75));
    CHECK_THROWS_AS(apply_chain(both_in, "w"), NotAChain);
}

TEST_CASE("apply_star_triangle examples")
{
    Diagram d;
    d.external = {pos("z1", cplx(0.0, 0.0)), pos("z2", cplx(1.0, 0.2)), pos("z3", cplx(0.3, 0.9))};
    d.internal = {"v"};
    auto t = ex(2.0 / 3, 2.0 / 3);
    d.edges = {prop("v", "z1", t), prop("v", "z2", t), prop("v", "z3", t)};
    Diagram r = apply_star_triangle(d, "v");
    REQUIRE(r.edges.size() == 3);
    for (auto& e : r.edges) {
        CHECK(std::abs(e.e.a() - 1.0 / 3) < 1e-14);
        CHECK(std::abs(e.e.abar() - 1.0 / 3) < 1e-14);
    }
    auto lhs = numeric_eval(d, {}, quad(1e-7));
    auto rhs = numeric_eval(r, {}, quad());
    CHECK(rel_diff(lhs.value, rhs.value) < 1e-4);

    Diagram bad = d;
    bad.edges = {prop("v", "z1", ex(1, 1)), prop("v", "z2", ex(1, 1)), prop("v", "z3", ex(0.5, 0.5))};
    CHECK_THROWS_AS(apply_star_triangle(bad, "v"), UniquenessViolated);
}

TEST_CASE("star-triangle then chain equals double chain")
{
    // u carries a unique star (x, y, w); w is free between u and y
    Diagram d;
    d.external = {pos("x", cplx(0.0, 0.0)), pos("y", cplx(1.0, 0.3))};
    d.internal = {"u", "w"};
    auto a = ex(0.8, 0.8), b = ex(0.6, 0.6), c = ex(0.6, 0.6);
    auto e = ex(0.7, 0.7);
    d.edges = {prop("x", "u", a), prop("u", "y", b), prop("u", "w", c), prop("w", "y", e)};
    auto ra = reduce_all_paths(d, 8);
    REQUIRE(ra.size() >= 2);
    bool star_first = false;
    for (auto& r : ra) {
        CHECK(r.result.same_as(ra[0].result));
        star_first = star_first || r.steps[0].kind == RuleKind::StarTriangle;
    }
    CHECK(star_first);
    Bindings bnd{{"x", 0.0}, {"y", cplx(1.0, 0.3)}};
    cplx closed = ra[0].result.evaluate(bnd);
    // each first step leaves one internal vertex, integrated directly
    auto via_chain = numeric_eval(normalize(apply_chain(d, "w")), {}, quad(1e-6));
    auto via_star = numeric_eval(normalize(apply_star_triangle(d, "u")), {}, quad(1e-6));
    CHECK(rel_diff(via_chain.value, closed) < 1e-4);
    CHECK(rel_diff(via_star.value, closed) < 1e-4);
}

TEST_CASE("apply_fourier examples")
{
    Diagram d;
    d.external = {mom("p"), pos("u", 0.0)};
    d.internal = {"v"};
    d.edges = {prop("u", "v", ex(1.0, 0.0)), wave("p", "v")};
    Diagram r = apply_fourier(d, "v");
    CHECK(r.internal.empty());
    ClosedFormFactor c = r.prefactor.canonical();
    CHECK(c.pi_power == 1);
    CHECK(c.phase_quarter_turns == 1);
    CHECK(c.sign == 1);
    CHECK(c.gamma_factors.empty());
    REQUIRE(c.momentum_powers.size() == 1);
    CHECK(std::abs(c.momentum_powers[0].e.a() - 0.0) < 1e-15);
    CHECK(std::abs(c.momentum_powers[0].e.abar() - 1.0) < 1e-15);

    d.edges[0].e = ex(0.5, 0.5);
    ClosedFormFactor h = apply_fourier(d, "v").prefactor.canonical();
    CHECK(h.pi_power == 1);
    CHECK(h.phase_quarter_turns == 0);
    CHECK(h.gamma_factors.empty());
    REQUIRE(h.momentum_powers.size() == 1);
    CHECK(std::abs(h.momentum_powers[0].e.a() - 0.5) < 1e-15);

    Diagram none;
    none.external = {pos("u", 0.0)};
    none.internal = {"v"};
    none.edges = {prop("u", "v", ex(0.5, 0.5))};
    CHECK_THROWS_AS(apply_fourier(none, "v"), NoPlaneWave);

    // numeric against fourier_propagator
    auto al = ex(0.7, -0.3);
    cplx p(0.8, -0.5);
    d.edges[0].e = al;
    Diagram fr = apply_fourier(d, "v");
    Bindings b{{"p", p}, {"u", 0.0}};
    cplx closed = reduce(d).evaluate(b);
    auto num = fourier_propagator(al, p, quad(1e-6));
    CHECK(rel_diff(closed, num.value) < 1e-4);
    CHECK(rel_diff(closed, fourier_closed(al, p)) < 1e-12);
}

TEST_CASE("apply_exchange identity and errors")
{
    Diagram d;
    d.external = {pos("a", 0.0), pos("b", 1.0), pos("c", cplx(0, 1)), pos("e", cplx(1, 1))};
    d.internal = {"v"};
    auto x = ex(0.5, 0.5);
    d.edges = {prop("v", "a", x), prop("v", "b", x), prop("v", "c", x), prop("v", "e", x)};
    ExchangePattern pat{"v", "a", "b"};
    Diagram same = apply_exchange(d, pat, std::make_pair(x, x));
    CHECK(same.prefactor.same_as(d.prefactor));
    CHECK(same.edges.size() == d.edges.size());
    CHECK_THROWS_AS(apply_exchange(d, pat, std::make_pair(ex(0.6, 0.6), x)), IndexSumMismatch);
    Diagram bad = d;
    bad.edges[3].e = ex(0.7, 0.7);
    CHECK_THROWS_AS(apply_exchange(bad, pat), IndexSumMismatch);
}

TEST_CASE("randomized chain soundness")
{
    Rng r(11);
    int done = 0;
    while (done < 20) {
        int m1 = r.pick(-1, 1), m2 = r.pick(-1, 1);
        auto a = FieldExponent::from_mw(m1, cplx(r.uni(0.35, 0.85), r.uni(-0.4, 0.4)));
        auto b = FieldExponent::from_mw(m2, cplx(r.uni(0.35, 0.85), r.uni(-0.4, 0.4)));
        if ((a.w() + b.w()).real() < 1.15) continue;
        auto z = spread_points(r, 2);
        Diagram d;
        d.external = {pos("x", z[0]), pos("y", z[1])};
        d.internal = {"w"};
        d.edges = {prop("x", "w", a), prop("w", "y", b)};
        Diagram red = apply_chain(d, "w");
        auto lhs = numeric_eval(d, {}, quad(1e-6));
        cplx rhs = numeric_eval(red, {}, quad()).value;
        Bindings bnd{{"x", z[0]}, {"y", z[1]}};
        cplx indep = oracle_value(reduce(d), bnd);
        CHECK(rel_diff(lhs.value, rhs) < 1e-3);
        CHECK(rel_diff(indep, rhs) < 1e-9);
        ++done;
    }
}

TEST_CASE("randomized star-triangle soundness")
{
    Rng r(12);
    int done = 0;
    while (done < 20) {
        int m1 = r.pick(-1, 1), m2 = r.pick(-1, 1);
        cplx w1(r.uni(0.35, 0.85), r.uni(-0.4, 0.4)), w2(r.uni(0.35, 0.85), r.uni(-0.4, 0.4));
        cplx w3 = 2.0 - w1 - w2;
        if (w3.real() < 0.35 || w3.real() > 0.85) continue;
        auto a = FieldExponent::from_mw(m1, w1), b = FieldExponent::from_mw(m2, w2);
        auto c = FieldExponent::from_mw(-m1 - m2, w3);
        auto z = spread_points(r, 3);
        Diagram d;
        d.external = {pos("z1", z[0]), pos("z2", z[1]), pos("z3", z[2])};
        d.internal = {"v"};
        // mix orientations to exercise the sign bookkeeping
        d.edges = {prop("v", "z1", a), prop("z2", "v", b), prop("v", "z3", c)};
        Diagram red = apply_star_triangle(d, "v");
        auto lhs = numeric_eval(d, {}, quad(1e-6));
        cplx rhs = numeric_eval(red, {}, quad()).value;
        CHECK(rel_diff(lhs.value, rhs) < 1e-3);
        ++done;
    }
}

TEST_CASE("randomized Fourier soundness")
{
    Rng r(13);
    for (int i = 0; i < 20; ++i) {
        int m = r.pick(-1, 1);
        auto a = FieldExponent::from_mw(m, cplx(r.uni(0.3, 0.8), r.uni(-0.4, 0.4)));
        cplx u = r.point(), p(r.uni(0.4, 1.2), r.uni(-1.2, -0.4));
        Diagram d;
        d.external = {mom("p"), pos("u", u)};
        d.internal = {"v"};
        if (i % 2)
            d.edges = {prop("u", "v", a), wave("p", "v")};
        else
            d.edges = {prop("v", "u", a), wave("p", "v")};
        Bindings b{{"p", p}};
        auto lhs = numeric_eval(d, b, quad(1e-6));
        cplx rhs = numeric_eval(apply_fourier(d, "v"), b, quad()).value;
        CHECK(rel_diff(lhs.value, rhs) < 1e-3);
    }
}

TEST_CASE("randomized exchange soundness")
{
    Rng r(14);
    int done = 0;
    while (done < 20) {
        int m[3] = {r.pick(-1, 1), r.pick(-1, 1), r.pick(-1, 1)};
        cplx w[3];
        for (auto& x : w) x = cplx(r.uni(0.3, 0.7), r.uni(-0.3, 0.3));
        cplx w3 = 2.0 - w[0] - w[1] - w[2];
        if (w3.real() < 0.3 || w3.real() > 0.8) continue;
        FieldExponent a[4] = {FieldExponent::from_mw(m[0], w[0]), FieldExponent::from_mw(m[1], w[1]),
                              FieldExponent::from_mw(m[2], w[2]), FieldExponent::from_mw(-m[0] - m[1] - m[2], w3)};
        auto z = spread_points(r, 4);
        Diagram d;
        d.external = {pos("z0", z[0]), pos("z1", z[1]), pos("z2", z[2]), pos("z3", z[3])};
        d.internal = {"v"};
        d.edges = {prop("v", "z0", a[0]), prop("z1", "v", a[1]), prop("v", "z2", a[2]), prop("v", "z3", a[3])};
        const char* pairs[3] = {"z1", "z2", "z3"};
        Diagram red = apply_exchange(d, {"v", "z0", pairs[done % 3]});
        auto lhs = numeric_eval(d, {}, quad(1e-6));
        cplx rhs = numeric_eval(red, {}, quad(1e-6)).value;
        CHECK(rel_diff(lhs.value, rhs) < 1e-3);
        ++done;
    }
}

TEST_CASE("canonical form")
{
    ClosedFormFactor f;
    f.pi_power = 2;
    f.mul_phase(3);
    f.mul_gamma(FieldExponent::from_mw(-1, cplx(0.3, 0.1)), 1);
    f.mul_gamma(FieldExponent::from_mw(1, cplx(0.7, -0.1)), 2);
    f.mul_gamma(ex(0.5, 0.5), 4);
    f.mul_power("q", "p", ex(0.3, 1.3));
    ClosedFormFactor c = f.canonical();
    CHECK(c.same_as(c.canonical()));
    CHECK(c.phase_quarter_turns == 1);
    for (auto& g : c.gamma_factors) {
        CHECK(g.e.m() >= 0);
        CHECK(g.e.w().real() >= 0.5 - 1e-12);
    }
    Bindings b{{"p", cplx(0.3, 0.4)}, {"q", cplx(-1.1, 0.2)}};
    CHECK(rel_diff(c.evaluate(b), f.evaluate(b)) < 1e-12);
    CHECK(rel_diff(c.evaluate(b), oracle_value(f, b)) < 1e-10);
    ClosedFormFactor inv = f;
    for (auto& g : inv.gamma_factors) g.mult = -g.mult;
    ClosedFormFactor prod = (f * inv);
    prod.momentum_powers.clear();
    prod.pi_power = 0;
    prod.phase_quarter_turns = 0;
    CHECK(rel_diff(prod.canonical().evaluate({}), 1.0) < 1e-12);
}

TEST_CASE("identity reduction and empty diagram")
{
    Diagram d;
    d.external = {pos("x", 0.0), pos("y", cplx(0.4, 0.3))};
    d.edges = {prop("x", "y", ex(0.3, 0.3))};
    d.prefactor.pi_power = 1;
    ClosedFormFactor c = reduce(d);
    REQUIRE(c.momentum_powers.size() == 1);
    CHECK(c.pi_power == 1);
    Bindings b{{"x", 0.0}, {"y", cplx(0.4, 0.3)}};
    CHECK(rel_diff(c.evaluate(b), kPi * std::pow(0.25, -0.3)) < 1e-12);

    Diagram e;
    e.prefactor.pi_power = 2;
    e.prefactor.mul_gamma(ex(0.7, 0.7), 1);
    auto v = numeric_eval(e, {}, quad());
    CHECK(rel_diff(v.value, kPi * kPi * oracle::cgamma(0.7, 0.7)) < 1e-10);
}

TEST_CASE("diagram json round trip")
{
    Diagram d;
    d.external = {pos("x", cplx(0.1, 1.0 / 3)), mom("p")};
    d.internal = {"w"};
    d.edges = {prop("x", "w", FieldExponent::from_mw(1, cplx(0.1234567890123456789, -0.3))), wave("p", "w")};
    d.prefactor.pi_power = 1;
    d.prefactor.mul_gamma(ex(0.3, 1.3), -2);
    auto j = diagram_to_json(d);
    Diagram back = diagram_from_json(nlohmann::json::parse(dump_json(j)));
    CHECK(diagram_to_json(back) == j);
    CHECK(back.external[0].value == d.external[0].value);
    CHECK(back.edges[0].e.w() == d.edges[0].e.w());
    CHECK_THROWS_AS(diagram_from_json(nlohmann::json::parse(R"({"edges":[{"from":"a","to":"b","m":0}]})")),
                    ConfigError);
}
