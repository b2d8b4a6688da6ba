#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <random>

#include "sovkit/cli.hpp"
#include "sovkit/diagrams.hpp"
#include "sovkit/gustafson.hpp"
#include "sovkit/parallel.hpp"
#include "sovkit/plane.hpp"
#include "sovkit/sov.hpp"

namespace sovkit {

namespace {

const cplx I(0.0, 1.0);
using Clock = std::chrono::steady_clock;

struct Outcome {
    std::string name;
    std::string anchor;
    double tol = 0.0;
    cplx lhs{0.0}, rhs{0.0};
    long evals = 0;
    std::string detail;
};

struct Task {
    std::string suite;
    // used for the failure row when run throws
    std::string name;
    std::string anchor;
    double tol = 0.0;
    std::function<std::vector<Outcome>(std::vector<ConvergenceTable>&)> run;
};

using Tasks = std::vector<Task>;

struct Rng {
    std::mt19937_64 g;
    Rng(std::uint64_t seed, std::uint64_t stream)
    {
        std::seed_seq s{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(stream)};
        g.seed(s);
    }
    double u(double a, double b) { return std::uniform_real_distribution<double>(a, b)(g); }
    int i(int a, int b) { return std::uniform_int_distribution<int>(a, b)(g); }
};

QuadratureSpec quad(double rel = 1e-6, double abs = 1e-12)
{
    QuadratureSpec s;
    s.rel_tol = rel;
    s.abs_tol = abs;
    return s;
}

std::string idx(const std::string& base, int k)
{
    char b[8];
    std::snprintf(b, sizeof b, "%02d", k);
    return base + "/" + b;
}

ChainSpec chain(std::vector<int> n2, std::vector<double> rho, std::vector<cplx> xi)
{
    ChainSpec c;
    c.N = static_cast<int>(n2.size());
    c.n2 = std::move(n2);
    c.rho = std::move(rho);
    c.xi = std::move(xi);
    return c;
}

struct Context {
    std::optional<ChainSpec> user_chain;

    ChainSpec chain_n(int N, ChainSpec fallback) const
    {
        if (user_chain && user_chain->N == N) return *user_chain;
        return fallback;
    }
};

ChainSpec default_chain2() { return chain({0, 0}, {0.1, -0.2}, {0.1, -0.05}); }
ChainSpec default_chain3() { return chain({0, 2, 0}, {0.1, -0.2, 0.15}, {0.1, -0.05, 0.2}); }

// ---------------------------------------------------------------- gamma

void add_gamma(Tasks& ts, Rng& rng)
{
    std::vector<FieldExponent> us;
    for (int k = 0; k < 1000; ++k) {
        int m = rng.i(-2, 2);
        double re = rng.u(-2.0, 2.0), im = rng.u(-3.0, 3.0);
        us.push_back(FieldExponent::from_mw(m, cplx(re, im)));
    }
    ts.push_back({"gamma", "recurrence", "Gamma recurrence", 1e-12, [us](auto&) {
                      Outcome rec{"recurrence/worst-of-1000", "Gamma recurrence", 1e-12};
                      Outcome ref{"reflection/worst-of-1000", "Gamma reflection", 1e-12};
                      Outcome inv{"inverse-a-factor/worst-of-1000", "a-factor as inverse Gamma", 1e-14};
                      double wr = -1, wf = -1, wi = -1;
                      auto rel = [](cplx a, cplx b) { return std::abs(a - b) / std::abs(b); };
                      for (auto& u : us) {
                          cplx g = cgamma_value(u);
                          cplx l1 = cgamma_value(u + 1.0), r1 = -u.a() * u.abar() * g;
                          if (double e = rel(l1, r1); !(e <= wr)) wr = e, rec.lhs = l1, rec.rhs = r1;
                          cplx l2 = g * cgamma_value(exponent_reflect(u)), r2 = double(sign_factor(u));
                          if (double e = rel(l2, r2); !(e <= wf)) wf = e, ref.lhs = l2, ref.rhs = r2;
                          cplx l3 = afactor_value(u) * g;
                          if (double e = rel(l3, 1.0); !(e <= wi)) wi = e, inv.lhs = l3, inv.rhs = 1.0;
                      }
                      rec.evals = ref.evals = inv.evals = static_cast<long>(us.size());
                      return std::vector<Outcome>{rec, ref, inv};
                  }});
}

// ---------------------------------------------------------------- rules

ExternalVertex pos(const std::string& l, cplx z) { return {l, false, true, z}; }
ExternalVertex mom(const std::string& l) { return {l, true, false, 0.0}; }
Edge prop(const std::string& f, const std::string& t, FieldExponent e) { return {f, t, e, false}; }
Edge wave(const std::string& p, const std::string& at) { return {p, at, FieldExponent{}, true}; }

std::vector<cplx> spread_points(Rng& r, int n)
{
    for (;;) {
        std::vector<cplx> z;
        for (int i = 0; i < n; ++i) {
            double re = r.u(-1.5, 1.5);
            z.push_back(cplx(re, r.u(-1.5, 1.5)));
        }
        bool ok = true;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < i; ++j) ok = ok && std::abs(z[i] - z[j]) > 0.5;
        if (ok) return z;
    }
}

cplx rand_w(Rng& r, double lo, double hi, double im)
{
    double re = r.u(lo, hi);
    return {re, r.u(-im, im)};
}

Task two_sided(const std::string& name, const std::string& anchor, Diagram d, Diagram red, Bindings b)
{
    return {"rules", name, anchor, 1e-3, [=](auto&) {
                auto lhs = numeric_eval(d, b, quad(1e-6));
                auto rhs = numeric_eval(red, b, quad(1e-6));
                Outcome o{name, anchor, 1e-3, lhs.value, rhs.value, lhs.evals + rhs.evals};
                if (!lhs.converged || !rhs.converged) o.detail = "quadrature flagged not converged";
                return std::vector<Outcome>{o};
            }};
}

void add_rules(Tasks& ts, Rng& r, int count)
{
    for (int done = 0; done < count;) {
        int m1 = r.i(-1, 1), m2 = r.i(-1, 1);
        auto a = FieldExponent::from_mw(m1, rand_w(r, 0.35, 0.85, 0.4));
        auto b = FieldExponent::from_mw(m2, rand_w(r, 0.35, 0.85, 0.4));
        if ((a.w() + b.w()).real() < 1.15) continue;
        auto z = spread_points(r, 2);
        Diagram d;
        d.external = {pos("x", z[0]), pos("y", z[1])};
        d.internal = {"w"};
        d.edges = {prop("x", "w", a), prop("w", "y", b)};
        ts.push_back(two_sided(idx("chain", done), "chain rule", d, apply_chain(d, "w"), {}));
        ++done;
    }
    for (int done = 0; done < count;) {
        int m1 = r.i(-1, 1), m2 = r.i(-1, 1);
        cplx w1 = rand_w(r, 0.35, 0.85, 0.4), w2 = rand_w(r, 0.35, 0.85, 0.4);
        cplx w3 = 2.0 - w1 - w2;
        if (w3.real() < 0.35 || w3.real() > 0.85) continue;
        auto a = FieldExponent::from_mw(m1, w1), b = FieldExponent::from_mw(m2, w2);
        auto c = FieldExponent::from_mw(-m1 - m2, w3);
        auto z = spread_points(r, 3);
        Diagram d;
        d.external = {pos("z1", z[0]), pos("z2", z[1]), pos("z3", z[2])};
        d.internal = {"v"};
        d.edges = {prop("v", "z1", a), prop("z2", "v", b), prop("v", "z3", c)};
        ts.push_back(two_sided(idx("star-triangle", done), "star-triangle relation", d,
                               apply_star_triangle(d, "v"), {}));
        ++done;
    }
    for (int k = 0; k < count; ++k) {
        int m = r.i(-1, 1);
        auto a = FieldExponent::from_mw(m, rand_w(r, 0.3, 0.8, 0.4));
        cplx u = spread_points(r, 1)[0];
        double pr = r.u(0.4, 1.2);
        cplx p(pr, r.u(-1.2, -0.4));
        Diagram d;
        d.external = {mom("p"), pos("u", u)};
        d.internal = {"v"};
        if (k % 2)
            d.edges = {prop("u", "v", a), wave("p", "v")};
        else
            d.edges = {prop("v", "u", a), wave("p", "v")};
        ts.push_back(two_sided(idx("fourier", k), "Fourier transform of a propagator", d, apply_fourier(d, "v"),
                               {{"p", p}}));
    }
    for (int done = 0; done < count;) {
        int m[3];
        for (auto& x : m) x = r.i(-1, 1);
        cplx w[3];
        for (auto& x : w) x = rand_w(r, 0.3, 0.7, 0.3);
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
        ts.push_back(two_sided(idx("exchange", done), "exchange relation", d,
                               apply_exchange(d, {"v", "z0", pairs[done % 3]}), {}));
        ++done;
    }
}

// ---------------------------------------------------------------- scalar products

void add_scalar_products(Tasks& ts, Rng& rng, const Context& ctx)
{
    const std::string suite = "scalar-products";
    const std::string a_bb = "B-B scalar product";

    ChainSpec c2 = ctx.chain_n(2, default_chain2());
    ts.push_back({suite, "bb-n2/reduce-vs-closed", a_bb, 1e-10, [=](auto&) {
                      GammaVector g = build_gamma(c2, Kind::B);
                      SeparatedPoint x{2, {0.3, 0.1}}, y{0, {-0.2, 0.05}};
                      const double e = 0.15;
                      const cplx p(0.7, 0.4);
                      ClosedFormFactor r = reduce(bb_diagram(c2, {x}, {y}, e, e, p));
                      cplx closed = scalar_bb_closed({x}, {y}, g, e, e).evaluate({});
                      auto q = scalar_bb_quadrature(c2, x, y, e, e, p, quad(1e-5, 1e-13));
                      return std::vector<Outcome>{
                          {"bb-n2/reduce-vs-closed", a_bb, 1e-10, r.evaluate({{"P0", 0.0}, {"P2", p}}), closed},
                          {"bb-n2/momentum-independence", a_bb, 1e-10,
                           r.evaluate({{"P0", 0.0}, {"P2", cplx(-1.3, 0.2)}}), closed},
                          {"bb-n2/quadrature-vs-closed", "B-B scalar product, regularized pairing", 1e-3, q.value,
                           closed, q.evals}};
                  }});

    ChainSpec c3 = ctx.chain_n(3, default_chain3());
    ts.push_back({suite, "bb-n3/reduce-vs-closed", a_bb, 1e-10, [=](auto&) {
                      GammaVector g = build_gamma(c3, Kind::B);
                      std::vector<SeparatedPoint> x = {{2, {0.3, 0.06}}, {0, {-0.1, 0.05}}};
                      std::vector<SeparatedPoint> y = {{0, {-0.2, 0.03}}, {2, {0.25, 0.04}}};
                      const double e = 0.15;
                      const cplx p(0.7, 0.4);
                      Diagram d = bb_diagram(c3, x, y, e, e, p);
                      Bindings b = {{"P0", 0.0}, {"P3", p}};
                      Reduction R = reduce_traced(d);
                      cplx traced = R.result.evaluate(b);
                      auto all = reduce_all_paths(d, 6);
                      if (all.size() < 2) throw StuckDiagram("fewer than two reduction orders found");
                      Outcome conf{"bb-n3/confluence", "reduction order independence", 1e-10, traced, traced};
                      double worst = -1;
                      for (auto& a : all) {
                          cplx v = a.result.evaluate(b);
                          if (double err = std::abs(v - traced); err > worst) worst = err, conf.lhs = v;
                      }
                      conf.detail = std::to_string(all.size()) + " orders";
                      return std::vector<Outcome>{
                          {"bb-n3/reduce-vs-closed", a_bb, 1e-10, traced,
                           scalar_bb_closed(x, y, g, e, e).evaluate({})},
                          {"bb-n3/sign-factor", "sign factor, odd N", 1e-12, double(bb_sign_factor(g)), 1.0},
                          conf};
                  }});

    struct Draw {
        GammaVector g;
        std::vector<SeparatedPoint> x, y;
        double e, ep;
    };
    std::vector<Draw> draws;
    for (int t = 0; t < 50; ++t) {
        int N = t % 2 ? 3 : 2;
        std::vector<int> n2;
        std::vector<double> rho;
        std::vector<cplx> xi;
        for (int k = 0; k < N; ++k) {
            n2.push_back(2 * rng.i(-1, 1));
            rho.push_back(rng.u(-0.5, 0.5));
            double re = rng.u(-0.5, 0.5);
            xi.push_back(cplx(re, 0.5 * rng.i(-1, 1)));
        }
        Draw d;
        d.g = build_gamma(chain(n2, rho, xi), Kind::B);
        for (int k = 0; k < N - 1; ++k) {
            for (auto* v : {&d.x, &d.y}) {
                int n = 2 * rng.i(-1, 1);
                double re = rng.u(-1, 1);
                v->push_back({n, cplx(re, rng.u(0.0, 0.1))});
            }
        }
        d.e = rng.u(0.05, 0.3);
        d.ep = rng.u(0.05, 0.3);
        draws.push_back(d);
    }
    ts.push_back({suite, "closed/two-forms", "B-B scalar product, two equivalent forms", 1e-10, [=](auto&) {
                      Outcome o{"closed/two-forms/worst-of-50", "B-B scalar product, two equivalent forms", 1e-10};
                      double worst = -1;
                      for (auto& d : draws) {
                          cplx a = scalar_bb_closed(d.x, d.y, d.g, d.e, d.ep).evaluate({});
                          cplx b = scalar_bb_closed_second(d.x, d.y, d.g, d.e, d.ep).evaluate({});
                          if (double e = std::abs(b - a) / std::abs(a); !(e <= worst)) worst = e, o.lhs = b, o.rhs = a;
                      }
                      o.evals = static_cast<long>(draws.size());
                      return std::vector<Outcome>{o};
                  }});

    ts.push_back({suite, "closed/ab-n1-fourier", "A-B scalar product", 1e-5, [](auto&) {
                      GammaVector g = build_gamma(chain({0}, {0.1}, {0.2}), Kind::A);
                      SeparatedPoint x{2, {0.3, 0.1}};
                      const cplx p(0.7, 0.4);
                      cplx v = scalar_ab_closed({x}, {}, g).evaluate({{"p", p}});
                      auto f = fourier_propagator(minus_ix(g[0], x), -p, quad(1e-6, 1e-13));
                      return std::vector<Outcome>{
                          {"closed/ab-n1-fourier", "A-B scalar product", 1e-5, v, f.value / kPi, f.evals}};
                  }});

    ts.push_back({suite, "closed/mixed-n1-quadrature", "mixed scalar product", 1e-3, [=](auto&) {
                      GammaVector g = build_gamma(c2, Kind::B);
                      SeparatedPoint x{2, {0.3, 0.1}};
                      const cplx q1(0.5, 0.3), q2(0.2, -0.6);
                      cplx v = scalar_mixed_closed({}, {x}, g, q1, q2)
                                   .evaluate({{"p", q1 + q2}, {"q1", q1}, {"q2", q2}});
                      FieldExponent A = minus_ix(g[0], x), B = plus_ix(g[1], x);
                      auto fa = fourier_propagator(A, -q1, quad(1e-6, 1e-13));
                      auto fb = fourier_propagator(B, -q2, quad(1e-6, 1e-13));
                      cplx num = std::abs(q1 + q2) / (kPi * kPi) * varpi_prefactor({x}, g) * fa.value * fb.value;
                      return std::vector<Outcome>{{"closed/mixed-n1-quadrature", "mixed scalar product", 1e-3, num, v,
                                                   fa.evals + fb.evals}};
                  }});

    std::vector<std::vector<SeparatedPoint>> mx;
    for (int t = 0; t < 20; ++t) {
        std::vector<SeparatedPoint> x;
        for (int k = 0; k < 3; ++k) {
            int n = rng.i(-2, 2);
            x.push_back({n, rng.u(-1, 1)});
        }
        mx.push_back(x);
    }
    ts.push_back({suite, "measure", "Sklyanin measure", 1e-14, [=](auto&) {
                      const std::string an = "Sklyanin measure";
                      Outcome positive{"measure/positivity", an, 0.5};
                      Outcome perm{"measure/permutation-invariance/worst-of-20", an, 1e-14};
                      double worst = -1;
                      long nonpos = 0;
                      for (auto& x : mx) {
                          double m = measure_mu(x);
                          nonpos += !(m > 0.0);
                          for (auto y : {std::vector<SeparatedPoint>{x[2], x[0], x[1]},
                                         std::vector<SeparatedPoint>{x[1], x[0], x[2]}}) {
                              double v = measure_mu(y);
                              if (double e = std::abs(v - m) / m; !(e <= worst)) worst = e, perm.lhs = v, perm.rhs = m;
                          }
                      }
                      positive.lhs = double(nonpos);
                      positive.detail = "lhs counts non-positive draws";
                      positive.evals = perm.evals = static_cast<long>(mx.size());
                      Outcome zero{"measure/coincidence-zero", an, 1e-300,
                                   measure_mu({{2, 0.3}, {2, 0.3}, {0, -0.4}}), 0.0};
                      Outcome ex{"measure/example", an, 1e-15, measure_mu({{2, 0.3}, {0, 0.1}}), 0.29};
                      const std::string ac = "normalization constants";
                      return std::vector<Outcome>{
                          positive,
                          perm,
                          zero,
                          ex,
                          {"constants/c1-B", ac, 1e-15, sov_constants(1, Kind::B), 1.0 / (2 * kPi * kPi)},
                          {"constants/c1-A", ac, 1e-15, sov_constants(1, Kind::A), 1.0 / (2 * kPi)},
                          {"constants/c2-A", ac, 1e-15, sov_constants(2, Kind::A), 1.0 / (8 * kPi * kPi)}};
                  }});

    ts.push_back({suite, "eps/cauchy-monotone", "regularized pairing, eps limit", 0.5, [=](auto&) {
                      EpsilonStudy s = epsilon_limit_study(c2, {0.2, 0.1, 0.05, 0.025});
                      const std::string an = "regularized pairing, eps limit";
                      long rises = 0;
                      for (std::size_t k = 1; k < s.cauchy.size(); ++k) rises += !(s.cauchy[k] < s.cauchy[k - 1]);
                      Outcome mono{"eps/cauchy-monotone", an, 0.5, double(rises), 0.0};
                      mono.detail = "cauchy differences:";
                      for (double d : s.cauchy) mono.detail += " " + std::to_string(d);
                      if (s.cauchy.size() != 3) throw NotConverged("eps study returned an incomplete sequence");
                      Outcome real{"eps/real-valued", an, 1e-10};
                      double worst = -1;
                      for (cplx q : s.q)
                          if (double e = std::abs(q.imag()) / std::abs(q); !(e <= worst)) worst = e, real.lhs = e;
                      real.detail = "lhs = max |Im Q| / |Q|";
                      return std::vector<Outcome>{mono, real};
                  }});
}

// ---------------------------------------------------------------- eigen

void add_eigen(Tasks& ts, Rng& rng, const Context& ctx, int configs)
{
    for (int t = 0; t < configs; ++t) {
        int n1 = rng.i(0, 1), n2 = rng.i(0, 1);
        double r1 = rng.u(-0.3, 0.3), r2 = rng.u(-0.3, 0.3);
        double xi1 = rng.u(-0.3, 0.3), xi2 = rng.u(-0.3, 0.3);
        ChainSpec c = ctx.chain_n(2, chain({2 * n1, 2 * n2}, {r1, r2}, {xi1, xi2}));
        n1 = c.n2[0] / 2;
        n2 = c.n2[1] / 2;
        // keep [A] = n1 + nx and [B] = n2 - nx away from -1
        int nx = std::clamp(rng.i(-1, 1), -n1, n2);
        SeparatedPoint x{2 * nx, rng.u(-0.5, 0.5)};
        cplx p[3];
        for (auto& v : p) {
            double re = rng.u(-1, 1);
            v = cplx(re, rng.u(-1, 1));
        }
        std::string base = idx("config", t);
        ts.push_back({"eigen", base + "/translation", "momentum eigenvalue", 1e-4, [=](auto&) {
                          PsiJet j = psi_position_jet(c, x, p[0], p[1], p[2], quad(1e-6, 1e-13));
                          std::vector<Outcome> out;
                          EigenResidual tr = eigen_translation_from_jet(p[0], j);
                          out.push_back({base + "/translation", "momentum eigenvalue", 1e-4, tr.lhs, tr.rhs, j.evals});
                          int k = 0;
                          for (cplx u : {cplx(0.1, 0.2), cplx(-0.4, 0.1), cplx(0.7, -0.3)}) {
                              EigenResidual b = eigen_b_from_jet(c, x, p[0], u, p[1], p[2], j);
                              out.push_back({base + "/b-operator-u" + std::to_string(k++), "B-operator eigenvalue",
                                             1e-3, b.lhs, b.rhs});
                              // residual is normalized by |p (u - x) Psi|, not |rhs|
                              out.back().detail = "residual " + std::to_string(b.residual);
                          }
                          EigenResidual z = eigen_b_from_jet(c, x, p[0], x.x(), p[1], p[2], j);
                          out.push_back({base + "/annihilation", "B-operator zero at u = x", 1e-3, z.lhs, 0.0});
                          if (!j.converged) out[0].detail = "jet quadrature flagged not converged";
                          return out;
                      }});
    }
}

// ---------------------------------------------------------------- gustafson

CPair P(double n, cplx x) { return {0.5 * n + x, -0.5 * n + x}; }

Outcome mb_row(const std::string& name, const std::string& anchor, double tol, const MBResult& r)
{
    Outcome o{name, anchor, tol, r.lhs.value, r.rhs, r.lhs.evals};
    o.detail = "contour shifts:";
    for (double c : r.contour_shifts) o.detail += " " + std::to_string(c);
    return o;
}

CPair rand_pair(Rng& r, int sigma)
{
    double n = r.i(-2, 2) + 0.5 * sigma;
    double re = r.u(0.05, 0.2);
    return P(n, cplx(re, r.u(-0.3, 0.3)));
}

MBParams rand_params(Rng& r, int N, int sigma, bool first)
{
    MBParams p;
    int k = first ? N + 1 : N;
    for (int i = 0; i < k; ++i) p.z_list.push_back(rand_pair(r, sigma));
    for (int i = 0; i < k; ++i) p.w_list.push_back(rand_pair(r, sigma));
    return p;
}

Task mb_task(const std::string& name, const std::string& anchor, double tol, std::function<MBResult()> f)
{
    return {"gustafson", name, anchor, tol,
            [=](auto&) { return std::vector<Outcome>{mb_row(name, anchor, tol, f())}; }};
}

// assert = false: the table is emitted without pass/fail rows
void add_table(Tasks& ts, const std::string& name, const std::string& anchor, MBEvaluator eval,
               std::function<cplx()> rhs, bool assert = true)
{
    ts.push_back({"gustafson", "table/" + name, anchor, 0.5, [=](std::vector<ConvergenceTable>& out) {
                      const std::vector<std::pair<int, double>> steps{{4, 4}, {8, 8}, {16, 16}, {32, 32}};
                      auto rows = convergence_table(eval, MBSpec{}, steps);
                      ConvergenceTable t{name, anchor, {}};
                      for (auto& r : rows) t.rows.push_back({r.n_max, r.nu_cutoff, r.raw_err, r.accel_err});
                      out.push_back(t);
                      if (!assert) return std::vector<Outcome>{};
                      const double floor = 1e-9 * std::abs(rhs());
                      Outcome raw{"table/" + name + "/raw-monotone", anchor, 0.5,
                                  table_monotone(rows, false, 0.0) ? 0.0 : 1.0, 0.0};
                      Outcome acc{"table/" + name + "/accelerated-monotone", anchor, 0.5,
                                  table_monotone(rows, true, floor) ? 0.0 : 1.0, 0.0};
                      raw.detail = acc.detail = "lhs = 1 when the error increases along the table";
                      return std::vector<Outcome>{raw, acc};
                  }});
}

void add_gustafson(Tasks& ts, Rng& rng)
{
    const std::string g1 = "first Gustafson integral", g2 = "second Gustafson integral";

    MBParams sym{{P(0, 0.2), P(0, 0.2)}, {P(0, 0.2), P(0, 0.2)}};
    ts.push_back(mb_task("first/N=1/symmetric", g1, 1e-6, [=] { return gustafson_first(1, sym, MBSpec{}); }));
    MBParams half{{P(0.5, 0.2), P(-0.5, {0.15, 0.1})}, {P(0.5, 0.1), P(-1.5, {0.2, -0.3})}};
    ts.push_back(mb_task("first/N=1/half-integer", g1, 1e-6, [=] {
        MBSpec s;
        s.sigma = 1;
        return gustafson_first(1, half, s);
    }));
    for (int k = 0; k < 3; ++k) {
        int sigma = k % 2;
        MBParams p = rand_params(rng, 1, sigma, true);
        ts.push_back(mb_task(idx("first/N=1/random", k), g1, 1e-6, [=] {
            MBSpec s;
            s.sigma = sigma;
            return gustafson_first(1, p, s);
        }));
    }
    MBParams n2{{P(0, {0.1, 0.1}), P(1, {0.12, -0.2}), P(-1, {0.08, 0.05})},
                {P(0, {0.1, -0.1}), P(1, {0.15, 0.05}), P(-1, {0.1, 0.2})}};
    ts.push_back(mb_task("first/N=2/fixed", g1, 1e-4, [=] { return gustafson_first(2, n2, MBSpec{}); }));
    MBParams n2r = rand_params(rng, 2, 0, true);
    ts.push_back(mb_task("first/N=2/random", g1, 1e-4, [=] { return gustafson_first(2, n2r, MBSpec{}); }));

    MBParams s1{{P(0, {0.1, 0.1})}, {P(0, {0.1, -0.2})}};
    ts.push_back(mb_task("second/N=1/zeta=1", g2, 1e-6, [=] { return gustafson_second(1, s1, 1.0, MBSpec{}); }));
    MBParams s1b{{P(1, {0.1, 0.1})}, {P(0, {0.15, -0.2})}};
    int k = 0;
    for (cplx zeta : {std::polar(1.0, 0.7), std::polar(1.5, -2.0), std::polar(0.6, 1.2)})
        ts.push_back(mb_task(idx("second/N=1/zeta", k++), g2, 1e-6,
                             [=] { return gustafson_second(1, s1b, zeta, MBSpec{}); }));
    MBParams s2{{P(0, {0.05, 0.1}), P(1, {0.1, -0.2})}, {P(0, {0.05, -0.1}), P(-1, {0.02, 0.3})}};
    ts.push_back(mb_task("second/N=2", g2, 1e-4,
                         [=] { return gustafson_second(2, s2, std::polar(1.5, 0.7), MBSpec{}); }));

    const std::string aj = "J_omega integral";
    struct JCase {
        std::vector<SeparatedPoint> x, xp;
        cplx zeta;
        int n_max;
    };
    std::vector<JCase> js = {{{{2, cplx(0.3, -0.05)}}, {{-2, cplx(-0.2, 0.05)}}, std::polar(1.5, 0.7), 60},
                             {{{-2, cplx(0.1, -0.05)}}, {{0, cplx(0.4, 0.05)}}, std::polar(1.0, 0.7), 40}};
    for (std::size_t i = 0; i < js.size(); ++i) {
        JCase jc = js[i];
        std::string base = idx("j-omega/N=2", static_cast<int>(i));
        ts.push_back({"gustafson", base, aj, 1e-4, [=](auto&) {
                          CPair Z{cplx(0.5, 0.3), cplx(0.5, 0.3)};
                          MBSpec s;
                          s.n_max = jc.n_max;
                          JOmegaResult j = j_omega_check(jc.x, jc.xp, Z, 0.4, jc.zeta, s);
                          Outcome o{base, aj, 1e-4, j.lhs.value, j.rhs, j.lhs.evals};
                          return std::vector<Outcome>{
                              o,
                              {base + "/specialization-closed", "J_omega as a special case of the second integral",
                               1e-10, j.rhs_second, j.rhs},
                              {base + "/specialization-numeric", "J_omega as a special case of the second integral",
                               1e-10, j.lhs_second, j.lhs.value}};
                      }});
    }

    for (int N : {2, 3, 4})
        for (int sigma : {0, 1}) {
            std::uint64_t sub = rng.g();
            std::string base = "j-omega/signs/N=" + std::to_string(N) + "/sigma=" + std::to_string(sigma);
            ts.push_back({"gustafson", base, "sign rearrangements", 1e-10, [=](auto&) {
                              std::mt19937_64 g(sub);
                              Outcome mu{base + "/measure", "sign rearrangements", 1e-10};
                              Outcome sw{base + "/swap", "sign rearrangements", 1e-10};
                              Outcome par{base + "/parity", "sign rearrangements", 0.5};
                              long bad = 0;
                              for (int k = 0; k < 25; ++k) {
                                  SignIdentityCheck c = j_omega_sign_identities(N, sigma, g);
                                  if (!(c.mu_rel_err <= std::abs(mu.lhs))) mu.lhs = c.mu_rel_err;
                                  if (!(c.swap_rel_err <= std::abs(sw.lhs))) sw.lhs = c.swap_rel_err;
                                  bad += !c.parity_ok;
                              }
                              par.lhs = double(bad);
                              mu.detail = sw.detail = "lhs = worst relative error of 25 draws";
                              par.detail = "lhs counts parity mismatches";
                              mu.evals = sw.evals = par.evals = 25;
                              return std::vector<Outcome>{mu, sw, par};
                          }});
        }

    add_table(ts, "first-N=1", g1, [=](const MBSpec& s) { return gustafson_first(1, sym, s); },
              [=] { return gustafson_first_rhs(1, sym); });
    add_table(ts, "first-N=2", g1, [=](const MBSpec& s) { return gustafson_first(2, n2, s); },
              [=] { return gustafson_first_rhs(2, n2); });
    add_table(ts, "second-N=1/zeta=1", g2, [=](const MBSpec& s) { return gustafson_second(1, s1, 1.0, s); },
              [=] { return gustafson_second_rhs(1, s1, 1.0); });
    // partial sums oscillate like e^{i n arg zeta}; not monotone at these sizes
    add_table(ts, "second-N=1/zeta=e^0.7i", g2,
              [=](const MBSpec& s) { return gustafson_second(1, s1b, std::polar(1.0, 0.7), s); },
              [=] { return gustafson_second_rhs(1, s1b, std::polar(1.0, 0.7)); }, false);
}

// ---------------------------------------------------------------- driver

void build(const std::string& suite, Tasks& ts, const SuiteConfig& cfg, const Context& ctx)
{
    const auto& names = suite_names();
    std::uint64_t stream = std::find(names.begin(), names.end(), suite) - names.begin();
    Rng rng(cfg.seed, stream);
    if (suite == "gamma")
        add_gamma(ts, rng);
    else if (suite == "rules")
        add_rules(ts, rng, 20);
    else if (suite == "scalar-products")
        add_scalar_products(ts, rng, ctx);
    else if (suite == "eigen")
        add_eigen(ts, rng, ctx, 10);
    else if (suite == "gustafson")
        add_gustafson(ts, rng);
}

}  // namespace

const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> n = {"gamma", "rules", "scalar-products", "eigen", "gustafson"};
    return n;
}

Report run_suite(const SuiteConfig& cfg)
{
    const auto& names = suite_names();
    std::vector<std::string> selected;
    if (cfg.suite == "all")
        selected = names;
    else if (std::find(names.begin(), names.end(), cfg.suite) != names.end())
        selected = {cfg.suite};
    else
        throw ConfigError("unknown suite '" + cfg.suite + "'");
    for (auto& [k, v] : cfg.tolerances) {
        if (k != "all" && std::find(names.begin(), names.end(), k) == names.end())
            throw ConfigError("tolerance given for unknown suite '" + k + "'");
        if (!(v > 0)) throw ConfigError("tolerances must be positive");
    }
    if (!(cfg.budget >= 0)) throw ConfigError("budget must be nonnegative");

    Context ctx;
    if (cfg.chain_file) {
        std::ifstream f(*cfg.chain_file);
        if (!f) throw ConfigError("cannot read chain file " + *cfg.chain_file);
        nlohmann::json j;
        try {
            f >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("chain file: ") + e.what());
        }
        ctx.user_chain = chain_from_json(j);
    }

    Tasks ts;
    for (auto& s : selected) build(s, ts, cfg, ctx);

    struct Slot {
        bool ran = false;
        std::vector<CheckRecord> rows;
        std::vector<ConvergenceTable> tables;
    };
    std::vector<Slot> slots(ts.size());
    const auto start = Clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

    parallel_for(ts.size(), [&](std::size_t i) {
        if (cfg.budget > 0 && elapsed() > cfg.budget) return;
        const Task& t = ts[i];
        Slot& s = slots[i];
        const auto t0 = Clock::now();
        std::vector<Outcome> out;
        std::string err;
        try {
            out = t.run(s.tables);
        } catch (const std::exception& e) {
            err = e.what();
        }
        const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
        auto tol_for = [&](double tol) {
            if (auto it = cfg.tolerances.find(t.suite); it != cfg.tolerances.end()) return it->second;
            if (auto it = cfg.tolerances.find("all"); it != cfg.tolerances.end()) return it->second;
            return tol;
        };
        if (!err.empty()) {
            CheckRecord r;
            r.suite = t.suite;
            r.name = t.name;
            r.paper_anchor = t.anchor;
            r.tol = tol_for(t.tol);
            r.abs_err = r.rel_err = std::numeric_limits<double>::infinity();
            r.pass = false;
            r.wall_time = dt;
            r.detail = err;
            s.rows.push_back(r);
        }
        for (auto& o : out) {
            CheckRecord r;
            r.suite = t.suite;
            r.name = o.name;
            r.paper_anchor = o.anchor;
            r.lhs = o.lhs;
            r.rhs = o.rhs;
            r.tol = tol_for(o.tol);
            r.evals = o.evals;
            r.wall_time = dt;
            r.detail = o.detail;
            finalize_record(r);
            s.rows.push_back(r);
        }
        s.ran = true;
    });

    Report rep;
    rep.suite = cfg.suite;
    rep.seed = cfg.seed;
    for (auto& s : slots) {
        if (!s.ran) {
            rep.budget_exceeded = true;
            continue;
        }
        rep.rows.insert(rep.rows.end(), s.rows.begin(), s.rows.end());
        rep.tables.insert(rep.tables.end(), s.tables.begin(), s.tables.end());
    }
    if (rep.budget_exceeded) throw BudgetExceeded(rep);
    return rep;
}

}  // namespace sovkit
