#include "sovkit/sov.hpp"

#include <cmath>

#include "sovkit/errors.hpp"

namespace sovkit {

using nlohmann::json;

namespace {

const cplx I(0.0, 1.0);

std::string P(int k) { return "P" + std::to_string(k); }

ChainSpec without_epsilon(const ChainSpec& c)
{
    ChainSpec r = c;
    r.epsilon = 0.0;
    return r;
}

}  // namespace

// ---------------------------------------------------------------- chain

CPair ChainSpec::spin(int k) const
{
    double n = 0.5 * n2.at(k - 1);
    double r = rho.at(k - 1);
    return {cplx(0.5 * (1.0 + n), r), cplx(0.5 * (1.0 - n), r)};
}

void ChainSpec::validate() const
{
    if (N < 1) throw ConfigError("N must be >= 1");
    if (static_cast<int>(n2.size()) != N || static_cast<int>(rho.size()) != N)
        throw ConfigError("spins must list N entries");
    if (static_cast<int>(xi.size()) != N) throw ConfigError("impurities must list N entries");
    if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
    for (auto& x : xi) {
        double r = 4.0 * x.imag();
        if (std::abs(r - std::round(r)) > 1e-9) throw ConfigError("i(xi - conj xi) must be a half-integer");
    }
}

ChainSpec chain_from_json(const json& j)
{
    try {
        ChainSpec c;
        c.N = j.at("N").get<int>();
        for (auto& s : j.at("spins")) {
            c.n2.push_back(s.at("n2").get<int>());
            c.rho.push_back(s.value("rho", 0.0));
        }
        if (j.contains("impurities"))
            for (auto& x : j["impurities"]) c.xi.push_back(cplx(x.value("re", 0.0), x.value("im", 0.0)));
        else
            c.xi.assign(c.N, 0.0);
        c.epsilon = j.value("epsilon", 0.0);
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("chain: ") + e.what());
    }
}

json chain_to_json(const ChainSpec& c)
{
    json spins = json::array(), imp = json::array();
    for (int k = 0; k < c.N; ++k) {
        spins.push_back({{"n2", c.n2[k]}, {"rho", c.rho[k]}});
        imp.push_back({{"re", c.xi[k].real()}, {"im", c.xi[k].imag()}});
    }
    return {{"N", c.N}, {"spins", spins}, {"impurities", imp}, {"epsilon", c.epsilon}};
}

// ---------------------------------------------------------------- gamma vectors

GammaVector build_gamma(const ChainSpec& c, Kind kind)
{
    c.validate();
    const int N = c.N;
    auto minus = [&](int k, double shift) {
        CPair s = c.spin(k);
        cplx xi = c.xi[k - 1] - I * shift, xib = c.xi_bar(k) - I * shift;
        return CPair{s.a - I * xi, s.abar - I * xib};
    };
    auto plus = [&](int k, double shift) {
        CPair s = c.spin(k);
        cplx xi = c.xi[k - 1] - I * shift, xib = c.xi_bar(k) - I * shift;
        return CPair{s.a + I * xi, s.abar + I * xib};
    };
    GammaVector g;
    double eps = kind == Kind::B ? c.epsilon : 0.0;
    if (N >= 2) {
        g.push_back(minus(1, 0.0));
        for (int k = 2; k < N; ++k) {
            g.push_back(plus(k, 0.0));
            g.push_back(minus(k, 0.0));
        }
        g.push_back(plus(N, eps));
    }
    if (kind == Kind::A) g.push_back(minus(N, 0.0));
    return g;
}

GammaVector rho_map(const GammaVector& g)
{
    if (g.size() < 3) throw TooShort("rho needs at least 3 entries");
    GammaVector r;
    for (std::size_t k = 1; k + 1 < g.size(); ++k) r.push_back(1.0 - g[k]);
    return r;
}

CPair reflect_n(const CPair& g, int j) { return (j % 2 == 0) ? g : 1.0 - g; }

FieldExponent minus_ix(const CPair& g, const SeparatedPoint& x) { return make_exponent(g - x.pair() * I); }
FieldExponent plus_ix(const CPair& g, const SeparatedPoint& x) { return make_exponent(g + x.pair() * I); }

OmegaForms omega_forms(const GammaVector& g, const SeparatedPoint& u, const SeparatedPoint& v)
{
    cplx l1 = 0.0, l2 = 0.0;
    for (std::size_t m = 0; m + 1 < g.size(); m += 2) {
        FieldExponent av = minus_ix(g[m], v), bv = plus_ix(g[m + 1], v);
        FieldExponent au = minus_ix(g[m], u), bu = plus_ix(g[m + 1], u);
        l1 += log_cgamma(av) + log_cgamma(bv.swapped()) - log_cgamma(au) - log_cgamma(bu.swapped());
        l2 += log_cgamma(av.swapped()) + log_cgamma(bv) - log_cgamma(au.swapped()) - log_cgamma(bu);
    }
    return {std::exp(l1), std::exp(l2)};
}

cplx omega_factor(const GammaVector& g, const SeparatedPoint& u, const SeparatedPoint& v)
{
    OmegaForms f = omega_forms(g, u, v);
    if (std::abs(f.first - f.second) > 1e-10 * std::max(1.0, std::abs(f.first)))
        throw PreconditionError("the two forms of omega disagree");
    return f.first;
}

ClosedFormFactor varpi1_factor(const SeparatedPoint& x, const GammaVector& g)
{
    ClosedFormFactor f;
    for (std::size_t m = 0; m + 1 < g.size(); m += 2) {
        f.mul_gamma(minus_ix(g[m], x), 1);
        f.mul_gamma(plus_ix(g[m + 1], x).swapped(), 1);
    }
    return f;
}

ClosedFormFactor varpi_factor(const std::vector<SeparatedPoint>& xs, const GammaVector& g)
{
    ClosedFormFactor f;
    GammaVector gm = g;
    for (std::size_t m = 1; m <= xs.size(); ++m) {
        if (m > 1) gm = rho_map(gm);
        for (std::size_t k = 0; k < m; ++k) f *= varpi1_factor(xs[k], gm);
    }
    return f;
}

cplx varpi_prefactor(const std::vector<SeparatedPoint>& xs, const GammaVector& g)
{
    return varpi_factor(xs, g).evaluate({});
}

cplx lambda_kernel(Kind kind, int n, const SeparatedPoint& x, const GammaVector& g, const std::vector<cplx>& zs,
                   const std::vector<cplx>& ws)
{
    if (static_cast<int>(zs.size()) != n || static_cast<int>(ws.size()) != n - 1)
        throw PreconditionError("lambda_kernel: need n points z and n-1 points w");
    std::size_t need = kind == Kind::B ? 2 * n - 2 : 2 * n - 1;
    if (g.size() < need) throw PreconditionError("lambda_kernel: gamma vector too short");
    cplx v = 1.0;
    for (int k = 1; k < n; ++k) {
        v *= eval_propagator(minus_ix(g[2 * k - 2], x), zs[k - 1] - ws[k - 1]);
        v *= eval_propagator(plus_ix(g[2 * k - 1], x), zs[k] - ws[k - 1]);
    }
    if (kind == Kind::A) v *= eval_propagator(minus_ix(g[2 * n - 2], x), zs[n - 1]);
    return v;
}

// ---------------------------------------------------------------- Psi, Phi

PsiDiagram psi_diagram(const ChainSpec& c, const std::vector<SeparatedPoint>& xs, double eps,
                       const std::string& loop)
{
    const int N = c.N;
    if (N > 3) throw PreconditionError("momentum-space Psi is implemented for N <= 3");
    if (static_cast<int>(xs.size()) != N - 1) throw PreconditionError("Psi needs N-1 separated points");
    GammaVector g = build_gamma(without_epsilon(c), Kind::B);

    PsiDiagram r;
    r.pi_exponent = N - 1 - 0.5 * N * N;
    Diagram& d = r.d;
    d.external.push_back({P(0), false, false, 0.0});
    d.external.push_back({P(N), false, false, 0.0});
    if (N == 1) return r;

    d.prefactor = varpi_factor(xs, g);
    d.prefactor.mul_power(P(N), P(0), FieldExponent::from_mw(0, -0.5 * (N - 1)));
    // each position-space line D_alpha becomes i^[alpha] a(alpha) D_{1-alpha}(-k)
    auto line = [&](const std::string& from, const std::string& to, const FieldExponent& alpha, double shift) {
        d.prefactor.mul_phase(alpha.m());
        d.prefactor.mul_afactor(alpha);
        d.edges.push_back({from, to, (1.0 - alpha) - cplx(shift), false});
    };
    if (N == 2) {
        line(P(1), P(0), minus_ix(g[0], xs[0]), 0.0);
        line(P(2), P(1), plus_ix(g[1], xs[0]), eps);
        d.internal = {P(1)};
        return r;
    }
    GammaVector rg = rho_map(g);
    line(P(1), P(0), minus_ix(g[0], xs[0]), 0.0);
    line(loop, P(1), plus_ix(g[1], xs[0]), 0.0);
    line(P(2), loop, minus_ix(g[2], xs[0]), 0.0);
    line(P(3), P(2), plus_ix(g[3], xs[0]), eps);
    line(loop, P(0), minus_ix(rg[0], xs[1]), 0.0);
    line(P(3), loop, plus_ix(rg[1], xs[1]), 0.0);
    d.internal = {P(1), P(2), loop};
    return r;
}

IntegralEstimate psi_momentum_eval(const ChainSpec& c, const std::vector<SeparatedPoint>& xs,
                                   const std::vector<cplx>& momenta, const QuadratureSpec& q)
{
    if (static_cast<int>(momenta.size()) != c.N) throw PreconditionError("need N momenta");
    PsiDiagram pd = psi_diagram(c, xs, c.epsilon);
    Bindings b;
    cplx acc = 0.0;
    b[P(0)] = 0.0;
    for (int k = 1; k <= c.N; ++k) {
        acc += momenta[k - 1];
        b[P(k)] = acc;
    }
    // the internal dual vertices P_1..P_{N-1} are fixed by the external momenta
    Diagram d = pd.d;
    d.internal.clear();
    for (auto& v : pd.d.internal)
        if (v[0] == 'P')
            d.external.push_back({v, false, true, b.at(v)});
        else
            d.internal.push_back(v);
    for (auto& e : d.external) {
        e.has_value = true;
        e.value = b.at(e.label);
    }
    IntegralEstimate e = numeric_eval(d, b, q);
    double s = std::pow(kPi, pd.pi_exponent);
    e.value *= s;
    e.err *= s;
    return e;
}

Diagram phi_diagram(const ChainSpec& c, const std::vector<SeparatedPoint>& xs, const std::vector<cplx>& zs)
{
    const int N = c.N;
    if (N > 2) throw PreconditionError("position-space Phi is implemented for N <= 2");
    if (static_cast<int>(xs.size()) != N || static_cast<int>(zs.size()) != N)
        throw PreconditionError("Phi needs N separated points and N positions");
    GammaVector g = build_gamma(c, Kind::A);
    Diagram d;
    d.external.push_back({"O", false, true, 0.0});
    for (int k = 0; k < N; ++k) d.external.push_back({"z" + std::to_string(k + 1), false, true, zs[k]});
    d.prefactor = varpi_factor(std::vector<SeparatedPoint>(xs.begin(), xs.end() - 1), g);
    if (N == 1) {
        d.edges.push_back({"O", "z1", minus_ix(g[0], xs[0]), false});
        return d;
    }
    GammaVector rg = rho_map(g);
    d.internal = {"w"};
    d.edges.push_back({"w", "z1", minus_ix(g[0], xs[0]), false});
    d.edges.push_back({"w", "z2", plus_ix(g[1], xs[0]), false});
    d.edges.push_back({"O", "z2", minus_ix(g[2], xs[0]), false});
    d.edges.push_back({"O", "w", minus_ix(rg[0], xs[1]), false});
    return d;
}

IntegralEstimate phi_position_eval(const ChainSpec& c, const std::vector<SeparatedPoint>& xs,
                                   const std::vector<cplx>& zs, const QuadratureSpec& q)
{
    Diagram d = phi_diagram(c, xs, zs);
    IntegralEstimate e = numeric_eval(d, {}, q);
    double s = std::pow(kPi, -0.5 * c.N * c.N);
    e.value *= s;
    e.err *= s;
    return e;
}

}  // namespace sovkit
