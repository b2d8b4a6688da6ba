#include "sovkit/diagrams.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "sovkit/errors.hpp"

namespace sovkit {

namespace {

constexpr double kSumTol = 1e-9;
constexpr double kMergeTol = 1e-9;

bool near_zero(cplx c, double tol = 1e-12) { return std::abs(c) <= tol; }

bool exp_equal(const FieldExponent& a, const FieldExponent& b, double tol)
{
    return a.m() == b.m() && std::abs(a.w() - b.w()) <= tol;
}

bool exp_less(const FieldExponent& a, const FieldExponent& b)
{
    if (a.m() != b.m()) return a.m() < b.m();
    if (std::abs(a.w().real() - b.w().real()) > kMergeTol) return a.w().real() < b.w().real();
    if (std::abs(a.w().imag() - b.w().imag()) > kMergeTol) return a.w().imag() < b.w().imag();
    return false;
}

// flip D_e(a - b) -> D_e(b - a)
int flip_sign(const FieldExponent& e) { return parity_sign(e.m()); }

struct Leg {
    std::size_t edge;
    std::string nbr;
    FieldExponent e;  // oriented v -> nbr, i.e. D_e(nbr - v)
    int sign;         // factor picked up by the orientation
};

std::vector<Leg> legs_of(const Diagram& d, const std::string& v, std::vector<std::size_t>* waves = nullptr)
{
    std::vector<Leg> out;
    for (std::size_t i = 0; i < d.edges.size(); ++i) {
        const Edge& E = d.edges[i];
        if (E.wave) {
            if (E.to == v && waves) waves->push_back(i);
            continue;
        }
        if (E.from == v)
            out.push_back({i, E.to, E.e, 1});
        else if (E.to == v)
            out.push_back({i, E.from, E.e, flip_sign(E.e)});
    }
    return out;
}

Diagram without(const Diagram& d, const std::string& v, const std::vector<std::size_t>& drop)
{
    Diagram r;
    r.external = d.external;
    for (auto& s : d.internal)
        if (s != v) r.internal.push_back(s);
    std::set<std::size_t> ds(drop.begin(), drop.end());
    for (std::size_t i = 0; i < d.edges.size(); ++i)
        if (!ds.count(i)) r.edges.push_back(d.edges[i]);
    r.prefactor = d.prefactor;
    return r;
}

std::size_t degree(const Diagram& d, const std::string& v)
{
    std::size_t n = 0;
    for (auto& E : d.edges)
        if (E.from == v || E.to == v) ++n;
    return n;
}

}  // namespace

std::string rule_name(RuleKind k)
{
    switch (k) {
    case RuleKind::Chain: return "chain";
    case RuleKind::StarTriangle: return "star-triangle";
    case RuleKind::Fourier: return "fourier";
    case RuleKind::Exchange: return "exchange";
    }
    return "?";
}

// ---------------------------------------------------------------- closed form

ClosedFormFactor& ClosedFormFactor::operator*=(const ClosedFormFactor& o)
{
    pi_power += o.pi_power;
    mul_phase(o.phase_quarter_turns);
    sign *= o.sign;
    gamma_factors.insert(gamma_factors.end(), o.gamma_factors.begin(), o.gamma_factors.end());
    momentum_powers.insert(momentum_powers.end(), o.momentum_powers.begin(), o.momentum_powers.end());
    waves.insert(waves.end(), o.waves.begin(), o.waves.end());
    deltas.insert(deltas.end(), o.deltas.begin(), o.deltas.end());
    return *this;
}

ClosedFormFactor operator*(ClosedFormFactor a, const ClosedFormFactor& b)
{
    a *= b;
    return a;
}

ClosedFormFactor ClosedFormFactor::conjugate() const
{
    ClosedFormFactor c;
    c.pi_power = pi_power;
    c.mul_phase(-phase_quarter_turns);
    c.sign = sign;
    for (auto& g : gamma_factors) c.gamma_factors.push_back({g.e.conj(), g.mult});
    for (auto& m : momentum_powers) c.momentum_powers.push_back({m.plus, m.minus, m.e.dagger()});
    // conj of exp(i(pz+cc)) is the wave with -p; recorded by negated label
    for (auto& w : waves) c.waves.push_back({"-" + w.momentum, w.at});
    c.deltas = deltas;
    return c;
}

ClosedFormFactor ClosedFormFactor::canonical() const
{
    ClosedFormFactor c;
    c.pi_power = pi_power;
    int phase = ((phase_quarter_turns % 4) + 4) % 4;
    int sg = sign;

    std::vector<GammaFactor> gs;
    for (auto g : gamma_factors) {
        if (g.mult == 0) continue;
        FieldExponent e = g.e;
        int mult = g.mult;
        if (e.m() < 0) {
            // Gamma[swap e] = (-1)^[e] Gamma[e]
            if ((e.m() * mult) % 2 != 0) sg = -sg;
            e = e.swapped();
        }
        double re = e.w().real(), im = e.w().imag();
        if (std::abs(re - 0.5) <= kMergeTol && std::abs(im) <= kMergeTol) continue;  // Gamma = 1
        if (re < 0.5 - kMergeTol || (std::abs(re - 0.5) <= kMergeTol && im < 0.0)) {
            // Gamma[(m, w)] = 1 / Gamma[(m, 1 - w)] for m >= 0
            e = FieldExponent::from_mw(e.m(), 1.0 - e.w());
            mult = -mult;
        }
        gs.push_back({e, mult});
    }
    std::stable_sort(gs.begin(), gs.end(), [](const GammaFactor& a, const GammaFactor& b) { return exp_less(a.e, b.e); });
    for (auto& g : gs) {
        if (!c.gamma_factors.empty() && exp_equal(c.gamma_factors.back().e, g.e, kMergeTol))
            c.gamma_factors.back().mult += g.mult;
        else
            c.gamma_factors.push_back(g);
    }
    c.gamma_factors.erase(std::remove_if(c.gamma_factors.begin(), c.gamma_factors.end(),
                                         [](const GammaFactor& g) { return g.mult == 0; }),
                          c.gamma_factors.end());

    std::vector<MomentumPower> ms;
    for (auto mp : momentum_powers) {
        if (!mp.minus.empty() && mp.minus < mp.plus) {
            if (mp.e.m() % 2 != 0) sg = -sg;
            std::swap(mp.plus, mp.minus);
        }
        ms.push_back(mp);
    }
    std::stable_sort(ms.begin(), ms.end(), [](const MomentumPower& a, const MomentumPower& b) {
        return std::tie(a.plus, a.minus) < std::tie(b.plus, b.minus);
    });
    for (auto& mp : ms) {
        if (!c.momentum_powers.empty() && c.momentum_powers.back().plus == mp.plus &&
            c.momentum_powers.back().minus == mp.minus)
            c.momentum_powers.back().e = c.momentum_powers.back().e + mp.e;
        else
            c.momentum_powers.push_back(mp);
    }
    c.momentum_powers.erase(std::remove_if(c.momentum_powers.begin(), c.momentum_powers.end(),
                                           [](const MomentumPower& m) { return m.e.is_zero(kMergeTol); }),
                            c.momentum_powers.end());

    c.waves = waves;
    std::sort(c.waves.begin(), c.waves.end(),
              [](const Wave& a, const Wave& b) { return std::tie(a.momentum, a.at) < std::tie(b.momentum, b.at); });
    for (auto dl : deltas) {
        std::sort(dl.begin(), dl.end());
        c.deltas.push_back(dl);
    }
    std::sort(c.deltas.begin(), c.deltas.end());

    if (phase >= 2) {
        phase -= 2;
        sg = -sg;
    }
    c.phase_quarter_turns = phase;
    c.sign = sg;
    return c;
}

bool ClosedFormFactor::same_as(const ClosedFormFactor& o, double tol) const
{
    ClosedFormFactor a = canonical(), b = o.canonical();
    if (a.pi_power != b.pi_power || a.phase_quarter_turns != b.phase_quarter_turns || a.sign != b.sign) return false;
    if (a.gamma_factors.size() != b.gamma_factors.size()) return false;
    for (std::size_t i = 0; i < a.gamma_factors.size(); ++i)
        if (a.gamma_factors[i].mult != b.gamma_factors[i].mult ||
            !exp_equal(a.gamma_factors[i].e, b.gamma_factors[i].e, tol))
            return false;
    if (a.momentum_powers.size() != b.momentum_powers.size()) return false;
    for (std::size_t i = 0; i < a.momentum_powers.size(); ++i) {
        auto &x = a.momentum_powers[i], &y = b.momentum_powers[i];
        if (x.plus != y.plus || x.minus != y.minus || !exp_equal(x.e, y.e, tol)) return false;
    }
    if (a.waves.size() != b.waves.size()) return false;
    for (std::size_t i = 0; i < a.waves.size(); ++i)
        if (a.waves[i].momentum != b.waves[i].momentum || a.waves[i].at != b.waves[i].at) return false;
    return a.deltas == b.deltas;
}

namespace {

cplx lookup(const Bindings& b, const std::string& label)
{
    if (!label.empty() && label[0] == '-') return -lookup(b, label.substr(1));
    auto it = b.find(label);
    if (it == b.end()) throw PreconditionError("no binding for '" + label + "'");
    return it->second;
}

}  // namespace

cplx ClosedFormFactor::evaluate(const Bindings& b) const
{
    cplx v = std::pow(kPi, pi_power) * ipow(phase_quarter_turns) * double(sign);
    cplx logs = 0.0;
    for (auto& g : gamma_factors) logs += double(g.mult) * log_cgamma(g.e);
    v *= std::exp(logs);
    for (auto& mp : momentum_powers) {
        cplx z = lookup(b, mp.plus);
        if (!mp.minus.empty()) z -= lookup(b, mp.minus);
        v *= eval_propagator(mp.e, z);
    }
    for (auto& w : waves) v *= std::polar(1.0, 2.0 * (lookup(b, w.momentum) * lookup(b, w.at)).real());
    return v;
}

std::string ClosedFormFactor::str() const
{
    std::ostringstream os;
    os << (sign < 0 ? "-" : "") << "i^" << phase_quarter_turns << " pi^" << pi_power;
    for (auto& g : gamma_factors) os << " G" << g.e.str() << "^" << g.mult;
    for (auto& m : momentum_powers) os << " D" << m.e.str() << "(" << m.plus << (m.minus.empty() ? "" : "-" + m.minus) << ")";
    for (auto& w : waves) os << " e(" << w.momentum << "@" << w.at << ")";
    for (auto& d : deltas) {
        os << " delta(";
        for (auto& s : d) os << s << ",";
        os << ")";
    }
    return os.str();
}

// ---------------------------------------------------------------- diagram

bool Diagram::is_internal(const std::string& v) const
{
    return std::find(internal.begin(), internal.end(), v) != internal.end();
}

bool Diagram::is_external(const std::string& v) const { return find_external(v) != nullptr; }

const ExternalVertex* Diagram::find_external(const std::string& v) const
{
    for (auto& e : external)
        if (e.label == v) return &e;
    return nullptr;
}

void Diagram::validate() const
{
    std::set<std::string> seen;
    for (auto& e : external)
        if (!seen.insert(e.label).second) throw PreconditionError("duplicate vertex " + e.label);
    for (auto& v : internal)
        if (!seen.insert(v).second) throw PreconditionError("duplicate vertex " + v);
    for (auto& E : edges) {
        if (!seen.count(E.from) || !seen.count(E.to))
            throw PreconditionError("edge references unknown vertex " + E.from + "->" + E.to);
        if (E.from == E.to) throw PreconditionError("self-loop at " + E.from);
        if (E.wave) {
            auto* m = find_external(E.from);
            if (!m || !m->is_momentum) throw PreconditionError("wave edge must start at a momentum vertex");
        } else {
            auto* a = find_external(E.from);
            auto* b = find_external(E.to);
            if ((a && a->is_momentum) || (b && b->is_momentum))
                throw PreconditionError("propagator attached to a momentum vertex");
        }
    }
}

std::vector<std::string> find_free_vertices(const Diagram& d)
{
    std::vector<std::string> out;
    for (auto& v : d.internal)
        if (degree(d, v) == 2) out.push_back(v);
    return out;
}

Diagram normalize(const Diagram& d)
{
    Diagram r = d;
    r.edges.clear();
    for (auto E : d.edges) {
        if (!E.wave && E.to < E.from) {
            r.prefactor.mul_sign(flip_sign(E.e));
            std::swap(E.from, E.to);
        }
        bool merged = false;
        if (!E.wave)
            for (auto& F : r.edges)
                if (!F.wave && F.from == E.from && F.to == E.to) {
                    F.e = F.e + E.e;
                    merged = true;
                    break;
                }
        if (!merged) r.edges.push_back(E);
    }
    r.edges.erase(std::remove_if(r.edges.begin(), r.edges.end(), [](const Edge& E) { return !E.wave && E.e.is_zero(1e-12); }),
                  r.edges.end());
    return r;
}

Diagram apply_chain(const Diagram& d, const std::string& v)
{
    if (!d.is_internal(v)) throw NotAChain(v + " is not internal");
    std::vector<std::size_t> waves;
    auto legs = legs_of(d, v, &waves);
    if (legs.size() != 2 || !waves.empty()) throw NotAChain(v + " does not have two propagators");
    const Edge* in = nullptr;
    const Edge* out = nullptr;
    for (auto& L : legs) {
        const Edge& E = d.edges[L.edge];
        if (E.to == v)
            in = in ? nullptr : &E;
        else
            out = out ? nullptr : &E;
    }
    if (!in || !out) throw NotAChain("edges at " + v + " do not form a directed chain");
    if (in->from == out->to) throw NotAChain("chain at " + v + " closes on itself");
    const FieldExponent alpha = in->e, beta = out->e;
    const FieldExponent gamma = alpha + beta - 1.0;
    if (near_zero(gamma.a()) || near_zero(gamma.abar()))
        throw DegenerateChain("chain at " + v + " produces index " + gamma.str());
    Diagram r = without(d, v, {legs[0].edge, legs[1].edge});
    // int D_alpha(w - x) D_beta(y - w) = pi a(alpha) a(beta) / a(gamma) D_gamma(y - x)
    r.edges.push_back({in->from, out->to, gamma, false});
    r.prefactor.pi_power += 1;
    r.prefactor.mul_afactor(alpha);
    r.prefactor.mul_afactor(beta);
    r.prefactor.mul_gamma(gamma, 1);
    return r;
}

Diagram apply_star_triangle(const Diagram& d, const std::string& v)
{
    if (!d.is_internal(v)) throw UniquenessViolated(v + " is not internal");
    std::vector<std::size_t> waves;
    auto legs = legs_of(d, v, &waves);
    if (legs.size() != 3 || !waves.empty()) throw UniquenessViolated(v + " does not have three propagators");
    std::set<std::string> nb{legs[0].nbr, legs[1].nbr, legs[2].nbr};
    if (nb.size() != 3) throw UniquenessViolated("parallel legs at " + v);
    CPair sum = legs[0].e.pair() + legs[1].e.pair() + legs[2].e.pair();
    if (std::abs(sum.a - 2.0) > kSumTol || std::abs(sum.abar - 2.0) > kSumTol)
        throw UniquenessViolated("index sum at " + v + " is not 2");
    const FieldExponent &al = legs[0].e, &be = legs[1].e, &ga = legs[2].e;
    const std::string &z1 = legs[0].nbr, &z2 = legs[1].nbr, &z3 = legs[2].nbr;
    Diagram r = without(d, v, {legs[0].edge, legs[1].edge, legs[2].edge});
    r.prefactor.mul_sign(legs[0].sign * legs[1].sign * legs[2].sign);
    r.edges.push_back({z2, z1, 1.0 - ga, false});
    r.edges.push_back({z3, z2, 1.0 - al, false});
    r.edges.push_back({z1, z3, 1.0 - be, false});
    r.prefactor.pi_power += 1;
    r.prefactor.mul_afactor(al);
    r.prefactor.mul_afactor(be);
    r.prefactor.mul_afactor(ga);
    return r;
}

Diagram apply_fourier(const Diagram& d, const std::string& v)
{
    if (!d.is_internal(v)) throw NoPlaneWave(v + " is not internal");
    std::vector<std::size_t> waves;
    auto legs = legs_of(d, v, &waves);
    if (waves.empty()) throw NoPlaneWave("no plane wave at " + v);
    if (legs.empty()) {
        // pure plane waves: pi^2 delta^2(sum p)
        Diagram r = without(d, v, waves);
        std::vector<std::string> ps;
        for (auto i : waves) ps.push_back(d.edges[i].from);
        r.prefactor.pi_power += 2;
        r.prefactor.deltas.push_back(ps);
        return r;
    }
    if (legs.size() != 1 || waves.size() != 1)
        throw NoPlaneWave(v + " must carry one propagator and one plane wave");
    const Leg& L = legs[0];
    // orient as D_alpha(v - u): leg is D_e(u - v)
    const FieldExponent alpha = L.e;
    const std::string p = d.edges[waves[0]].from;
    Diagram r = without(d, v, {L.edge, waves[0]});
    r.prefactor.mul_sign(L.sign * flip_sign(alpha));
    r.prefactor.pi_power += 1;
    r.prefactor.mul_phase(alpha.m());
    r.prefactor.mul_afactor(alpha);
    r.prefactor.mul_power(p, "", exponent_reflect(alpha));
    r.edges.push_back({p, L.nbr, FieldExponent{}, true});
    return r;
}

Diagram apply_exchange(const Diagram& d, const ExchangePattern& pat,
                       std::optional<std::pair<FieldExponent, FieldExponent>> new_indices)
{
    const std::string& v = pat.vertex;
    if (!d.is_internal(v)) throw IndexSumMismatch(v + " is not internal");
    std::vector<std::size_t> waves;
    auto legs = legs_of(d, v, &waves);
    if (legs.size() != 4 || !waves.empty()) throw IndexSumMismatch(v + " does not have four propagators");
    std::vector<Leg> ord;
    for (auto& L : legs)
        if (L.nbr == pat.first) ord.push_back(L);
    for (auto& L : legs)
        if (L.nbr == pat.second) ord.push_back(L);
    for (auto& L : legs)
        if (L.nbr != pat.first && L.nbr != pat.second) ord.push_back(L);
    if (ord.size() != 4 || pat.first == pat.second) throw PreconditionError("exchange pattern does not match " + v);
    std::set<std::string> nb;
    for (auto& L : ord) nb.insert(L.nbr);
    if (nb.size() != 4) throw PreconditionError("parallel legs at " + v);

    const FieldExponent a0 = ord[0].e, a1 = ord[1].e, a2 = ord[2].e, a3 = ord[3].e;
    CPair sum = a0.pair() + a1.pair() + a2.pair() + a3.pair();
    if (std::abs(sum.a - 2.0) > kSumTol || std::abs(sum.abar - 2.0) > kSumTol)
        throw IndexSumMismatch("index sum at " + v + " is not 2");
    const FieldExponent n0 = 1.0 - a1, n2 = 1.0 - a3;
    if (new_indices) {
        auto [ap, bp] = *new_indices;
        CPair lhs = a0.pair() + a2.pair(), rhs = ap.pair() + bp.pair();
        if (std::abs(lhs.a - rhs.a) > kSumTol || std::abs(lhs.abar - rhs.abar) > kSumTol)
            throw IndexSumMismatch("alpha + beta != alpha' + beta'");
        if (exp_equal(ap, a0, kSumTol) && exp_equal(bp, a2, kSumTol)) return d;
        if (!(exp_equal(ap, n0, kSumTol) && exp_equal(bp, n2, kSumTol)))
            throw PreconditionError("requested exchange indices are not reachable by the relation");
    }
    const FieldExponent s = 1.0 - a0 - a1;
    Diagram r = without(d, v, {ord[0].edge, ord[1].edge, ord[2].edge, ord[3].edge});
    r.internal.insert(r.internal.begin() + (std::find(d.internal.begin(), d.internal.end(), v) - d.internal.begin()), v);
    r.prefactor.mul_sign(ord[0].sign * ord[1].sign * ord[2].sign * ord[3].sign);
    r.prefactor.mul_sign(parity_sign(a1.m() + a2.m()));
    for (auto* a : {&a0, &a1, &a2, &a3}) r.prefactor.mul_afactor(*a);
    const std::string &z0 = ord[0].nbr, &z1 = ord[1].nbr, &z2 = ord[2].nbr, &z3 = ord[3].nbr;
    // D_{-s}(z0 - z1) D_s(z2 - z3)
    r.edges.push_back({z1, z0, -s, false});
    r.edges.push_back({z3, z2, s, false});
    r.edges.push_back({v, z0, 1.0 - a1, false});
    r.edges.push_back({v, z1, 1.0 - a0, false});
    r.edges.push_back({v, z2, 1.0 - a3, false});
    r.edges.push_back({v, z3, 1.0 - a2, false});
    return r;
}

}  // namespace sovkit
