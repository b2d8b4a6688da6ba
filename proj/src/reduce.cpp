#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "sovkit/diagrams.hpp"
#include "sovkit/errors.hpp"

namespace sovkit {

namespace {

struct Move {
    RuleKind kind;
    std::string vertex;
    std::string detail;
    Diagram next;
};

std::string signature(const Diagram& d)
{
    std::ostringstream os;
    os.precision(9);
    for (auto& v : d.internal) os << v << ",";
    os << "|";
    for (auto& E : d.edges) {
        os << E.from << ">" << E.to;
        if (E.wave)
            os << "~";
        else
            os << ":" << E.e.m() << "," << std::round(E.e.w().real() * 1e9) << "," << std::round(E.e.w().imag() * 1e9);
        os << ";";
    }
    return os.str();
}

struct LegInfo {
    std::size_t edge;
    std::string nbr;
};

std::vector<LegInfo> prop_legs(const Diagram& d, const std::string& v, int& waves)
{
    std::vector<LegInfo> out;
    waves = 0;
    for (std::size_t i = 0; i < d.edges.size(); ++i) {
        const Edge& E = d.edges[i];
        if (E.wave) {
            if (E.to == v) ++waves;
            continue;
        }
        if (E.from == v) out.push_back({i, E.to});
        if (E.to == v) out.push_back({i, E.from});
    }
    return out;
}

// make edge i run u -> v (or v -> u when into == false)
void orient(Diagram& d, std::size_t i, const std::string& v, bool into)
{
    Edge& E = d.edges[i];
    bool is_into = (E.to == v);
    if (is_into != into) {
        d.prefactor.mul_sign(parity_sign(E.e.m()));
        std::swap(E.from, E.to);
    }
}

std::vector<Move> moves(const Diagram& d, int exchanges_left)
{
    std::vector<Move> out;
    auto attempt = [&](RuleKind k, const std::string& v, const std::string& detail, auto&& fn) {
        try {
            out.push_back({k, v, detail, normalize(fn())});
        } catch (const Error&) {
        }
    };
    for (auto& v : d.internal) {
        int w;
        auto legs = prop_legs(d, v, w);
        if (w == 0 && legs.size() == 2 && legs[0].nbr != legs[1].nbr) {
            attempt(RuleKind::Chain, v, legs[1].nbr + "->" + legs[0].nbr, [&] {
                Diagram t = d;
                orient(t, legs[1].edge, v, true);
                orient(t, legs[0].edge, v, false);
                return apply_chain(t, v);
            });
        }
    }
    for (auto& v : d.internal) {
        int w;
        auto legs = prop_legs(d, v, w);
        if (w > 0 && legs.size() <= 1) attempt(RuleKind::Fourier, v, "", [&] { return apply_fourier(d, v); });
    }
    for (auto& v : d.internal) {
        int w;
        auto legs = prop_legs(d, v, w);
        if (w == 0 && legs.size() == 3) attempt(RuleKind::StarTriangle, v, "", [&] { return apply_star_triangle(d, v); });
    }
    if (exchanges_left > 0)
        for (auto& v : d.internal) {
            int w;
            auto legs = prop_legs(d, v, w);
            if (w != 0 || legs.size() != 4) continue;
            for (std::size_t j = 1; j < 4; ++j) {
                ExchangePattern pat{v, legs[0].nbr, legs[j].nbr};
                attempt(RuleKind::Exchange, v, pat.first + "," + pat.second, [&] { return apply_exchange(d, pat); });
            }
        }
    return out;
}

ClosedFormFactor finish(const Diagram& d)
{
    ClosedFormFactor f = d.prefactor;
    for (auto& E : d.edges) {
        if (E.wave)
            f.waves.push_back({E.from, E.to});
        else
            f.mul_power(E.to, E.from, E.e);
    }
    return f.canonical();
}

struct Search {
    ReduceOptions opt;
    std::size_t limit;
    long states = 0;
    std::set<std::string> visited;
    bool prune;
    std::vector<Reduction> found;
    std::vector<ReductionStep> path;

    void dfs(const Diagram& d, int exchanges_left)
    {
        if (found.size() >= limit || states >= opt.max_states) return;
        ++states;
        if (prune && !visited.insert(signature(d)).second) return;
        if (d.internal.empty()) {
            found.push_back({finish(d), path});
            return;
        }
        for (auto& m : moves(d, exchanges_left)) {
            path.push_back({m.kind, m.vertex, m.detail});
            dfs(m.next, exchanges_left - (m.kind == RuleKind::Exchange ? 1 : 0));
            path.pop_back();
            if (found.size() >= limit) return;
        }
    }
};

}  // namespace

Reduction reduce_traced(const Diagram& d, const ReduceOptions& opt)
{
    d.validate();
    Search s{opt, 1, 0, {}, true, {}, {}};
    s.dfs(normalize(d), opt.max_exchanges);
    if (s.found.empty()) throw StuckDiagram("no terminating rule sequence (" + std::to_string(s.states) + " states)");
    return s.found.front();
}

ClosedFormFactor reduce(const Diagram& d) { return reduce_traced(d).result; }

std::vector<Reduction> reduce_all_paths(const Diagram& d, std::size_t limit, const ReduceOptions& opt)
{
    d.validate();
    Search s{opt, limit, 0, {}, false, {}, {}};
    s.dfs(normalize(d), opt.max_exchanges);
    return s.found;
}

IntegralEstimate numeric_eval(const Diagram& d, const Bindings& b, const QuadratureSpec& spec)
{
    d.validate();
    const std::size_t k = d.internal.size();
    if (k > 3) throw PreconditionError("numeric_eval supports at most 3 internal vertices");

    Bindings vals = b;
    for (auto& e : d.external)
        if (e.has_value && !vals.count(e.label)) vals[e.label] = e.value;
    auto value_of = [&](const std::string& s) {
        auto it = vals.find(s);
        if (it == vals.end()) throw PreconditionError("no binding for '" + s + "'");
        return it->second;
    };

    cplx constant = d.prefactor.evaluate(vals);
    std::vector<const Edge*> inner;
    double wave_k = 0.0;
    for (auto& E : d.edges) {
        bool touches = d.is_internal(E.from) || d.is_internal(E.to);
        if (!touches) {
            if (E.wave)
                constant *= std::polar(1.0, 2.0 * (value_of(E.from) * value_of(E.to)).real());
            else
                constant *= eval_propagator(E.e, value_of(E.to) - value_of(E.from));
            continue;
        }
        if (!E.wave) check_local_power(E.e);
        if (E.wave) wave_k = std::max(wave_k, 2.0 * std::abs(value_of(E.from)));
        inner.push_back(&E);
    }
    if (k == 0) return {constant, 0.0, 0, true};

    std::vector<int> slot_of_edge_from, slot_of_edge_to;
    auto slot = [&](const std::string& s) -> int {
        for (std::size_t i = 0; i < k; ++i)
            if (d.internal[i] == s) return static_cast<int>(i);
        return -1;
    };
    std::vector<cplx> fixed_from, fixed_to;
    for (auto* E : inner) {
        int a = slot(E->from), c = slot(E->to);
        slot_of_edge_from.push_back(a);
        slot_of_edge_to.push_back(c);
        fixed_from.push_back(a < 0 ? value_of(E->from) : cplx(0.0));
        fixed_to.push_back(c < 0 ? value_of(E->to) : cplx(0.0));
    }
    auto integrand = [&](const cplx* z) {
        cplx v = 1.0;
        for (std::size_t i = 0; i < inner.size(); ++i) {
            cplx zf = slot_of_edge_from[i] < 0 ? fixed_from[i] : z[slot_of_edge_from[i]];
            cplx zt = slot_of_edge_to[i] < 0 ? fixed_to[i] : z[slot_of_edge_to[i]];
            if (inner[i]->wave)
                v *= std::polar(1.0, 2.0 * (zf * zt).real());
            else
                v *= eval_propagator(inner[i]->e, zt - zf);
        }
        return v;
    };

    QuadratureSpec s = spec;
    s.singularity_centers.clear();
    for (auto& e : d.external)
        if (!e.is_momentum) s.singularity_centers.push_back(value_of(e.label));
    if (wave_k > 0.0) {
        if (k != 1) throw PreconditionError("plane waves supported with one internal vertex only");
        s.wave_number = wave_k;
        auto v = integrate_oscillatory([&](cplx z, cplx* out) { out[0] = integrand(&z); }, 1, s,
                                       default_damping_sequence());
        return {constant * v.value[0], std::abs(constant) * v.err, v.evals, v.converged};
    }
    IntegralEstimate e = integrate_c2(integrand, static_cast<int>(k), s);
    e.value *= constant;
    e.err *= std::abs(constant);
    return e;
}

}  // namespace sovkit
