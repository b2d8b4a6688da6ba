#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sovkit/cfield.hpp"
#include "sovkit/plane.hpp"

namespace sovkit {

struct GammaFactor {
    FieldExponent e;
    int mult = 1;
};

// D_e(z_plus - z_minus); minus empty means D_e(z_plus)
struct MomentumPower {
    std::string plus;
    std::string minus;
    FieldExponent e;
};

// exp(i(p z + conj(p z)))
struct Wave {
    std::string momentum;
    std::string at;
};

using Bindings = std::map<std::string, cplx>;

struct ClosedFormFactor {
    int pi_power = 0;
    int phase_quarter_turns = 0;
    int sign = 1;
    std::vector<GammaFactor> gamma_factors;
    std::vector<MomentumPower> momentum_powers;
    std::vector<Wave> waves;
    // each entry: pi^2 delta^2(sum of the listed momenta), carried symbolically
    std::vector<std::vector<std::string>> deltas;

    void mul_gamma(const FieldExponent& e, int mult = 1) { gamma_factors.push_back({e, mult}); }
    void mul_afactor(const FieldExponent& e) { gamma_factors.push_back({e, -1}); }
    void mul_power(const std::string& plus, const std::string& minus, const FieldExponent& e)
    {
        momentum_powers.push_back({plus, minus, e});
    }
    void mul_phase(long quarter_turns) { phase_quarter_turns = static_cast<int>(((phase_quarter_turns + quarter_turns) % 4 + 4) % 4); }
    void mul_sign(int s) { sign *= s; }

    ClosedFormFactor& operator*=(const ClosedFormFactor& o);
    // complex conjugate of the factor
    ClosedFormFactor conjugate() const;

    ClosedFormFactor canonical() const;
    bool same_as(const ClosedFormFactor& o, double tol = 1e-9) const;
    // value off any delta functions; throws PoleEncountered on an unresolved pole
    cplx evaluate(const Bindings& b) const;
    std::string str() const;
};

ClosedFormFactor operator*(ClosedFormFactor a, const ClosedFormFactor& b);

struct ExternalVertex {
    std::string label;
    bool is_momentum = false;
    bool has_value = false;
    cplx value{0.0};
};

// from -> to with index e stands for D_e(z_to - z_from); a wave edge runs
// from a momentum vertex to a position vertex and carries no index
struct Edge {
    std::string from;
    std::string to;
    FieldExponent e;
    bool wave = false;
};

enum class RuleKind { Chain, StarTriangle, Fourier, Exchange };
std::string rule_name(RuleKind k);

struct Diagram {
    std::vector<ExternalVertex> external;
    std::vector<std::string> internal;
    std::vector<Edge> edges;
    ClosedFormFactor prefactor;

    bool is_internal(const std::string& v) const;
    bool is_external(const std::string& v) const;
    const ExternalVertex* find_external(const std::string& v) const;
    void validate() const;
};

std::vector<std::string> find_free_vertices(const Diagram& d);

// merges parallel edges, drops trivial ones, orients edges by label order
Diagram normalize(const Diagram& d);

Diagram apply_chain(const Diagram& d, const std::string& v);
Diagram apply_star_triangle(const Diagram& d, const std::string& v);
Diagram apply_fourier(const Diagram& d, const std::string& v);

struct ExchangePattern {
    std::string vertex;
    // legs paired by the relation: the new line runs between these two
    std::string first;
    std::string second;
};
// new_indices refers to the legs (first, other0) where other0 is the first
// remaining neighbor in edge order
Diagram apply_exchange(const Diagram& d, const ExchangePattern& pat,
                       std::optional<std::pair<FieldExponent, FieldExponent>> new_indices = std::nullopt);

struct ReductionStep {
    RuleKind kind;
    std::string vertex;
    std::string detail;
};

struct Reduction {
    ClosedFormFactor result;
    std::vector<ReductionStep> steps;
};

struct ReduceOptions {
    int max_exchanges = 3;
    long max_states = 20000;
};

// Fully reduces d. Search order: chain, Fourier, star-triangle, exchange;
// vertices in declaration order; depth-first with backtracking.
Reduction reduce_traced(const Diagram& d, const ReduceOptions& opt = {});
ClosedFormFactor reduce(const Diagram& d);

// All distinct terminating reductions up to `limit` paths.
std::vector<Reduction> reduce_all_paths(const Diagram& d, std::size_t limit, const ReduceOptions& opt = {});

// Direct quadrature over the internal vertices (at most 3).
IntegralEstimate numeric_eval(const Diagram& d, const Bindings& b, const QuadratureSpec& spec);

}  // namespace sovkit
