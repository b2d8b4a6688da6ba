#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sovkit/cfield.hpp"
#include "sovkit/diagrams.hpp"
#include "sovkit/plane.hpp"

namespace sovkit {

enum class Kind { B, A };

// x = i n/2 + nu, xbar = -i n/2 + nu with n = n2/2
struct SeparatedPoint {
    int n2 = 0;
    cplx nu{0.0};

    double n() const { return 0.5 * n2; }
    cplx x() const { return cplx(0.0, 0.5 * n()) + nu; }
    cplx xbar() const { return cplx(0.0, -0.5 * n()) + nu; }
    CPair pair() const { return {x(), xbar()}; }
    SeparatedPoint shifted(cplx d) const { return {n2, nu + d}; }
};

struct ChainSpec {
    int N = 1;
    std::vector<int> n2;
    std::vector<double> rho;
    std::vector<cplx> xi;
    double epsilon = 0.0;

    // (s_k, sbar_k), k = 1..N
    CPair spin(int k) const;
    cplx xi_bar(int k) const { return std::conj(xi.at(k - 1)); }
    void validate() const;
};

ChainSpec chain_from_json(const nlohmann::json& j);
nlohmann::json chain_to_json(const ChainSpec& c);

using GammaVector = std::vector<CPair>;

GammaVector build_gamma(const ChainSpec& c, Kind kind);
// drop both ends, reflect the rest
GammaVector rho_map(const GammaVector& g);
// gamma^{(j)}: j-fold reflection
CPair reflect_n(const CPair& g, int j);
// Gamma argument gamma_k -/+ i x
FieldExponent minus_ix(const CPair& g, const SeparatedPoint& x);
FieldExponent plus_ix(const CPair& g, const SeparatedPoint& x);

struct OmegaForms {
    cplx first{1.0};
    cplx second{1.0};
};
OmegaForms omega_forms(const GammaVector& g, const SeparatedPoint& u, const SeparatedPoint& v);
// first form; throws PreconditionError when the two forms disagree beyond 1e-10
cplx omega_factor(const GammaVector& g, const SeparatedPoint& u, const SeparatedPoint& v);

ClosedFormFactor varpi1_factor(const SeparatedPoint& x, const GammaVector& g);
// prod_{m=1}^{M} prod_{k<=m} varpi_1(x_k | rho^{m-1} g), M = xs.size()
ClosedFormFactor varpi_factor(const std::vector<SeparatedPoint>& xs, const GammaVector& g);
cplx varpi_prefactor(const std::vector<SeparatedPoint>& xs, const GammaVector& g);

cplx lambda_kernel(Kind kind, int n, const SeparatedPoint& x, const GammaVector& g, const std::vector<cplx>& zs,
                   const std::vector<cplx>& ws);

// Momentum-space Psi^{(N),eps}_x in dual coordinates P_0..P_N (p_k = P_k - P_{k-1});
// loop vertex (N = 3) named by `loop`. Full value = pi^{pi_exponent} * diagram.
// Psi(z) = int prod_k d^2p_k/pi  pi delta(p - sum p_k) e^{2i Re sum p_k z_k} Psi(p_1..p_N)
struct PsiDiagram {
    Diagram d;
    double pi_exponent = 0.0;
};
PsiDiagram psi_diagram(const ChainSpec& c, const std::vector<SeparatedPoint>& xs, double eps,
                       const std::string& loop = "L");

IntegralEstimate psi_momentum_eval(const ChainSpec& c, const std::vector<SeparatedPoint>& xs,
                                   const std::vector<cplx>& momenta, const QuadratureSpec& q);

// position-space Phi^{(N)}_x, N <= 2
Diagram phi_diagram(const ChainSpec& c, const std::vector<SeparatedPoint>& xs, const std::vector<cplx>& zs);
IntegralEstimate phi_position_eval(const ChainSpec& c, const std::vector<SeparatedPoint>& xs,
                                   const std::vector<cplx>& zs, const QuadratureSpec& q);

// I^{eps,eps'}(x, y) as a diagram over the dual momenta, N <= 3; P_N bound to p
Diagram bb_diagram(const ChainSpec& c, const std::vector<SeparatedPoint>& xs, const std::vector<SeparatedPoint>& ys,
                   double eps, double eps_prime, cplx p = cplx(0.7, 0.4));
// direct quadrature of I^{eps,eps'} at N = 2 from the algebraic Psi
IntegralEstimate scalar_bb_quadrature(const ChainSpec& c, const SeparatedPoint& x, const SeparatedPoint& y,
                                      double eps, double eps_prime, cplx p, const QuadratureSpec& q);

// the two printed forms of I^{eps,eps'}
ClosedFormFactor scalar_bb_closed(const std::vector<SeparatedPoint>& xs, const std::vector<SeparatedPoint>& ys,
                                  const GammaVector& g, double eps, double eps_prime);
ClosedFormFactor scalar_bb_closed_second(const std::vector<SeparatedPoint>& xs,
                                         const std::vector<SeparatedPoint>& ys, const GammaVector& g, double eps,
                                         double eps_prime);
int bb_sign_factor(const GammaVector& g);

// (Psi_{p,y} | Phi_x); momentum bound to label "p"
ClosedFormFactor scalar_ab_closed(const std::vector<SeparatedPoint>& xs, const std::vector<SeparatedPoint>& ys,
                                  const GammaVector& g);
int ab_sign_factor(const GammaVector& g);

// coefficient of pi delta(p - q1 - q2) in (Psi^{(N)}_{q1,y} x Psi^{(1)}_{q2}, Psi^{(N+1)}_{p,x});
// labels "p", "q1", "q2"; g has length 2N
ClosedFormFactor scalar_mixed_closed(const std::vector<SeparatedPoint>& ys, const std::vector<SeparatedPoint>& xs,
                                     const GammaVector& g, cplx q1, cplx q2);
int mixed_sign_factor(const GammaVector& g);

double measure_mu(const std::vector<SeparatedPoint>& xs);
double sov_constants(int N, Kind kind);

// N = 2 position-space Psi and its first derivatives at (z1, z2)
struct PsiJet {
    cplx psi, d1, d2, d12;
    double err = 0.0;
    long evals = 0;
    bool converged = false;
};
PsiJet psi_position_jet(const ChainSpec& c, const SeparatedPoint& x, cplx p, cplx z1, cplx z2,
                        const QuadratureSpec& q);

struct EigenResidual {
    cplx lhs, rhs;
    // |lhs - rhs| / |rhs|, or / |p Psi| when rhs vanishes
    double residual = 0.0;
    long evals = 0;
};
EigenResidual eigen_translation_check(const ChainSpec& c, const SeparatedPoint& x, cplx p, cplx z1, cplx z2,
                                      const QuadratureSpec& q);
EigenResidual eigen_b_check(const ChainSpec& c, const SeparatedPoint& x, cplx p, cplx u, cplx z1, cplx z2,
                            const QuadratureSpec& q);
EigenResidual eigen_translation_from_jet(cplx p, const PsiJet& j);
// B_2(u) applied to a precomputed jet
EigenResidual eigen_b_from_jet(const ChainSpec& c, const SeparatedPoint& x, cplx p, cplx u, cplx z1, cplx z2,
                               const PsiJet& j);

// Q(eps) = sum_{n,m} int int phi(x) conj(phi(y)) I^{eps,eps}(x + i eps/4, y + i eps/4) on a fixed grid
struct EpsilonStudy {
    std::vector<double> eps;
    std::vector<cplx> q;
    std::vector<double> cauchy;
    bool monotone = false;
};
EpsilonStudy epsilon_limit_study(const ChainSpec& c, const std::vector<double>& eps_list);

}  // namespace sovkit
