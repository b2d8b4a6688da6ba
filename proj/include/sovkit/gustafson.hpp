#pragma once

#include <random>
#include <vector>

#include "sovkit/cfield.hpp"
#include "sovkit/plane.hpp"
#include "sovkit/sov.hpp"

namespace sovkit {

// Mellin-Barnes evaluation settings. Sums run over n in Z + sigma/2 with
// |n| <= n_max; nu integrals are split at |nu| = nu_cutoff. contour_shifts[k]
// is the real part c of the contour Re(nu_k) = c (default 0).
struct MBSpec {
    int sigma = 0;
    int n_max = 40;
    double nu_cutoff = 30.0;
    std::vector<double> contour_shifts;
    double tol = 1e-10;
    // extrapolate the n-sums and add the nu tails beyond the cutoff
    bool accelerate = true;
};

// z_m = n_m/2 + x_m, zbar_m = -n_m/2 + x_m (and likewise w)
struct MBParams {
    std::vector<CPair> z_list;
    std::vector<CPair> w_list;
};

struct MBResult {
    IntegralEstimate lhs;
    cplx rhs{0.0};
    std::vector<double> contour_shifts;
};

// Row of a truncation study: raw = plain truncated sum/integral, accel = with
// tail extrapolation.
struct ConvergenceRow {
    int n_max = 0;
    double nu_cutoff = 0.0;
    cplx raw{0.0};
    double raw_err = 0.0;
    cplx accel{0.0};
    double accel_err = 0.0;
};

MBResult gustafson_first(int N, const MBParams& params, const MBSpec& spec);
MBResult gustafson_second(int N, const MBParams& params, cplx zeta, const MBSpec& spec);

// [zeta]^P = zeta^a conj(zeta)^abar, principal branch
cplx zeta_bracket(cplx zeta, const CPair& P);

cplx gustafson_first_rhs(int N, const MBParams& params);
cplx gustafson_second_rhs(int N, const MBParams& params, cplx zeta);

struct JOmegaResult {
    IntegralEstimate lhs;  // direct evaluation in the y variables
    cplx rhs{0.0};         // closed form
    // the same quantity through the second identity after u -> iy
    cplx lhs_second{0.0};
    cplx rhs_second{0.0};
    std::vector<double> contour_shifts;
};

// N = x.size() + 1. Z is a pair on or near the unitary line; omega real shift
// applied to both components.
JOmegaResult j_omega_check(const std::vector<SeparatedPoint>& x, const std::vector<SeparatedPoint>& x_prime,
                           const CPair& Z, cplx omega, cplx zeta, const MBSpec& spec);

// Substituted parameters z = {ix_k, Z-omega}, w = {-ix'_k, Z-omega}.
MBParams j_omega_params(const std::vector<SeparatedPoint>& x, const std::vector<SeparatedPoint>& x_prime,
                        const CPair& Z, cplx omega);

struct SignIdentityCheck {
    double mu_rel_err = 0.0;    // 1/prod Gamma[i(y_k-y_j)] vs mu(y) (-1)^...
    double swap_rel_err = 0.0;  // Gamma[i(xbar-ybar)] vs Gamma[i(x-y)] (-1)^...
    bool parity_ok = false;     // exponent bookkeeping, integer arithmetic
};

// Random discrete parts in {-3..3} + sigma/2 and random real nu.
SignIdentityCheck j_omega_sign_identities(int N, int sigma, std::mt19937_64& rng);

using MBEvaluator = std::function<MBResult(const MBSpec&)>;

// Evaluates at (n_max, nu_cutoff) pairs, raw and accelerated, against rhs.
std::vector<ConvergenceRow> convergence_table(const MBEvaluator& eval, const MBSpec& base,
                                              const std::vector<std::pair<int, double>>& steps);

// Errors nonincreasing along the table once they exceed floor.
bool table_monotone(const std::vector<ConvergenceRow>& rows, bool accelerated, double floor);

}  // namespace sovkit
