#pragma once

#include <functional>
#include <vector>

#include "sovkit/cfield.hpp"

namespace sovkit {

struct QuadratureSpec {
    double abs_tol = 1e-8;
    double rel_tol = 1e-6;
    long max_evals = 20000000;
    // radius (relative to the center spread) beyond which the tail is extrapolated
    double outer_cutoff = 1e5;
    std::vector<cplx> singularity_centers;
    // gaussian damping exp(-damping |z|^2) applied by the integrator; 0 = off
    double damping = 0.0;
    // largest plane-wave wave number |2p| present in the integrand (sets angular/radial resolution)
    double wave_number = 0.0;
    // k > 1: add the outer variables as singularity centers of the inner ones
    bool couple_variables = true;
    int min_level = 0;
    int max_level = 3;
};

struct IntegralEstimate {
    cplx value{0.0};
    double err = 0.0;
    long evals = 0;
    bool converged = false;
};

struct VectorEstimate {
    std::vector<cplx> value;
    double err = 0.0;
    long evals = 0;
    bool converged = false;
};

// D_alpha(z) = |z|^{-2w} e^{-i m arg z}
cplx eval_propagator(const FieldExponent& alpha, cplx z);

using Integrand1 = std::function<void(cplx z, cplx* out)>;
using IntegrandK = std::function<cplx(const cplx* z)>;

// Vector-valued integral over C (k = 1) with polar partition-of-unity cells.
VectorEstimate integrate_plane(const Integrand1& f, int nout, const QuadratureSpec& spec);

// Scalar integral over C^k, k in {1,2,3}. For k > 1 the integration is
// iterated; earlier variables are added as singularity centers of later ones.
IntegralEstimate integrate_c2(const IntegrandK& f, int k, const QuadratureSpec& spec);

// Numeric Fourier transform of D_alpha: damped integrals with Richardson
// extrapolation in the damping parameter.
IntegralEstimate fourier_propagator(const FieldExponent& alpha, cplx p, const QuadratureSpec& spec);

// Closed form pi i^[alpha] a(alpha) D_{1-alpha}(p).
cplx fourier_closed(const FieldExponent& alpha, cplx p);

// Richardson extrapolation to delta -> 0 from samples I(delta_j) (polynomial in delta).
cplx richardson_zero(const std::vector<double>& deltas, const std::vector<cplx>& values);

// Damping sequence used for oscillatory integrals.
std::vector<double> default_damping_sequence();

// Vector-valued damped integral extrapolated to zero damping.
VectorEstimate integrate_oscillatory(const Integrand1& f, int nout, const QuadratureSpec& spec,
                                     const std::vector<double>& deltas);

// Rejects exponents whose local power 2 Re w is at or beyond 1.9.
void check_local_power(const FieldExponent& alpha);

}  // namespace sovkit
