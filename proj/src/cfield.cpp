#include "sovkit/cfield.hpp"

#include <cmath>
#include <cstdio>

#include "sovkit/errors.hpp"

namespace sovkit {

namespace {

const double kLanczosCof[14] = {
    57.1562356658629235,      -59.5979603554754912,     14.1360979747417471,
    -0.491913816097620199,    .339946499848118887e-4,   .465236289270485756e-4,
    -.983744753048795646e-4,  .158088703224912494e-3,   -.210264441724104883e-3,
    .217439618115212643e-3,   -.164318106536763890e-3,  .844182239838527433e-4,
    -.261908384015814087e-4,  .368991826595316234e-5};

cplx lgamma_right(cplx x)
{
    cplx y = x;
    cplx tmp = x + 5.24218750000000000;
    tmp = (x + 0.5) * std::log(tmp) - tmp;
    cplx ser = 0.999999999999997092;
    for (double c : kLanczosCof) {
        y += 1.0;
        ser += c / y;
    }
    return tmp + std::log(2.5066282746310005 * ser / x);
}

bool near_int(cplx z, long& k)
{
    double r = std::round(z.real());
    if (std::abs(z.imag()) < 1e-12 && std::abs(z.real() - r) < 1e-12) {
        k = static_cast<long>(r);
        return true;
    }
    return false;
}

}  // namespace

std::string FieldExponent::str() const
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "{m=%d,w=%.6g%+.6gi}", m_, w_.real(), w_.imag());
    return buf;
}

FieldExponent make_exponent(cplx a, cplx abar)
{
    cplx d = a - abar;
    double m = std::round(d.real());
    if (std::abs(d - cplx(m, 0.0)) > kDiffTol) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "a-abar = %.12g%+.12gi", d.real(), d.imag());
        throw NonIntegerDifference(buf);
    }
    return FieldExponent::from_mw(static_cast<int>(m), 0.5 * (a + abar));
}

cplx lgamma_c(cplx z)
{
    if (z.real() < 0.5) {
        // reflection; log sin in exponential form when |Im| is large
        const cplx w = kPi * z;
        const cplx I(0.0, 1.0);
        cplx logsin;
        if (w.imag() > 20.0)
            logsin = I * kPi - I * w - std::log(2.0 * I) + std::log(1.0 - std::exp(2.0 * I * w));
        else if (w.imag() < -20.0)
            logsin = I * w - std::log(2.0 * I) + std::log(1.0 - std::exp(-2.0 * I * w));
        else
            logsin = std::log(std::sin(w));
        return std::log(kPi) - logsin - lgamma_right(1.0 - z);
    }
    return lgamma_right(z);
}

cplx ipow(long k)
{
    switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
    }
}

GammaValue cgamma(const FieldExponent& u)
{
    GammaValue g;
    cplx a = u.a();
    cplx b = 1.0 - u.abar();
    long k = 0, j = 0;
    bool ai = near_int(a, k);
    bool bi = near_int(b, j);
    bool apole = ai && k <= 0;
    bool bpole = bi && j <= 0;
    if (apole && bpole) {
        // Gamma(-k+d)/Gamma(-j-d) -> -(-1)^(k+j) j!/k!
        long kk = -k, jj = -j;
        double mag = std::exp(std::lgamma(jj + 1.0) - std::lgamma(kk + 1.0));
        g.value = -parity_sign(kk + jj) * mag;
        return g;
    }
    if (apole) {
        g.is_pole = true;
        g.pole_order = 1;
        g.value = cplx(std::numeric_limits<double>::infinity(), 0.0);
        return g;
    }
    if (bpole) {
        g.zero_order = 1;
        g.value = 0.0;
        return g;
    }
    g.value = std::exp(lgamma_c(a) - lgamma_c(b));
    return g;
}

GammaValue afactor(const FieldExponent& u)
{
    GammaValue g = cgamma(u);
    GammaValue r;
    if (g.is_pole) {
        r.zero_order = g.pole_order;
        r.value = 0.0;
    } else if (g.zero_order > 0) {
        r.is_pole = true;
        r.pole_order = g.zero_order;
        r.value = cplx(std::numeric_limits<double>::infinity(), 0.0);
    } else {
        r.value = 1.0 / g.value;
    }
    return r;
}

int sign_factor(const FieldExponent& u) { return parity_sign(u.m()); }

FieldExponent exponent_reflect(const FieldExponent& u)
{
    return FieldExponent::from_mw(-u.m(), 1.0 - u.w());
}

cplx cgamma_value(const FieldExponent& u)
{
    GammaValue g = cgamma(u);
    if (g.is_pole || g.zero_order > 0) throw PoleEncountered("Gamma[" + u.str() + "]");
    return g.value;
}

cplx afactor_value(const FieldExponent& u) { return 1.0 / cgamma_value(u); }

cplx log_cgamma(const FieldExponent& u)
{
    GammaValue g = cgamma(u);
    if (g.is_pole || g.zero_order > 0) throw PoleEncountered("Gamma[" + u.str() + "]");
    long k;
    if (near_int(u.a(), k) || near_int(1.0 - u.abar(), k)) return std::log(g.value);
    return lgamma_c(u.a()) - lgamma_c(1.0 - u.abar());
}

}  // namespace sovkit
