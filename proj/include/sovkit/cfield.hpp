#pragma once

#include <complex>
#include <string>

namespace sovkit {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDiffTol = 1e-9;

// Holomorphic / antiholomorphic pair with no integrality requirement.
struct CPair {
    cplx a{0.0};
    cplx abar{0.0};

    CPair operator+(const CPair& o) const { return {a + o.a, abar + o.abar}; }
    CPair operator-(const CPair& o) const { return {a - o.a, abar - o.abar}; }
    CPair operator-() const { return {-a, -abar}; }
    CPair operator+(cplx c) const { return {a + c, abar + c}; }
    CPair operator-(cplx c) const { return {a - c, abar - c}; }
    CPair operator*(cplx c) const { return {a * c, abar * c}; }
    CPair swapped() const { return {abar, a}; }
};

inline CPair operator+(cplx c, const CPair& p) { return p + c; }
inline CPair operator-(cplx c, const CPair& p) { return {c - p.a, c - p.abar}; }

// Exponent pair (a, abar) with a - abar = m integer; stored as (m, w) with
// a = w + m/2, abar = w - m/2.
class FieldExponent {
public:
    FieldExponent() = default;
    static FieldExponent from_mw(int m, cplx w) {
        FieldExponent e;
        e.m_ = m;
        e.w_ = w;
        return e;
    }
    static FieldExponent scalar(cplx w) { return from_mw(0, w); }

    int m() const { return m_; }
    cplx w() const { return w_; }
    cplx a() const { return w_ + 0.5 * m_; }
    cplx abar() const { return w_ - 0.5 * m_; }
    CPair pair() const { return {a(), abar()}; }

    FieldExponent operator+(const FieldExponent& o) const { return from_mw(m_ + o.m_, w_ + o.w_); }
    FieldExponent operator-(const FieldExponent& o) const { return from_mw(m_ - o.m_, w_ - o.w_); }
    FieldExponent operator-() const { return from_mw(-m_, -w_); }
    FieldExponent operator+(cplx c) const { return from_mw(m_, w_ + c); }
    FieldExponent operator-(cplx c) const { return from_mw(m_, w_ - c); }

    // (abar, a)
    FieldExponent swapped() const { return from_mw(-m_, w_); }
    // (conj(a), conj(abar)): Gamma[u.conj()] = conj(Gamma[u])
    FieldExponent conj() const { return from_mw(m_, std::conj(w_)); }
    // (conj(abar), conj(a)): D_{u.dagger()} = conj(D_u)
    FieldExponent dagger() const { return from_mw(-m_, std::conj(w_)); }
    bool is_zero(double tol = 1e-12) const { return m_ == 0 && std::abs(w_) < tol; }

    std::string str() const;

private:
    int m_ = 0;
    cplx w_{0.0};
};

inline FieldExponent operator-(cplx c, const FieldExponent& e) { return (-e) + c; }
inline FieldExponent operator+(cplx c, const FieldExponent& e) { return e + c; }

FieldExponent make_exponent(cplx a, cplx abar);
inline FieldExponent make_exponent(const CPair& p) { return make_exponent(p.a, p.abar); }

struct GammaValue {
    cplx value{0.0};
    bool is_pole = false;
    int pole_order = 0;
    int zero_order = 0;

    bool finite() const { return !is_pole; }
    // signed order: >0 pole, <0 zero
    int order() const { return is_pole ? pole_order : -zero_order; }
};

// log Gamma(z) for complex z
cplx lgamma_c(cplx z);

// Gamma function of the complex field: Gamma(a)/Gamma(1-abar)
GammaValue cgamma(const FieldExponent& u);
// a(u) = 1/cgamma(u)
GammaValue afactor(const FieldExponent& u);
// (-1)^m
int sign_factor(const FieldExponent& u);
// (1-a, 1-abar)
FieldExponent exponent_reflect(const FieldExponent& u);

// value of cgamma/afactor, throws PoleEncountered on a pole or zero
cplx cgamma_value(const FieldExponent& u);
cplx afactor_value(const FieldExponent& u);
// complex logarithm of cgamma, throws PoleEncountered at poles or zeros
cplx log_cgamma(const FieldExponent& u);

inline int parity_sign(long k) { return (k % 2 == 0) ? 1 : -1; }
// i^k
cplx ipow(long k);

}  // namespace sovkit
