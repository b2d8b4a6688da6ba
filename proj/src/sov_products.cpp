#include <algorithm>
#include <cmath>

#include "sovkit/errors.hpp"
#include "sovkit/sov.hpp"

namespace sovkit {

namespace {

const cplx I(0.0, 1.0);

std::string P(int k) { return "P" + std::to_string(k); }

long bracket(const CPair& u)
{
    cplx d = u.a - u.abar;
    double r = std::round(d.real());
    if (std::abs(d - r) > kDiffTol) throw NonIntegerDifference("bracket of a sign exponent");
    return static_cast<long>(r);
}

CPair sum_pairs(const std::vector<SeparatedPoint>& xs)
{
    CPair s;
    for (auto& x : xs) s = s + x.pair();
    return s;
}

// (i(conj(ybar) - x), i(conj(y) - xbar)): the holomorphic entry of Gamma[i(ybar^* - x)]
FieldExponent cross(const SeparatedPoint& y, const SeparatedPoint& x)
{
    return make_exponent(I * (std::conj(y.xbar()) - x.x()), I * (std::conj(y.x()) - x.xbar()));
}

int parity_of_sum(const std::vector<CPair>& terms)
{
    long s = 0;
    for (auto& t : terms) s += bracket(t);
    return parity_sign(s);
}

void check_branch(cplx z, const char* what)
{
    if (std::abs(z) == 0.0) throw BranchCutHit(std::string(what) + " vanishes");
    if (z.real() < 0.0 && std::abs(z.imag()) <= 1e-6 * std::abs(z))
        throw BranchCutHit(std::string(what) + " lies on the negative real axis");
}

}  // namespace

// ---------------------------------------------------------------- B-B

Diagram bb_diagram(const ChainSpec& c, const std::vector<SeparatedPoint>& xs, const std::vector<SeparatedPoint>& ys,
                   double eps, double eps_prime, cplx p)
{
    const int N = c.N;
    PsiDiagram px = psi_diagram(c, xs, eps, "L");
    PsiDiagram py = psi_diagram(c, ys, eps_prime, "M");
    Diagram d;
    d.external = {{P(0), false, true, 0.0}, {P(N), false, true, p}};
    d.internal = px.d.internal;
    for (auto& v : py.d.internal)
        if (!d.is_internal(v)) d.internal.push_back(v);
    d.edges = px.d.edges;
    for (auto E : py.d.edges) {
        E.e = E.e.dagger();
        d.edges.push_back(E);
    }
    d.prefactor = px.d.prefactor * py.d.prefactor.conjugate();
    d.prefactor.pi_power += 1 + static_cast<int>(std::lround(2.0 * px.pi_exponent));
    d.prefactor.mul_power(P(N), P(0), FieldExponent::from_mw(0, eps + eps_prime));
    return d;
}

IntegralEstimate scalar_bb_quadrature(const ChainSpec& c, const SeparatedPoint& x, const SeparatedPoint& y,
                                      double eps, double eps_prime, cplx p, const QuadratureSpec& q)
{
    if (c.N != 2) throw PreconditionError("direct B-B quadrature is implemented for N = 2");
    ChainSpec c0 = c;
    c0.epsilon = 0.0;
    GammaVector g = build_gamma(c0, Kind::B);
    // Psi_x(p1, p2) = |p| varpi i^{[A]+[B]} a(A) a(B) D_{1-A}(-p1) D_{1-B}(-p2) |p2|^{2 eps}
    auto psi = [&](const SeparatedPoint& s, double e, cplx p1) {
        FieldExponent A = minus_ix(g[0], s), B = plus_ix(g[1], s);
        cplx pre = std::abs(p) * varpi_prefactor({s}, g) * ipow(A.m() + B.m()) * afactor_value(A) * afactor_value(B);
        cplx p2 = p - p1;
        return pre * eval_propagator(1.0 - A, -p1) * eval_propagator(1.0 - B, -p2) * std::pow(std::abs(p2), 2.0 * e);
    };
    QuadratureSpec s = q;
    s.singularity_centers = {0.0, p};
    IntegralEstimate r = integrate_c2(
        [&](const cplx* z) { return psi(x, eps, z[0]) * std::conj(psi(y, eps_prime, z[0])); }, 1, s);
    double scale = std::pow(std::abs(p), -2.0 * (eps + eps_prime)) / kPi;
    r.value *= scale;
    r.err *= scale;
    return r;
}

int bb_sign_factor(const GammaVector& g)
{
    const int N = static_cast<int>(g.size()) / 2 + 1;
    if (N % 2 == 1) return 1;
    std::vector<CPair> t;
    CPair ref = reflect_n(g[N - 1], N - 3);
    for (int k = 1; k <= N - 3; ++k) t.push_back(reflect_n(g[2 * N - 3 - k], k - 1) - ref);
    return parity_of_sum(t);
}

namespace {

ClosedFormFactor bb_form(const std::vector<SeparatedPoint>& xs, const std::vector<SeparatedPoint>& ys,
                         const GammaVector& g, double eps, double eps_prime, bool second)
{
    const int N = static_cast<int>(xs.size()) + 1;
    if (ys.size() != xs.size()) throw PreconditionError("x and y must have the same length");
    if (static_cast<int>(g.size()) != 2 * N - 2) throw PreconditionError("gamma vector must have length 2N-2");
    if (!(eps + eps_prime > 0.0)) throw PreconditionError("eps + eps' must be positive");
    const double es = eps + eps_prime;
    ClosedFormFactor f;
    f.mul_sign(bb_sign_factor(g));
    CPair X = sum_pairs(xs), Y = sum_pairs(ys);
    FieldExponent T = make_exponent(es + I * X.a - I * std::conj(Y.abar), es + I * X.abar - I * std::conj(Y.a));
    f.mul_gamma(second ? T.swapped() : T, 1);
    f.mul_gamma(make_exponent(es, es), -1);
    for (auto& y : ys)
        for (auto& x : xs) {
            // Gamma[i(y^* - xbar)] has pair (i(conj y - xbar), i(conj ybar - x))
            FieldExponent u = make_exponent(I * (std::conj(y.x()) - x.xbar()), I * (std::conj(y.xbar()) - x.x()));
            f.mul_gamma(second ? u.swapped() : u, 1);
        }
    for (int j = 0; j <= N - 3; ++j) {
        CPair gj = reflect_n(g[2 * N - 4 - j], j);
        for (std::size_t k = 0; k < xs.size(); ++k) {
            FieldExponent ux = minus_ix(gj, xs[k]), uy = minus_ix(gj, ys[k]);
            if (!second) {
                f.mul_gamma(ux.swapped(), -1);
                f.mul_gamma(uy.conj(), -1);
            } else {
                f.mul_gamma(ux, -1);
                f.mul_gamma(uy.swapped().conj(), -1);
            }
        }
    }
    return f;
}

}  // namespace

ClosedFormFactor scalar_bb_closed(const std::vector<SeparatedPoint>& xs, const std::vector<SeparatedPoint>& ys,
                                  const GammaVector& g, double eps, double eps_prime)
{
    return bb_form(xs, ys, g, eps, eps_prime, false);
}

ClosedFormFactor scalar_bb_closed_second(const std::vector<SeparatedPoint>& xs,
                                         const std::vector<SeparatedPoint>& ys, const GammaVector& g, double eps,
                                         double eps_prime)
{
    return bb_form(xs, ys, g, eps, eps_prime, true);
}

// ---------------------------------------------------------------- A-B

int ab_sign_factor(const GammaVector& g)
{
    const int N = (static_cast<int>(g.size()) + 1) / 2;
    if (N % 2 == 1) return 1;
    std::vector<CPair> t;
    CPair ref = reflect_n(g[N - 1], N - 1);
    for (int k = 1; k <= N; ++k) t.push_back(reflect_n(g[2 * N - k - 1], k - 1) - ref);
    return parity_of_sum(t);
}

ClosedFormFactor scalar_ab_closed(const std::vector<SeparatedPoint>& xs, const std::vector<SeparatedPoint>& ys,
                                  const GammaVector& g)
{
    const int N = static_cast<int>(xs.size());
    if (static_cast<int>(ys.size()) != N - 1) throw PreconditionError("need N points x and N-1 points y");
    if (static_cast<int>(g.size()) != 2 * N - 1) throw PreconditionError("gamma vector must have length 2N-1");
    for (auto& x : xs)
        for (auto& y : ys)
            if (!((x.nu + y.nu).imag() > 0.0)) throw ConvergenceDomainViolated("Im(nu_k + mu_j) must be positive");

    ClosedFormFactor f;
    f.mul_sign(ab_sign_factor(g));
    f.mul_power("p", "", FieldExponent::from_mw(0, -0.5 * (N - 1)));
    CPair G;
    for (int k = N; k <= 2 * N - 1; ++k) G = G + reflect_n(g[k - 1], k);
    CPair X = sum_pairs(xs);
    // (-ip)^{-G-iX} (i pbar)^{-Gbar-iXbar} = D_e(-ip) = i^{[e]} D_e(p)
    FieldExponent e = make_exponent(G + X * I);
    f.mul_phase(e.m());
    f.mul_power("p", "", e);
    for (auto& x : xs)
        for (auto& y : ys) f.mul_gamma(cross(y, x), 1);
    for (int k = 1; k <= N; ++k) {
        CPair gk = reflect_n(g[2 * N - k - 1], k - 1);
        for (auto& x : xs) f.mul_gamma(minus_ix(gk, x), -1);
        for (auto& y : ys) f.mul_gamma(minus_ix(gk, y).swapped().conj(), -1);
    }
    return f;
}

// ---------------------------------------------------------------- mixed

int mixed_sign_factor(const GammaVector& g)
{
    const int N = static_cast<int>(g.size()) / 2;
    if (N % 2 == 1) return 1;
    std::vector<CPair> t;
    CPair ref = reflect_n(g[N - 1], N - 1);
    for (int k = 1; k <= N - 1; ++k) t.push_back(reflect_n(g[2 * N - k - 1], k - 1) - ref);
    return parity_of_sum(t);
}

ClosedFormFactor scalar_mixed_closed(const std::vector<SeparatedPoint>& ys, const std::vector<SeparatedPoint>& xs,
                                     const GammaVector& g, cplx q1, cplx q2)
{
    const int N = static_cast<int>(xs.size());
    if (static_cast<int>(ys.size()) != N - 1) throw PreconditionError("need N points x and N-1 points y");
    if (static_cast<int>(g.size()) != 2 * N) throw PreconditionError("gamma vector must have length 2N");
    const cplx p = q1 + q2;
    check_branch(I * p, "ip");
    check_branch(I * q2, "iq2");
    check_branch(-I * q1, "-iq1");
    check_branch(1.0 + q1 / q2, "1 + q1/q2");
    check_branch(-q2 / q1, "-q2/q1");

    ClosedFormFactor f;
    f.mul_sign(mixed_sign_factor(g));
    f.mul_power("p", "", FieldExponent::from_mw(0, -0.5 * N));
    f.mul_power("q1", "", FieldExponent::from_mw(0, -0.5 * (N - 1)));
    CPair GN, GN1;
    for (int m = N; m <= 2 * N - 1; ++m) GN = GN + reflect_n(g[m - 1], m);
    for (int m = N + 1; m <= 2 * N - 1; ++m) GN1 = GN1 + reflect_n(g[m - 1], m);

    // (ip)^{-conj(GbarN1)} (-i pbar)^{-conj(GN1)} = D_e(ip) = i^{-[e]} D_e(p)
    FieldExponent e1 = make_exponent(std::conj(GN1.abar), std::conj(GN1.a));
    f.mul_phase(-e1.m());
    f.mul_power("p", "", e1);
    // (i q2)^{-gamma'_{2N}} ... = D_e(i q2)
    FieldExponent e2 = make_exponent(1.0 - g[2 * N - 1]);
    f.mul_phase(-e2.m());
    f.mul_power("q2", "", e2);
    // (-i q1)^{-G_N} ... = D_e(-i q1) = i^{[e]} D_e(q1)
    FieldExponent e3 = make_exponent(GN);
    f.mul_phase(e3.m());
    f.mul_power("q1", "", e3);
    // (1 + q1/q2)^{i Ybar^*} ... = D_e(p) D_{-e}(q2)
    CPair Y = sum_pairs(ys);
    FieldExponent e4 = make_exponent(-I * std::conj(Y.abar), -I * std::conj(Y.a));
    f.mul_power("p", "", e4);
    f.mul_power("q2", "", -e4);
    // (-q2/q1)^{iX} ... = (-1)^{[e]} D_e(q2) D_{-e}(q1)
    CPair X = sum_pairs(xs);
    FieldExponent e5 = make_exponent(X * (-I));
    f.mul_sign(parity_sign(e5.m()));
    f.mul_power("q2", "", e5);
    f.mul_power("q1", "", -e5);

    for (auto& y : ys)
        for (auto& x : xs) f.mul_gamma(cross(y, x), 1);
    for (auto& x : xs)
        for (int k = 1; k <= N - 1; ++k) f.mul_gamma(minus_ix(reflect_n(g[2 * N - k - 1], k - 1), x), -1);
    for (int k = 1; k <= N; ++k)
        for (auto& y : ys) f.mul_gamma(minus_ix(reflect_n(g[2 * N - k - 1], k - 1), y).swapped().conj(), -1);
    return f;
}

// ---------------------------------------------------------------- measure

double measure_mu(const std::vector<SeparatedPoint>& xs)
{
    double mu = 1.0;
    for (std::size_t k = 0; k < xs.size(); ++k)
        for (std::size_t j = k + 1; j < xs.size(); ++j) {
            double dn = xs[k].nu.real() - xs[j].nu.real();
            double dm = xs[k].n() - xs[j].n();
            mu *= dn * dn + 0.25 * dm * dm;
        }
    return mu;
}

double sov_constants(int N, Kind kind)
{
    if (N < 1) throw PreconditionError("N must be >= 1");
    double fact = std::tgamma(N + 1.0);
    if (kind == Kind::B) return 1.0 / (0.5 * std::pow(2.0 * kPi, N + 1) * fact);
    return 1.0 / (std::pow(2.0 * kPi, N) * fact);
}

// ---------------------------------------------------------------- eigen relations

PsiJet psi_position_jet(const ChainSpec& c, const SeparatedPoint& x, cplx p, cplx z1, cplx z2,
                        const QuadratureSpec& q)
{
    if (c.N != 2) throw PreconditionError("eigen checks are implemented for N = 2");
    ChainSpec c0 = c;
    c0.epsilon = 0.0;
    GammaVector g = build_gamma(c0, Kind::B);
    FieldExponent A = minus_ix(g[0], x), B = plus_ix(g[1], x);
    const cplx a = A.a(), b = B.a();
    // w -> w/|p| maps the wave number to 2; the integral is homogeneous of degree 2(wA + wB) - 2
    const double L = std::abs(p);
    const cplx pu = p / L, y1 = L * z1, y2 = L * z2;
    cplx pre = std::pow(kPi, -2.0) * L * varpi_prefactor({x}, g) * std::pow(L, 2.0 * (A.w() + B.w()) - 2.0);
    QuadratureSpec s = q;
    s.singularity_centers = {y1, y2};
    s.wave_number = 2.0;
    auto v = integrate_oscillatory(
        [&](cplx w, cplx* out) {
            cplx t1 = y1 - w, t2 = y2 - w;
            cplx base = eval_propagator(A, t1) * eval_propagator(B, t2) * std::polar(1.0, 2.0 * (pu * w).real());
            out[0] = base;
            out[1] = -a / t1 * base;
            out[2] = -b / t2 * base;
            out[3] = a * b / (t1 * t2) * base;
        },
        4, s, default_damping_sequence());
    PsiJet j;
    j.psi = pre * v.value[0];
    j.d1 = pre * L * v.value[1];
    j.d2 = pre * L * v.value[2];
    j.d12 = pre * L * L * v.value[3];
    j.err = std::abs(pre) * std::max(1.0, L * L) * v.err;
    j.evals = v.evals;
    j.converged = v.converged;
    return j;
}

EigenResidual eigen_translation_check(const ChainSpec& c, const SeparatedPoint& x, cplx p, cplx z1, cplx z2,
                                      const QuadratureSpec& q)
{
    return eigen_translation_from_jet(p, psi_position_jet(c, x, p, z1, z2, q));
}

EigenResidual eigen_translation_from_jet(cplx p, const PsiJet& j)
{
    EigenResidual r;
    r.lhs = -I * (j.d1 + j.d2);
    r.rhs = p * j.psi;
    r.residual = std::abs(r.lhs - r.rhs) / std::abs(r.rhs);
    r.evals = j.evals;
    return r;
}

EigenResidual eigen_b_from_jet(const ChainSpec& c, const SeparatedPoint& x, cplx p, cplx u, cplx z1, cplx z2,
                               const PsiJet& j)
{
    const cplx s1 = c.spin(1).a, s2 = c.spin(2).a;
    const cplx xi1 = c.xi[0], xi2 = c.xi[1];
    EigenResidual r;
    r.lhs = -I * (u + xi1 + I * s1) * j.d2 - I * (u + xi2 - I * s2) * j.d1 + (z1 - z2) * j.d12;
    r.rhs = p * (u - x.x()) * j.psi;
    double scale = std::abs(u - x.x()) > 1e-8 ? std::abs(r.rhs) : std::abs(p * j.psi);
    r.residual = std::abs(r.lhs - r.rhs) / scale;
    r.evals = j.evals;
    return r;
}

EigenResidual eigen_b_check(const ChainSpec& c, const SeparatedPoint& x, cplx p, cplx u, cplx z1, cplx z2,
                            const QuadratureSpec& q)
{
    return eigen_b_from_jet(c, x, p, u, z1, z2, psi_position_jet(c, x, p, z1, z2, q));
}

// ---------------------------------------------------------------- eps -> 0

EpsilonStudy epsilon_limit_study(const ChainSpec& c, const std::vector<double>& eps_list)
{
    if (c.N != 2) throw PreconditionError("the eps study is implemented for N = 2");
    ChainSpec c0 = c;
    c0.epsilon = 0.0;
    GammaVector g = build_gamma(c0, Kind::B);
    // discrete parts compatible with [gamma_1]
    double frac = std::abs(std::remainder((g[0].a - g[0].abar).real(), 1.0));
    int base = frac > 0.25 ? 1 : 0;
    std::vector<int> n2s;
    for (int k = -1; k <= 1; ++k) n2s.push_back(base + 2 * k);
    auto centre = [](int n2) { return 0.2 * n2; };
    auto weight = [](int n2) { return 1.0 / (1.0 + std::abs(n2)); };

    // phi(n, nu) = w_n exp(-(nu - c_n)^2); I depends on nu - mu only, so the
    // sigma integral of phi(x) conj(phi(y)) is done in closed form
    const double a = 1e-3, T = std::asinh(12.0 / a), dt = 0.004;
    const double cB = sov_constants(1, Kind::B);
    EpsilonStudy st;
    st.eps = eps_list;
    for (double eps : eps_list) {
        cplx Q = 0.0;
        for (int nx : n2s)
            for (int ny : n2s) {
                double shift = centre(nx) - centre(ny);
                cplx acc = 0.0;
                for (double t = -T; t <= T + 1e-12; t += dt) {
                    double D = a * std::sinh(t);
                    double K = weight(nx) * weight(ny) * std::sqrt(kPi / 2.0) * std::exp(-0.5 * (D - shift) * (D - shift));
                    if (K < 1e-18) continue;
                    SeparatedPoint x{nx, cplx(D, eps / 4.0)}, y{ny, cplx(0.0, eps / 4.0)};
                    cplx Ival = scalar_bb_closed({x}, {y}, g, eps, eps).evaluate({});
                    acc += K * Ival * a * std::cosh(t) * dt;
                }
                Q += acc;
            }
        st.q.push_back(kPi * cB * cB * Q);
    }
    st.monotone = st.q.size() >= 3;
    for (std::size_t k = 1; k < st.q.size(); ++k) {
        st.cauchy.push_back(std::abs(st.q[k] - st.q[k - 1]));
        if (k >= 2 && !(st.cauchy[k - 1] < st.cauchy[k - 2])) st.monotone = false;
    }
    return st;
}

}  // namespace sovkit
