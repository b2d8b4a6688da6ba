#include "sovkit/gustafson.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "sovkit/errors.hpp"
#include "sovkit/parallel.hpp"

namespace sovkit {

namespace {

constexpr double kTwoPi = 2.0 * kPi;
constexpr double kRayAngle = 0.5;

// Gamma(alpha + su*u), optionally with the pair swapped
struct Factor {
    CPair alpha;
    int su = 1;
    bool swapped = false;
};

struct Profile {
    std::vector<Factor> factors;
    bool has_zeta = false;
    double log_abs = 0.0;  // log|zeta|
    double arg = 0.0;      // arg zeta
};

bool is_integer(cplx d) { return std::abs(d - cplx(std::round(d.real()), 0.0)) < kDiffTol; }

bool admissible(const Profile& p, double n)
{
    for (const auto& f : p.factors)
        if (!is_integer(f.alpha.a - f.alpha.abar + double(f.su) * n)) return false;
    return true;
}

cplx gamma_pair(const CPair& a) { return cgamma(make_exponent(a)).value; }

cplx profile_value(const Profile& p, double n, double c, cplx t)
{
    const cplx it = cplx(0.0, 1.0) * t;
    const CPair u{0.5 * n + c + it, -0.5 * n + c + it};
    // log space: single factors overflow along tilted rays
    cplx lv = 0.0;
    for (const auto& f : p.factors) {
        CPair a = f.alpha + u * double(f.su);
        if (f.swapped) a = a.swapped();
        lv += lgamma_c(a.a) - lgamma_c(1.0 - a.abar);
    }
    if (p.has_zeta) lv += (u.a + u.abar) * p.log_abs + cplx(0.0, 1.0) * (u.a - u.abar) * p.arg;
    cplx v = std::exp(lv);
    if (std::isfinite(v.real()) && std::isfinite(v.imag())) return v;
    // near a pole or zero of a single factor
    v = 1.0;
    for (const auto& f : p.factors) {
        CPair a = f.alpha + u * double(f.su);
        if (f.swapped) a = a.swapped();
        v *= gamma_pair(a);
    }
    if (p.has_zeta) v *= std::exp((u.a + u.abar) * p.log_abs + cplx(0.0, 1.0) * (u.a - u.abar) * p.arg);
    return v;
}

// f(n, t) ~ |n|^kappa for large n at fixed t/n
cplx profile_kappa(const Profile& p)
{
    cplx s = 0.0;
    for (const auto& f : p.factors) s += f.alpha.a + f.alpha.abar - 1.0;
    return s;
}

// rotation per unit n of the profile
double profile_theta(const Profile& p)
{
    int count = 0;
    for (const auto& f : p.factors)
        if ((f.su < 0) != f.swapped) ++count;
    return kPi * (count % 2) + (p.has_zeta ? p.arg : 0.0);
}

bool oscillating_t(const Profile& p) { return p.has_zeta && std::abs(p.log_abs) > 1e-14; }

// The n shells, |n| <= n_max, n in Z + sigma/2.
std::vector<double> shells(int sigma, int n_max)
{
    std::vector<double> ns;
    const double off = 0.5 * sigma;
    for (int k = -n_max - 1; k <= n_max + 1; ++k) {
        double n = k + off;
        if (std::abs(n) <= n_max + 1e-12) ns.push_back(n);
    }
    return ns;
}

// Poles of Gamma(alpha + su*u) at fixed n as a series in nu: the end closest
// to the contour, as a real part.
double pole_series_end(const Factor& f, double n)
{
    const cplx d = f.alpha.a - f.alpha.abar + double(f.su) * n;
    const double k0 = std::max(0.0, -std::round(d.real()));
    // alpha.a + su*(n/2 + nu) = -k
    const cplx nu = (-k0 - f.alpha.a) / double(f.su) - 0.5 * n;
    return nu.real();
}

// Interval of contour positions c separating the pole series over the shells.
std::pair<double, double> separating_window(const Profile& p, const std::vector<double>& ns)
{
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (double n : ns) {
        if (!admissible(p, n)) continue;
        for (const auto& f : p.factors) {
            double e = pole_series_end(f, n);
            if (f.su > 0)
                lo = std::max(lo, e);
            else
                hi = std::min(hi, e);
        }
    }
    return {lo, hi};
}

void check_contour(const Profile& p, const std::vector<double>& ns, double c)
{
    auto [lo, hi] = separating_window(p, ns);
    if (std::abs(c - lo) < 1e-6 || std::abs(c - hi) < 1e-6) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "pole within 1e-6 of Re(nu) = %.9g", c);
        throw PoleOnContour(buf);
    }
    if (!(c > lo && c < hi)) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "contour Re(nu) = %.9g does not separate the pole series (window %.9g .. %.9g)",
                      c, lo, hi);
        throw PreconditionError(buf);
    }
}

std::vector<double> choose_shifts(const Profile& p, const std::vector<double>& ns, int nvar,
                                  const std::vector<double>& given)
{
    if (!given.empty()) {
        if (int(given.size()) != nvar) throw PreconditionError("contour_shifts must have one entry per variable");
        for (double c : given) check_contour(p, ns, c);
        return given;
    }
    auto [lo, hi] = separating_window(p, ns);
    if (!(hi - lo > 2e-6)) throw PreconditionError("no straight contour separates the pole series");
    double c = (lo < 0.0 && hi > 0.0) ? 0.0 : 0.5 * (lo + hi);
    check_contour(p, ns, c);
    return std::vector<double>(nvar, c);
}

struct Moments {
    cplx inner[3];
    cplx full[3];
    double err = 0.0;
    long evals = 0;
};

// int_{T}^{inf} g(sgn t) dt for g ~ t^beta (c0 + c1/t + ...): fitted on
// [T, 16T] and integrated in closed form.
cplx power_tail(const std::function<cplx(cplx)>& g, double T, double sgn, cplx beta)
{
    constexpr int kPts = 9, kTerms = 4;
    Eigen::MatrixXcd A(kPts, kTerms);
    Eigen::VectorXcd b(kPts);
    for (int i = 0; i < kPts; ++i) {
        double t = T * std::pow(16.0, double(i) / (kPts - 1));
        b(i) = g(sgn * t) / std::pow(t / T, beta);
        for (int j = 0; j < kTerms; ++j) A(i, j) = std::pow(T / t, double(j));
    }
    Eigen::VectorXcd c = A.colPivHouseholderQr().solve(b);
    cplx v = 0.0;
    for (int j = 0; j < kTerms; ++j) v += c(j) * T / (double(j) - 1.0 - beta);
    return v;
}

Moments moments(const Profile& p, double n, double c, int kmax, double cutoff, bool tails, double qtol)
{
    using boost::math::quadrature::exp_sinh;
    using boost::math::quadrature::gauss_kronrod;
    thread_local exp_sinh<double> es;
    Moments m;
    const bool osc = oscillating_t(p);
    const double phi = osc ? (p.log_abs > 0 ? kRayAngle : -kRayAngle) : 0.0;
    const cplx eright = std::polar(1.0, phi);
    const cplx eleft = std::polar(1.0, -phi);
    const cplx kappa = profile_kappa(p);
    // past this the Gamma phases lose precision
    const double far = 1e4 * std::max(1.0, cutoff);
    for (int k = 0; k <= kmax; ++k) {
        std::function<cplx(cplx)> g = [&](cplx t) {
            ++m.evals;
            cplx tk = 1.0;
            for (int j = 0; j < k; ++j) tk *= t;
            return tk * profile_value(p, n, c, t);
        };
        double err = 0.0;
        cplx in = gauss_kronrod<double, 31>::integrate([&](double t) { return g(t); }, -cutoff, cutoff, 12, qtol,
                                                       &err);
        m.inner[k] = in;
        m.err += err;
        m.full[k] = in;
        if (!tails) continue;
        cplx r = 0.0, l = 0.0;
        double e1 = 0.0, e2 = 0.0;
        if (osc) {
            auto gr = [&](double s) { return std::abs(s) > far ? cplx(0.0) : eright * g(cutoff + s * eright); };
            auto gl = [&](double s) { return std::abs(s) > far ? cplx(0.0) : eleft * g(-cutoff - s * eleft); };
            r = es.integrate(gr, qtol, &e1);
            l = es.integrate(gl, qtol, &e2);
        } else {
            const double vmax = std::log(far / cutoff);
            auto gr = [&](double v) {
                double t = cutoff * std::exp(v);
                return t * g(t);
            };
            auto gl = [&](double v) {
                double t = cutoff * std::exp(v);
                return t * g(-t);
            };
            r = gauss_kronrod<double, 31>::integrate(gr, 0.0, vmax, 10, qtol, &e1);
            l = gauss_kronrod<double, 31>::integrate(gl, 0.0, vmax, 10, qtol, &e2);
            const cplx beta = kappa + double(k);
            r += power_tail(g, far, 1.0, beta);
            l += power_tail(g, far, -1.0, beta);
        }
        if (!std::isfinite(std::abs(r)) || !std::isfinite(std::abs(l)))
            throw NotConverged("tail integral is not finite");
        m.full[k] += r + l;
        m.err += e1 + e2;
    }
    return m;
}

// Partial sums P(x_i) of one side, x_i = |n| of the last shell. Fits
// P(x) = P + e^{i x theta} x^{-q} sum_j d_j x^{-j} on the last `window` points.
cplx extrapolate(const std::vector<cplx>& partial, const std::vector<double>& x, cplx q, double theta,
                 int window, int terms)
{
    const int n = int(partial.size());
    window = std::min(window, n);
    terms = std::min(terms, window - 2);
    if (terms < 1) return partial.back();
    Eigen::MatrixXcd A(window, terms + 1);
    Eigen::VectorXcd b(window);
    const double xr = x.back();
    for (int i = 0; i < window; ++i) {
        int idx = n - window + i;
        double xi = x[idx];
        cplx base = std::polar(1.0, theta * (xi - xr)) * std::pow(xi / xr, -q);
        A(i, 0) = 1.0;
        for (int j = 0; j < terms; ++j) A(i, j + 1) = base * std::pow(xr / xi, double(j));
        b(i) = partial[idx];
    }
    Eigen::VectorXcd sol = A.colPivHouseholderQr().solve(b);
    return sol(0);
}

bool rotation_trivial(double theta)
{
    return std::abs(std::remainder(theta, kTwoPi)) < 1e-12;
}

// Sum over shells of s(n) n^j M_k(n), s(n) = e^{i pi n sgn}.
struct SumSet {
    cplx v[3][3];  // [j][k]
};

struct Engine {
    Profile prof;
    std::vector<double> ns;
    std::vector<Moments> mom;  // per shell, per variable shift group
    int kmax = 0;
    bool accelerate = true;
    bool exponential = false;
    cplx kappa = 0.0;
    double theta = 0.0;
};

// sign: 0 none, +1 e^{i pi n}, -1 e^{-i pi n}; variant picks the fit window
cplx shell_sum(const Engine& e, const std::vector<Moments>& mom, int j, int k, int sign, bool full, int variant)
{
    auto term = [&](std::size_t i) {
        double n = e.ns[i];
        cplx v = full ? mom[i].full[k] : mom[i].inner[k];
        v *= std::pow(n, double(j));
        if (sign != 0) v *= std::polar(1.0, kPi * n * sign);
        return v;
    };
    cplx center = 0.0;
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < e.ns.size(); ++i) {
        if (e.ns[i] > 0)
            pos.push_back(i);
        else if (e.ns[i] < 0)
            neg.push_back(i);
        else
            center += term(i);
    }
    std::sort(neg.begin(), neg.end(), [&](std::size_t a, std::size_t b) { return e.ns[a] > e.ns[b]; });
    const bool fit = full && e.accelerate && !e.exponential;
    const double theta = e.theta + kPi * sign;
    // term decay |n|^{-p}
    const cplx p = -(e.kappa + 1.0 + double(j + k));
    const bool trivial = rotation_trivial(theta);
    const cplx q = trivial ? p - 1.0 : p;
    const int window = variant == 0 ? 24 : 18;
    const int terms = variant == 0 ? 6 : 5;
    cplx total = center;
    for (int side = 0; side < 2; ++side) {
        const auto& idx = side == 0 ? pos : neg;
        std::vector<cplx> partial;
        std::vector<double> xs;
        cplx acc = 0.0;
        for (std::size_t i : idx) {
            acc += term(i);
            partial.push_back(acc);
            xs.push_back(std::abs(e.ns[i]));
        }
        if (partial.empty()) continue;
        if (fit) {
            // drop the last shells for the alternate fit
            std::vector<cplx> pp = partial;
            std::vector<double> xx = xs;
            if (variant == 1 && pp.size() > 30) {
                pp.resize(pp.size() - 4);
                xx.resize(xx.size() - 4);
            }
            total += extrapolate(pp, xx, q, side == 0 ? theta : -theta, window, terms);
        } else {
            total += partial.back();
        }
    }
    return total;
}

void check_domain(const Engine& e, int jkmax, int sign_used)
{
    const double kr = e.kappa.real();
    // t-integrability of t^kmax f
    if (e.exponential) {
        if (!(kr + e.kmax < 0.0)) throw ConvergenceDomainViolated("nu integrals do not converge");
        return;
    }
    if (!(kr + e.kmax < -1.0)) throw ConvergenceDomainViolated("nu integrals do not converge");
    const double p = -(kr + 1.0 + jkmax);
    bool trivial = rotation_trivial(e.theta + kPi * sign_used);
    if (trivial ? !(p > 1.0) : !(p > 0.0))
        throw ConvergenceDomainViolated("discrete sums do not converge for these parameters");
}

struct Evaluated {
    IntegralEstimate est;
    std::vector<double> shifts;
};

// N = 1: sum_n int f; N = 2: kernel sgn^{n1-n2} [(t1-t2-i delta)^2 + (n1-n2)^2/4]
Evaluated evaluate(const Profile& prof, int N, bool kernel_sign, const MBSpec& spec)
{
    if (spec.n_max < 1 || !(spec.nu_cutoff > 0.0)) throw PreconditionError("n_max >= 1 and nu_cutoff > 0 required");
    if (spec.sigma != 0 && spec.sigma != 1) throw PreconditionError("sigma must be 0 or 1");
    Engine e;
    e.prof = prof;
    e.ns = shells(spec.sigma, spec.n_max);
    e.kmax = N == 1 ? 0 : 2;
    e.accelerate = spec.accelerate;
    e.exponential = oscillating_t(prof);
    e.kappa = profile_kappa(prof);
    e.theta = profile_theta(prof);

    Evaluated out;
    // parity-incompatible sigma: every term vanishes
    bool any = false;
    for (double n : e.ns) any = any || admissible(prof, n);
    if (!any) {
        out.est.value = 0.0;
        out.est.converged = true;
        out.shifts = std::vector<double>(N, 0.0);
        return out;
    }
    check_domain(e, N == 1 ? 0 : 2, (N == 2 && kernel_sign) ? 1 : 0);
    out.shifts = choose_shifts(prof, e.ns, N, spec.contour_shifts);

    const double qtol = std::min(1e-10, 1e-2 * spec.tol);
    // distinct shifts need their own moments
    std::vector<std::vector<Moments>> mom(N == 2 && out.shifts[0] != out.shifts[1] ? 2 : 1);
    for (std::size_t g = 0; g < mom.size(); ++g) {
        mom[g].resize(e.ns.size());
        const double c = out.shifts[g];
        parallel_for(e.ns.size(), [&](std::size_t i) {
            if (!admissible(prof, e.ns[i])) return;
            mom[g][i] = moments(prof, e.ns[i], c, e.kmax, spec.nu_cutoff, spec.accelerate, qtol);
        });
    }
    long evals = 0;
    double qerr = 0.0;
    for (const auto& mg : mom)
        for (const auto& m : mg) {
            evals += m.evals;
            qerr += m.err;
        }

    auto total = [&](bool full, int variant) -> cplx {
        if (N == 1) return shell_sum(e, mom[0], 0, 0, 0, full, variant);
        const auto& m1 = mom[0];
        const auto& m2 = mom.back();
        const int s1 = kernel_sign ? 1 : 0;
        const int s2 = kernel_sign ? -1 : 0;
        auto A = [&](int j, int k) { return shell_sum(e, m1, j, k, s1, full, variant); };
        auto B = [&](int j, int k) { return shell_sum(e, m2, j, k, s2, full, variant); };
        const cplx a00 = A(0, 0), a01 = A(0, 1), a02 = A(0, 2), a10 = A(1, 0), a20 = A(2, 0);
        const cplx b00 = B(0, 0), b01 = B(0, 1), b02 = B(0, 2), b10 = B(1, 0), b20 = B(2, 0);
        const double delta = out.shifts[0] - out.shifts[1];
        const cplx I(0.0, 1.0);
        return a02 * b00 + a00 * b02 - 2.0 * a01 * b01 - 2.0 * I * delta * (a01 * b00 - a00 * b01) -
               delta * delta * a00 * b00 + 0.25 * (a20 * b00 - 2.0 * a10 * b10 + a00 * b20);
    };
    const bool full = spec.accelerate;
    cplx v = total(full, 0);
    double ferr = 0.0;
    if (full && !e.exponential) ferr = std::abs(v - total(full, 1));
    out.est.value = v;
    out.est.err = ferr + qerr;
    out.est.evals = evals;
    out.est.converged = std::isfinite(std::abs(v)) && out.est.err <= spec.tol * std::max(1.0, std::abs(v));
    return out;
}

void check_zeta(cplx zeta)
{
    if (std::abs(zeta.imag()) <= 1e-12 * std::max(1.0, std::abs(zeta)) && zeta.real() <= 0.0)
        throw BranchCutHit("zeta on the negative real axis");
}

CPair pair_sum(const std::vector<CPair>& v)
{
    CPair s;
    for (const auto& x : v) s = s + x;
    return s;
}

cplx factorial(int n) { return std::tgamma(n + 1.0); }

Profile gustafson_profile(const MBParams& p)
{
    Profile prof;
    for (const auto& z : p.z_list) prof.factors.push_back({z, -1, false});
    for (const auto& w : p.w_list) prof.factors.push_back({w, +1, false});
    return prof;
}

CPair ipair(const SeparatedPoint& x) { return CPair{x.x(), x.xbar()} * cplx(0.0, 1.0); }

}  // namespace

cplx zeta_bracket(cplx zeta, const CPair& P)
{
    check_zeta(zeta);
    const cplx l = std::log(zeta);
    return std::exp(P.a * l + P.abar * std::conj(l));
}

cplx gustafson_first_rhs(int N, const MBParams& params)
{
    cplx v = factorial(N);
    for (const auto& z : params.z_list)
        for (const auto& w : params.w_list) v *= gamma_pair(z + w);
    return v / gamma_pair(pair_sum(params.z_list) + pair_sum(params.w_list));
}

cplx gustafson_second_rhs(int N, const MBParams& params, cplx zeta)
{
    (void)N;
    check_zeta(zeta);
    const CPair Z = pair_sum(params.z_list);
    const CPair W = pair_sum(params.w_list);
    cplx v = zeta_bracket(zeta, Z) / zeta_bracket(1.0 + zeta, Z + W);
    for (const auto& z : params.z_list)
        for (const auto& w : params.w_list) v *= gamma_pair(z + w);
    return v;
}

MBResult gustafson_first(int N, const MBParams& params, const MBSpec& spec)
{
    if (N != 1 && N != 2) throw PreconditionError("N must be 1 or 2");
    if (int(params.z_list.size()) != N + 1 || int(params.w_list.size()) != N + 1)
        throw PreconditionError("need N+1 z and w pairs");
    Evaluated ev = evaluate(gustafson_profile(params), N, true, spec);
    MBResult r;
    r.lhs = ev.est;
    r.lhs.value /= std::pow(kTwoPi, N);
    r.lhs.err /= std::pow(kTwoPi, N);
    r.rhs = gustafson_first_rhs(N, params);
    r.contour_shifts = ev.shifts;
    return r;
}

MBResult gustafson_second(int N, const MBParams& params, cplx zeta, const MBSpec& spec)
{
    if (N != 1 && N != 2) throw PreconditionError("N must be 1 or 2");
    if (int(params.z_list.size()) != N || int(params.w_list.size()) != N)
        throw PreconditionError("need N z and w pairs");
    check_zeta(zeta);
    Profile prof = gustafson_profile(params);
    prof.has_zeta = true;
    prof.log_abs = std::log(std::abs(zeta));
    prof.arg = std::arg(zeta);
    Evaluated ev = evaluate(prof, N, true, spec);
    const double norm = std::pow(kTwoPi, N) * factorial(N).real();
    MBResult r;
    r.lhs = ev.est;
    r.lhs.value /= norm;
    r.lhs.err /= norm;
    r.rhs = gustafson_second_rhs(N, params, zeta);
    r.contour_shifts = ev.shifts;
    return r;
}

MBParams j_omega_params(const std::vector<SeparatedPoint>& x, const std::vector<SeparatedPoint>& x_prime,
                        const CPair& Z, cplx omega)
{
    if (x.size() != x_prime.size()) throw PreconditionError("x and x' must have the same length");
    MBParams p;
    const CPair Zw = Z - omega;
    for (const auto& xk : x) p.z_list.push_back(ipair(xk));
    p.z_list.push_back(Zw);
    for (const auto& xk : x_prime) p.w_list.push_back(-ipair(xk));
    p.w_list.push_back(Zw);
    return p;
}

namespace {

// (-1)^{sum_{k<j} [i(x_k - x_j)]}
double x_sign(const std::vector<SeparatedPoint>& x)
{
    long e = 0;
    for (std::size_t k = 0; k < x.size(); ++k)
        for (std::size_t j = k + 1; j < x.size(); ++j) e += -(x[k].n2 - x[j].n2) / 2;
    return parity_sign(e);
}

}  // namespace

JOmegaResult j_omega_check(const std::vector<SeparatedPoint>& x, const std::vector<SeparatedPoint>& x_prime,
                           const CPair& Z, cplx omega, cplx zeta, const MBSpec& spec)
{
    const int N = int(x.size()) + 1;
    if (N != 1 && N != 2) throw PreconditionError("j_omega_check supports N = 1, 2");
    check_zeta(zeta);
    if (!is_integer(Z.a - Z.abar)) throw PreconditionError("Z - Zbar must be an integer");
    // Gamma[Z - omega +- iy] then needs integer discrete parts of y
    if (spec.sigma != 0) throw PreconditionError("J_omega needs sigma = 0 for integer [Z]");
    for (const auto* v : {&x, &x_prime})
        for (const auto& p : *v)
            if (((p.n2 - spec.sigma) % 2 + 2) % 2 != 0)
                throw PreconditionError("discrete parts of x, x' must lie in Z + sigma/2");
    const MBParams gp = j_omega_params(x, x_prime, Z, omega);
    const CPair Zw = Z - omega;
    const double sgn = x_sign(x);
    const cplx gz = gamma_pair(Z);
    const cplx gz2N = std::pow(gz, 2 * N);

    // integrand in u = iy: Gamma[Zw + u] Gamma[Zw - u] Gamma[swap(ix - u)] Gamma[u - ix']
    Profile prof;
    prof.factors.push_back({Zw, +1, false});
    prof.factors.push_back({Zw, -1, false});
    for (const auto& xk : x) prof.factors.push_back({ipair(xk), -1, true});
    for (const auto& xk : x_prime) prof.factors.push_back({-ipair(xk), +1, false});
    prof.has_zeta = true;
    prof.log_abs = std::log(std::abs(zeta));
    prof.arg = std::arg(zeta);

    JOmegaResult r;
    // mu_N(y) carries no sign
    Evaluated ev = evaluate(prof, N, false, spec);
    const cplx norm = kPi * kPi * sov_constants(N, Kind::B) / gz2N;
    r.lhs = ev.est;
    r.lhs.value *= norm;
    r.lhs.err *= std::abs(norm);
    r.contour_shifts = ev.shifts;

    CPair X, Xp;
    for (const auto& xk : x) X = X + CPair{xk.x(), xk.xbar()};
    for (const auto& xk : x_prime) Xp = Xp + CPair{xk.x(), xk.xbar()};
    const cplx I(0.0, 1.0);
    cplx rhs = kPi * sgn * zeta_bracket(zeta, Zw + X * I) / zeta_bracket(1.0 + zeta, Zw * 2.0 + (X - Xp) * I);
    rhs *= gamma_pair(Zw * 2.0) / (gz * gz);
    for (std::size_t k = 0; k < x.size(); ++k)
        rhs *= gamma_pair(Zw + ipair(x[k])) * gamma_pair(Zw - ipair(x_prime[k])) / (gz * gz);
    for (const auto& xk : x)
        for (const auto& xj : x_prime) rhs *= gamma_pair(ipair(xk) - ipair(xj));
    r.rhs = rhs;

    const cplx conv = kPi * sgn / gz2N;
    MBSpec s2 = spec;
    s2.contour_shifts = ev.shifts;
    r.lhs_second = conv * gustafson_second(N, gp, zeta, s2).lhs.value;
    r.rhs_second = conv * gustafson_second_rhs(N, gp, zeta);
    return r;
}

SignIdentityCheck j_omega_sign_identities(int N, int sigma, std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> di(-3, 3);
    std::uniform_real_distribution<double> dr(-2.0, 2.0);
    std::vector<SeparatedPoint> y(N), x(N - 1);
    for (auto& p : y) {
        int m = di(rng);
        double nu = dr(rng);
        p = {2 * m + sigma, nu};
    }
    for (auto& p : x) {
        int m = di(rng);
        double nu = dr(rng);
        p = {2 * m + sigma, nu};
    }
    // [i(a - b)] for separated points = -(n_a - n_b)
    auto br = [](const SeparatedPoint& a, const SeparatedPoint& b) { return -(a.n2 - b.n2) / 2; };

    SignIdentityCheck out;
    cplx lhs1 = 1.0;
    double mu = 1.0;
    long e1 = 0;
    for (int k = 0; k < N; ++k)
        for (int j = 0; j < N; ++j) {
            if (j == k) continue;
            lhs1 /= gamma_pair(ipair(y[k]) - ipair(y[j]));
            if (k < j) {
                double dnu = y[k].nu.real() - y[j].nu.real();
                double dn = 0.5 * (y[k].n2 - y[j].n2);
                mu *= dnu * dnu + 0.25 * dn * dn;
                e1 += br(y[k], y[j]);
            }
        }
    const double rhs1 = mu * parity_sign(e1);
    out.mu_rel_err = std::abs(lhs1 - rhs1) / std::max(1e-300, std::abs(rhs1));

    cplx lhs2 = 1.0, rhs2 = 1.0;
    long e2 = 0;
    for (int j = 0; j < N; ++j)
        for (int k = 0; k < N - 1; ++k) {
            const CPair d = ipair(x[k]) - ipair(y[j]);
            lhs2 *= gamma_pair(d.swapped());
            rhs2 *= gamma_pair(d);
            e2 += br(y[j], x[k]);
        }
    rhs2 *= double(parity_sign(e2));
    out.swap_rel_err = std::abs(lhs2 - rhs2) / std::max(1e-300, std::abs(rhs2));

    long e3 = 0;
    for (int k = 0; k < N - 1; ++k)
        for (int j = k + 1; j < N - 1; ++j) e3 += br(x[k], x[j]);
    out.parity_ok = ((e1 + e2 - e3) % 2) == 0;
    return out;
}

std::vector<ConvergenceRow> convergence_table(const MBEvaluator& eval, const MBSpec& base,
                                              const std::vector<std::pair<int, double>>& steps)
{
    std::vector<ConvergenceRow> rows;
    for (const auto& [nm, cut] : steps) {
        MBSpec s = base;
        s.n_max = nm;
        s.nu_cutoff = cut;
        ConvergenceRow row;
        row.n_max = nm;
        row.nu_cutoff = cut;
        s.accelerate = false;
        MBResult raw = eval(s);
        row.raw = raw.lhs.value;
        row.raw_err = std::abs(raw.lhs.value - raw.rhs);
        s.accelerate = true;
        MBResult acc = eval(s);
        row.accel = acc.lhs.value;
        row.accel_err = std::abs(acc.lhs.value - acc.rhs);
        rows.push_back(row);
    }
    return rows;
}

bool table_monotone(const std::vector<ConvergenceRow>& rows, bool accelerated, double floor)
{
    for (std::size_t i = 1; i < rows.size(); ++i) {
        double prev = accelerated ? rows[i - 1].accel_err : rows[i - 1].raw_err;
        double cur = accelerated ? rows[i].accel_err : rows[i].raw_err;
        if (cur > std::max(prev, floor)) return false;
    }
    return true;
}

}  // namespace sovkit
