#include "sovkit/plane.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

#include "sovkit/errors.hpp"
#include "sovkit/parallel.hpp"

namespace sovkit {

namespace {

// 8-point Gauss-Legendre on [-1, 1]
const double kGLx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                        -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                        0.7966664774136267,  0.9602898564975363};
const double kGLw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                        0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                        0.2223810344533745, 0.1012285362903763};

constexpr double kThetaOffset = 0.1234567;
constexpr int kPuPower = 6;

struct Ring {
    double r;       // radius around the center
    double weight;  // radial weight including the Jacobian r (or r^2 for log panels)
    double t;       // log radius, for tail fits
};

struct Layout {
    std::vector<cplx> centers;
    double spread = 1.0;
    double near = 1.0;
};

Layout make_layout(const QuadratureSpec& spec)
{
    Layout L;
    L.centers = spec.singularity_centers;
    if (L.centers.empty()) L.centers.push_back(0.0);
    double spread = 0.0, near = 1e300;
    for (std::size_t i = 0; i < L.centers.size(); ++i)
        for (std::size_t j = i + 1; j < L.centers.size(); ++j) {
            double d = std::abs(L.centers[i] - L.centers[j]);
            spread = std::max(spread, d);
            near = std::min(near, d);
        }
    L.spread = std::max(1.0, spread);
    L.near = (L.centers.size() > 1) ? std::min(1.0, near) : 1.0;
    if (L.near <= 0.0) throw PreconditionError("coincident singularity centers");
    return L;
}

void add_panels_log(std::vector<Ring>& rings, double t0, double t1, double h)
{
    int n = std::max(1, static_cast<int>(std::ceil((t1 - t0) / h)));
    double hh = (t1 - t0) / n;
    for (int p = 0; p < n; ++p) {
        double a = t0 + p * hh;
        for (int q = 0; q < 8; ++q) {
            double t = a + 0.5 * hh * (kGLx[q] + 1.0);
            double r = std::exp(t);
            rings.push_back({r, 0.5 * hh * kGLw[q] * r * r, t});
        }
    }
}

void add_panels_lin(std::vector<Ring>& rings, double r0, double r1, double h)
{
    int n = std::max(1, static_cast<int>(std::ceil((r1 - r0) / h)));
    double hh = (r1 - r0) / n;
    for (int p = 0; p < n; ++p) {
        double a = r0 + p * hh;
        for (int q = 0; q < 8; ++q) {
            double r = a + 0.5 * hh * (kGLx[q] + 1.0);
            rings.push_back({r, 0.5 * hh * kGLw[q] * r, std::log(r)});
        }
    }
}

struct LevelResult {
    std::vector<cplx> value;
    long evals = 0;
    bool tails_ok = true;
    double tail_err = 0.0;
};

// Tail of G(t) ~ C e^{lambda t} beyond the end node; G includes r^2.
// outer: integrate to +inf, else from -inf.
bool tail_fit(cplx G1, double t1, cplx G2, double t2, double tend, bool outer, cplx& tail)
{
    tail = 0.0;
    if (std::abs(G1) == 0.0 && std::abs(G2) == 0.0) return true;
    if (std::abs(G1) == 0.0 || std::abs(G2) == 0.0) return true;
    cplx lam = std::log(G2 / G1) / (t2 - t1);
    if (outer) {
        if (lam.real() > -0.02) return false;
        cplx Gend = G2 * std::exp(lam * (tend - t2));
        tail = -Gend / lam;
    } else {
        if (lam.real() < 0.02) return false;
        cplx Gend = G1 * std::exp(lam * (tend - t1));
        tail = Gend / lam;
    }
    return true;
}

LevelResult run_level(const Integrand1& f, int nout, const QuadratureSpec& spec, const Layout& L,
                      int level, double damping)
{
    const double h = 1.0 / std::ldexp(1.0, level);
    const int base_theta = 24 << level;
    const double k = spec.wave_number;
    const std::size_t nc = L.centers.size();

    LevelResult res;
    res.value.assign(nout, 0.0);

    for (std::size_t ic = 0; ic < nc; ++ic) {
        const cplx c = L.centers[ic];
        std::vector<Ring> rings;
        const double t_lo = std::log(1e-5 * L.near);
        bool outer_tail = true;
        if (damping > 0.0) {
            double r0 = 2.0 * L.spread;
            double rmax = std::abs(c) + std::sqrt(37.0 / damping);
            add_panels_log(rings, t_lo, std::log(r0), h);
            double lin = (k > 0.0) ? std::min(1.0, 4.0 / k) : 1.0;
            if (rmax > r0) add_panels_lin(rings, r0, rmax, lin * h);
            outer_tail = false;
        } else {
            add_panels_log(rings, t_lo, std::log(spec.outer_cutoff * L.spread), h);
        }

        const std::size_t nr = rings.size();
        std::vector<std::vector<cplx>> ringval(nr, std::vector<cplx>(nout, 0.0));
        std::vector<std::vector<double>> ringabs(nr, std::vector<double>(nout, 0.0));
        std::vector<long> ringevals(nr, 0);

        parallel_for(nr, [&](std::size_t ir) {
            const Ring& R = rings[ir];
            double kr = k * (R.r + std::abs(c));
            int nth = base_theta;
            if (k > 0.0) nth += static_cast<int>(std::ceil(1.1 * kr + 10.0 * std::cbrt(kr)));
            nth = (nth + 7) / 8 * 8;
            const double dth = 2.0 * kPi / nth;
            std::vector<cplx> buf(nout);
            std::vector<cplx>& acc = ringval[ir];
            std::vector<double>& aabs = ringabs[ir];
            for (int j = 0; j < nth; ++j) {
                double th = kThetaOffset + j * dth;
                cplx z = c + std::polar(R.r, th);
                // partition of unity weight for this center
                double s = 0.0;
                bool skip = false;
                for (std::size_t jc = 0; jc < nc; ++jc) {
                    if (jc == ic) {
                        s += 1.0;
                        continue;
                    }
                    double dj = std::abs(z - L.centers[jc]);
                    if (dj == 0.0) {
                        skip = true;
                        break;
                    }
                    s += std::pow(R.r / dj, kPuPower);
                }
                if (skip) continue;
                double wpu = 1.0 / s;
                if (wpu < 1e-300) continue;
                double damp = (damping > 0.0) ? std::exp(-damping * std::norm(z)) : 1.0;
                f(z, buf.data());
                for (int q = 0; q < nout; ++q) {
                    acc[q] += buf[q] * (wpu * damp * dth);
                    aabs[q] += std::abs(buf[q]) * (wpu * damp * dth);
                }
            }
            ringevals[ir] = nth;
        });

        for (std::size_t ir = 0; ir < nr; ++ir) {
            for (int q = 0; q < nout; ++q) res.value[q] += ringval[ir][q] * rings[ir].weight;
            res.evals += ringevals[ir];
        }

        // tails: inner always, outer only without damping; the error is the
        // spread between fits from the first and the second panel
        // ring means lost in rounding (angular cancellation) count as zero
        auto G = [&](std::size_t i, int q) {
            if (std::abs(ringval[i][q]) <= 1e-13 * ringabs[i][q]) return cplx(0.0);
            return ringval[i][q] * rings[i].r * rings[i].r;
        };
        const std::size_t o = std::min<std::size_t>(8, nr - 2);
        for (int q = 0; q < nout; ++q) {
            cplx t1, t2;
            bool ok1 = tail_fit(G(0, q), rings[0].t, G(1, q), rings[1].t, t_lo, false, t1);
            bool ok2 = tail_fit(G(o, q), rings[o].t, G(o + 1, q), rings[o + 1].t, t_lo, false, t2);
            if (!ok1) res.tails_ok = false;
            res.value[q] += t1;
            res.tail_err = std::max(res.tail_err, ok2 ? std::abs(t1 - t2) : std::abs(t1));
            if (outer_tail) {
                double tend = std::log(spec.outer_cutoff * L.spread);
                std::size_t a = nr - 2, b = nr - 2 - o;
                ok1 = tail_fit(G(a, q), rings[a].t, G(a + 1, q), rings[a + 1].t, tend, true, t1);
                ok2 = tail_fit(G(b, q), rings[b].t, G(b + 1, q), rings[b + 1].t, tend, true, t2);
                if (!ok1) res.tails_ok = false;
                res.value[q] += t1;
                res.tail_err = std::max(res.tail_err, ok2 ? std::abs(t1 - t2) : std::abs(t1));
            }
        }
    }
    return res;
}

VectorEstimate integrate_adaptive(const Integrand1& f, int nout, const QuadratureSpec& spec, double damping)
{
    if (nout < 1) throw PreconditionError("integrand must have at least one component");
    if (!(spec.abs_tol > 0.0) || !(spec.rel_tol > 0.0) || !(spec.outer_cutoff > 0.0))
        throw PreconditionError("quadrature tolerances and cutoff must be positive");
    Layout L = make_layout(spec);
    VectorEstimate est;
    std::vector<cplx> prev;
    for (int level = spec.min_level; level <= spec.max_level; ++level) {
        LevelResult lr = run_level(f, nout, spec, L, level, damping);
        est.evals += lr.evals;
        if (!prev.empty()) {
            double diff = 0.0, mag = 0.0;
            for (int q = 0; q < nout; ++q) {
                diff = std::max(diff, std::abs(lr.value[q] - prev[q]));
                mag = std::max(mag, std::abs(lr.value[q]));
            }
            est.value = lr.value;
            est.err = diff + lr.tail_err;
            est.converged = lr.tails_ok && est.err <= std::max(spec.abs_tol, spec.rel_tol * mag);
            if (est.converged) return est;
        } else {
            est.value = lr.value;
            est.err = 1e300;
        }
        if (!lr.tails_ok) {
            est.converged = false;
            est.err = 1e300;
            return est;
        }
        prev = lr.value;
        if (est.evals > spec.max_evals) break;
    }
    return est;
}

}  // namespace

cplx eval_propagator(const FieldExponent& alpha, cplx z)
{
    double r = std::abs(z);
    if (r == 0.0) throw OriginSingularity("propagator at z = 0");
    return std::exp(-2.0 * alpha.w() * std::log(r)) * std::polar(1.0, -alpha.m() * std::arg(z));
}

VectorEstimate integrate_plane(const Integrand1& f, int nout, const QuadratureSpec& spec)
{
    return integrate_adaptive(f, nout, spec, spec.damping);
}

IntegralEstimate integrate_c2(const IntegrandK& f, int k, const QuadratureSpec& spec)
{
    if (k < 1 || k > 3) throw PreconditionError("integrate_c2 supports k in {1,2,3}");
    if (k == 1) {
        auto v = integrate_plane([&](cplx z, cplx* out) { out[0] = f(&z); }, 1, spec);
        return {v.value[0], v.err, v.evals, v.converged};
    }
    // iterate: outer variable z_0, inner integral over the remaining k-1 variables
    long inner_evals = 0;
    bool inner_ok = true;
    double inner_err = 0.0;
    std::mutex mu;
    auto outer = [&](cplx z0, cplx* out) {
        QuadratureSpec is = spec;
        if (spec.couple_variables) is.singularity_centers.push_back(z0);
        is.max_level = std::min(spec.max_level, 2);
        is.rel_tol = spec.rel_tol;
        IntegrandK g = [&](const cplx* zr) {
            cplx all[3];
            all[0] = z0;
            for (int i = 1; i < k; ++i) all[i] = zr[i - 1];
            return f(all);
        };
        IntegralEstimate e = integrate_c2(g, k - 1, is);
        std::lock_guard<std::mutex> lk(mu);
        inner_evals += e.evals;
        inner_ok = inner_ok && e.converged;
        inner_err = std::max(inner_err, e.err / std::max(1e-300, std::abs(e.value)));
        out[0] = e.value;
    };
    QuadratureSpec os = spec;
    auto v = integrate_plane(outer, 1, os);
    IntegralEstimate r{v.value[0], v.err + inner_err * std::abs(v.value[0]), v.evals + inner_evals,
                       v.converged && inner_ok};
    return r;
}

cplx richardson_zero(const std::vector<double>& d, const std::vector<cplx>& v)
{
    // Neville at x = 0
    std::vector<cplx> p = v;
    const std::size_t n = d.size();
    for (std::size_t m = 1; m < n; ++m)
        for (std::size_t i = 0; i + m < n; ++i)
            p[i] = (d[i + m] * p[i] - d[i] * p[i + 1]) / (d[i + m] - d[i]);
    return p[0];
}

std::vector<double> default_damping_sequence() { return {0.01, 0.005, 0.0025, 0.00125}; }

VectorEstimate integrate_oscillatory(const Integrand1& f, int nout, const QuadratureSpec& spec,
                                     const std::vector<double>& deltas)
{
    if (deltas.size() < 2) throw PreconditionError("need at least two damping values");
    std::vector<std::vector<cplx>> samples;
    VectorEstimate out;
    out.converged = true;
    double qerr = 0.0;
    for (double dl : deltas) {
        VectorEstimate e = integrate_adaptive(f, nout, spec, dl);
        samples.push_back(e.value);
        out.evals += e.evals;
        out.converged = out.converged && e.converged;
        qerr = std::max(qerr, e.err);
    }
    out.value.assign(nout, 0.0);
    double rerr = 0.0, mag = 0.0;
    for (int q = 0; q < nout; ++q) {
        std::vector<cplx> col;
        for (auto& s : samples) col.push_back(s[q]);
        cplx full = richardson_zero(deltas, col);
        std::vector<double> d1(deltas.begin(), deltas.end() - 1);
        std::vector<cplx> c1(col.begin(), col.end() - 1);
        cplx less = richardson_zero(d1, c1);
        out.value[q] = full;
        rerr = std::max(rerr, std::abs(full - less));
        mag = std::max(mag, std::abs(full));
    }
    // the drop-one difference overestimates the error of the full extrapolation
    out.err = qerr + rerr;
    out.converged = out.converged && out.err <= std::max(spec.abs_tol, spec.rel_tol * mag);
    return out;
}

cplx fourier_closed(const FieldExponent& alpha, cplx p)
{
    return kPi * ipow(alpha.m()) * afactor_value(alpha) * eval_propagator(exponent_reflect(alpha), p);
}

IntegralEstimate fourier_propagator(const FieldExponent& alpha, cplx p, const QuadratureSpec& spec)
{
    check_local_power(alpha);
    if (alpha.w().real() <= 0.0) throw PreconditionError("Fourier integrand not integrable at infinity");
    if (std::abs(p) == 0.0) throw OriginSingularity("Fourier transform at p = 0");
    QuadratureSpec s = spec;
    s.singularity_centers = {0.0};
    s.wave_number = 2.0 * std::abs(p);
    auto f = [&](cplx z, cplx* out) {
        out[0] = eval_propagator(alpha, z) * std::polar(1.0, 2.0 * (p * z).real());
    };
    auto v = integrate_oscillatory(f, 1, s, default_damping_sequence());
    return {v.value[0], v.err, v.evals, v.converged};
}

void check_local_power(const FieldExponent& alpha)
{
    if (2.0 * alpha.w().real() >= 1.9)
        throw PreconditionError("local power " + std::to_string(2.0 * alpha.w().real()) +
                                " too close to the integrability boundary");
}

}  // namespace sovkit
