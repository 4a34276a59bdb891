// Built-in variational families and small operator builders used by the
// tests, the acceptance suite and the CLI presets.
#pragma once

#include "exact_hilbert.hpp"
#include "manifold.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace varkahler {

// ---- qubit helpers -------------------------------------------------------

inline CMat pauli_x() { CMat m(2, 2); m << 0, 1, 1, 0; return m; }
inline CMat pauli_y() { CMat m(2, 2); m << 0, cplx(0, -1), cplx(0, 1), 0; return m; }
inline CMat pauli_z() { CMat m(2, 2); m << 1, 0, 0, -1; return m; }

// Bloch sphere: psi(theta,phi) = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
inline FamilySpec bloch_family() {
    FamilySpec f;
    f.label = "bloch";
    f.dimension = 2;
    f.parametrize = [](const Vec& x) {
        CVec v(2);
        v << std::cos(x[0] / 2), std::exp(cplx(0, x[1])) * std::sin(x[0] / 2);
        return v;
    };
    f.analytic_tangents = [](const Vec& x) {
        cplx e = std::exp(cplx(0, x[1]));
        CVec d1(2), d2(2);
        d1 << -0.5 * std::sin(x[0] / 2), 0.5 * e * std::cos(x[0] / 2);
        d2 << 0.0, cplx(0, 1) * e * std::sin(x[0] / 2);
        return std::vector<CVec>{d1, d2};
    };
    return f;
}

// Symmetric two-qubit product |psi(theta,phi)> x |psi(theta,phi)>.
inline FamilySpec two_qubit_product_family() {
    FamilySpec bloch = bloch_family();
    FamilySpec f;
    f.label = "two_qubit_product";
    f.dimension = 2;
    f.parametrize = [bloch](const Vec& x) {
        CVec p = bloch.parametrize(x);
        CVec out(4);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) out[2 * i + j] = p[i] * p[j];
        return out;
    };
    f.analytic_tangents = [bloch](const Vec& x) {
        CVec p = bloch.parametrize(x);
        auto dp = bloch.analytic_tangents(x);
        std::vector<CVec> out;
        for (auto& d : dp) {
            CVec w(4);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) w[2 * i + j] = d[i] * p[j] + p[i] * d[j];
            out.push_back(w);
        }
        return out;
    };
    return f;
}

// Equator of the Bloch sphere: (|0> + e^{i phi}|1>)/sqrt(2); omega = 0 here.
inline FamilySpec equator_family() {
    FamilySpec f;
    f.label = "qubit_equator";
    f.dimension = 1;
    const double s = 1.0 / std::sqrt(2.0);
    f.parametrize = [s](const Vec& x) {
        CVec v(2);
        v << s, s * std::exp(cplx(0, x[0]));
        return v;
    };
    f.analytic_tangents = [s](const Vec& x) {
        CVec d(2);
        d << 0.0, s * cplx(0, 1) * std::exp(cplx(0, x[0]));
        return std::vector<CVec>{d};
    };
    return f;
}

// ---- two-mode coherent-product families ----------------------------------
//
// psi(x) = D(c(x))|0,0> with per-mode displacement amplitudes c_k(x); the
// state is the exact tensor product of coherent vectors and the tangents are
// d_mu psi = [sum_k (d c_k) a_k^dag - Re(sum_k (d c_k) conj(c_k))] psi.

struct CoherentMap {
    // returns c (size 2) and the Jacobian dc/dx (2 x dim, complex)
    std::function<void(const Vec&, CVec&, CMat&)> eval;
    int dim = 2;
};

inline FamilySpec coherent_product_family(std::string label, const CoherentMap& map,
                                          int cutoff) {
    FamilySpec f;
    f.label = std::move(label);
    f.dimension = map.dim;
    auto state_of = [cutoff](const CVec& c) {
        CVec s1(cutoff), s2(cutoff);
        for (int n = 0; n < cutoff; ++n) {
            double lg = 0.5 * std::lgamma((double)n + 1.0);
            s1[n] = std::pow(c[0], n) * std::exp(-lg);
            s2[n] = std::pow(c[1], n) * std::exp(-lg);
        }
        double w = std::exp(-0.5 * (std::norm(c[0]) + std::norm(c[1])));
        CVec out(cutoff * cutoff);
        for (int n1 = 0; n1 < cutoff; ++n1)
            for (int n2 = 0; n2 < cutoff; ++n2) out[n1 * cutoff + n2] = w * s1[n1] * s2[n2];
        return out;
    };
    auto adag = [cutoff](const CVec& v, int mode) {
        CVec out = CVec::Zero(v.size());
        if (mode == 0) {
            for (int n1 = 0; n1 + 1 < cutoff; ++n1)
                for (int n2 = 0; n2 < cutoff; ++n2)
                    out[(n1 + 1) * cutoff + n2] = std::sqrt((double)n1 + 1.0) * v[n1 * cutoff + n2];
        } else {
            for (int n1 = 0; n1 < cutoff; ++n1)
                for (int n2 = 0; n2 + 1 < cutoff; ++n2)
                    out[n1 * cutoff + n2 + 1] = std::sqrt((double)n2 + 1.0) * v[n1 * cutoff + n2];
        }
        return out;
    };
    f.parametrize = [map, state_of](const Vec& x) {
        CVec c;
        CMat jac;
        map.eval(x, c, jac);
        return state_of(c);
    };
    f.analytic_tangents = [map, state_of, adag](const Vec& x) {
        CVec c;
        CMat jac;
        map.eval(x, c, jac);
        CVec psi = state_of(c);
        std::vector<CVec> out;
        for (int mu = 0; mu < map.dim; ++mu) {
            cplx dc1 = jac(0, mu), dc2 = jac(1, mu);
            double re = (dc1 * std::conj(c[0]) + dc2 * std::conj(c[1])).real();
            out.push_back(dc1 * adag(psi, 0) + dc2 * adag(psi, 1) - re * psi);
        }
        return out;
    };
    return f;
}

// Two-mode squeezed-coherent family psi(alpha) = exp(alpha b^dag - conj(alpha) b)|0,0>
// with b = cosh r a_1 + sinh r a_2^dag; parameters x = (Re alpha, Im alpha).
inline FamilySpec example9_family(double r, int cutoff) {
    CoherentMap m;
    m.dim = 2;
    m.eval = [r](const Vec& x, CVec& c, CMat& jac) {
        cplx alpha(x[0], x[1]);
        c.resize(2);
        c << alpha * std::cosh(r), -std::conj(alpha) * std::sinh(r);
        jac.resize(2, 2);
        jac << std::cosh(r), cplx(0, 1) * std::cosh(r),
               -std::sinh(r), cplx(0, 1) * std::sinh(r);
    };
    return coherent_product_family("example9_r" + std::to_string(r), m, cutoff);
}

// Coherent-restricted two-mode family with x = (q~, p~): alpha = (q~+i p~)/sqrt(2),
// c_1 = alpha cosh r, c_2 = conj(alpha) sinh r (i.e. z = T z~ with
// T = [[cosh r,0],[sinh r,0],[0,cosh r],[0,-sinh r]] in (q1,q2,p1,p2) order).
inline FamilySpec tilde_coherent_family(double r, int cutoff) {
    CoherentMap m;
    m.dim = 2;
    const double s = 1.0 / std::sqrt(2.0);
    m.eval = [r, s](const Vec& x, CVec& c, CMat& jac) {
        cplx alpha = s * cplx(x[0], x[1]);
        c.resize(2);
        c << alpha * std::cosh(r), std::conj(alpha) * std::sinh(r);
        jac.resize(2, 2);
        jac << s * std::cosh(r), cplx(0, s) * std::cosh(r),
               s * std::sinh(r), cplx(0, -s) * std::sinh(r);
    };
    return coherent_product_family("tilde_coherent_r" + std::to_string(r), m, cutoff);
}

// H = (eps_1/2)(q~^2+p~^2 in rotated mode 1) + ... as a dense two-mode operator:
// H = 1/2 h_ab xi^a xi^b with h = blkdiag(C, C), C = [[c1,c3],[c3,c2]].
inline Mat example24_h(double eps1, double eps2, double phi) {
    double c1 = eps1 * std::cos(phi) * std::cos(phi) + eps2 * std::sin(phi) * std::sin(phi);
    double c2 = eps1 * std::sin(phi) * std::sin(phi) + eps2 * std::cos(phi) * std::cos(phi);
    double c3 = 0.5 * (eps1 - eps2) * std::sin(2 * phi);
    Mat h = Mat::Zero(4, 4);
    h(0, 0) = c1; h(1, 1) = c2; h(0, 1) = h(1, 0) = c3;
    h(2, 2) = c1; h(3, 3) = c2; h(2, 3) = h(3, 2) = c3;
    return h;
}

// Dense 1/2 h_ab xi^a xi^b (+ f_a xi^a) on a bosonic Fock space.
inline CMat quadratic_boson_operator(const FockSpaceBuilder& fb, const Mat& h,
                                     const Vec& f = Vec()) {
    auto xi = fb.xi_bosonic();
    const int m = (int)xi.size();
    CMat H = CMat::Zero(fb.dim(), fb.dim());
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            if (h(a, b) != 0.0) H += 0.5 * h(a, b) * (xi[a] * xi[b]);
    if (f.size() == m)
        for (int a = 0; a < m; ++a)
            if (f[a] != 0.0) H += f[a] * xi[a];
    return 0.5 * (H + H.adjoint()).eval();
}

// q~ and p~ observables of the tilde family on the two-mode Fock space.
inline CMat tilde_q_operator(const FockSpaceBuilder& fb, double r) {
    auto xi = fb.xi_bosonic();  // (q1, q2, p1, p2)
    return std::cosh(r) * xi[0] - std::sinh(r) * xi[1];
}
inline CMat tilde_p_operator(const FockSpaceBuilder& fb, double r) {
    auto xi = fb.xi_bosonic();
    return std::cosh(r) * xi[2] + std::sinh(r) * xi[3];
}

// ---- group-orbit families -------------------------------------------------
//
// psi(x) = exp(sum_i x_i Xi_i) |phi> with anti-Hermitian generators; exact
// tangents via the block trick exp([[M,E],[0,M]]) = [[e^M, D e^M(E)],[0,e^M]].
inline FamilySpec group_orbit_family(std::string label, std::vector<CMat> gens, CVec phi) {
    FamilySpec f;
    f.label = std::move(label);
    f.dimension = (int)gens.size();
    const int d = (int)phi.size();
    f.parametrize = [gens, phi, d](const Vec& x) {
        CMat M = CMat::Zero(d, d);
        for (size_t i = 0; i < gens.size(); ++i) M += x[(Eigen::Index)i] * gens[i];
        return (M.exp() * phi).eval();
    };
    f.analytic_tangents = [gens, phi, d](const Vec& x) {
        CMat M = CMat::Zero(d, d);
        for (size_t i = 0; i < gens.size(); ++i) M += x[(Eigen::Index)i] * gens[i];
        std::vector<CVec> out;
        for (auto& E : gens) {
            CMat blk = CMat::Zero(2 * d, 2 * d);
            blk.topLeftCorner(d, d) = M;
            blk.bottomRightCorner(d, d) = M;
            blk.topRightCorner(d, d) = E;
            CMat eb = blk.exp();
            out.push_back(eb.topRightCorner(d, d) * phi);
        }
        return out;
    };
    return f;
}

// Single-mode sp(2,R) warm-up generators X = b^dag^2 - b^2, Y = i(b^dag^2+b^2),
// Z = i(n + 1/2) on a truncated Fock space.
inline std::vector<CMat> sp2r_warmup_generators(const FockSpaceBuilder& fb) {
    CMat a = fb.boson_a(0);
    CMat ad = a.adjoint();
    CMat ad2 = ad * ad, a2 = a * a;
    CMat n = ad * a;
    std::vector<CMat> g;
    g.push_back(ad2 - a2);
    g.push_back(cplx(0, 1) * (ad2 + a2));
    g.push_back(cplx(0, 1) * (n + 0.5 * CMat::Identity(fb.dim(), fb.dim())));
    return g;
}

}  // namespace varkahler
