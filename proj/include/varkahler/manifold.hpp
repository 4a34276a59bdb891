// Variational-family abstraction: tangent frames, restricted structures,
// tangent-space projection, expectation values and gradients.
#pragma once

#include "kahler_core.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace varkahler {

struct FamilySpec {
    std::string label;
    int dimension = 0;
    std::function<CVec(const Vec&)> parametrize;
    // Optional: raw derivatives d_mu |psi> (before Q projection).
    std::function<std::vector<CVec>(const Vec&)> analytic_tangents;
    // Optional box domain; frames at or past the boundary are rejected.
    std::optional<Vec> lower, upper;
};

struct TangentFrame {
    CVec psi;
    std::vector<CVec> tangents;      // |V_mu> = Q_psi d_mu|psi>
    std::vector<CVec> raw_tangents;  // d_mu|psi> (for phase/holonomy data)
    double norm = 0.0;               // <psi|psi>
    Vec params;
};

inline constexpr double fd_step_scale = 1e-5;   // first derivatives
inline constexpr double fd_hess_scale = 1e-4;   // nested second derivatives

namespace detail {
inline void check_domain(const FamilySpec& f, const Vec& x) {
    if ((int)x.size() != f.dimension)
        throw std::domain_error("family '" + f.label + "': wrong parameter count");
    if (f.lower && f.upper)
        for (int i = 0; i < x.size(); ++i)
            if (x[i] <= (*f.lower)[i] || x[i] >= (*f.upper)[i])
                throw std::domain_error("family '" + f.label + "': parameter outside domain box");
}
}  // namespace detail

inline TangentFrame tangent_frame(const FamilySpec& f, const Vec& x) {
    detail::check_domain(f, x);
    TangentFrame fr;
    fr.params = x;
    fr.psi = f.parametrize(x);
    fr.norm = fr.psi.squaredNorm();
    if (fr.norm <= 0.0) throw std::domain_error("tangent_frame: zero state vector");
    if (f.analytic_tangents) {
        fr.raw_tangents = f.analytic_tangents(x);
    } else {
        for (int mu = 0; mu < f.dimension; ++mu) {
            double h = fd_step_scale * std::max(1.0, std::abs(x[mu]));
            Vec xp = x, xm = x;
            xp[mu] += h;
            xm[mu] -= h;
            fr.raw_tangents.push_back((f.parametrize(xp) - f.parametrize(xm)) / (2.0 * h));
        }
    }
    for (auto& d : fr.raw_tangents)
        fr.tangents.push_back(d - (fr.psi.dot(d) / fr.norm) * fr.psi);
    return fr;
}

inline KahlerTriple restricted_structures(const TangentFrame& fr) {
    const int n = (int)fr.tangents.size();
    CMat gram(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gram(i, j) = fr.tangents[i].dot(fr.tangents[j]);
    return build_triple(gram, fr.norm);
}

// P^mu |phi> = (2/<psi|psi>) G^{mu nu} Re<V_nu|phi>: real least squares onto
// span_R{|V_mu>}.
inline Vec project(const TangentFrame& fr, const KahlerTriple& t, const CVec& phi) {
    const int n = (int)fr.tangents.size();
    Vec rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = 2.0 * fr.tangents[i].dot(phi).real() / fr.norm;
    return t.g_inv * rhs;
}

inline Vec project(const TangentFrame& fr, const CVec& phi) {
    return project(fr, restricted_structures(fr), phi);
}

// A = <psi|A|psi>/<psi|psi>, dA_mu = 2 Re<V_mu|A|psi>/<psi|psi>.
inline std::pair<double, Vec> expectation_and_gradient(const FamilySpec& f, const Vec& x,
                                                       const CMat& op) {
    double scale = std::max(op.cwiseAbs().maxCoeff(), 1.0);
    if ((op - op.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::domain_error("expectation_and_gradient: operator is not Hermitian");
    TangentFrame fr = tangent_frame(f, x);
    CVec Apsi = op * fr.psi;
    double A = fr.psi.dot(Apsi).real() / fr.norm;
    Vec dA(f.dimension);
    for (int mu = 0; mu < f.dimension; ++mu)
        dA[mu] = 2.0 * fr.tangents[mu].dot(Apsi).real() / fr.norm;
    return {A, dA};
}

// {A,B} = dA . Omega . dB with the pseudo-inverse Omega.
inline double poisson_bracket(const FamilySpec& f, const Vec& x, const CMat& a_op,
                              const CMat& b_op) {
    auto [A, dA] = expectation_and_gradient(f, x, a_op);
    auto [B, dB] = expectation_and_gradient(f, x, b_op);
    (void)A;
    (void)B;
    KahlerTriple t = restricted_structures(tangent_frame(f, x));
    return dA.dot(t.omega_inv * dB);
}

}  // namespace varkahler
