// Projected dynamics on a variational family: Lagrangian / McLachlan /
// imaginary-time vector fields, constrained variants, phase + normalization
// co-evolution, holonomy, and an RK4 integrator.
#pragma once

#include "manifold.hpp"

#include <map>

namespace varkahler {

enum class FlowKind { Lagrangian, McLachlan, ImaginaryTime };

// X = pseudo_solve(omega, g, dE), i.e. X^mu = -Omega^{mu nu} d_nu E.
inline Vec lagrangian_field(const FamilySpec& f, const Vec& x, const CMat& H) {
    TangentFrame fr = tangent_frame(f, x);
    KahlerTriple t = restricted_structures(fr);
    CVec Hpsi = H * fr.psi;
    Vec dE(f.dimension);
    for (int mu = 0; mu < f.dimension; ++mu)
        dE[mu] = 2.0 * fr.tangents[mu].dot(Hpsi).real() / fr.norm;
    return pseudo_solve(t.omega, t.g, dE);
}

// X^mu = 2 G^{mu nu} Im<V_nu|H|psi> / <psi|psi>.
inline Vec mclachlan_field(const FamilySpec& f, const Vec& x, const CMat& H) {
    TangentFrame fr = tangent_frame(f, x);
    KahlerTriple t = restricted_structures(fr);
    CVec Hpsi = H * fr.psi;
    Vec rhs(f.dimension);
    for (int mu = 0; mu < f.dimension; ++mu)
        rhs[mu] = 2.0 * fr.tangents[mu].dot(Hpsi).imag() / fr.norm;
    return t.g_inv * rhs;
}

// F^mu = -G^{mu nu} d_nu E: guarantees dE/dtau = -dE.G.dE <= 0.
inline Vec imaginary_field(const FamilySpec& f, const Vec& x, const CMat& H) {
    TangentFrame fr = tangent_frame(f, x);
    KahlerTriple t = restricted_structures(fr);
    CVec Hpsi = H * fr.psi;
    Vec dE(f.dimension);
    for (int mu = 0; mu < f.dimension; ++mu)
        dE[mu] = 2.0 * fr.tangents[mu].dot(Hpsi).real() / fr.norm;
    return -(t.g_inv * dE);
}

struct FlowField {
    FlowKind kind = FlowKind::Lagrangian;
    CMat hamiltonian;
    std::function<Vec(const FamilySpec&, const Vec&)> evaluate;
};

inline FlowField make_field(FlowKind kind, const CMat& H) {
    FlowField ff;
    ff.kind = kind;
    ff.hamiltonian = H;
    switch (kind) {
        case FlowKind::Lagrangian:
            ff.evaluate = [H](const FamilySpec& f, const Vec& x) {
                return lagrangian_field(f, x, H);
            };
            break;
        case FlowKind::McLachlan:
            ff.evaluate = [H](const FamilySpec& f, const Vec& x) {
                return mclachlan_field(f, x, H);
            };
            break;
        case FlowKind::ImaginaryTime:
            ff.evaluate = [H](const FamilySpec& f, const Vec& x) {
                return imaginary_field(f, x, H);
            };
            break;
    }
    return ff;
}

// Projects the base field onto the subspace tangent to the level sets of the
// constraint expectation values A_I.  For the Lagrangian kind the projected
// symplectic form P Omega P^t is used directly (conserves E and the A_I).
inline Vec constrained_field(const FlowField& base, const FamilySpec& f, const Vec& x,
                             const std::vector<CMat>& constraints) {
    if (constraints.empty()) return base.evaluate(f, x);
    TangentFrame fr = tangent_frame(f, x);
    KahlerTriple t = restricted_structures(fr);
    const int n = f.dimension;
    const int m = (int)constraints.size();
    Mat dA(n, m);
    for (int I = 0; I < m; ++I) {
        CVec Apsi = constraints[(size_t)I] * fr.psi;
        for (int mu = 0; mu < n; ++mu)
            dA(mu, I) = 2.0 * fr.tangents[mu].dot(Apsi).real() / fr.norm;
    }
    Mat X = t.g_inv * dA;                     // X_I^mu = G dA_I
    Mat gt = X.transpose() * t.g * X;         // gtilde_IJ
    Mat Gt = detail::sym_pinv(gt);            // pseudo-inverse for dependence
    Mat P = Mat::Identity(n, n) - X * Gt * X.transpose() * t.g;

    if (base.kind == FlowKind::Lagrangian) {
        // Use the constrained symplectic form: X = -P Omega P^t dE.  This
        // conserves both E and the A_I (Omega~ is antisymmetric and kills dA_I).
        CVec Hpsi = base.hamiltonian * fr.psi;
        Vec dE(n);
        for (int mu = 0; mu < n; ++mu)
            dE[mu] = 2.0 * fr.tangents[mu].dot(Hpsi).real() / fr.norm;
        return -(P * (t.omega_inv * (P.transpose() * dE)));
    }
    return P * base.evaluate(f, x);
}

struct PhaseTracker {
    double kappa = 0.0;
    double varphi = 0.0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> params;
    std::vector<double> energy;
    std::map<std::string, std::vector<double>> tracked;
    std::vector<PhaseTracker> phase;
};

namespace detail {
// Writing the evolved state as e^{kappa + i varphi} psi(x(t)) and matching
// <psi|d/dt .> against the Schroedinger equation gives
//   d(varphi)/dt = A_mu xdot^mu - E   with A_mu = i<psi|d_mu psi>/<psi|psi>,
//   d(kappa)/dt  = -Re<psi|d_mu psi> xdot^mu / <psi|psi>,
// using the raw (un-projected) parameter derivatives of the representative.
inline void phase_rates(const TangentFrame& fr, const Vec& xdot, double E, double& dkappa,
                        double& dvarphi) {
    cplx ov(0, 0);
    for (int mu = 0; mu < (int)fr.raw_tangents.size(); ++mu)
        ov += fr.psi.dot(fr.raw_tangents[mu]) * xdot[mu];
    ov /= fr.norm;
    dvarphi = -ov.imag() - E;
    dkappa = -ov.real();
}
}  // namespace detail

// Recomputes the phase/normalization increment over a recorded trajectory
// segment (times strictly increasing), estimating xdot by central differences
// and integrating with the trapezoid rule.
inline PhaseTracker phase_dynamics(const FamilySpec& f, const std::vector<double>& times,
                                   const std::vector<Vec>& params, const CMat& H) {
    if (times.size() != params.size() || times.size() < 2)
        throw std::domain_error("phase_dynamics: malformed trajectory segment");
    const int m = (int)times.size();
    std::vector<double> dk(m), dv(m);
    for (int i = 0; i < m; ++i) {
        int lo = std::max(i - 1, 0), hi = std::min(i + 1, m - 1);
        Vec xdot = (params[(size_t)hi] - params[(size_t)lo]) / (times[(size_t)hi] - times[(size_t)lo]);
        TangentFrame fr = tangent_frame(f, params[(size_t)i]);
        double E = fr.psi.dot(H * fr.psi).real() / fr.norm;
        detail::phase_rates(fr, xdot, E, dk[(size_t)i], dv[(size_t)i]);
    }
    PhaseTracker ph;
    for (int i = 0; i + 1 < m; ++i) {
        double h = times[(size_t)i + 1] - times[(size_t)i];
        ph.kappa += 0.5 * h * (dk[(size_t)i] + dk[(size_t)i + 1]);
        ph.varphi += 0.5 * h * (dv[(size_t)i] + dv[(size_t)i + 1]);
    }
    return ph;
}

// Kaehlerization: restrict the flow to the span of the c ~ 1 (DoubleBar)
// standard-form directions before pseudo-inverting.  There g' = 1 and omega'
// is the unit symplectic block form, so the restricted solve is well posed.
inline FlowField kaehlerized(const FlowField& base) {
    FlowField ff;
    ff.kind = base.kind;
    ff.hamiltonian = base.hamiltonian;
    CMat H = base.hamiltonian;
    FlowKind kind = base.kind;
    ff.evaluate = [H, kind](const FamilySpec& f, const Vec& x) {
        TangentFrame fr = tangent_frame(f, x);
        KahlerTriple t = restricted_structures(fr);
        auto sf = standard_form(t);
        std::vector<int> cols;
        for (int k = 0; k < (int)sf.subspace_tags.size(); ++k)
            if (sf.subspace_tags[(size_t)k] == SubspaceTag::DoubleBar) cols.push_back(k);
        if (cols.empty()) return Vec::Zero(f.dimension).eval();
        Mat B(f.dimension, (int)cols.size());
        for (int k = 0; k < (int)cols.size(); ++k) B.col(k) = sf.basis_change.col(cols[(size_t)k]);
        CVec Hpsi = H * fr.psi;
        Vec rhs(f.dimension);
        for (int mu = 0; mu < f.dimension; ++mu) {
            double re = 2.0 * fr.tangents[mu].dot(Hpsi).real() / fr.norm;
            double im = 2.0 * fr.tangents[mu].dot(Hpsi).imag() / fr.norm;
            rhs[mu] = (kind == FlowKind::McLachlan) ? im
                    : (kind == FlowKind::ImaginaryTime) ? -re : re;
        }
        Mat gp = B.transpose() * t.g * B;
        Vec rp = B.transpose() * rhs;
        Vec xp;
        if (kind == FlowKind::Lagrangian)
            xp = pseudo_solve(B.transpose() * t.omega * B, gp, rp);
        else
            xp = gp.ldlt().solve(rp);
        return (B * xp).eval();
    };
    return ff;
}

struct IntegrateOptions {
    bool track_phase = false;
    std::map<std::string, CMat> trackers;  // named Hermitian observables
    std::vector<CMat> constraints;         // optional constraint projection
    int record_stride = 1;                 // record every k-th step
};

// Classical fixed-step RK4 on the parameter vector, with energy, phase and
// tracked observables recorded along the way.
inline Trajectory integrate(const FlowField& field, const FamilySpec& f, const Vec& x0,
                            const CMat& H, double T, double dt,
                            const IntegrateOptions& opt = {}) {
    if (dt <= 0.0) throw std::domain_error("integrate: dt must be positive");
    auto eval = [&](const Vec& x) {
        return opt.constraints.empty() ? field.evaluate(f, x)
                                       : constrained_field(field, f, x, opt.constraints);
    };
    Trajectory tr;
    Vec x = x0;
    PhaseTracker ph;
    const int steps = (int)std::llround(T / dt);
    auto record = [&](double t) {
        TangentFrame fr = tangent_frame(f, x);
        CVec Hpsi = H * fr.psi;
        double E = fr.psi.dot(Hpsi).real() / fr.norm;
        tr.times.push_back(t);
        tr.params.push_back(x);
        tr.energy.push_back(E);
        tr.phase.push_back(ph);
        for (auto& [name, op] : opt.trackers)
            tr.tracked[name].push_back(fr.psi.dot(op * fr.psi).real() / fr.norm);
    };
    record(0.0);
    for (int s = 0; s < steps; ++s) {
        // RK4 on the extended state (x, kappa, varphi)
        auto rate = [&](const Vec& xc, double& dk, double& dv) {
            Vec k = eval(xc);
            if (opt.track_phase) {
                TangentFrame fr = tangent_frame(f, xc);
                double E = fr.psi.dot(H * fr.psi).real() / fr.norm;
                detail::phase_rates(fr, k, E, dk, dv);
            } else {
                dk = dv = 0.0;
            }
            return k;
        };
        double dk1, dv1, dk2, dv2, dk3, dv3, dk4, dv4;
        Vec k1 = rate(x, dk1, dv1);
        Vec k2 = rate(x + 0.5 * dt * k1, dk2, dv2);
        Vec k3 = rate(x + 0.5 * dt * k2, dk3, dv3);
        Vec k4 = rate(x + dt * k3, dk4, dv4);
        x += (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
        ph.kappa += (dt / 6.0) * (dk1 + 2 * dk2 + 2 * dk3 + dk4);
        ph.varphi += (dt / 6.0) * (dv1 + 2 * dv2 + 2 * dv3 + dv4);
        if ((s + 1) % opt.record_stride == 0 || s + 1 == steps) record((s + 1) * dt);
    }
    return tr;
}

// Holonomy along a prescribed closed parameter loop: integral of
// (A_mu xdot^mu - E) dt with A_mu = i<psi|d_mu psi>/<psi|psi> the Berry
// connection.  Pass a null Hamiltonian (0x0) for the purely geometric part.
inline double holonomy(const FamilySpec& f, const std::function<Vec(double)>& path, double T,
                       int steps, const CMat& H = CMat()) {
    // Closure is checked on the physical state (projective distance), so that
    // angle parameters returning mod 2pi still count as closed.
    CVec ps = f.parametrize(path(0.0)).normalized();
    CVec pe = f.parametrize(path(T)).normalized();
    if (1.0 - std::abs(ps.dot(pe)) >= 1e-6)
        throw std::domain_error("holonomy: path is not closed");
    double dt = T / steps;
    auto rate = [&](double t) {
        Vec x = path(t);
        // central difference of the path for xdot
        double h = 0.5 * dt;
        Vec xdot = (path(std::min(t + h, T)) - path(std::max(t - h, 0.0))) /
                   (std::min(t + h, T) - std::max(t - h, 0.0));
        TangentFrame fr = tangent_frame(f, x);
        double val = 0.0;
        for (int mu = 0; mu < f.dimension; ++mu)
            val -= (fr.psi.dot(fr.raw_tangents[mu]) / fr.norm).imag() * xdot[mu];
        if (H.size() > 0) val -= fr.psi.dot(H * fr.psi).real() / fr.norm;
        return val;
    };
    // Simpson rule
    double sum = rate(0.0) + rate(T);
    for (int s = 1; s < steps; ++s) sum += (s % 2 ? 4.0 : 2.0) * rate(s * dt);
    return sum * dt / 3.0;
}

}  // namespace varkahler
