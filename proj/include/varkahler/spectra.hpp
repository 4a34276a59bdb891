// Excitation spectra: projected Hamiltonians, linearized equations of motion
// around stationary points, spectral functions, Goldstone diagnostics.
#pragma once

#include "evolution.hpp"

namespace varkahler {

inline constexpr double stationarity_rtol = 1e-7;  // gate for linearize

// H^mu_nu = P^mu_psi H|V_nu>,  R^mu_nu = P^mu_psi (-i H)|V_nu>.
inline std::pair<Mat, Mat> projected_hamiltonian(const TangentFrame& fr, const CMat& H) {
    KahlerTriple t = restricted_structures(fr);
    const int n = (int)fr.tangents.size();
    Mat re(n, n), im(n, n);
    for (int nu = 0; nu < n; ++nu) {
        CVec Hv = H * fr.tangents[nu];
        for (int mu = 0; mu < n; ++mu) {
            cplx ov = fr.tangents[mu].dot(Hv);
            re(mu, nu) = 2.0 * ov.real() / fr.norm;
            im(mu, nu) = 2.0 * ov.imag() / fr.norm;
        }
    }
    return {t.g_inv * re, t.g_inv * im};
}

enum class ZeroModeTag { GaugeArtifact, PhysicalGoldstone, Unclassified };

struct EigenPair {
    cplx lambda;  // +-i omega
    CVec right;   // E, normalized so E^* . omega_form . E = i sgn(omega)
    CVec left;    // row eigenvector, bi-orthonormal against the rights
};

struct ZeroMode {
    Vec vector;
    ZeroModeTag tag = ZeroModeTag::Unclassified;
};

struct LinearizationResult {
    Mat k_matrix;
    Mat omega_form;  // restricted omega at the expansion point
    Mat g_form;      // restricted metric (gauge-kernel detection)
    std::vector<EigenPair> eigenpairs;  // nonzero frequencies, conjugate pairs
    std::vector<ZeroMode> zero_modes;
    Mat k_commuting, k_anticommuting;  // split w.r.t. J (Kaehler families)
    bool normalized = true;            // false if Williamson scaling failed
};

namespace detail {

// Eigen-analysis of a real K with K Omega + Omega K^t = 0: conjugate pairing,
// omega-form normalization, independent left eigenvectors, zero-mode capture.
inline void analyze_k(LinearizationResult& out, bool require_normalizable) {
    const Mat& K = out.k_matrix;
    const int n = (int)K.rows();
    double kscale = std::max(K.cwiseAbs().maxCoeff(), 1e-300);
    Eigen::EigenSolver<Mat> es(K);
    Eigen::EigenSolver<Mat> esl(Mat(K.transpose()));
    CMat Vr = es.eigenvectors();
    CVec ev = es.eigenvalues();
    CMat Vl = esl.eigenvectors();
    CVec evl = esl.eigenvalues();

    std::vector<bool> used(n, false), usedl(n, false);
    double ztol = 1e-8 * std::max(kscale, 1.0);
    for (int k = 0; k < n; ++k) {
        if (used[(size_t)k]) continue;
        if (std::abs(ev[k]) < ztol) {
            used[(size_t)k] = true;
            // real basis vector for the kernel direction
            CVec v = Vr.col(k);
            Vec zr = v.real().norm() > v.imag().norm() ? Vec(v.real()) : Vec(v.imag());
            if (zr.norm() > 0) out.zero_modes.push_back({zr / zr.norm()});
            continue;
        }
        // conjugate partner by eigenvector matching, not value proximity
        int best = -1;
        double bestov = -1.0;
        for (int j = 0; j < n; ++j) {
            if (j == k || used[(size_t)j]) continue;
            double ov = std::abs(Vr.col(j).conjugate().normalized().dot(Vr.col(k).normalized()));
            if (ov > bestov) { bestov = ov; best = j; }
        }
        used[(size_t)k] = true;
        if (best >= 0 && bestov > 0.9) used[(size_t)best] = true;

        for (int idx : {k, best}) {
            if (idx < 0) continue;
            EigenPair p;
            p.lambda = ev[idx];
            p.right = Vr.col(idx);
            double w = p.lambda.imag();
            cplx quad = p.right.dot(out.omega_form * p.right);  // E^* omega E
            double q = quad.imag();
            if (std::abs(q) > 1e-12 * std::max(1.0, p.right.squaredNorm())) {
                if (q * w < 0) {
                    if (require_normalizable)
                        throw std::domain_error(
                            "linearize: eigenvector not Williamson-normalizable "
                            "(indefinite Hessian?)");
                    out.normalized = false;
                }
                p.right /= std::sqrt(std::abs(q));
            } else {
                if (require_normalizable)
                    throw std::domain_error(
                        "linearize: omega-form degenerate on eigenvector");
                out.normalized = false;
            }
            // left eigenvector: eigenvalue of K^t closest to lambda
            int lbest = -1;
            double ldist = 1e300;
            for (int j = 0; j < n; ++j) {
                double d2 = std::abs(evl[j] - p.lambda);
                if (!usedl[(size_t)j] && d2 < ldist) { ldist = d2; lbest = j; }
            }
            if (lbest >= 0) {
                usedl[(size_t)lbest] = true;
                p.left = Vl.col(lbest);
                cplx bi = p.left.conjugate().dot(p.right);
                if (std::abs(bi) > 1e-12) p.left = (p.left.array() / std::conj(bi)).matrix();
            }
            out.eigenpairs.push_back(p);
        }
    }
    std::sort(out.eigenpairs.begin(), out.eigenpairs.end(),
              [](const EigenPair& a, const EigenPair& b) {
                  return a.lambda.imag() < b.lambda.imag();
              });
}

}  // namespace detail

// Builds the full result from an externally supplied K (e.g. the analytic
// Gaussian linearization) plus the restricted forms at the expansion point.
inline LinearizationResult analyze_k_matrix(const Mat& K, const Mat& omega_form,
                                            const Mat& g_form, const Mat* j_form = nullptr,
                                            bool require_normalizable = false) {
    LinearizationResult out;
    out.k_matrix = K;
    out.omega_form = omega_form;
    out.g_form = g_form;
    if (j_form) {
        const Mat& J = *j_form;
        out.k_commuting = 0.5 * (K - J * K * J);
        out.k_anticommuting = 0.5 * (K + J * K * J);
    }
    detail::analyze_k(out, require_normalizable);
    return out;
}

// Nested central-difference Hessian of E(x) = <H> on the family.
inline Mat energy_hessian(const FamilySpec& f, const Vec& x, const CMat& H) {
    const int n = f.dimension;
    auto E = [&](const Vec& y) {
        CVec psi = f.parametrize(y);
        return psi.dot(H * psi).real() / psi.squaredNorm();
    };
    Mat hess(n, n);
    double E0 = E(x);
    for (int i = 0; i < n; ++i) {
        double hi = fd_hess_scale * std::max(1.0, std::abs(x[i]));
        Vec xp = x, xm = x;
        xp[i] += hi;
        xm[i] -= hi;
        hess(i, i) = (E(xp) - 2 * E0 + E(xm)) / (hi * hi);
        for (int j = i + 1; j < n; ++j) {
            double hj = fd_hess_scale * std::max(1.0, std::abs(x[j]));
            Vec a = x, b = x, c = x, d = x;
            a[i] += hi; a[j] += hj;
            b[i] += hi; b[j] -= hj;
            c[i] -= hi; c[j] += hj;
            d[i] -= hi; d[j] -= hj;
            hess(i, j) = hess(j, i) = (E(a) - E(b) - E(c) + E(d)) / (4 * hi * hj);
        }
    }
    return hess;
}

// K = -Omega Hess(E) at a stationary point; gated on || dE || being small.
// An analytic Hessian may be supplied to beat finite-difference noise.
inline LinearizationResult linearize(const FamilySpec& f, const Vec& x0, const CMat& H,
                                     const std::function<Mat(const Vec&)>& hessian = nullptr,
                                     bool require_normalizable = false) {
    auto [E, dE] = expectation_and_gradient(f, x0, H);
    double gnorm = dE.norm();
    if (gnorm > stationarity_rtol * (1.0 + std::abs(E)))
        throw std::domain_error("linearize: x0 is not stationary, ||dE|| = " +
                                std::to_string(gnorm));
    TangentFrame fr = tangent_frame(f, x0);
    KahlerTriple t = restricted_structures(fr);
    Mat hess = hessian ? hessian(x0) : energy_hessian(f, x0, H);
    Mat K = -(t.omega_inv * hess);
    return analyze_k_matrix(K, t.omega, t.g, &t.j, require_normalizable);
}

struct SpectralResult {
    std::vector<double> omegas;   // positive frequencies
    std::vector<double> weights;  // |E^mu(i w) . dV|^2
    Vec grid;
    Vec a_values;  // A(omega) on the grid
    double eta = 0.0;
};

// A(omega) = sum_{w>0} |E(iw).dV|^2 [L_eta(omega - w) - L_eta(omega + w)];
// dV_mu = 2 Re<V_mu|Vhat|psi>/<psi|psi> is the gradient of <Vhat>.
inline SpectralResult spectral_function(const LinearizationResult& lin, const FamilySpec& f,
                                        const Vec& x0, const CMat& Vhat, const Vec& grid,
                                        double eta = -1.0) {
    if (!lin.normalized)
        throw std::domain_error("spectral_function: linearization not Williamson-normalized");
    auto [V0, dV] = expectation_and_gradient(f, x0, Vhat);
    (void)V0;
    SpectralResult out;
    double wmax = 0.0;
    for (auto& p : lin.eigenpairs) wmax = std::max(wmax, p.lambda.imag());
    out.eta = (eta > 0) ? eta : 0.02 * std::max(wmax, 1e-12);
    out.grid = grid;
    out.a_values = Vec::Zero(grid.size());
    for (auto& p : lin.eigenpairs) {
        double w = p.lambda.imag();
        if (w <= 0) continue;
        cplx amp = p.right.conjugate().dot(dV.cast<cplx>());
        double weight = std::norm(amp);
        out.omegas.push_back(w);
        out.weights.push_back(weight);
        for (int i = 0; i < grid.size(); ++i)
            out.a_values[i] +=
                weight * (lorentzian(grid[i] - w, out.eta) - lorentzian(grid[i] + w, out.eta));
    }
    return out;
}

// Classifies zero modes: overlap with projected symmetry generators ->
// PhysicalGoldstone; membership in ker(g) -> GaugeArtifact; else Unclassified.
inline std::vector<ZeroMode> goldstone_scan(const LinearizationResult& lin,
                                            const TangentFrame& fr,
                                            const std::vector<CMat>& symmetry_ops) {
    KahlerTriple t = restricted_structures(fr);
    std::vector<Vec> gens;
    for (auto& A : symmetry_ops)
        gens.push_back(project(fr, t, cplx(0, -1) * (A * fr.psi)));
    std::vector<ZeroMode> out = lin.zero_modes;
    double gscale = std::max(t.g.cwiseAbs().maxCoeff(), 1e-300);
    for (auto& zm : out) {
        Vec z = zm.vector.normalized();
        if ((t.g * z).norm() < 1e-8 * gscale) {
            zm.tag = ZeroModeTag::GaugeArtifact;
            continue;
        }
        for (auto& gv : gens) {
            if (gv.norm() < 1e-12) continue;
            double ov = std::abs(z.dot(gv.normalized()));
            if (ov > 0.99) {
                zm.tag = ZeroModeTag::PhysicalGoldstone;
                break;
            }
        }
    }
    return out;
}

}  // namespace varkahler
