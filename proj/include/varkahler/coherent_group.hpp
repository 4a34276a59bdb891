// Lie-group coherent-state machinery: algebra validation, tangent frames via
// the algebra isomorphism, group-invariant restricted structures, highest
// weight certification, co-adjoint evaluation and the Cayley-step integrator.
#pragma once

#include "evolution.hpp"
#include "families.hpp"

namespace varkahler {

struct LieAlgebraSpec {
    std::vector<CMat> generators;  // Xi_i on the representation space
    // structure_constants[k](i, j) = c^k_ij in [Xi_i, Xi_j] = c^k_ij Xi_k
    std::vector<Mat> structure_constants;
    Mat killing;  // K_ij = c^k_il c^l_jk
    double closure_residual = 0.0;
    double jacobi_residual = 0.0;

    int dim() const { return (int)generators.size(); }
    CMat element(const Vec& coeff) const {
        CMat m = CMat::Zero(generators[0].rows(), generators[0].cols());
        for (size_t i = 0; i < generators.size(); ++i) m += coeff[(Eigen::Index)i] * generators[i];
        return m;
    }
};

// Least-squares fit of the structure constants against the commutators.
// Closure residual above 1e-8 (relative to the generator scale) is an error.
inline LieAlgebraSpec validate_algebra(const std::vector<CMat>& generators) {
    if (generators.empty()) throw std::invalid_argument("validate_algebra: no generators");
    const int n = (int)generators.size();
    const Eigen::Index d = generators[0].rows();
    LieAlgebraSpec spec;
    spec.generators = generators;

    // flatten the generators into the columns of a real (2 d^2) x n system
    Mat A(2 * d * d, n);
    for (int k = 0; k < n; ++k) {
        A.col(k).head(d * d) = Eigen::Map<const Vec>(
            reinterpret_cast<const double*>(generators[(size_t)k].data()), 2 * d * d)
                                   (Eigen::seqN(0, d * d, 2));
        A.col(k).tail(d * d) = Eigen::Map<const Vec>(
            reinterpret_cast<const double*>(generators[(size_t)k].data()), 2 * d * d)
                                   (Eigen::seqN(1, d * d, 2));
    }
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(A);
    double scale = 0.0;
    for (auto& g : generators) scale = std::max(scale, g.cwiseAbs().maxCoeff());

    spec.structure_constants.assign((size_t)n, Mat::Zero(n, n));
    double resid = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            CMat comm = generators[(size_t)i] * generators[(size_t)j] -
                        generators[(size_t)j] * generators[(size_t)i];
            Vec b(2 * d * d);
            b.head(d * d) = Eigen::Map<const Vec>(
                reinterpret_cast<const double*>(comm.data()), 2 * d * d)(Eigen::seqN(0, d * d, 2));
            b.tail(d * d) = Eigen::Map<const Vec>(
                reinterpret_cast<const double*>(comm.data()), 2 * d * d)(Eigen::seqN(1, d * d, 2));
            Vec c = cod.solve(b);
            resid = std::max(resid, (A * c - b).cwiseAbs().maxCoeff());
            for (int k = 0; k < n; ++k) {
                spec.structure_constants[(size_t)k](i, j) = c[k];
                spec.structure_constants[(size_t)k](j, i) = -c[k];
            }
        }
    spec.closure_residual = resid / std::max(scale * scale, 1e-300);
    if (spec.closure_residual > 1e-8)
        throw std::domain_error("validate_algebra: generators do not close, residual " +
                                std::to_string(spec.closure_residual));

    // Jacobi identity on c: sum_m c^m_ij c^l_mk + cyclic = 0
    double jac = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double s = 0.0;
                    for (int m = 0; m < n; ++m)
                        s += spec.structure_constants[(size_t)m](i, j) *
                                 spec.structure_constants[(size_t)l](m, k) +
                             spec.structure_constants[(size_t)m](j, k) *
                                 spec.structure_constants[(size_t)l](m, i) +
                             spec.structure_constants[(size_t)m](k, i) *
                                 spec.structure_constants[(size_t)l](m, j);
                    jac = std::max(jac, std::abs(s));
                }
    spec.jacobi_residual = jac;
    if (jac > 1e-8 * std::max(1.0, resid))
        throw std::domain_error("validate_algebra: Jacobi identity violated");

    spec.killing = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    s += spec.structure_constants[(size_t)k](i, l) *
                         spec.structure_constants[(size_t)l](j, k);
            spec.killing(i, j) = s;
        }
    return spec;
}

struct CoherentFamily {
    LieAlgebraSpec algebra;
    CVec phi;       // reference vector
    CMat m_current; // group element (representation matrix)
    Mat stabilizer_basis;  // columns: coefficient vectors A with A^i |V_i> = 0
};

namespace detail {

// projected tangents Q_psi (M Xi_i phi) with psi = M phi
inline std::vector<CVec> coherent_tangents(const CoherentFamily& f, const CMat& M,
                                           CVec* psi_out = nullptr) {
    CVec psi = M * f.phi;
    double norm = psi.squaredNorm();
    std::vector<CVec> out;
    for (auto& Xi : f.algebra.generators) {
        CVec raw = M * (Xi * f.phi);
        out.push_back(raw - psi * (psi.dot(raw) / norm));
    }
    if (psi_out) *psi_out = psi;
    return out;
}

}  // namespace detail

inline CoherentFamily coherent_family(const LieAlgebraSpec& algebra, const CVec& phi) {
    CoherentFamily f;
    f.algebra = algebra;
    f.phi = phi;
    f.m_current = CMat::Identity(phi.size(), phi.size());
    // stabilizer h_phi: kernel of A -> A^i |V_i> over the real coefficients
    auto tang = detail::coherent_tangents(f, f.m_current);
    const int n = algebra.dim();
    const Eigen::Index d = phi.size();
    Mat T(2 * d, n);
    for (int i = 0; i < n; ++i) {
        T.col(i).head(d) = tang[(size_t)i].real();
        T.col(i).tail(d) = tang[(size_t)i].imag();
    }
    Eigen::JacobiSVD<Mat> svd(T, Eigen::ComputeFullV);
    double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    double cut = 1e-10 * std::max(smax, 1.0);
    int rank = 0;
    for (int k = 0; k < svd.singularValues().size(); ++k)
        if (svd.singularValues()[k] > cut) ++rank;
    f.stabilizer_basis = svd.matrixV().rightCols(n - rank);
    return f;
}

// Restricted structures evaluated at the identity; by the group invariance
// they hold verbatim at every other group element.
inline KahlerTriple coherent_structures(const CoherentFamily& f,
                                        const CMat* at_element = nullptr) {
    CMat M = at_element ? *at_element : CMat::Identity(f.phi.size(), f.phi.size());
    CVec psi;
    auto tang = detail::coherent_tangents(f, M, &psi);
    const int n = f.algebra.dim();
    CMat gram(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gram(i, j) = tang[(size_t)i].dot(tang[(size_t)j]);
    return build_triple(gram, psi.squaredNorm());
}

struct CoadjointPoint {
    Vec beta;
    double imag_residual = 0.0;  // nonzero only for non-unitary representations
};

// (beta_M)_i = i <phi| U^dag Xi_i U |phi> / <phi|phi> at U = m_current.
inline CoadjointPoint coadjoint(const CoherentFamily& f) {
    CVec psi = f.m_current * f.phi;
    double norm = psi.squaredNorm();
    const int n = f.algebra.dim();
    CoadjointPoint out;
    out.beta = Vec(n);
    for (int i = 0; i < n; ++i) {
        cplx v = cplx(0, 1) * psi.dot(f.algebra.generators[(size_t)i] * psi) / norm;
        out.beta[i] = v.real();
        out.imag_residual = std::max(out.imag_residual, std::abs(v.imag()));
    }
    return out;
}

struct CartanChoice {
    std::vector<CMat> cartan;          // commuting set (diagnostic only)
    std::vector<CMat> positive_roots;  // raising operators E_alpha
};

struct HighestWeightCertificate {
    bool kaehler = false;
    double annihilation_residual = 0.0;  // max ||E_alpha phi|| / ||phi||
    Classification classification = Classification::Kaehler;
    // on failure: tangent pair (coefficient vectors) violating J^2 = -1,
    // with the pairing constant c of its block (c = 0 for a degenerate row)
    std::optional<std::pair<Vec, Vec>> witness;
    double witness_c = 1.0;
};

// Forward direction of the highest-weight criterion: all supplied positive
// root operators must annihilate the reference vector.  The numerical Kaehler
// status of the restricted structures is reported alongside, and a violating
// tangent pair is extracted from the standard form when the check fails.
inline HighestWeightCertificate certify_highest_weight(const CoherentFamily& f,
                                                       const CartanChoice& cartan) {
    HighestWeightCertificate cert;
    double pn = f.phi.norm();
    for (auto& E : cartan.positive_roots)
        cert.annihilation_residual =
            std::max(cert.annihilation_residual, (E * f.phi).norm() / pn);

    KahlerTriple t = coherent_structures(f);
    cert.classification = t.classification;
    cert.kaehler = cert.annihilation_residual < 1e-10 &&
                   t.classification == Classification::Kaehler;
    if (!cert.kaehler) {
        StandardFormDecomposition sf = standard_form(t);
        const int n = f.algebra.dim();
        if (!sf.c_values.empty()) {
            // first isotropic pair sits right after the Kaehler block
            int off = sf.kaehler_dim;
            cert.witness = {Vec(sf.basis_change.col(off)), Vec(sf.basis_change.col(off + 1))};
            cert.witness_c = sf.c_values.front();
        } else if (sf.degenerate_dim > 0) {
            Vec v = sf.basis_change.col(n - 1);
            cert.witness = {v, v};
            cert.witness_c = 0.0;
        }
    }
    return cert;
}

// M -> M (1 + eps dM/2)(1 - eps dM/2)^{-1} with dM = velocity^i Xi_i.
inline CoherentFamily cayley_step(const CoherentFamily& f, const Vec& velocity, double eps) {
    CMat dM = f.algebra.element(velocity);
    const Eigen::Index d = dM.rows();
    CMat den = CMat::Identity(d, d) - 0.5 * eps * dM;
    Eigen::FullPivLU<CMat> lu(den);
    double rc = lu.rcond();
    if (!lu.isInvertible() || rc < 1e-12)
        throw std::domain_error(
            "cayley_step: denominator near singular (rcond " + std::to_string(rc) +
            "), reduce the step size");
    CoherentFamily out = f;
    out.m_current = f.m_current * ((CMat::Identity(d, d) + 0.5 * eps * dM) * lu.inverse());
    return out;
}

struct GroupTrajectory {
    std::vector<double> times;
    std::vector<double> energies;
    std::vector<CMat> elements;
};

// Fixed-structure group integrator: (g, omega) precomputed at the identity,
// per-step gradient from the one-parameter subgroups, Cayley update.
inline GroupTrajectory group_flow(CoherentFamily f, const CMat& H, FlowKind kind, double T,
                                  double eps) {
    if (eps <= 0.0 || T < 0.0) throw std::invalid_argument("group_flow: need eps > 0, T >= 0");
    KahlerTriple t = coherent_structures(f);
    const int n = f.algebra.dim();
    int steps = (int)std::llround(T / eps);
    GroupTrajectory out;
    auto record = [&](double time) {
        CVec psi = f.m_current * f.phi;
        out.times.push_back(time);
        out.energies.push_back(psi.dot(H * psi).real() / psi.squaredNorm());
        out.elements.push_back(f.m_current);
    };
    auto velocity = [&](const CMat& M) {
        CVec psi;
        auto tang = detail::coherent_tangents(f, M, &psi);
        double norm = psi.squaredNorm();
        CVec Hpsi = H * psi;
        if (kind == FlowKind::McLachlan) {
            Vec rhs(n);
            for (int i = 0; i < n; ++i) rhs[i] = 2.0 * tang[(size_t)i].dot(Hpsi).imag() / norm;
            return Vec(t.g_inv * rhs);
        }
        Vec dE(n);  // d/ds E(M e^{s Xi_i})|_0 = 2 Re<M Xi_i phi|(H - E)|psi>/<psi|psi>
        for (int i = 0; i < n; ++i) dE[i] = 2.0 * tang[(size_t)i].dot(Hpsi).real() / norm;
        if (kind == FlowKind::Lagrangian) return pseudo_solve(t.omega, t.g, dE);
        return Vec(-(t.g_inv * dE));
    };
    record(0.0);
    for (int s = 0; s < steps; ++s) {
        // midpoint rule: half Cayley step to evaluate the velocity, full step
        Vec v1 = velocity(f.m_current);
        Vec v2 = velocity(cayley_step(f, v1, 0.5 * eps).m_current);
        f = cayley_step(f, v2, eps);
        record((s + 1) * eps);
    }
    return out;
}

// ---- preset registry ------------------------------------------------------

struct CoherentPreset {
    LieAlgebraSpec algebra;
    CVec phi;
    CartanChoice cartan;
    std::string name;
};

namespace detail {

// spin matrices for arbitrary spin j (dimension 2j + 1), Sz diagonal
inline std::vector<CMat> spin_matrices(double j) {
    int d = (int)std::llround(2 * j + 1);
    CMat sp = CMat::Zero(d, d);  // S+ in the m = j..-j basis (descending)
    for (int k = 0; k + 1 < d; ++k) {
        double m = j - 1 - k;
        sp(k, k + 1) = std::sqrt(j * (j + 1) - m * (m + 1));
    }
    CMat sm = sp.adjoint();
    CMat sz = CMat::Zero(d, d);
    for (int k = 0; k < d; ++k) sz(k, k) = j - k;
    return {0.5 * (sp + sm), cplx(0, -0.5) * (sp - sm), sz, sp, sm};
}

}  // namespace detail

// Built-in families addressable by name:
//   "su2:spin-0.5" .. "su2:spin-2"  — Xi_k = -i S_k, highest weight |j, j>
//   "so3:vector"                    — adjoint representation, (Xi_i)_kj = eps_kij
//   "sp2r:fockN"                    — X, Y, Z squeezing triple, cutoff N
//   "heis:fockN"                    — 1, q, p, n extension, cutoff N
inline CoherentPreset coherent_preset(const std::string& name) {
    CoherentPreset p;
    p.name = name;
    auto starts = [&](const char* s) { return name.rfind(s, 0) == 0; };
    if (starts("su2:spin-")) {
        double j = std::stod(name.substr(9));
        if (j < 0.5 || j > 2.0 || std::llround(2 * j) != 2 * j)
            throw std::invalid_argument("coherent_preset: spin out of range: " + name);
        auto S = detail::spin_matrices(j);
        p.algebra = validate_algebra(
            {cplx(0, -1) * S[0], cplx(0, -1) * S[1], cplx(0, -1) * S[2]});
        int d = (int)S[0].rows();
        p.phi = CVec::Zero(d);
        p.phi[0] = 1.0;  // highest weight |j, j>
        p.cartan.cartan = {cplx(0, -1) * S[2]};
        p.cartan.positive_roots = {S[3]};
    } else if (name == "so3:vector") {
        std::vector<CMat> gens(3, CMat::Zero(3, 3));
        int eps[3][3][3] = {};
        eps[0][1][2] = eps[1][2][0] = eps[2][0][1] = 1;
        eps[0][2][1] = eps[2][1][0] = eps[1][0][2] = -1;
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k)
                for (int jj = 0; jj < 3; ++jj) gens[(size_t)i](k, jj) = eps[k][i][jj];
        p.algebra = validate_algebra(gens);
        p.phi = CVec::Zero(3);
        p.phi[0] = 1.0;
        p.cartan.cartan = {gens[2]};
        // raising operator L+ = L_x + i L_y of the unitary rep L_k = i Xi_k
        p.cartan.positive_roots = {cplx(0, 1) * gens[0] - gens[1]};
    } else if (starts("sp2r:fock")) {
        int cutoff = std::stoi(name.substr(9));
        FockSpaceBuilder fb(1, cutoff);
        auto gens = sp2r_warmup_generators(fb);
        // the truncated Fock representation violates closure in the last two
        // levels; take the structure constants from the 2 x 2 defining
        // representation.  Under -i H(h) -> Omega h with H(h) = (1/2) xi h xi:
        //   X = -i (qp + pq), Y = -i (p^2 - q^2), Z = -i (-(q^2 + p^2)/2)
        Mat om(2, 2), hX(2, 2), hY(2, 2), hZ(2, 2);
        om << 0, 1, -1, 0;
        hX << 0, 2, 2, 0;
        hY << -2, 0, 0, 2;
        hZ << -1, 0, 0, -1;
        LieAlgebraSpec defining = validate_algebra(
            {CMat((om * hX).cast<cplx>()), CMat((om * hY).cast<cplx>()),
             CMat((om * hZ).cast<cplx>())});
        p.algebra = defining;
        p.algebra.generators = gens;
        p.phi = fb.fock_state(0, 0);
        p.cartan.cartan = {gens[2]};
        p.cartan.positive_roots = {fb.boson_a(0) * fb.boson_a(0)};
    } else if (starts("heis:fock")) {
        int cutoff = std::stoi(name.substr(9));
        FockSpaceBuilder fb(1, cutoff);
        auto xi = fb.xi_bosonic();
        CMat id = CMat::Identity(fb.dim(), fb.dim());
        CMat n_op = fb.boson_a(0).adjoint() * fb.boson_a(0);
        // the truncated q, p, n violate their commutators at the cutoff
        // boundary, so the constants are supplied instead of fitted:
        // [Xi_q, Xi_p] = Xi_1, [Xi_n, Xi_q] = -Xi_p, [Xi_n, Xi_p] = Xi_q
        p.algebra.generators = {cplx(0, -1) * id, cplx(0, -1) * xi[0],
                                cplx(0, -1) * xi[1], cplx(0, -1) * (n_op + 0.5 * id)};
        int n4 = 4;
        std::vector<Mat> c(4, Mat::Zero(n4, n4));
        c[0](1, 2) = 1.0;
        c[0](2, 1) = -1.0;
        c[2](3, 1) = -1.0;
        c[2](1, 3) = 1.0;
        c[1](3, 2) = 1.0;
        c[1](2, 3) = -1.0;
        p.algebra.structure_constants = c;
        // killing form rebuilt for the extended constants
        p.algebra.killing = Mat::Zero(n4, n4);
        for (int i = 0; i < n4; ++i)
            for (int j = 0; j < n4; ++j) {
                double s = 0.0;
                for (int k = 0; k < n4; ++k)
                    for (int l = 0; l < n4; ++l)
                        s += c[(size_t)k](i, l) * c[(size_t)l](j, k);
                p.algebra.killing(i, j) = s;
            }
        p.phi = fb.fock_state(0, 0);
        p.cartan.cartan = {p.algebra.generators[3]};
        p.cartan.positive_roots = {fb.boson_a(0)};
    } else {
        throw std::invalid_argument("coherent_preset: unknown preset: " + name);
    }
    return p;
}

}  // namespace varkahler
