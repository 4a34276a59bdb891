// Bosonic and fermionic Gaussian states over xi = (q_1..q_N, p_1..p_N):
// covariance-matrix state model, Wick's theorem with derivative accumulation,
// Gaussian transformations, closed-form real/imaginary-time EOMs, analytic
// linearization in an orthonormal tangent basis, and the truncated-Fock bridge.
#pragma once

#include "families.hpp"
#include "spectra.hpp"

#include <memory>
#include <optional>

namespace varkahler {

enum class Statistics { Boson, Fermion };

// Standard symplectic form / vacuum pattern [[0, I], [-I, 0]].
inline Mat omega_bg(int N) {
    Mat o = Mat::Zero(2 * N, 2 * N);
    o.topRightCorner(N, N) = Mat::Identity(N, N);
    o.bottomLeftCorner(N, N) = -Mat::Identity(N, N);
    return o;
}

struct GaussianState {
    Statistics statistics = Statistics::Boson;
    Mat gamma;  // 2N x 2N; symmetric (bosons) / antisymmetric (fermions)
    Vec z;      // 2N displacement; identically zero for fermions

    int modes() const { return (int)gamma.rows() / 2; }
};

inline GaussianState vacuum_state(Statistics st, int N) {
    GaussianState s;
    s.statistics = st;
    s.gamma = (st == Statistics::Boson) ? Mat(Mat::Identity(2 * N, 2 * N)) : omega_bg(N);
    s.z = Vec::Zero(2 * N);
    return s;
}

// Complex structure of the state: J = Gamma.Omega_bg (bosons, G = Gamma) or
// J = Gamma (fermions, where Gamma itself is the state's omega and G = delta).
inline Mat gaussian_j(const GaussianState& s) {
    return (s.statistics == Statistics::Boson) ? Mat(s.gamma * omega_bg(s.modes())) : s.gamma;
}

struct GaussianValidation {
    bool valid = false;
    std::string reason;
    Mat j;
    double j2_deviation = 0.0;
};

inline GaussianValidation validate(const GaussianState& s) {
    GaussianValidation out;
    const int n = (int)s.gamma.rows();
    if (n == 0 || n % 2 || s.gamma.cols() != n || s.z.size() != n) {
        out.reason = "malformed dimensions";
        return out;
    }
    double scale = std::max(s.gamma.cwiseAbs().maxCoeff(), 1.0);
    if (s.statistics == Statistics::Boson) {
        if ((s.gamma - s.gamma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
            out.reason = "bosonic Gamma not symmetric";
            return out;
        }
    } else {
        if ((s.gamma + s.gamma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
            out.reason = "fermionic Gamma not antisymmetric";
            return out;
        }
        if (s.z.cwiseAbs().maxCoeff() > 0) {
            out.reason = "fermionic displacement must vanish";
            return out;
        }
    }
    out.j = gaussian_j(s);
    out.j2_deviation =
        (out.j * out.j + Mat::Identity(n, n)).cwiseAbs().maxCoeff();
    if (out.j2_deviation > 1e-10 * scale * scale) {
        if (s.statistics == Statistics::Boson) {
            // diagnostic: smallest symplectic eigenvalue (pure states have 1)
            Eigen::EigenSolver<Mat> es(omega_bg(s.modes()) * s.gamma);
            double nu = 1e300;
            for (int k = 0; k < n; ++k) nu = std::min(nu, std::abs(es.eigenvalues()[k].imag()));
            out.reason = "not a pure Gaussian state (min symplectic eigenvalue " +
                         std::to_string(nu) + ")";
        } else {
            out.reason = "not a pure fermionic Gaussian state (Gamma^T Gamma != 1)";
        }
        return out;
    }
    out.valid = true;
    return out;
}

// C2^ab = <xi^a xi^b> - z^a z^b: (Gamma + i Omega_bg)/2 bosons, (1 + i Gamma)/2 fermions.
inline CMat c2_matrix(const GaussianState& s) {
    const int n = (int)s.gamma.rows();
    if (s.statistics == Statistics::Boson)
        return 0.5 * (s.gamma.cast<cplx>() + cplx(0, 1) * omega_bg(s.modes()).cast<cplx>());
    return 0.5 * (Mat::Identity(n, n).cast<cplx>() + cplx(0, 1) * s.gamma.cast<cplx>());
}

// ---- Wick's theorem -------------------------------------------------------

namespace detail {
// Pairing sum over the ordered index list; bosons pull z singletons, fermions
// carry the parity sign (-1)^{p-1} when pairing the first index with position p.
inline cplx wick_recurse(const CMat& c2, const Vec& z, bool fermion,
                         const std::vector<int>& idx) {
    const size_t n = idx.size();
    if (n == 0) return 1.0;
    if (n == 1) return fermion ? cplx(0.0) : cplx(z[idx[0]]);
    std::vector<int> rest(idx.begin() + 1, idx.end());
    cplx total(0, 0);
    if (!fermion && z.cwiseAbs().maxCoeff() > 0)
        total += z[idx[0]] * wick_recurse(c2, z, fermion, rest);
    else if (!fermion && n % 2)
        return 0.0;
    for (size_t p = 1; p < n; ++p) {
        std::vector<int> rem;
        for (size_t k = 1; k < n; ++k)
            if (k != p) rem.push_back(idx[k]);
        double sign = (fermion && (p % 2 == 0)) ? -1.0 : 1.0;
        total += sign * c2(idx[0], idx[(int)p]) * wick_recurse(c2, z, fermion, rem);
    }
    return total;
}
}  // namespace detail

inline cplx wick_npoint(const GaussianState& s, const std::vector<int>& indices) {
    if (indices.size() > 8)
        throw std::domain_error("wick_npoint: n > 8 not supported");
    if (s.statistics == Statistics::Fermion && indices.size() % 2) return 0.0;
    return detail::wick_recurse(c2_matrix(s), s.z, s.statistics == Statistics::Fermion,
                                indices);
}

// ---- Gaussian transformations ---------------------------------------------

struct GaussianTransform {
    Mat k;    // algebra element: K Omega + Omega K^t = 0 (bosons) / K + K^t = 0 (fermions)
    Vec dz;   // displacement (bosons)
    int flip_axis = -1;  // fermions: reflect this Majorana direction first (det -1)
};

inline GaussianState apply_transform(const GaussianState& s, const GaussianTransform& t) {
    const int n = (int)s.gamma.rows();
    double scale = std::max(t.k.cwiseAbs().maxCoeff(), 1.0);
    if (s.statistics == Statistics::Boson) {
        Mat o = omega_bg(s.modes());
        if ((t.k * o + o * t.k.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
            throw std::domain_error("apply_transform: K not in sp(2N,R)");
    } else if ((t.k + t.k.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw std::domain_error("apply_transform: K not in so(2N)");
    }
    Mat M = t.k.exp();
    if (t.flip_axis >= 0) {
        Mat F = Mat::Identity(n, n);
        F(t.flip_axis, t.flip_axis) = -1.0;
        M = M * F;
    }
    GaussianState out = s;
    out.gamma = M * s.gamma * M.transpose();
    if (s.statistics == Statistics::Boson)
        out.z = M * s.z + (t.dz.size() == n ? t.dz : Vec(Vec::Zero(n)));
    return out;
}

namespace detail {
// Pfaffian of a real antisymmetric matrix by Gaussian elimination with
// pivoting (sign tracked); only the sign and rough magnitude are needed.
inline double pfaffian(Mat a) {
    const int n = (int)a.rows();
    if (n % 2) return 0.0;
    double pf = 1.0;
    for (int k = 0; k < n - 1; k += 2) {
        int piv = k + 1;
        for (int j = k + 2; j < n; ++j)
            if (std::abs(a(k, j)) > std::abs(a(k, piv))) piv = j;
        if (piv != k + 1) {
            a.row(piv).swap(a.row(k + 1));
            a.col(piv).swap(a.col(k + 1));
            pf = -pf;
        }
        if (a(k, k + 1) == 0.0) return 0.0;
        pf *= a(k, k + 1);
        for (int i = k + 2; i < n; ++i) {
            double f = a(k, i) / a(k, k + 1);
            a.row(i) -= f * a.row(k + 1);
            a.col(i) -= f * a.col(k + 1);
        }
    }
    return pf;
}
}  // namespace detail

// Transform mapping `from` onto `to`: K = (1/2) log(-J_to J_from) via the real
// matrix logarithm; fermionic component mismatch handled by a flip first.
inline GaussianTransform connect(const GaussianState& from, const GaussianState& to) {
    if (from.statistics != to.statistics)
        throw std::domain_error("connect: mismatched statistics");
    const int n = (int)from.gamma.rows();
    GaussianTransform t;
    t.flip_axis = -1;
    Mat gfrom = from.gamma;
    if (from.statistics == Statistics::Fermion &&
        detail::pfaffian(from.gamma) * detail::pfaffian(to.gamma) < 0) {
        t.flip_axis = 0;
        Mat F = Mat::Identity(n, n);
        F(0, 0) = -1.0;
        gfrom = F * gfrom * F.transpose();
    }
    GaussianState mid = from;
    mid.gamma = gfrom;
    Mat delta = -gaussian_j(to) * gaussian_j(mid);
    // reject branch-cut cases (eigenvalue on the negative real axis)
    Eigen::EigenSolver<Mat> es(delta);
    for (int k = 0; k < n; ++k) {
        cplx ev = es.eigenvalues()[k];
        if (ev.real() < 0 && std::abs(ev.imag()) < 1e-12 * std::abs(ev))
            throw std::domain_error("connect: relative matrix on log branch cut");
    }
    t.k = 0.5 * delta.log();
    Mat M = t.k.exp();
    t.dz = (from.statistics == Statistics::Boson) ? Vec(to.z - M * from.z)
                                                  : Vec(Vec::Zero(n));
    return t;
}

// ---- polynomial observables (degree <= 4) ---------------------------------

struct PolyTerm {
    double coeff = 0.0;
    std::vector<int> indices;  // ordered product xi^{a1} ... xi^{ak}, k <= 4
};

struct PolynomialOperator {
    std::vector<PolyTerm> terms;
    double constant = 0.0;
};

// 1/2 h_ab xi^a xi^b + f_a xi^a + c as a polynomial (ordered product form).
inline PolynomialOperator quadratic_hamiltonian(const Mat& h, const Vec& f = Vec(),
                                                double constant = 0.0) {
    PolynomialOperator op;
    op.constant = constant;
    const int n = (int)h.rows();
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (h(a, b) != 0.0) op.terms.push_back({0.5 * h(a, b), {a, b}});
    if (f.size() == n)
        for (int a = 0; a < n; ++a)
            if (f[a] != 0.0) op.terms.push_back({f[a], {a}});
    return op;
}

// Fermionic quadratic Hamiltonian H = (i/2) h_ab xi^a xi^b needs an imaginary
// prefactor for Hermiticity; representable with real coefficients only through
// its expectation E = -(1/4) h : Gamma, so it gets a dedicated entry point.
struct FermionQuadratic {
    Mat h;  // real antisymmetric
};

struct GaussianExpectation {
    double value = 0.0;
    Vec dz;      // dE/dz
    Mat dgamma;  // dE/dGamma (symmetrized for bosons, antisymmetrized for fermions)
};

namespace detail {
// Expectation of one ordered product with accumulation of d/dz and d/dC2;
// closed expansions for k <= 4 keep this exact (no recursion bookkeeping).
struct MomentAccum {
    cplx value{0, 0};
    CVec dz;
    CMat dc;
    MomentAccum(int n) : dz(CVec::Zero(n)), dc(CMat::Zero(n, n)) {}
};

inline void accumulate_term(const CMat& C, const Vec& z, bool fermion,
                            const std::vector<int>& id, double w, MomentAccum& acc) {
    const size_t k = id.size();
    auto addC = [&](int a, int b, cplx factor) { acc.dc(a, b) += w * factor; };
    if (k == 0) {
        acc.value += w;
    } else if (k == 1) {
        if (!fermion) {
            acc.value += w * z[id[0]];
            acc.dz[id[0]] += w;
        }
    } else if (k == 2) {
        int a = id[0], b = id[1];
        acc.value += w * (C(a, b) + (fermion ? 0.0 : z[a] * z[b]));
        addC(a, b, 1.0);
        if (!fermion) {
            acc.dz[a] += w * z[b];
            acc.dz[b] += w * z[a];
        }
    } else if (k == 3) {
        if (fermion) return;
        int a = id[0], b = id[1], c = id[2];
        acc.value += w * (z[a] * z[b] * z[c] + z[a] * C(b, c) + z[b] * C(a, c) +
                          z[c] * C(a, b));
        acc.dz[a] += w * (z[b] * z[c] + C(b, c));
        acc.dz[b] += w * (z[a] * z[c] + C(a, c));
        acc.dz[c] += w * (z[a] * z[b] + C(a, b));
        addC(b, c, z[a]);
        addC(a, c, z[b]);
        addC(a, b, z[c]);
    } else if (k == 4) {
        int a = id[0], b = id[1], c = id[2], d = id[3];
        if (fermion) {
            acc.value += w * (C(a, b) * C(c, d) - C(a, c) * C(b, d) + C(a, d) * C(b, c));
            addC(a, b, C(c, d));
            addC(c, d, C(a, b));
            addC(a, c, -C(b, d));
            addC(b, d, -C(a, c));
            addC(a, d, C(b, c));
            addC(b, c, C(a, d));
            return;
        }
        cplx paired = C(a, b) * C(c, d) + C(a, c) * C(b, d) + C(a, d) * C(b, c);
        cplx mixed = C(a, b) * z[c] * z[d] + C(a, c) * z[b] * z[d] + C(a, d) * z[b] * z[c] +
                     C(b, c) * z[a] * z[d] + C(b, d) * z[a] * z[c] + C(c, d) * z[a] * z[b];
        acc.value += w * (paired + mixed + z[a] * z[b] * z[c] * z[d]);
        addC(a, b, C(c, d) + z[c] * z[d]);
        addC(c, d, C(a, b) + z[a] * z[b]);
        addC(a, c, C(b, d) + z[b] * z[d]);
        addC(b, d, C(a, c) + z[a] * z[c]);
        addC(a, d, C(b, c) + z[b] * z[c]);
        addC(b, c, C(a, d) + z[a] * z[d]);
        acc.dz[a] += w * (C(b, c) * z[d] + C(b, d) * z[c] + C(c, d) * z[b] +
                          z[b] * z[c] * z[d]);
        acc.dz[b] += w * (C(a, c) * z[d] + C(a, d) * z[c] + C(c, d) * z[a] +
                          z[a] * z[c] * z[d]);
        acc.dz[c] += w * (C(a, b) * z[d] + C(a, d) * z[b] + C(b, d) * z[a] +
                          z[a] * z[b] * z[d]);
        acc.dz[d] += w * (C(a, b) * z[c] + C(a, c) * z[b] + C(b, c) * z[a] +
                          z[a] * z[b] * z[c]);
    } else {
        throw std::domain_error("gaussian expectation: term degree > 4");
    }
}
}  // namespace detail

inline GaussianExpectation expectation(const GaussianState& s, const PolynomialOperator& op) {
    const int n = (int)s.gamma.rows();
    const bool fermion = (s.statistics == Statistics::Fermion);
    CMat C = c2_matrix(s);
    detail::MomentAccum acc(n);
    for (auto& t : op.terms) detail::accumulate_term(C, s.z, fermion, t.indices, t.coeff, acc);
    GaussianExpectation out;
    out.value = acc.value.real() + op.constant;
    out.dz = acc.dz.real();
    // bosons: dC/dGamma = 1/2 entrywise; fermions: dC/dGamma = i/2, and
    // Re(w * i/2) = -Im(w)/2.  (Anti)symmetrize to respect Gamma's type.
    if (fermion) {
        Mat d = -0.5 * acc.dc.imag();
        out.dgamma = 0.5 * (d - d.transpose());
    } else {
        Mat d = 0.5 * acc.dc.real();
        out.dgamma = 0.5 * (d + d.transpose());
    }
    return out;
}

inline GaussianExpectation expectation(const GaussianState& s, const FermionQuadratic& fq) {
    GaussianExpectation out;
    out.value = -0.25 * (fq.h.cwiseProduct(s.gamma)).sum();
    out.dz = Vec::Zero(s.gamma.rows());
    out.dgamma = -0.25 * fq.h;
    return out;
}

// ---- equations of motion --------------------------------------------------

struct GaussianTangent {
    Vec dz;
    Mat dgamma;
};

namespace detail {
template <class Op>
inline GaussianTangent eom_real_impl(const GaussianState& s, const Op& op) {
    GaussianExpectation e = expectation(s, op);
    GaussianTangent out;
    const int N = s.modes();
    if (s.statistics == Statistics::Boson) {
        Mat o = omega_bg(N);
        out.dz = o * e.dz;
        // K Gamma + Gamma K^t with K = 4 Omega E_Gamma: manifestly tangent
        Mat K = 4.0 * o * e.dgamma;
        out.dgamma = K * s.gamma + s.gamma * K.transpose();
    } else {
        out.dz = Vec::Zero(2 * N);
        // generic form with Omega -> Gamma, G -> 1: 4 [Gamma, E_Gamma]
        out.dgamma = 4.0 * (s.gamma * e.dgamma - e.dgamma * s.gamma);
    }
    return out;
}

template <class Op>
inline GaussianTangent eom_imag_impl(const GaussianState& s, const Op& op) {
    GaussianExpectation e = expectation(s, op);
    GaussianTangent out;
    const int N = s.modes();
    if (s.statistics == Statistics::Boson) {
        Mat o = omega_bg(N);
        out.dz = -(s.gamma * e.dz);  // G = Gamma
        out.dgamma = -4.0 * (s.gamma * e.dgamma * s.gamma + o * e.dgamma * o);
    } else {
        out.dz = Vec::Zero(2 * N);
        out.dgamma = -4.0 * (e.dgamma + s.gamma * e.dgamma * s.gamma);
    }
    return out;
}
}  // namespace detail

inline GaussianTangent eom_real(const GaussianState& s, const PolynomialOperator& op) {
    return detail::eom_real_impl(s, op);
}
inline GaussianTangent eom_real(const GaussianState& s, const FermionQuadratic& op) {
    return detail::eom_real_impl(s, op);
}
inline GaussianTangent eom_imag(const GaussianState& s, const PolynomialOperator& op) {
    return detail::eom_imag_impl(s, op);
}
inline GaussianTangent eom_imag(const GaussianState& s, const FermionQuadratic& op) {
    return detail::eom_imag_impl(s, op);
}

// ---- tangent bases and linearization --------------------------------------

// Basis of the Lie algebra sp(2N,R) (bosons) or so(2N) (fermions).
inline std::vector<Mat> gaussian_algebra_basis(Statistics st, int N) {
    std::vector<Mat> out;
    const int n = 2 * N;
    if (st == Statistics::Fermion) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                Mat A = Mat::Zero(n, n);
                A(i, j) = 1.0;
                A(j, i) = -1.0;
                out.push_back(A);
            }
    } else {
        Mat o = omega_bg(N);
        // K = Omega S with S symmetric spans sp(2N,R)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Mat S = Mat::Zero(n, n);
                S(i, j) = S(j, i) = 1.0;
                out.push_back(o * S);
            }
    }
    return out;
}

struct GaussianTangentBasis {
    // physical directions: 2N displacement units (bosons), then Gamma directions
    std::vector<Vec> z_basis;
    std::vector<Mat> gamma_basis;      // orthonormal w.r.t. Frobenius inner product
    std::vector<Mat> gamma_generators; // algebra elements K_j with dGamma_j = K_j G + G K_j^t
};

inline GaussianTangentBasis gaussian_tangent_basis(const GaussianState& s) {
    GaussianTangentBasis out;
    const int N = s.modes();
    if (s.statistics == Statistics::Boson)
        for (int a = 0; a < 2 * N; ++a) out.z_basis.push_back(Vec::Unit(2 * N, a));
    // Gram-Schmidt over {K Gamma + Gamma K^t}
    for (auto& K : gaussian_algebra_basis(s.statistics, N)) {
        Mat d = K * s.gamma + s.gamma * K.transpose();
        Mat gen = K;
        for (size_t j = 0; j < out.gamma_basis.size(); ++j) {
            double ov = (out.gamma_basis[j].cwiseProduct(d)).sum();
            d -= ov * out.gamma_basis[j];
            gen -= ov * out.gamma_generators[j];
        }
        double nrm = d.norm();
        if (nrm > 1e-10) {
            out.gamma_basis.push_back(d / nrm);
            out.gamma_generators.push_back(gen / nrm);
        }
    }
    return out;
}

// K matrix of the linearized real-time flow in the orthonormal (dz, dGamma)
// basis.  Quadratic Hamiltonians use the exact linear maps; general
// polynomials fall back to central differences of eom_real.
template <class Op>
inline Mat linearize_gaussian(const GaussianState& s, const Op& op,
                              const GaussianTangentBasis& basis, const Mat* h_quadratic = nullptr) {
    const int N = s.modes();
    const int nz = (int)basis.z_basis.size();
    const int ng = (int)basis.gamma_basis.size();
    const int dim = nz + ng;
    Mat K = Mat::Zero(dim, dim);
    auto project = [&](const GaussianTangent& t, int col) {
        for (int i = 0; i < nz; ++i) K(i, col) = basis.z_basis[(size_t)i].dot(t.dz);
        for (int i = 0; i < ng; ++i)
            K(nz + i, col) = (basis.gamma_basis[(size_t)i].cwiseProduct(t.dgamma)).sum();
    };
    if (h_quadratic) {
        const Mat& h = *h_quadratic;
        Mat Kgen = (s.statistics == Statistics::Boson) ? Mat(omega_bg(N) * h) : h;
        for (int j = 0; j < nz; ++j) {
            GaussianTangent t;
            t.dz = Kgen * basis.z_basis[(size_t)j];
            t.dgamma = Mat::Zero(2 * N, 2 * N);
            project(t, j);
        }
        for (int j = 0; j < ng; ++j) {
            GaussianTangent t;
            t.dz = Vec::Zero(2 * N);
            const Mat& dG = basis.gamma_basis[(size_t)j];
            t.dgamma = Kgen * dG + dG * Kgen.transpose();
            project(t, nz + j);
        }
        return K;
    }
    const double h = 1e-5;
    for (int j = 0; j < dim; ++j) {
        GaussianState sp = s, sm = s;
        if (j < nz) {
            sp.z += h * basis.z_basis[(size_t)j];
            sm.z -= h * basis.z_basis[(size_t)j];
        } else {
            sp.gamma += h * basis.gamma_basis[(size_t)(j - nz)];
            sm.gamma -= h * basis.gamma_basis[(size_t)(j - nz)];
        }
        GaussianTangent tp = eom_real(sp, op), tm = eom_real(sm, op);
        GaussianTangent d;
        d.dz = (tp.dz - tm.dz) / (2 * h);
        d.dgamma = (tp.dgamma - tm.dgamma) / (2 * h);
        project(d, j);
    }
    return K;
}

// ---- truncated-Fock bridge ------------------------------------------------

// Bosonic Gaussian unitary for algebra element K in sp(2N,R): U = exp(-i Hk)
// with Hk = 1/2 h_ab xi^a xi^b, h = -Omega K, so that U^dag xi U = e^K xi.
inline CMat gaussian_unitary(const FockSpaceBuilder& fb, const Mat& K) {
    int N = (int)K.rows() / 2;
    Mat h = -omega_bg(N) * K;
    CMat Hk = quadratic_boson_operator(fb, h);
    return (cplx(0, -1) * Hk).exp();
}

inline CMat displacement_unitary(const FockSpaceBuilder& fb, const Vec& z) {
    int N = (int)z.size() / 2;
    auto xi = fb.xi_bosonic();
    CMat A = CMat::Zero(fb.dim(), fb.dim());
    Vec c = omega_bg(N) * z;
    for (int a = 0; a < 2 * N; ++a) A += cplx(0, 1) * c[a] * xi[a];
    return A.exp();
}

// Fermionic Gaussian unitary for K in so(2N): U = exp(i Hf) with
// Hf = (i/2) h xi xi, h = K, so that U^dag xi U = e^K xi.
inline CMat fermion_gaussian_unitary(const FockSpaceBuilder& fb, const Mat& K) {
    auto xi = fb.xi_fermionic();
    const int n = (int)xi.size();
    CMat Hf = CMat::Zero(fb.dim(), fb.dim());
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (K(a, b) != 0.0) Hf += cplx(0, 0.5) * K(a, b) * (xi[a] * xi[b]);
    Hf = 0.5 * (Hf + Hf.adjoint()).eval();
    return (cplx(0, -1) * Hf).exp();
}

struct FockEmbedding {
    CVec psi;
    double gamma_error = 0.0;  // max deviation of the re-measured covariance
};

// Re-measure (z, Gamma) of a dense state for validation.
inline std::pair<Vec, Mat> measure_gaussian(const FockSpaceBuilder& fb, const CVec& psi,
                                            Statistics st) {
    std::vector<CMat> xi =
        (st == Statistics::Boson) ? fb.xi_bosonic() : fb.xi_fermionic();
    const int n = (int)xi.size();
    double norm = psi.squaredNorm();
    Vec z = Vec::Zero(n);
    if (st == Statistics::Boson)
        for (int a = 0; a < n; ++a) z[a] = psi.dot(xi[a] * psi).real() / norm;
    Mat gamma(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            cplx m = psi.dot(xi[a] * (xi[b] * psi)) / norm;
            if (st == Statistics::Boson)
                gamma(a, b) = 2.0 * (m.real() - z[a] * z[b]);
            else
                gamma(a, b) = 2.0 * m.imag();
        }
    if (st == Statistics::Boson) gamma = 0.5 * (gamma + gamma.transpose()).eval();
    return {z, gamma};
}

inline FockEmbedding fock_embed(const GaussianState& s, int cutoff) {
    const int N = s.modes();
    FockEmbedding out;
    if (s.statistics == Statistics::Boson) {
        FockSpaceBuilder fb(N, cutoff);
        GaussianTransform t = connect(vacuum_state(Statistics::Boson, N), s);
        CVec psi = gaussian_unitary(fb, t.k) * fb.vacuum();
        psi = displacement_unitary(fb, s.z) * psi;
        out.psi = psi;
        auto [z, g] = measure_gaussian(fb, psi, Statistics::Boson);
        out.gamma_error = std::max((g - s.gamma).cwiseAbs().maxCoeff(),
                                   (z - s.z).cwiseAbs().maxCoeff());
    } else {
        FockSpaceBuilder fb(0, 2, N);
        GaussianTransform t = connect(vacuum_state(Statistics::Fermion, N), s);
        CVec psi = fermion_gaussian_unitary(fb, t.k) * fb.vacuum();
        out.psi = psi;
        auto [z, g] = measure_gaussian(fb, psi, Statistics::Fermion);
        (void)z;
        out.gamma_error = (g - s.gamma).cwiseAbs().maxCoeff();
    }
    return out;
}

// Truncated-Fock FamilySpec around a bosonic base state: parameters are the
// coefficients in the orthonormal (dz, dGamma) tangent basis, realized by
// displacement and squeezing unitaries on the embedded base vector.  Used as
// the oracle bridge for structures, fields and spectral functions.
inline FamilySpec gaussian_family(const GaussianState& s0, const GaussianTangentBasis& basis,
                                  int cutoff) {
    if (s0.statistics != Statistics::Boson)
        throw std::domain_error("gaussian_family: bosonic bridge only");
    const int N = s0.modes();
    auto fb = std::make_shared<FockSpaceBuilder>(N, cutoff);
    // squeeze around the centered state, then displace: keeps the Gamma
    // directions from dragging the mean vector along
    GaussianState centered = s0;
    centered.z = Vec::Zero(2 * N);
    CVec psi0 = fock_embed(centered, cutoff).psi;
    const Vec z0 = s0.z;
    const int nz = (int)basis.z_basis.size();
    const int ng = (int)basis.gamma_generators.size();
    FamilySpec f;
    f.label = "gaussian_bridge";
    f.dimension = nz + ng;
    f.parametrize = [fb, psi0, z0, basis, nz, ng, N](const Vec& x) {
        Mat K = Mat::Zero(2 * N, 2 * N);
        for (int j = 0; j < ng; ++j) K += x[nz + j] * basis.gamma_generators[(size_t)j];
        Vec dz = z0;
        for (int j = 0; j < nz; ++j) dz += x[j] * basis.z_basis[(size_t)j];
        CVec psi = gaussian_unitary(*fb, K) * psi0;
        return (displacement_unitary(*fb, dz) * psi).eval();
    };
    return f;
}

}  // namespace varkahler
