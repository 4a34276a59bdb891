// Dense small-Hilbert-space oracle: truncated Fock construction, exact
// real/imaginary time evolution, exact Lehmann spectral functions.
#pragma once

#include "kahler_core.hpp"

#include <cassert>
#include <vector>

namespace varkahler {

struct DenseOperator {
    CMat matrix;
    bool hermitian_flag = false;
};

namespace detail {
inline void require_hermitian(const CMat& m, const char* who) {
    double scale = std::max(m.cwiseAbs().maxCoeff(), 1.0);
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::domain_error(std::string(who) + ": operator is not Hermitian");
}
}  // namespace detail

// |psi(t)> = exp(-i H t)|psi0> via Hermitian eigendecomposition.
inline CVec exact_evolve(const CMat& H, const CVec& psi0, double t) {
    detail::require_hermitian(H, "exact_evolve");
    Eigen::SelfAdjointEigenSolver<CMat> es(H);
    CVec c = es.eigenvectors().adjoint() * psi0;
    for (int k = 0; k < c.size(); ++k)
        c[k] *= std::exp(cplx(0.0, -es.eigenvalues()[k] * t));
    return es.eigenvectors() * c;
}

// Normalized exp(-H tau)|psi0>.
inline CVec exact_imaginary(const CMat& H, const CVec& psi0, double tau) {
    detail::require_hermitian(H, "exact_imaginary");
    Eigen::SelfAdjointEigenSolver<CMat> es(H);
    CVec c = es.eigenvectors().adjoint() * psi0;
    double e0 = es.eigenvalues().minCoeff();  // shift to avoid under/overflow
    for (int k = 0; k < c.size(); ++k)
        c[k] *= std::exp(-(es.eigenvalues()[k] - e0) * tau);
    CVec out = es.eigenvectors() * c;
    return out / out.norm();
}

inline double lorentzian(double x, double eta) {
    return (eta / M_PI) / (x * x + eta * eta);
}

// Lehmann sum from the ground state of H:
//   A(w) = sum_k |<E_k|V|E_0> - d_k0 <V>|^2 [L(w - dE_k) - L(w + dE_k)].
inline Vec exact_spectral_function(const CMat& H, const CMat& V,
                                   const Vec& omega_grid, double eta) {
    detail::require_hermitian(H, "exact_spectral_function");
    detail::require_hermitian(V, "exact_spectral_function");
    Eigen::SelfAdjointEigenSolver<CMat> es(H);
    CVec g = es.eigenvectors().col(0);
    CVec vg = V * g;
    cplx vbar = g.dot(vg);
    Vec out = Vec::Zero(omega_grid.size());
    for (int k = 0; k < H.rows(); ++k) {
        cplx me = es.eigenvectors().col(k).dot(vg);
        if (k == 0) me -= vbar;
        double w2 = std::norm(me);
        if (w2 == 0.0) continue;
        double de = es.eigenvalues()[k] - es.eigenvalues()[0];
        for (int i = 0; i < omega_grid.size(); ++i)
            out[i] += w2 * (lorentzian(omega_grid[i] - de, eta) -
                            lorentzian(omega_grid[i] + de, eta));
    }
    return out;
}

// Truncated Fock space over n_b bosonic modes (cutoff occupations per mode)
// followed by n_f fermionic modes (Jordan-Wigner ordering: fermions last).
class FockSpaceBuilder {
  public:
    FockSpaceBuilder(int n_bosons, int boson_cutoff, int n_fermions = 0)
        : nb_(n_bosons), nf_(n_fermions), cut_(boson_cutoff) {
        dim_ = 1;
        for (int i = 0; i < nb_; ++i) dim_ *= cut_;
        for (int i = 0; i < nf_; ++i) dim_ *= 2;
    }

    int dim() const { return dim_; }
    int boson_cutoff() const { return cut_; }
    int n_bosons() const { return nb_; }
    int n_fermions() const { return nf_; }

    // Bosonic annihilation operator for mode m (0-based).
    CMat boson_a(int m) const {
        assert(m >= 0 && m < nb_);
        CMat single = CMat::Zero(cut_, cut_);
        for (int n = 1; n < cut_; ++n) single(n - 1, n) = std::sqrt((double)n);
        return kron_at(single, m, cut_, nb_before(m), nb_after(m));
    }

    // Fermionic annihilation with Jordan-Wigner string over earlier fermions.
    CMat fermion_a(int m) const {
        assert(m >= 0 && m < nf_);
        CMat lower = CMat::Zero(2, 2);
        lower(0, 1) = 1.0;  // |0><1|
        CMat sz = CMat::Identity(2, 2);
        sz(1, 1) = -1.0;
        CMat op = CMat::Identity(1, 1);
        for (int i = 0; i < nb_; ++i) op = kron(op, CMat::Identity(cut_, cut_));
        for (int i = 0; i < nf_; ++i) {
            if (i < m) op = kron(op, sz);
            else if (i == m) op = kron(op, lower);
            else op = kron(op, CMat::Identity(2, 2));
        }
        return op;
    }

    // Quadrature/Majorana basis xi = (q_1..q_N, p_1..p_N); for bosons
    // q = (a + a^dag)/sqrt(2), p = i(a^dag - a)/sqrt(2) so [q,p] = i; for
    // fermions the same combinations give {xi^a, xi^b} = delta^ab.
    std::vector<CMat> xi_bosonic() const {
        std::vector<CMat> out;
        const double s = 1.0 / std::sqrt(2.0);
        for (int m = 0; m < nb_; ++m) {
            CMat a = boson_a(m);
            out.push_back(s * (a + a.adjoint()));
        }
        for (int m = 0; m < nb_; ++m) {
            CMat a = boson_a(m);
            out.push_back(cplx(0, 1) * s * (a.adjoint() - a));
        }
        return out;
    }
    std::vector<CMat> xi_fermionic() const {
        std::vector<CMat> out;
        const double s = 1.0 / std::sqrt(2.0);
        for (int m = 0; m < nf_; ++m) {
            CMat a = fermion_a(m);
            out.push_back(s * (a + a.adjoint()));
        }
        for (int m = 0; m < nf_; ++m) {
            CMat a = fermion_a(m);
            out.push_back(cplx(0, 1) * s * (a.adjoint() - a));
        }
        return out;
    }

    CVec vacuum() const {
        CVec v = CVec::Zero(dim_);
        v[0] = 1.0;
        return v;
    }

    // Single-mode bosonic Fock state |n> embedded (other modes in vacuum).
    CVec fock_state(int mode, int n) const {
        assert(n < cut_);
        CVec v = CVec::Zero(dim_);
        Eigen::Index stride = 1;
        for (int i = nb_ - 1; i > mode; --i) stride *= cut_;
        for (int i = 0; i < nf_; ++i) stride *= 2;
        v[(Eigen::Index)n * stride] = 1.0;
        return v;
    }

    static CMat kron(const CMat& a, const CMat& b) {
        CMat out(a.rows() * b.rows(), a.cols() * b.cols());
        for (int i = 0; i < a.rows(); ++i)
            for (int j = 0; j < a.cols(); ++j)
                out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        return out;
    }

  private:
    Eigen::Index nb_before(int m) const {
        Eigen::Index d = 1;
        for (int i = 0; i < m; ++i) d *= cut_;
        return d;
    }
    Eigen::Index nb_after(int m) const {
        Eigen::Index d = 1;
        for (int i = m + 1; i < nb_; ++i) d *= cut_;
        for (int i = 0; i < nf_; ++i) d *= 2;
        return d;
    }
    CMat kron_at(const CMat& single, int /*m*/, int /*local*/, Eigen::Index before,
                 Eigen::Index after) const {
        CMat out = kron(CMat::Identity(before, before), single);
        out = kron(out, CMat::Identity(after, after));
        return out;
    }

    int nb_, nf_, cut_;
    Eigen::Index dim_;
};

}  // namespace varkahler
