// Restricted Kähler structures on a single tangent space: build, classify,
// bring to standard form, and pseudo-invert the symplectic form.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <stdexcept>
#include <string>
#include <vector>

namespace varkahler {

using Mat  = Eigen::MatrixXd;
using Vec  = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using cplx = std::complex<double>;

// Singular values below rank_rtol * (largest singular value) count as zero.
// The same relative knob decides ker(g), ker(omega) and the c=0/1 merges.
inline constexpr double rank_rtol = 1e-10;

enum class Classification { Kaehler, NonKaehlerNonDegenerate, NonKaehlerDegenerate };

inline const char* to_string(Classification c) {
    switch (c) {
        case Classification::Kaehler: return "Kaehler";
        case Classification::NonKaehlerNonDegenerate: return "NonKaehlerNonDegenerate";
        default: return "NonKaehlerDegenerate";
    }
}

struct KahlerTriple {
    Mat g;          // metric, symmetric PSD
    Mat omega;      // symplectic form, antisymmetric
    Mat j;          // j = -G * omega
    Mat g_inv;      // Moore-Penrose pseudo-inverse G
    Mat omega_inv;  // pseudo-inverse Omega w.r.t. g
    Classification classification = Classification::Kaehler;
};

struct ClassifyDiagnostics {
    int ker_g_dim = 0;
    int ker_omega_dim = 0;      // within the complement of ker(g)
    double max_j2_deviation = 0.0;  // max |J'^2 + 1| on the complement of ker(g)
};

namespace detail {

// Eigendecomposition-based pseudo-inverse of a symmetric PSD matrix.
inline Mat sym_pinv(const Mat& g, std::vector<int>* kept = nullptr) {
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const Vec& ev = es.eigenvalues();
    double emax = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
    double cut = rank_rtol * std::max(emax, 1e-300);
    Mat out = Mat::Zero(g.rows(), g.cols());
    for (int k = 0; k < ev.size(); ++k) {
        if (std::abs(ev[k]) > cut) {
            out += es.eigenvectors().col(k) * es.eigenvectors().col(k).transpose() / ev[k];
            if (kept) kept->push_back(k);
        }
    }
    return out;
}

// Columns form a g-orthonormal basis of the complement of ker(g):
// T^t g T = 1_r.  Second output: orthonormal basis of ker(g).
inline void g_orthonormal_basis(const Mat& g, Mat& T, Mat& kerg) {
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const Vec& ev = es.eigenvalues();
    double emax = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
    double cut = rank_rtol * std::max(emax, 1e-300);
    std::vector<int> keep, drop;
    for (int k = 0; k < ev.size(); ++k) (ev[k] > cut ? keep : drop).push_back(k);
    T.resize(g.rows(), (Eigen::Index)keep.size());
    kerg.resize(g.rows(), (Eigen::Index)drop.size());
    for (size_t i = 0; i < keep.size(); ++i)
        T.col((Eigen::Index)i) = es.eigenvectors().col(keep[i]) / std::sqrt(ev[keep[i]]);
    for (size_t i = 0; i < drop.size(); ++i)
        kerg.col((Eigen::Index)i) = es.eigenvectors().col(drop[i]);
}

// Moore-Penrose pseudo-inverse via SVD (used for the antisymmetric block in
// the g-orthonormal basis; also serves as the test oracle elsewhere).
inline Mat svd_pinv(const Mat& a) {
    if (a.rows() == 0 || a.cols() == 0) return a.transpose();
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& s = svd.singularValues();
    double cut = rank_rtol * std::max(s.size() ? s[0] : 0.0, 1e-300);
    Vec si = Vec::Zero(s.size());
    for (int k = 0; k < s.size(); ++k) si[k] = (s[k] > cut) ? 1.0 / s[k] : 0.0;
    return svd.matrixV() * si.asDiagonal() * svd.matrixU().transpose();
}

inline ClassifyDiagnostics classify_impl(const Mat& g, const Mat& omega,
                                         Classification& tag) {
    ClassifyDiagnostics d;
    Mat T, kerg;
    g_orthonormal_basis(g, T, kerg);
    d.ker_g_dim = (int)kerg.cols();
    const Mat omp = T.transpose() * omega * T;  // omega in g-orthonormal basis
    // There J' = -omega'; singular values of omega' are the c_i of Prop-1 form.
    if (omp.cols() == 0) {
        d.ker_omega_dim = 0;
        d.max_j2_deviation = 0.0;
        tag = Classification::NonKaehlerDegenerate;
        return d;
    }
    Eigen::JacobiSVD<Mat> svd(omp);
    const Vec& s = svd.singularValues();
    double smax = s.size() ? s[0] : 0.0;
    double cut = rank_rtol * std::max(smax, 1.0);  // c's live on [0,1]
    int rank = 0;
    double dev = 0.0;
    for (int k = 0; k < s.size(); ++k) {
        if (s[k] > cut) ++rank;
        dev = std::max(dev, std::abs(1.0 - s[k] * s[k]));  // |J'^2+1| eigen-deviation
    }
    d.ker_omega_dim = (int)omp.cols() - rank;
    d.max_j2_deviation = dev;
    if (d.ker_omega_dim > 0)
        tag = Classification::NonKaehlerDegenerate;
    else if (dev <= rank_rtol)
        tag = Classification::Kaehler;
    else
        tag = Classification::NonKaehlerNonDegenerate;
    return d;
}

}  // namespace detail

// g = 2 Re(gram)/norm, omega = 2 Im(gram)/norm, with gram_{mu nu} = <V_mu|V_nu>.
inline KahlerTriple build_triple(const CMat& gram, double norm) {
    if (norm <= 0.0) throw std::domain_error("build_triple: norm must be positive");
    double scale = std::max(gram.cwiseAbs().maxCoeff(), 1e-300);
    if ((gram - gram.adjoint()).cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw std::invalid_argument("build_triple: gram matrix is not Hermitian");
    CMat h = 0.5 * (gram + gram.adjoint());
    KahlerTriple t;
    t.g = 2.0 * h.real() / norm;
    t.g = 0.5 * (t.g + t.g.transpose()).eval();
    t.omega = 2.0 * h.imag() / norm;
    t.omega = 0.5 * (t.omega - t.omega.transpose()).eval();
    t.g_inv = detail::sym_pinv(t.g);
    // Omega: pseudo-invert omega in a g-orthonormal basis, map back.
    Mat T, kerg;
    detail::g_orthonormal_basis(t.g, T, kerg);
    Mat omp = T.transpose() * t.omega * T;
    Mat Omp = detail::svd_pinv(omp);
    Omp = 0.5 * (Omp - Omp.transpose()).eval();
    t.omega_inv = T * Omp * T.transpose();
    t.j = -t.g_inv * t.omega;
    detail::classify_impl(t.g, t.omega, t.classification);
    return t;
}

inline ClassifyDiagnostics classify(const KahlerTriple& t, Classification* tag_out = nullptr) {
    Classification tag;
    ClassifyDiagnostics d = detail::classify_impl(t.g, t.omega, tag);
    if (tag_out) *tag_out = tag;
    return d;
}

enum class SubspaceTag { DoubleBar, IsotropicPair, Degenerate };

struct StandardFormDecomposition {
    Mat basis_change;              // columns = new basis vectors (old coords)
    int kaehler_dim = 0;           // number of basis vectors in c=1 pairs (even)
    std::vector<double> c_values;  // strictly inside (0,1), descending
    int degenerate_dim = 0;        // zero rows of J
    std::vector<SubspaceTag> subspace_tags;  // one per basis vector
};

// Orthonormal (w.r.t. g on the complement of ker g) basis in which g == 1 and
// J is block diagonal: 2x2 blocks with +-1 (Kaehler), +-c_i with 0<c_i<1
// (isotropic pairs), then zero rows.  ker(g) directions are appended last.
inline StandardFormDecomposition standard_form(const KahlerTriple& t) {
    const int n = (int)t.g.rows();
    Mat T, kerg;
    detail::g_orthonormal_basis(t.g, T, kerg);
    const int r = (int)T.cols();
    Mat omp = T.transpose() * t.omega * T;  // J' = -omega', antisymmetric
    omp = 0.5 * (omp - omp.transpose()).eval();

    // Real Schur of the antisymmetric omp: Q^t omp Q is block diagonal with
    // 2x2 blocks [[0,+-c],[-+c,0]] and zeros (omp is normal).
    std::vector<std::pair<double, std::pair<Vec, Vec>>> pairs;  // (c, (u, v))
    std::vector<Vec> zeros;
    if (r > 0) {
        Eigen::RealSchur<Mat> schur(omp);
        const Mat& S = schur.matrixT();
        const Mat& Q = schur.matrixU();
        double smax = S.cwiseAbs().maxCoeff();
        double cut = rank_rtol * std::max(smax, 1.0);  // c's live on [0,1]
        int i = 0;
        while (i < r) {
            if (i + 1 < r && std::abs(S(i + 1, i)) > cut) {
                double c = std::abs(S(i + 1, i));
                Vec u = Q.col(i), v = Q.col(i + 1);
                // Orient so the J' = -omp' block is [[0,-c],[c,0]].
                if (S(i + 1, i) > 0) v = -v;
                pairs.push_back({c, {u, v}});
                i += 2;
            } else {
                zeros.push_back(Q.col(i));
                i += 1;
            }
        }
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    StandardFormDecomposition sf;
    sf.basis_change = Mat::Zero(n, n);
    int col = 0;
    for (auto& [c, uv] : pairs) {
        bool kaehler = std::abs(c - 1.0) <= rank_rtol;
        // u, v with omega'(u,v) = u^t omp v = c ... orient so the J block is [[0,-c],[c,0]].
        sf.basis_change.col(col)     = T * uv.first;
        sf.basis_change.col(col + 1) = T * uv.second;
        if (kaehler) {
            sf.kaehler_dim += 2;
            sf.subspace_tags.push_back(SubspaceTag::DoubleBar);
            sf.subspace_tags.push_back(SubspaceTag::DoubleBar);
        } else {
            sf.c_values.push_back(c);
            sf.subspace_tags.push_back(SubspaceTag::IsotropicPair);
            sf.subspace_tags.push_back(SubspaceTag::IsotropicPair);
        }
        col += 2;
    }
    for (auto& z : zeros) {
        sf.basis_change.col(col++) = T * z;
        sf.subspace_tags.push_back(SubspaceTag::Degenerate);
        ++sf.degenerate_dim;
    }
    for (int k = 0; k < kerg.cols(); ++k) {
        sf.basis_change.col(col++) = kerg.col(k);
        sf.subspace_tags.push_back(SubspaceTag::Degenerate);
        ++sf.degenerate_dim;
    }
    return sf;
}

// Minimize X^t g X subject to omega X + b = 0 (least squares in the
// unreachable directions): KKT system A = [[2g, omega^t],[omega, 0]],
// symmetrized to A^2 x = -A B, solved rank-revealing (direct for n <= 64,
// conjugate gradient above).  Equals -Omega b when b is reachable.
inline Vec pseudo_solve(const Mat& omega, const Mat& g, const Vec& b) {
    const int n = (int)omega.rows();
    Mat A(2 * n, 2 * n);
    A.topLeftCorner(n, n) = 2.0 * g;
    A.topRightCorner(n, n) = omega.transpose();
    A.bottomLeftCorner(n, n) = omega;
    A.bottomRightCorner(n, n).setZero();
    Vec B = Vec::Zero(2 * n);
    B.tail(n) = b;
    Vec x;
    if (n <= 64) {
        // Minimal-norm solution of the PSD system A^2 x = -A B: x = -A^+ B,
        // computed from the eigendecomposition of the symmetric indefinite A
        // (avoids squaring the condition number).
        Eigen::SelfAdjointEigenSolver<Mat> es(A);
        double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
        double cut = rank_rtol * std::max(lmax, 1e-300);
        Vec c = es.eigenvectors().transpose() * B;
        for (int k = 0; k < c.size(); ++k)
            c[k] = (std::abs(es.eigenvalues()[k]) > cut) ? -c[k] / es.eigenvalues()[k] : 0.0;
        x = es.eigenvectors() * c;
    } else {
        Mat A2 = A * A;
        Vec rhs = -A * B;
        Eigen::ConjugateGradient<Mat, Eigen::Lower | Eigen::Upper> cg;
        cg.setTolerance(1e-13);
        cg.setMaxIterations(20 * n);
        cg.compute(A2);
        x = cg.solve(rhs);
    }
    return x.head(n);
}

}  // namespace varkahler
