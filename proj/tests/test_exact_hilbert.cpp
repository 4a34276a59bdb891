#include <doctest.h>

#include <varkahler/exact_hilbert.hpp>
#include <varkahler/families.hpp>

#include <random>

using namespace varkahler;

TEST_CASE("exact_evolve: eigenstate picks up a pure phase, norm conserved") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    CMat A(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) A(i, j) = cplx(nd(rng), nd(rng));
    CMat H = A + A.adjoint();
    Eigen::SelfAdjointEigenSolver<CMat> es(H);
    CVec ek = es.eigenvectors().col(2);
    CVec out = exact_evolve(H, ek, 0.7);
    cplx phase = std::exp(cplx(0, -es.eigenvalues()[2] * 0.7));
    CHECK((out - phase * ek).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(out.norm() - 1.0) < 1e-12);

    // energy conservation for a generic state
    CVec psi = CVec::Random(5).normalized();
    CVec psit = exact_evolve(H, psi, 1.3);
    CHECK(std::abs((psit.dot(H * psit) - psi.dot(H * psi)).real()) < 1e-11);
}

TEST_CASE("exact_evolve: coherent state rotates in phase space") {
    FockSpaceBuilder fb(1, 24);
    CMat a = fb.boson_a(0);
    CMat H = a.adjoint() * a;  // omega = 1
    cplx alpha(0.6, -0.2);
    // coherent state
    CVec psi = CVec::Zero(fb.dim());
    for (int n = 0; n < fb.dim(); ++n)
        psi[n] = std::exp(-0.5 * std::norm(alpha)) * std::pow(alpha, n) /
                 std::sqrt(std::tgamma((double)n + 1.0));
    double t = 0.9;
    CVec psit = exact_evolve(H, psi, t);
    cplx at = psit.dot(a * psit);
    CHECK(std::abs(at - alpha * std::exp(cplx(0, -t))) < 1e-10);
}

TEST_CASE("exact_imaginary: eigenstate fixed point, mixture converges, monotone") {
    CMat H(2, 2);
    H << 1.0, 0.0, 0.0, 3.0;
    CVec e0(2);
    e0 << 1.0, 0.0;
    CHECK((exact_imaginary(H, e0, 2.0) - e0).cwiseAbs().maxCoeff() < 1e-12);

    CVec mix(2);
    mix << 0.3, 0.954;
    CVec late = exact_imaginary(H, mix, 30.0);
    CHECK(std::abs(std::abs(late[0]) - 1.0) < 1e-10);

    std::mt19937_64 rng(8);
    std::normal_distribution<double> nd;
    CMat A(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) A(i, j) = cplx(nd(rng), nd(rng));
    CMat Hr = A + A.adjoint();
    CVec psi = CVec::Random(6).normalized();
    double prev = psi.dot(Hr * psi).real();
    for (double tau : {0.1, 0.3, 0.8, 2.0, 5.0}) {
        CVec p = exact_imaginary(Hr, psi, tau);
        double e = p.dot(Hr * p).real();
        CHECK(e <= prev + 1e-12);
        prev = e;
    }
}

TEST_CASE("exact_spectral_function: identity gives zero; qubit peaks at +-2") {
    Vec grid = Vec::LinSpaced(101, -4.0, 4.0);
    CMat H = pauli_z();
    CHECK(exact_spectral_function(H, CMat::Identity(2, 2), grid, 0.05).cwiseAbs().maxCoeff() <
          1e-14);

    Vec A = exact_spectral_function(H, pauli_x(), grid, 0.05);
    // ground state of sigma_z is |1> with E=-1; sigma_x connects to |0> at E=+1
    int imax;
    A.maxCoeff(&imax);
    CHECK(grid[imax] == doctest::Approx(2.0).epsilon(0.05));
    // sign property
    for (int i = 0; i < grid.size(); ++i) CHECK(A[i] * (grid[i] > 0 ? 1 : -1) >= -1e-14);
}

TEST_CASE("exact_spectral_function: oscillator q-peak weight 1/(2 w0)") {
    double w0 = 1.7;
    FockSpaceBuilder fb(1, 30);
    auto xi = fb.xi_bosonic();
    // H = p^2/2 + w0^2 q^2/2: <1|q|0>^2 = 1/(2 w0)
    CMat H = 0.5 * (xi[1] * xi[1] + w0 * w0 * xi[0] * xi[0]);
    H = 0.5 * (H + H.adjoint()).eval();
    double eta = 0.02 * w0;
    Vec grid(1);
    grid << w0;  // evaluate at the peak
    Vec A = exact_spectral_function(H, xi[0], grid, eta);
    double expected = (1.0 / (2.0 * w0)) * (lorentzian(0.0, eta) - lorentzian(2 * w0, eta));
    CHECK(A[0] == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("Fock builder: commutators and Jordan-Wigner anticommutators") {
    FockSpaceBuilder fb(2, 6, 2);
    CMat a0 = fb.boson_a(0), a1 = fb.boson_a(1);
    CMat comm = a0 * a0.adjoint() - a0.adjoint() * a0;
    // [a, a^dag] = 1 away from the cutoff edge: check on low-occupation states
    CVec vac = fb.vacuum();
    CHECK(std::abs(vac.dot(comm * vac) - 1.0) < 1e-13);
    CHECK((a0 * a1 - a1 * a0).cwiseAbs().maxCoeff() < 1e-13);

    CMat f0 = fb.fermion_a(0), f1 = fb.fermion_a(1);
    CHECK(((f0 * f0.adjoint() + f0.adjoint() * f0) - CMat::Identity(fb.dim(), fb.dim()))
              .cwiseAbs()
              .maxCoeff() < 1e-13);
    CHECK((f0 * f1 + f1 * f0).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((f0 * f1.adjoint() + f1.adjoint() * f0).cwiseAbs().maxCoeff() < 1e-13);

    // Majorana normalization {xi^a, xi^b} = delta
    auto xif = fb.xi_fermionic();
    for (size_t i = 0; i < xif.size(); ++i)
        for (size_t j = 0; j < xif.size(); ++j) {
            CMat ac = xif[i] * xif[j] + xif[j] * xif[i];
            double expect = (i == j) ? 1.0 : 0.0;
            CHECK((ac - expect * CMat::Identity(fb.dim(), fb.dim())).cwiseAbs().maxCoeff() <
                  1e-12);
        }
}

TEST_CASE("truncation monotonicity on a coherent-state observable") {
    cplx alpha(1.0, 0.4);
    double prev_err = 1e9;
    for (int cutoff : {8, 12, 16}) {
        FockSpaceBuilder fb(1, cutoff);
        CMat a = fb.boson_a(0);
        CVec psi = CVec::Zero(fb.dim());
        for (int n = 0; n < cutoff; ++n)
            psi[n] = std::exp(-0.5 * std::norm(alpha)) * std::pow(alpha, n) /
                     std::sqrt(std::tgamma((double)n + 1.0));
        double nbar = psi.dot(a.adjoint() * a * psi).real() / psi.squaredNorm();
        double err = std::abs(nbar - std::norm(alpha));
        CHECK(err < prev_err + 1e-15);
        prev_err = err;
    }
    CHECK(prev_err < 1e-8);
}
