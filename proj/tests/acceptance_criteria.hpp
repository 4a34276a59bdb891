// Acceptance checks: one pass/fail line per criterion, fixed tolerances,
// deterministic seeds.  Shared between the standalone gate binary and the
// command-line "verify" verb.
#pragma once

#include <varkahler/coherent_group.hpp>
#include <varkahler/evolution.hpp>
#include <varkahler/exact_hilbert.hpp>
#include <varkahler/families.hpp>
#include <varkahler/gaussian.hpp>
#include <varkahler/kahler_core.hpp>
#include <varkahler/manifold.hpp>
#include <varkahler/spectra.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <string>

using namespace varkahler;

namespace acceptance {

int failures = 0;

double now_seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2e", v);
    return buf;
}

void report(int idx, const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] %2d. %s  (%s)\n", ok ? "PASS" : "FAIL", idx, name, detail.c_str());
    if (!ok) ++failures;
}

void guarded(int idx, const char* name, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        report(idx, name, false, std::string("exception: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// 1. metric / symplectic form / complex structure on the reference families,
//    20 random points each, |Delta| <= 1e-9, under one second.

void criterion_1() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    auto upd = [&](double v) { worst = std::max(worst, v); };

    FamilySpec bloch = bloch_family();
    FamilySpec twoq = two_qubit_product_family();
    const double r = 0.4;
    FamilySpec ex9 = example9_family(r, 18);

    for (int k = 0; k < 20; ++k) {
        double th = 0.3 + 2.5 * u(rng), ph = 2 * M_PI * u(rng);
        double s = std::sin(th);
        Vec x(2);
        x << th, ph;

        {
            KahlerTriple t = restricted_structures(tangent_frame(bloch, x));
            Mat g(2, 2), om(2, 2);
            g << 0.5, 0, 0, 0.5 * s * s;
            om << 0, 0.5 * s, -0.5 * s, 0;
            upd((t.g - g).cwiseAbs().maxCoeff());
            upd((t.omega - om).cwiseAbs().maxCoeff());
        }
        {
            KahlerTriple t = restricted_structures(tangent_frame(twoq, x));
            Mat g(2, 2), om(2, 2);
            g << 1.0, 0, 0, s * s;
            om << 0, s, -s, 0;
            upd((t.g - g).cwiseAbs().maxCoeff());
            upd((t.omega - om).cwiseAbs().maxCoeff());
        }
        {
            Vec xa(2);
            xa << 0.8 * (u(rng) - 0.5), 0.8 * (u(rng) - 0.5);
            KahlerTriple t = restricted_structures(tangent_frame(ex9, xa));
            double c2r = std::cosh(2 * r);
            Mat g = 2 * c2r * Mat::Identity(2, 2);
            Mat om(2, 2);
            om << 0, 2, -2, 0;
            upd((t.g - g).cwiseAbs().maxCoeff());
            upd((t.omega - om).cwiseAbs().maxCoeff());
            upd(std::abs(t.j(0, 1) + 1.0 / c2r));
        }
    }
    double secs = now_seconds(t0);
    report(1, "structure tables on the reference families", worst <= 1e-9 && secs < 1.0,
           "max dev " + fmt(worst) + ", " + fmt(secs) + " s");
}

// ---------------------------------------------------------------------------
// 2. classification of the reference points, the pairing constant 5/7 of the
//    two-boson state, and the J^2 eigenvalues of the |0>+|2> superposition.

void criterion_2() {
    double worst = 0.0;
    bool tags_ok = true;

    Vec x(2);
    x << 1.1, 0.7;
    tags_ok &= restricted_structures(tangent_frame(two_qubit_product_family(), x))
                       .classification == Classification::Kaehler;
    Vec xe(1);
    xe << 0.4;
    tags_ok &= restricted_structures(tangent_frame(equator_family(), xe))
                       .classification == Classification::NonKaehlerDegenerate;
    Vec xa(2);
    xa << 0.25, -0.1;
    tags_ok &= restricted_structures(tangent_frame(example9_family(0.4, 18), xa))
                       .classification == Classification::NonKaehlerNonDegenerate;

    FockSpaceBuilder fb(1, 24);
    auto gens = sp2r_warmup_generators(fb);
    {
        FamilySpec f = group_orbit_family("two_boson", gens, fb.fock_state(0, 2));
        KahlerTriple t = restricted_structures(tangent_frame(f, Vec::Zero(3)));
        tags_ok &= t.classification == Classification::NonKaehlerNonDegenerate;
        auto sf = standard_form(t);
        tags_ok &= !sf.c_values.empty();
        if (!sf.c_values.empty())
            worst = std::max(worst, std::abs(sf.c_values.front() - 5.0 / 7.0));
    }
    {
        CVec cat = (fb.fock_state(0, 0) + fb.fock_state(0, 2)) / std::sqrt(2.0);
        FamilySpec f = group_orbit_family("zero_plus_two", gens, cat);
        KahlerTriple t = restricted_structures(tangent_frame(f, Vec::Zero(3)));
        tags_ok &= t.classification == Classification::NonKaehlerDegenerate;
        Eigen::EigenSolver<Mat> es(Mat(t.j * t.j));
        std::vector<double> ev;
        for (int k = 0; k < 3; ++k) {
            worst = std::max(worst, std::abs(es.eigenvalues()[k].imag()));
            ev.push_back(es.eigenvalues()[k].real());
        }
        std::sort(ev.begin(), ev.end());
        worst = std::max(worst, std::abs(ev[0] + 1.0));
        worst = std::max(worst, std::abs(ev[1] + 1.0));
        worst = std::max(worst, std::abs(ev[2]));
    }
    report(2, "classification and standard-form constants", tags_ok && worst <= 1e-9,
           std::string(tags_ok ? "tags ok" : "tag mismatch") + ", max dev " + fmt(worst));
}

// ---------------------------------------------------------------------------
// 3. two-mode quadratic benchmark: coincidence of the two projected fields at
//    r = 0, the closed-form flow generators over (r, phi) in {0, 0.3}^2, and
//    the r = 0 trajectory against the exact rotation; under ten seconds.

void criterion_3() {
    auto t0 = std::chrono::steady_clock::now();
    const double e1 = 1.0, e2 = 2.0;
    auto closed_forms = [&](double r, double ph) {
        double sech = 1.0 / std::cosh(2 * r);
        double a1p = 0.5 * ((e1 - e2) * std::cos(2 * ph) + (e1 + e2) * sech);
        double base = (e1 + e2) * std::cosh(2 * r);
        double a2p = 0.5 * (base + (e1 - e2) * (std::cos(2 * ph) -
                                                std::sin(2 * ph) * std::sinh(2 * r)));
        double a2m = -0.5 * (base + (e1 - e2) * (std::cos(2 * ph) +
                                                 std::sin(2 * ph) * std::sinh(2 * r)));
        Mat k1(2, 2), k2(2, 2);
        k1 << 0, a1p, -a1p, 0;
        k2 << 0, a2p, a2m, 0;
        return std::make_pair(k1, k2);
    };

    const int cutoff = 16;
    FockSpaceBuilder fb(2, cutoff);
    double field_dev = 0.0;            // |X_L - X_M| at r = 0
    double errA = 0.0, errB = 0.0;     // the two possible label assignments
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    for (double r : {0.0, 0.3}) {
        FamilySpec f = tilde_coherent_family(r, cutoff);
        for (double ph : {0.0, 0.3}) {
            CMat H = quadratic_boson_operator(fb, example24_h(e1, e2, ph));
            Mat kl(2, 2), km(2, 2);
            for (int j = 0; j < 2; ++j) {
                Vec xj = 0.5 * Vec::Unit(2, j);
                kl.col(j) = lagrangian_field(f, xj, H) / 0.5;
                km.col(j) = mclachlan_field(f, xj, H) / 0.5;
            }
            if (r == 0.0) {
                Vec xr(2);
                xr << u(rng), u(rng);
                field_dev = std::max(field_dev, (lagrangian_field(f, xr, H) -
                                                 mclachlan_field(f, xr, H))
                                                    .cwiseAbs()
                                                    .maxCoeff());
            }
            auto [k1, k2] = closed_forms(r, ph);
            errA = std::max({errA, (km - k1).cwiseAbs().maxCoeff(),
                             (kl - k2).cwiseAbs().maxCoeff()});
            errB = std::max({errB, (km - k2).cwiseAbs().maxCoeff(),
                             (kl - k1).cwiseAbs().maxCoeff()});
        }
    }
    double gen_err = std::min(errA, errB);

    // r = 0, phi = 0, z~(0) = (1, 0): exact flow is a rotation at rate e1
    FamilySpec f0 = tilde_coherent_family(0.0, 12);
    FockSpaceBuilder fb0(2, 12);
    CMat H0 = quadratic_boson_operator(fb0, example24_h(e1, e2, 0.0));
    Vec z0(2);
    z0 << 1.0, 0.0;
    IntegrateOptions opt;
    opt.record_stride = 10;
    Trajectory tr = integrate(make_field(FlowKind::Lagrangian, H0), f0, z0, H0, 5.0, 1e-3, opt);
    double traj_err = 0.0;
    for (size_t i = 0; i < tr.times.size(); ++i) {
        double t = tr.times[i];
        traj_err = std::max(traj_err, std::abs(tr.params[i][0] - std::cos(e1 * t)));
        traj_err = std::max(traj_err, std::abs(tr.params[i][1] + std::sin(e1 * t)));
    }
    double secs = now_seconds(t0);
    report(3, "two-mode quadratic benchmark",
           field_dev <= 1e-10 && gen_err <= 1e-10 && traj_err <= 1e-6 && secs < 10.0,
           "field " + fmt(field_dev) + ", generators " + fmt(gen_err) + ", trajectory " +
               fmt(traj_err) + ", " + fmt(secs) + " s");
}

// ---------------------------------------------------------------------------
// 4. conservation: symplectic energy drift on three families, monotone descent
//    in imaginary time, particle-number conservation of the constrained flow.

void criterion_4() {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto rand_herm = [&](int n) {
        CMat m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = cplx(u(rng), u(rng));
        return CMat(0.5 * (m + m.adjoint()));
    };

    double drift = 0.0;
    IntegrateOptions opt;
    opt.record_stride = 50;
    auto run = [&](const FamilySpec& f, const CMat& H, const Vec& x0) {
        Trajectory tr = integrate(make_field(FlowKind::Lagrangian, H), f, x0, H, 10.0, 1e-3, opt);
        for (double e : tr.energy) drift = std::max(drift, std::abs(e - tr.energy.front()));
    };
    Vec xb(2);
    xb << 1.1, 0.3;
    run(bloch_family(), rand_herm(2), xb);
    Vec xq(2);
    xq << 0.9, 0.7;
    run(two_qubit_product_family(), rand_herm(4), xq);
    {
        FockSpaceBuilder fb(2, 12);
        Vec xt(2);
        xt << 0.8, -0.4;
        run(tilde_coherent_family(0.3, 12), quadratic_boson_operator(fb, example24_h(1, 2, 0.3)),
            xt);
    }

    // imaginary time must never go uphill
    bool monotone = true;
    {
        CMat H = pauli_z() + 0.3 * pauli_x();
        Vec x0(2);
        x0 << 2.6, 0.8;
        IntegrateOptions io;
        io.record_stride = 1;
        Trajectory tr =
            integrate(make_field(FlowKind::ImaginaryTime, H), bloch_family(), x0, H, 8.0, 1e-2, io);
        for (size_t i = 1; i < tr.energy.size(); ++i)
            monotone &= tr.energy[i] <= tr.energy[i - 1] + 1e-12;
    }

    // constrained flow: <N> frozen along a number-violating Hamiltonian
    double ndrift = 0.0;
    {
        const int cutoff = 12;
        CoherentMap cm;
        cm.dim = 4;
        cm.eval = [](const Vec& x, CVec& c, CMat& jac) {
            c.resize(2);
            c << cplx(x[0], x[1]), cplx(x[2], x[3]);
            jac = CMat::Zero(2, 4);
            jac(0, 0) = 1.0;
            jac(0, 1) = cplx(0, 1);
            jac(1, 2) = 1.0;
            jac(1, 3) = cplx(0, 1);
        };
        FamilySpec f = coherent_product_family("coherent4", cm, cutoff);
        FockSpaceBuilder fb(2, cutoff);
        Mat h(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) h(i, j) = h(j, i) = 0.4 * u(rng);
        h += 1.2 * Mat::Identity(4, 4);
        CMat H = quadratic_boson_operator(fb, h);
        CMat N = fb.boson_a(0).adjoint() * fb.boson_a(0) + fb.boson_a(1).adjoint() * fb.boson_a(1);
        IntegrateOptions io;
        io.constraints = {N};
        io.trackers["n"] = N;
        io.record_stride = 20;
        Vec x0(4);
        x0 << 0.6, 0.0, 0.3, -0.2;
        Trajectory tr = integrate(make_field(FlowKind::Lagrangian, H), f, x0, H, 2.0, 5e-4, io);
        const auto& n = tr.tracked["n"];
        for (double v : n) ndrift = std::max(ndrift, std::abs(v - n.front()));
    }

    report(4, "conservation laws of the projected flows",
           drift <= 1e-8 && monotone && ndrift <= 1e-10,
           "energy drift " + fmt(drift) + ", descent " + (monotone ? "monotone" : "VIOLATED") +
               ", <N> drift " + fmt(ndrift));
}

// ---------------------------------------------------------------------------
// 5. linearized spectra: free boson and free fermion normal modes, the
//    symplectic consistency of K, and min-max containment on a dim-8 space.

void criterion_5() {
    double worst = 0.0;
    auto match = [&](const Eigen::VectorXcd& ev, cplx target) {
        double best = 1e300;
        for (int k = 0; k < ev.size(); ++k) best = std::min(best, std::abs(ev[k] - target));
        worst = std::max(worst, best);
    };

    double sympl = 0.0;
    {
        const double w0 = 1.3;
        GaussianState vac = vacuum_state(Statistics::Boson, 1);
        auto basis = gaussian_tangent_basis(vac);
        Mat h = w0 * Mat::Identity(2, 2);
        Mat K = linearize_gaussian(vac, quadratic_hamiltonian(h), basis, &h);
        Eigen::EigenSolver<Mat> es(K);
        for (double w : {w0, 2 * w0}) {
            match(es.eigenvalues(), cplx(0, w));
            match(es.eigenvalues(), cplx(0, -w));
        }
        int dim = (int)(basis.z_basis.size() + basis.gamma_basis.size());
        FamilySpec bridge = gaussian_family(vac, basis, 12);
        KahlerTriple t = restricted_structures(tangent_frame(bridge, Vec::Zero(dim)));
        sympl = (K * t.omega_inv + t.omega_inv * K.transpose()).cwiseAbs().maxCoeff();
    }
    {
        const double w1 = 0.9, w2 = 1.7;
        GaussianState vac = vacuum_state(Statistics::Fermion, 2);
        auto basis = gaussian_tangent_basis(vac);
        Mat h = Mat::Zero(4, 4);
        h(0, 2) = w1;
        h(2, 0) = -w1;
        h(1, 3) = w2;
        h(3, 1) = -w2;
        FermionQuadratic fq{h};
        Mat K = linearize_gaussian(vac, fq, basis, &h);
        Eigen::EigenSolver<Mat> es(K);
        match(es.eigenvalues(), cplx(0, w1 + w2));
        match(es.eigenvalues(), cplx(0, -(w1 + w2)));
    }

    // projected-Hamiltonian eigenvalues inside the exact spectral hull
    bool contained = true;
    {
        std::mt19937 rng(55);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        CMat H(8, 8);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) H(i, j) = cplx(u(rng), u(rng));
        H = 0.5 * (H + H.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<CMat> es(H);
        double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();

        FamilySpec f;  // three independent single-qubit angles, product state
        f.label = "three_angle_product";
        f.dimension = 3;
        f.parametrize = [](const Vec& x) {
            CVec out(8);
            for (int b = 0; b < 8; ++b) {
                cplx amp = 1.0;
                for (int q = 0; q < 3; ++q)
                    amp *= ((b >> (2 - q)) & 1) ? std::sin(x[q]) : std::cos(x[q]);
                out[b] = amp;
            }
            return out;
        };
        for (int trial = 0; trial < 5; ++trial) {
            Vec x(3);
            x << 0.4 + 0.5 * u(rng), 0.9 + 0.5 * u(rng), 1.3 + 0.5 * u(rng);
            Mat hp = projected_hamiltonian(tangent_frame(f, x), H).first;
            Eigen::EigenSolver<Mat> ep(hp);
            for (int k = 0; k < hp.rows(); ++k) {
                contained &= std::abs(ep.eigenvalues()[k].imag()) <= 1e-8;
                double v = ep.eigenvalues()[k].real();
                contained &= v >= lo - 1e-8 && v <= hi + 1e-8;
            }
        }
    }
    report(5, "linearized normal modes and min-max containment",
           worst <= 1e-9 && sympl <= 1e-9 && contained,
           "mode dev " + fmt(worst) + ", K-symplectic " + fmt(sympl) + ", hull " +
               (contained ? "contained" : "VIOLATED"));
}

// ---------------------------------------------------------------------------
// 6. spectral functions: oscillator position weight 1/(2 w0) and curve match
//    at equal broadening; non-negativity on random quadratic models.

void criterion_6() {
    const double w0 = 1.3, eta = 0.05;
    const int cutoff = 20;
    FockSpaceBuilder fb(1, cutoff);
    CMat q_op = fb.xi_bosonic()[0];

    GaussianState s0 = vacuum_state(Statistics::Boson, 1);
    Mat h(2, 2);
    h << w0 * w0, 0, 0, 1.0;
    s0.gamma = Mat::Zero(2, 2);
    s0.gamma(0, 0) = 1.0 / w0;
    s0.gamma(1, 1) = w0;
    auto basis = gaussian_tangent_basis(s0);
    Mat K = linearize_gaussian(s0, quadratic_hamiltonian(h), basis, &h);
    FamilySpec bridge = gaussian_family(s0, basis, cutoff);
    int dim = (int)(basis.z_basis.size() + basis.gamma_basis.size());
    KahlerTriple t = restricted_structures(tangent_frame(bridge, Vec::Zero(dim)));
    LinearizationResult lin = analyze_k_matrix(K, t.omega, t.g, &t.j, true);

    Vec grid = Vec::LinSpaced(61, 0.0, 3.0);
    SpectralResult sp = spectral_function(lin, bridge, Vec::Zero(dim), q_op, grid, eta);
    double weight_err = 1e300, stray = 0.0;
    for (size_t k = 0; k < sp.omegas.size(); ++k) {
        if (std::abs(sp.omegas[k] - w0) < 0.1)
            weight_err = std::min(weight_err, std::abs(sp.weights[k] - 1.0 / (2 * w0)));
        else
            stray = std::max(stray, sp.weights[k]);
    }
    CMat Hfock = quadratic_boson_operator(fb, h);
    Vec exact = exact_spectral_function(Hfock, q_op, grid, eta);
    double curve_err = (sp.a_values - exact).cwiseAbs().maxCoeff();

    // sign property: A(w) >= 0 on the positive axis for random stable models
    double amin = 0.0;
    std::mt19937 rng(66);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec pgrid = Vec::LinSpaced(80, 0.05, 5.0);
    for (int trial = 0; trial < 10; ++trial) {
        Mat A(2, 2);
        A << u(rng), u(rng), u(rng), u(rng);
        Mat hr = A.transpose() * A + 0.2 * Mat::Identity(2, 2);
        GaussianState s = vacuum_state(Statistics::Boson, 1);
        s.gamma = std::sqrt(hr.determinant()) * hr.inverse();
        auto bs = gaussian_tangent_basis(s);
        Mat Kr = linearize_gaussian(s, quadratic_hamiltonian(hr), bs, &hr);
        const int cut = 16;
        FamilySpec br = gaussian_family(s, bs, cut);
        int d = (int)(bs.z_basis.size() + bs.gamma_basis.size());
        KahlerTriple tr = restricted_structures(tangent_frame(br, Vec::Zero(d)));
        LinearizationResult lr = analyze_k_matrix(Kr, tr.omega, tr.g, &tr.j, true);
        FockSpaceBuilder fbr(1, cut);
        auto xi = fbr.xi_bosonic();
        CMat V = u(rng) * xi[0] + u(rng) * xi[1] + 0.3 * u(rng) * xi[0] * xi[0] +
                 0.3 * u(rng) * xi[1] * xi[1];
        V = 0.5 * (V + V.adjoint()).eval();
        SpectralResult sr = spectral_function(lr, br, Vec::Zero(d), V, pgrid);
        amin = std::min(amin, sr.a_values.minCoeff());
    }
    report(6, "spectral functions against the exact resolvent",
           weight_err <= 1e-6 && stray <= 1e-10 && curve_err <= 1e-6 && amin >= -1e-12,
           "weight " + fmt(weight_err) + ", stray " + fmt(stray) + ", curve " + fmt(curve_err) +
               ", min A " + fmt(amin));
}

// ---------------------------------------------------------------------------
// 7. Wick moments up to six operators against direct truncated-Fock products.

void criterion_7() {
    double worst = 0.0;
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    // bosonic: two random displaced-squeezed single-mode states
    {
        const int cutoff = 16;
        FockSpaceBuilder fb(1, cutoff);
        auto xi = fb.xi_bosonic();
        for (int trial = 0; trial < 2; ++trial) {
            Mat S(2, 2);
            S << u(rng), u(rng), u(rng), u(rng);
            S = 0.12 * (S + S.transpose()).eval();
            GaussianTransform gt;
            gt.k = omega_bg(1) * S;
            gt.dz = Vec(2);
            gt.dz << 0.4 * u(rng), 0.4 * u(rng);
            GaussianState s = apply_transform(vacuum_state(Statistics::Boson, 1), gt);
            CVec psi = fock_embed(s, cutoff).psi;
            std::vector<int> idx;
            std::function<void()> visit = [&]() {
                if (!idx.empty()) {
                    CVec v = psi;
                    for (auto it = idx.rbegin(); it != idx.rend(); ++it) v = xi[(size_t)*it] * v;
                    cplx direct = psi.dot(v);
                    worst = std::max(worst, std::abs(direct - wick_npoint(s, idx)));
                }
                if (idx.size() == 6) return;
                for (int a = 0; a < 2; ++a) {
                    idx.push_back(a);
                    visit();
                    idx.pop_back();
                }
            };
            visit();
        }
    }
    // fermionic: random two-mode state, all tuples up to six Majoranas
    {
        FockSpaceBuilder fb(0, 2, 2);
        auto xi = fb.xi_fermionic();
        Mat A(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) A(i, j) = u(rng);
        GaussianTransform gt;
        gt.k = 0.5 * (A - A.transpose());
        GaussianState s = apply_transform(vacuum_state(Statistics::Fermion, 2), gt);
        CVec psi = fock_embed(s, 2).psi;
        std::vector<int> idx;
        std::function<void()> visit = [&]() {
            if (!idx.empty()) {
                CVec v = psi;
                for (auto it = idx.rbegin(); it != idx.rend(); ++it) v = xi[(size_t)*it] * v;
                worst = std::max(worst, std::abs(psi.dot(v) - wick_npoint(s, idx)));
            }
            if (idx.size() == 6) return;
            for (int a = 0; a < 4; ++a) {
                idx.push_back(a);
                visit();
                idx.pop_back();
            }
        };
        visit();
    }
    report(7, "Wick moments vs truncated-Fock products", worst <= 1e-6, "max dev " + fmt(worst));
}

// ---------------------------------------------------------------------------
// 8. imaginary-time ground states: Gaussian flow from ten random starts and a
//    coherent su(2) family, both to 1e-8 in energy.

void criterion_8() {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double gerr = 0.0;
    {
        FockSpaceBuilder fb(1, 32);
        for (int trial = 0; trial < 10; ++trial) {
            Mat A(2, 2);
            A << 0.8 * u(rng), 0.8 * u(rng), 0.8 * u(rng), 0.8 * u(rng);
            Mat h = A.transpose() * A + 0.4 * Mat::Identity(2, 2);
            Vec fl(2);
            fl << 0.3 * u(rng), 0.3 * u(rng);
            Eigen::SelfAdjointEigenSolver<CMat> es(quadratic_boson_operator(fb, h, fl));
            double e0 = es.eigenvalues().minCoeff();
            PolynomialOperator op = quadratic_hamiltonian(h, fl);

            Mat S(2, 2);
            S << u(rng), u(rng), u(rng), u(rng);
            GaussianTransform gt;
            gt.k = omega_bg(1) * Mat(0.4 * (S + S.transpose()));
            gt.dz = Vec(2);
            gt.dz << 0.6 * u(rng), 0.6 * u(rng);
            GaussianState s = apply_transform(vacuum_state(Statistics::Boson, 1), gt);

            const double dt = 0.02;
            for (int step = 0; step < 6000; ++step) {
                auto rhs = [&](const GaussianState& c) { return eom_imag(c, op); };
                GaussianTangent k1 = rhs(s);
                GaussianState s2 = s;
                s2.z += 0.5 * dt * k1.dz;
                s2.gamma += 0.5 * dt * k1.dgamma;
                GaussianTangent k2 = rhs(s2);
                GaussianState s3 = s;
                s3.z += 0.5 * dt * k2.dz;
                s3.gamma += 0.5 * dt * k2.dgamma;
                GaussianTangent k3 = rhs(s3);
                GaussianState s4 = s;
                s4.z += dt * k3.dz;
                s4.gamma += dt * k3.dgamma;
                GaussianTangent k4 = rhs(s4);
                s.z += (dt / 6.0) * (k1.dz + 2 * k2.dz + 2 * k3.dz + k4.dz);
                s.gamma += (dt / 6.0) * (k1.dgamma + 2 * k2.dgamma + 2 * k3.dgamma + k4.dgamma);
                s.gamma = 0.5 * (s.gamma + s.gamma.transpose()).eval();
            }
            gerr = std::max(gerr, std::abs(expectation(s, op).value - e0));
        }
    }
    double cerr = 0.0;
    bool monotone = true;
    {
        auto ps = coherent_preset("su2:spin-0.5");
        CoherentFamily f = coherent_family(ps.algebra, ps.phi);
        CMat H(2, 2);
        H << 0.4, cplx(0.7, -0.3), cplx(0.7, 0.3), -0.9;
        Vec kick(3);
        kick << 0.8, -1.1, 0.5;
        f = cayley_step(f, kick, 1.0);
        GroupTrajectory tr = group_flow(f, H, FlowKind::ImaginaryTime, 25.0, 5e-3);
        Eigen::SelfAdjointEigenSolver<CMat> es(H);
        cerr = std::abs(tr.energies.back() - es.eigenvalues().minCoeff());
        for (size_t i = 1; i < tr.energies.size(); ++i)
            monotone &= tr.energies[i] <= tr.energies[i - 1] + 1e-12;
    }
    report(8, "imaginary-time ground states", gerr <= 1e-8 && cerr <= 1e-8 && monotone,
           "gaussian " + fmt(gerr) + ", coherent " + fmt(cerr) + ", descent " +
               (monotone ? "monotone" : "VIOLATED"));
}

// ---------------------------------------------------------------------------
// 9. holonomy: geometric latitude loop and the closed precession orbit.

void criterion_9() {
    FamilySpec f = bloch_family();
    const double theta = 1.0;
    auto loop = [theta](double t) {
        Vec x(2);
        x << theta, 2 * M_PI * (1.0 - t);
        return x;
    };
    double geo = holonomy(f, loop, 1.0, 2000);
    double s2 = std::sin(theta / 2) * std::sin(theta / 2);
    double geo_err = std::abs(geo - 2 * M_PI * s2);

    const double E0 = 0.4, w = 1.3;
    CMat H = E0 * CMat::Identity(2, 2) + w * pauli_z();
    auto orbit = [theta, w](double t) {
        Vec x(2);
        x << theta, 2 * w * t;
        return x;
    };
    double total = holonomy(f, orbit, M_PI / w, 4000, H);
    double dyn_err = std::abs(total + M_PI * (E0 + w) / w);
    report(9, "holonomy of closed loops", geo_err <= 1e-6 && dyn_err <= 1e-6,
           "geometric " + fmt(geo_err) + ", with Hamiltonian " + fmt(dyn_err));
}

// ---------------------------------------------------------------------------
// 10. coherent groups: base-point independence at ten elements, the beta
//     contraction identity, highest-weight certification, Cayley drift.

void criterion_10() {
    std::mt19937 rng(10);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    double inv_err = 0.0;
    auto ps1 = coherent_preset("su2:spin-1");
    CoherentFamily f1 = coherent_family(ps1.algebra, ps1.phi);
    KahlerTriple t0 = coherent_structures(f1);
    for (int k = 0; k < 10; ++k) {
        Vec c(3);
        c << u(rng), u(rng), u(rng);
        CMat M = ps1.algebra.element(c).exp();
        KahlerTriple t = coherent_structures(f1, &M);
        inv_err = std::max(inv_err, (t.g - t0.g).cwiseAbs().maxCoeff());
        inv_err = std::max(inv_err, (t.omega - t0.omega).cwiseAbs().maxCoeff());
    }

    // omega equals the beta contraction of the structure constants, checked at
    // several base points (beta is frame-covariant, so the identity is read off
    // at the reference element of each family)
    auto pv = coherent_preset("so3:vector");
    auto phi_of = [](double th) {
        CVec v(3);
        v << std::cos(th), cplx(0, 1) * std::sin(th), 0.0;
        return v;
    };
    double contract_err = 0.0;
    auto contract = [&](const CoherentFamily& fm, const LieAlgebraSpec& alg) {
        Vec beta = coadjoint(fm).beta;
        KahlerTriple t = coherent_structures(fm);
        const int n = alg.dim();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double bc = 0.0;
                for (int l = 0; l < n; ++l)
                    bc += beta[l] * alg.structure_constants[(size_t)l](i, j);
                contract_err = std::max(contract_err, std::abs(t.omega(i, j) - bc));
            }
    };
    contract(f1, ps1.algebra);
    for (double th : {0.3, M_PI / 4, 1.1})
        contract(coherent_family(pv.algebra, phi_of(th)), pv.algebra);

    // vector-representation family: certified exactly at theta = pi/4
    bool cert_ok = true;
    {
        CoherentFamily f = coherent_family(pv.algebra, phi_of(M_PI / 4));
        HighestWeightCertificate c = certify_highest_weight(f, pv.cartan);
        cert_ok &= c.kaehler;
    }
    {
        CoherentFamily f = coherent_family(pv.algebra, phi_of(0.55));
        HighestWeightCertificate c = certify_highest_weight(f, pv.cartan);
        cert_ok &= !c.kaehler && c.witness.has_value();
    }

    // 10^3 Cayley steps must stay unitary to 1e-10
    double cayley_drift = 0.0;
    {
        auto ph = coherent_preset("su2:spin-0.5");
        CoherentFamily f = coherent_family(ph.algebra, ph.phi);
        for (int s = 0; s < 1000; ++s) {
            Vec v(3);
            v << u(rng), u(rng), u(rng);
            f = cayley_step(f, v, 0.05);
        }
        CMat dev = f.m_current.adjoint() * f.m_current - CMat::Identity(2, 2);
        cayley_drift = dev.cwiseAbs().maxCoeff();
    }
    report(10, "coherent-group machinery",
           inv_err <= 1e-9 && contract_err <= 1e-10 && cert_ok && cayley_drift <= 1e-10,
           "invariance " + fmt(inv_err) + ", contraction " + fmt(contract_err) + ", certificates " +
               (cert_ok ? "ok" : "WRONG") + ", Cayley " + fmt(cayley_drift));
}

// ---------------------------------------------------------------------------
// 11. pseudo-inverse solver against an independent SVD Moore-Penrose oracle on
//     degenerate symplectic forms; the zero form returns the zero field.

void criterion_11() {
    std::mt19937 rng(111);
    std::normal_distribution<double> nrm(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        int n = 2 + (int)(rng() % 11);  // 2 .. 12
        Mat R(n, n), S(n, n);
        Vec v(n), b(n);
        for (int i = 0; i < n; ++i) {
            v[i] = nrm(rng);
            b[i] = nrm(rng);
            for (int j = 0; j < n; ++j) {
                R(i, j) = nrm(rng);
                S(i, j) = nrm(rng);
            }
        }
        Mat g = R.transpose() * R + 0.1 * Mat::Identity(n, n);
        Mat P = Mat::Identity(n, n) - v * v.transpose() / v.squaredNorm();
        Mat omega = P * (S - S.transpose()) * P;  // antisymmetric, v in the kernel

        Vec x = pseudo_solve(omega, g, b);

        Mat A(2 * n, 2 * n);
        A.topLeftCorner(n, n) = 2.0 * g;
        A.topRightCorner(n, n) = omega.transpose();
        A.bottomLeftCorner(n, n) = omega;
        A.bottomRightCorner(n, n).setZero();
        Vec B = Vec::Zero(2 * n);
        B.tail(n) = b;
        Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Vec& sv = svd.singularValues();
        double cut = 1e-10 * sv[0];
        Vec c = svd.matrixU().transpose() * B;
        for (int k = 0; k < c.size(); ++k) c[k] = (sv[k] > cut) ? -c[k] / sv[k] : 0.0;
        Vec xo = (svd.matrixV() * c).head(n);

        worst = std::max(worst, (x - xo).cwiseAbs().maxCoeff());
    }
    Mat g4 = Mat::Identity(4, 4);
    Vec b4(4);
    b4 << 1.0, -0.5, 0.25, 2.0;
    double znorm = pseudo_solve(Mat::Zero(4, 4), g4, b4).norm();
    report(11, "pseudo-inverse vs SVD oracle", worst <= 1e-9 && znorm <= 1e-12,
           "max dev " + fmt(worst) + ", zero-form field " + fmt(znorm));
}


struct Criterion {
    int id;
    const char* name;
    void (*fn)();
};

inline const std::vector<Criterion>& registry() {
    static const std::vector<Criterion> r = {
        {1, "structure tables on the reference families", criterion_1},
        {2, "classification and standard-form constants", criterion_2},
        {3, "two-mode quadratic benchmark", criterion_3},
        {4, "conservation laws of the projected flows", criterion_4},
        {5, "linearized normal modes and min-max containment", criterion_5},
        {6, "spectral functions against the exact resolvent", criterion_6},
        {7, "Wick moments vs truncated-Fock products", criterion_7},
        {8, "imaginary-time ground states", criterion_8},
        {9, "holonomy of closed loops", criterion_9},
        {10, "coherent-group machinery", criterion_10},
        {11, "pseudo-inverse vs SVD oracle", criterion_11},
    };
    return r;
}

// Runs the selected criteria (all of them when ids is empty); returns the
// number of failures.
inline int run(const std::vector<int>& ids = {}) {
    failures = 0;
    int ran = 0;
    for (const auto& c : registry()) {
        if (!ids.empty() && std::find(ids.begin(), ids.end(), c.id) == ids.end()) continue;
        guarded(c.id, c.name, c.fn);
        ++ran;
    }
    std::printf("%d of %d criteria passed\n", ran - failures, ran);
    return failures;
}

}  // namespace acceptance
