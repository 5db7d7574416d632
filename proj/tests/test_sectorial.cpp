#include "doctest.h"

#include "semistab/sectorial.hpp"

using namespace semistab;

namespace {

Matrix mat2(Complex a, Complex b, Complex c, Complex d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

}  // namespace

TEST_CASE("certify_sector on scalar and diagonal instances") {
    const GeneratorModel scalar = make_generator(Matrix::Constant(1, 1, -1.0), "s");
    const SectorCert cert = certify_sector(scalar, 0.0, 3.0 * pi() / 4.0);
    // exact sup of |lambda|/|lambda+1| over the boundary rays is sqrt(2);
    // the inset-and-grid scan lands just inside it
    CHECK(cert.evidence.max_observed ==
          doctest::Approx(std::sqrt(2.0)).epsilon(5e-3));
    CHECK(cert.evidence.max_observed <= std::sqrt(2.0) * (1 + 1e-9));
    CHECK(cert.bound <= 1.5);
    CHECK(cert.bound >= cert.evidence.max_observed);

    const GeneratorModel diag = make_generator(mat2(-1, 0, 0, -2), "diag");
    const SectorCert c2 = certify_sector(diag, 0.0, 2.0 * pi() / 3.0);
    CHECK(c2.bound <= 2.5);

    const GeneratorModel bad = make_generator(mat2(1, 0, 0, -1), "unstable");
    CHECK_THROWS_WITH_AS(certify_sector(bad, 0.0, 3.0 * pi() / 4.0),
                         doctest::Contains("SpectrumInSector"), Error);
}

TEST_CASE("certify_sector sup is grid-stable") {
    const GeneratorModel jordan = make_generator(mat2(-1, 1, 0, -1), "jordan");
    SectorGridSpec coarse;
    SectorGridSpec fine;
    fine.ray_points = 2 * coarse.ray_points;
    fine.arc_points = 2 * coarse.arc_points - 1;
    const SectorCert a = certify_sector(jordan, 0.0, 3.0 * pi() / 4.0, coarse);
    const SectorCert b = certify_sector(jordan, 0.0, 3.0 * pi() / 4.0, fine);
    // doubling the grid density stays inside the 5% safety margin
    CHECK(b.evidence.max_observed <= a.bound);
}

TEST_CASE("numerical_range_sector") {
    const GeneratorModel neg = make_generator(Matrix(-Matrix::Identity(2, 2)), "-I");
    const SectorCert cert =
        numerical_range_sector(neg, 0.0, 3.0 * pi() / 4.0, 2.0 * pi() / 3.0);
    CHECK(cert.bound == doctest::Approx(3.8637033051562731).epsilon(1e-12));
    CHECK(cert.angle == doctest::Approx(2.0 * pi() / 3.0));

    // Hermitian negative semidefinite: any admissible theta works
    const GeneratorModel herm = make_generator(mat2(-2, 0.5, 0.5, -1), "herm");
    CHECK_NOTHROW(
        numerical_range_sector(herm, 0.0, 0.9 * pi(), 2.0 * pi() / 3.0));

    // W([[0,10],[0,0]]) is the disc of radius 5
    const GeneratorModel disc = make_generator(mat2(0, 10, 0, 0), "disc");
    CHECK_THROWS_WITH_AS(
        numerical_range_sector(disc, 0.0, 3.0 * pi() / 4.0, 2.0),
        doctest::Contains("NumericalRangeViolation"), Error);
}

TEST_CASE("numerical range implies an empirical certificate") {
    const GeneratorModel herm = make_generator(mat2(-2, 0.4, 0.4, -1), "herm");
    const double theta = 3.0 * pi() / 4.0, phi = 2.0 * pi() / 3.0;
    const SectorCert nr = numerical_range_sector(herm, 0.0, theta, phi);
    const SectorCert emp = certify_sector(herm, 0.0, phi);
    CHECK(emp.bound <= nr.bound * kSupSafety);
}

TEST_CASE("halfplane_to_sector formulas (frozen)") {
    const SectorCert c1 = halfplane_to_sector(0.0, 1.0);
    CHECK(c1.angle == doctest::Approx(2.0344439357957027).epsilon(1e-15));
    CHECK(c1.bound == doctest::Approx(2.2360679774997897).epsilon(1e-15));

    const SectorCert c2 = halfplane_to_sector(0.0, 0.5);
    CHECK(c2.angle == doctest::Approx(3.0 * pi() / 4.0).epsilon(1e-15));
    CHECK(c2.bound == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

    const SectorCert c3 = halfplane_to_sector(2.0, 3.0);
    CHECK(c3.vertex == 2.0);
    CHECK(c3.angle == doctest::Approx(1.7359450042095235).epsilon(1e-15));
    CHECK(c3.bound == doctest::Approx(6.0827625302982197).epsilon(1e-15));
}

TEST_CASE("estimate_halfplane_bound") {
    const GeneratorModel scalar = make_generator(Matrix::Constant(1, 1, -1.0), "s");
    const double n0 = estimate_halfplane_bound(scalar, 0.0);
    CHECK(n0 >= 1.0);
    CHECK(n0 <= 1.0501);

    // Jordan block: brute-force boundary oracle for sup_s ||(is) R(is, A)||
    const GeneratorModel jordan = make_generator(mat2(-1, 1, 0, -1), "jordan");
    double oracle = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double s = -100.0 + 200.0 * i / 20000.0;
        oracle = std::max(
            oracle, std::abs(Complex(0, s)) * resolvent_norm(jordan, Complex(0, s)));
    }
    const double est = estimate_halfplane_bound(jordan, 0.0);
    CHECK(est >= oracle);
    CHECK(est <= oracle * 1.06);

    const GeneratorModel diag = make_generator(mat2(0, 0, 0, -1), "diag(0,-1)");
    CHECK_THROWS_WITH_AS(estimate_halfplane_bound(diag, -0.5),
                         doctest::Contains("SpectrumInHalfplane"), Error);
}

TEST_CASE("halfplane estimate feeds a certificate that revalidates") {
    const GeneratorModel jordan = make_generator(mat2(-1, 1, 0, -1), "jordan");
    const double n0 = estimate_halfplane_bound(jordan, 0.5);
    const SectorCert cert = halfplane_to_sector(0.5, n0);
    const SectorCert revalidated = certify_sector(jordan, cert.vertex, cert.angle);
    CHECK(revalidated.evidence.max_observed <= cert.bound);
}

TEST_CASE("perturbed_sector formulas (frozen)") {
    SectorCert cert;
    cert.vertex = 0.0;
    cert.angle = 3.0 * pi() / 4.0;
    cert.bound = 1.0;
    const SectorCert moved = perturbed_sector(cert, 1.0);
    CHECK(moved.vertex == doctest::Approx(2.8284271247461901).epsilon(1e-15));
    CHECK(moved.bound == doctest::Approx(4.8284271247461901).epsilon(1e-15));
    CHECK(moved.angle == cert.angle);

    const SectorCert same = perturbed_sector(cert, 0.0);
    CHECK(same.vertex == cert.vertex);
    CHECK(same.bound == doctest::Approx(2.0 * (1.0 + std::sqrt(2.0))));

    SectorCert c3;
    c3.vertex = 1.0;
    c3.angle = 2.0 * pi() / 3.0;
    c3.bound = 2.0;
    CHECK(perturbed_sector(c3, 0.5).vertex ==
          doctest::Approx(3.3094010767585031).epsilon(1e-15));

    // monotone in the perturbation size
    double prev = -1.0;
    for (const double w : {0.0, 0.3, 1.0, 4.0}) {
        const double v = perturbed_sector(cert, w).vertex;
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("uniform_family_sector recipe (frozen) and monotonicity") {
    PerturbationFamily fam = make_linear_family(
        make_generator(mat2(0, 0, 0, -1), "base"), -Matrix::Identity(2, 2), 1.0);
    fam.resolvent_const = 1.0;
    fam.asymptotic_ratio = 1.0;

    SectorCert cert;
    cert.vertex = 1.0;
    cert.angle = 3.0 * pi() / 4.0;
    cert.bound = 1.0;
    const FamilyCert fc = uniform_family_sector(fam, cert, 1.0, 1.0);
    CHECK(fc.a1 == doctest::Approx(3.8284271247461901).epsilon(1e-14));
    CHECK(fc.vertex == doctest::Approx(4.8284271247461901).epsilon(1e-14));
    CHECK(fc.n_tilde == doctest::Approx(14.48528137423857).epsilon(1e-14));
    CHECK(fc.bound == doctest::Approx(28.987816509068967).epsilon(1e-14));
    CHECK(fc.angle == doctest::Approx(1.605300424382776).epsilon(1e-12));

    // E == 0 family: a1 = a, reduces to the Lunardi-transformed certificate
    PerturbationFamily trivial = make_linear_family(
        make_generator(mat2(0, 0, 0, -1), "base"), Matrix::Zero(2, 2), 1.0);
    trivial.resolvent_const = 1.0;
    const FamilyCert fz = uniform_family_sector(trivial, cert, 1.0, 0.0);
    CHECK(fz.a1 == cert.vertex);

    SectorCert at_zero;
    at_zero.vertex = 0.0;
    at_zero.angle = 3.0 * pi() / 4.0;
    at_zero.bound = 1.0;
    CHECK_THROWS_WITH_AS(uniform_family_sector(fam, at_zero, 1.0, 1.0),
                         doctest::Contains("VertexNotPositive"), Error);

    // M~ nondecreasing in M0, M1, ell, sup_E_small
    auto mtilde = [&](double m0, double m1, double ell, double sup_small) {
        SectorCert c = cert;
        c.bound = m0;
        PerturbationFamily f = fam;
        f.resolvent_const = m1;
        f.asymptotic_ratio = ell;
        return uniform_family_sector(f, c, 1.0, sup_small).bound;
    };
    const double base_val = mtilde(1.0, 1.0, 1.0, 1.0);
    CHECK(mtilde(1.5, 1.0, 1.0, 1.0) >= base_val);
    CHECK(mtilde(1.0, 1.5, 1.0, 1.0) >= base_val);
    CHECK(mtilde(1.0, 1.0, 1.5, 1.0) >= base_val);
    CHECK(mtilde(1.0, 1.0, 1.0, 1.5) >= base_val);
}

TEST_CASE("family bound violation carries a witness") {
    // understate M0 so the derived N~ cannot cover the sampled sup
    PerturbationFamily fam = make_linear_family(
        make_generator(mat2(0, 0, 0, -1), "base"), -Matrix::Identity(2, 2), 1.0);
    fam.resolvent_const = 1e-3;
    SectorCert lying;
    lying.vertex = 1e-3;
    lying.angle = 3.0 * pi() / 4.0;
    lying.bound = 1e-3;
    CHECK_THROWS_WITH_AS(uniform_family_sector(fam, lying, 1.0, 0.0),
                         doctest::Contains("FamilyBoundViolated"), Error);
}

TEST_CASE("locate_alpha0 on a linear family") {
    PerturbationFamily fam = make_linear_family(
        make_generator(mat2(0, 0, 0, -1), "base"), -Matrix::Identity(2, 2), 1.0);
    // ||E(alpha)|| = alpha = q(alpha) <= (ell + 1) q(alpha) everywhere
    const Alpha0Estimate est = locate_alpha0(fam);
    CHECK(est.alpha0 <= 1e-3 * 1.0001);
    CHECK(est.sup_e_small <= est.alpha0 * 1.0001);
}
