#include "doctest.h"

#include <random>

#include "semistab/contour.hpp"
#include "semistab/operator_core.hpp"

using namespace semistab;

namespace {

Matrix mat2(Complex a, Complex b, Complex c, Complex d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

// 2x2 singular-value oracle: sigma_max^2 is the larger eigenvalue of M^* M
double svd2_oracle(const Matrix& m) {
    const double a = std::norm(m(0, 0)) + std::norm(m(1, 0));
    const double d = std::norm(m(0, 1)) + std::norm(m(1, 1));
    const Complex b = std::conj(m(0, 0)) * m(0, 1) + std::conj(m(1, 0)) * m(1, 1);
    const double tr = a + d;
    const double det = a * d - std::norm(b);
    return std::sqrt(0.5 * (tr + std::sqrt(tr * tr - 4.0 * det)));
}

GeneratorModel random_stable(std::mt19937& rng, int n) {
    std::normal_distribution<double> gauss;
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = 0.3 * Complex(gauss(rng), gauss(rng));
    a -= Matrix::Identity(n, n) * (2.0 + operator_norm(a));
    return make_generator(std::move(a), "random stable");
}

}  // namespace

TEST_CASE("resolvent on diagonal and Jordan instances") {
    const GeneratorModel diag =
        make_generator(mat2(-1, 0, 0, -2), "diag(-1,-2)");
    const OperatorValue r0 = resolvent(diag, Complex(0, 0));
    CHECK(std::abs(r0.mat(0, 0) - Complex(1, 0)) < 1e-14);
    CHECK(std::abs(r0.mat(1, 1) - Complex(0.5, 0)) < 1e-14);
    CHECK(operator_norm(r0) == doctest::Approx(1.0).epsilon(1e-12));

    const GeneratorModel jordan = make_generator(mat2(-1, 1, 0, -1), "jordan");
    const OperatorValue rj = resolvent(jordan, Complex(0, 0));
    CHECK(std::abs(rj.mat(0, 0) - Complex(1, 0)) < 1e-14);
    CHECK(std::abs(rj.mat(0, 1) - Complex(1, 0)) < 1e-14);
    CHECK(std::abs(rj.mat(1, 0)) < 1e-14);
    // (1 + sqrt 5)/2, frozen from the 2x2 singular-value oracle
    CHECK(operator_norm(rj) == doctest::Approx(1.6180339887498949).epsilon(1e-12));
    CHECK(svd2_oracle(rj.mat) == doctest::Approx(1.6180339887498949).epsilon(1e-12));

    const GeneratorModel singular = make_generator(mat2(0, 0, 0, -1), "diag(0,-1)");
    CHECK_THROWS_WITH_AS(resolvent(singular, Complex(0, 0)),
                         doctest::Contains("SingularResolvent"), Error);
}

TEST_CASE("resolvent residual meets the contract") {
    std::mt19937 rng(31u);
    for (int trial = 0; trial < 4; ++trial) {
        const GeneratorModel gen = random_stable(rng, 6);
        const Complex lam(0.7, 0.3);
        const Matrix r = resolvent(gen, lam).mat;
        Matrix shifted = -gen.entries;
        shifted.diagonal().array() += lam;
        const Matrix resid = shifted * r - Matrix::Identity(6, 6);
        CHECK(operator_norm(resid) <=
              1e-10 * operator_norm(r) * operator_norm(shifted));
    }
}

TEST_CASE("spectrum with multiplicities") {
    const GeneratorModel diag = make_generator(mat2(0, 0, 0, -1), "diag(0,-1)");
    const auto spec = spectrum(diag);
    REQUIRE(spec.size() == 2);
    CHECK(spec[0].value.real() == doctest::Approx(-1.0));
    CHECK(spec[1].value.real() == doctest::Approx(0.0));

    const GeneratorModel jordan = make_generator(mat2(-1, 1, 0, -1), "jordan");
    const auto js = spectrum(jordan);
    REQUIRE(js.size() == 1);
    CHECK(js[0].multiplicity == 2);
    CHECK(js[0].value.real() == doctest::Approx(-1.0).epsilon(1e-7));

    // J0 - Z0 at b0 = -0.3; eigenvalues frozen from the trace/determinant oracle
    const double b0 = -0.3;
    const GeneratorModel jz =
        make_generator(mat2(0 - 1.0, 1.0 - b0, -b0, -0.25), "J0-Z0");
    const auto eigs = eigenvalues(jz);
    CHECK(eigs.back().real() == doctest::Approx(0.10344011421667327).epsilon(1e-10));
    CHECK(eigs.front().real() ==
          doctest::Approx(-1.3534401142166733).epsilon(1e-10));
}

TEST_CASE("backward error of eigenpairs") {
    std::mt19937 rng(77u);
    const GeneratorModel gen = random_stable(rng, 8);
    Eigen::ComplexEigenSolver<Matrix> es(gen.entries, true);
    const double scale = operator_norm(gen.entries);
    for (int k = 0; k < 8; ++k) {
        const auto v = es.eigenvectors().col(k);
        const auto lam = es.eigenvalues()(k);
        CHECK((gen.entries * v - lam * v).norm() <= 1e-10 * scale);
    }
}

TEST_CASE("semigroup_direct examples") {
    const GeneratorModel scalar = make_generator(Matrix::Constant(1, 1, -1.0), "s");
    CHECK(operator_norm(semigroup_direct(scalar, 1.0).mat) ==
          doctest::Approx(0.36787944117144233).epsilon(1e-12));

    const GeneratorModel jordan = make_generator(mat2(-1, 1, 0, -1), "jordan");
    // frozen: exp(-1) * (1 + sqrt 5)/2 via the singular-value oracle
    CHECK(operator_norm(semigroup_direct(jordan, 1.0).mat) ==
          doctest::Approx(0.59524143957771111).epsilon(1e-12));

    const GeneratorModel any = make_generator(mat2(2, 1, 0, 3), "unstable");
    CHECK(semigroup_direct(any, 0.0).mat.isIdentity(1e-15));

    CHECK_THROWS_WITH_AS(semigroup_direct(any, 1e7),
                         doctest::Contains("Overflow"), Error);
}

TEST_CASE("semigroup norm matches spectral abscissa for normal matrices") {
    const GeneratorModel diag = make_generator(mat2(-0.5, 0, 0, -2), "normal");
    for (const double t : {0.1, 1.0, 7.0}) {
        CHECK(operator_norm(semigroup_direct(diag, t).mat) ==
              doctest::Approx(std::exp(-0.5 * t)).epsilon(1e-10));
    }
}

TEST_CASE("family_member is affine in E") {
    PerturbationFamily fam = make_linear_family(
        make_generator(mat2(0, 0, 0, -1), "base"), -Matrix::Identity(2, 2), 1.0);
    CHECK(family_member(fam, 0.0).entries == fam.base.entries);
    const GeneratorModel at2 = family_member(fam, 2.0);
    CHECK(std::abs(at2.entries(0, 0) - Complex(-2, 0)) < 1e-15);
    CHECK(std::abs(at2.entries(1, 1) - Complex(-3, 0)) < 1e-15);
    // exact affinity
    const Matrix diff = family_member(fam, 0.7).entries - fam.base.entries;
    CHECK((diff - fam.perturb(0.7)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("operator_norm basics") {
    CHECK(operator_norm(Matrix(Matrix::Identity(3, 3))) == doctest::Approx(1.0));
    CHECK(operator_norm(mat2(1, 1, 0, 1)) ==
          doctest::Approx(1.6180339887498949).epsilon(1e-12));
    CHECK(operator_norm(Matrix(Matrix::Zero(4, 4))) == 0.0);
}

TEST_CASE("verify_semisimple_gap on the canonical instances") {
    const GeneratorModel good = make_generator(mat2(0, 0, 0, -1), "diag(0,-1)");
    const GapStructureReport rep = verify_semisimple_gap(good, 0.5);
    CHECK(rep.semisimple);
    CHECK(rep.gap_ok);
    CHECK(rep.kernel_dim == 1);

    Matrix jb = Matrix::Zero(3, 3);
    jb(0, 1) = 1;
    jb(2, 2) = -1;
    const GapStructureReport bad = verify_semisimple_gap(make_generator(jb, "jordan-at-zero"), 0.5);
    CHECK_FALSE(bad.semisimple);
    CHECK(bad.kernel_dim == 2);

    CHECK_THROWS_WITH_AS(
        verify_semisimple_gap(make_generator(mat2(-3, 0, 0, -4), "shifted"), 0.5),
        doctest::Contains("NoIsolatedZero"), Error);
}

TEST_CASE("schur projector agrees with diagonalizable structure") {
    std::mt19937 rng(5u);
    std::normal_distribution<double> gauss;
    Matrix v(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) v(i, j) = Complex(gauss(rng), gauss(rng));
    v += 3.0 * Matrix::Identity(4, 4);
    Matrix d = Matrix::Zero(4, 4);
    d(0, 0) = 0;
    d(1, 1) = Complex(-1, 0.5);
    d(2, 2) = Complex(-2, -0.5);
    d(3, 3) = -3;
    const Matrix a = v * d * v.inverse();
    const Matrix p = spectral_projector_schur(
        a, [](Complex z) { return std::abs(z) < 0.5; });
    // P should be the oblique projector onto the 0-eigenvector along the rest
    CHECK(operator_norm(Matrix(p * p - p)) < 1e-11);
    CHECK(operator_norm(Matrix(a * p)) < 1e-10);
    CHECK(split_projection(p).rank == 1);
}

TEST_CASE("resolvent identity") {
    std::mt19937 rng(11u);
    const GeneratorModel gen = random_stable(rng, 6);
    const Complex lam(0.4, 1.0), mu(1.2, -0.8);
    const Matrix rl = resolvent(gen, lam).mat;
    const Matrix rm = resolvent(gen, mu).mat;
    const double lhs = operator_norm(Matrix(rl - rm + (lam - mu) * rl * rm));
    const double cap = std::max(operator_norm(rl), operator_norm(rm));
    CHECK(lhs <= 1e-8 * cap * cap);
}

TEST_CASE("semigroup law on sampled times") {
    std::mt19937 rng(13u);
    const GeneratorModel gen = random_stable(rng, 5);
    for (const auto [t, s] : {std::pair{0.3, 0.7}, {1.0, 4.0}, {2.5, 7.5}}) {
        const Matrix tt = semigroup_direct(gen, t).mat;
        const Matrix ts = semigroup_direct(gen, s).mat;
        const Matrix both = semigroup_direct(gen, t + s).mat;
        CHECK(operator_norm(Matrix(both - tt * ts)) <=
              1e-8 * operator_norm(tt) * operator_norm(ts));
    }
}

TEST_CASE("Laplace transform of the semigroup returns the resolvent") {
    const GeneratorModel gen = make_generator(mat2(-1, 0.5, 0, -2), "lap");
    const Complex lam(0.8, 0.4);  // Re > abscissa + margin
    // truncated adaptive time quadrature of e^{-lambda t} T(t)
    Matrix acc = Matrix::Zero(2, 2);
    const double T = 40.0;
    const int panels = 400;
    for (int i = 0; i < panels; ++i) {
        // Simpson on each panel
        const double a = T * i / panels, b = T * (i + 1) / panels;
        auto f = [&](double t) {
            return Matrix(std::exp(-lam * t) * semigroup_direct(gen, t).mat);
        };
        acc += (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
    }
    CHECK(operator_norm(Matrix(acc - resolvent(gen, lam).mat)) <= 1e-4);
}

TEST_CASE("family invariants are enforced") {
    PerturbationFamily fam = make_linear_family(
        make_generator(mat2(0, 0, 0, -1), "base"), -Matrix::Identity(2, 2), 1.0);
    CHECK_NOTHROW(validate_family(fam));

    PerturbationFamily bad_e0 = fam;
    bad_e0.perturb = [](double alpha) {
        return Matrix(Matrix::Identity(2, 2) * (alpha + 0.1));
    };
    CHECK_THROWS_WITH_AS(validate_family(bad_e0),
                         doctest::Contains("FamilyInvariantViolated"), Error);

    PerturbationFamily bad_q = fam;
    bad_q.q = [](double alpha) { return -alpha; };
    CHECK_THROWS_WITH_AS(validate_family(bad_q),
                         doctest::Contains("FamilyInvariantViolated"), Error);

    PerturbationFamily bad_r = fam;
    bad_r.perturb = [](double alpha) {
        return Matrix(-alpha * (1.0 + alpha) * Matrix::Identity(2, 2));
    };
    bad_r.e0_limit = Matrix(-Matrix::Identity(2, 2));
    bad_r.modulus = [](double alpha) { return 0.01 * alpha; };  // too small
    CHECK_THROWS_WITH_AS(validate_family(bad_r),
                         doctest::Contains("FamilyInvariantViolated"), Error);
    bad_r.modulus = [](double alpha) { return alpha; };
    CHECK_NOTHROW(validate_family(bad_r));
}

TEST_CASE("sup_e0 sampling sees the supplied limit") {
    PerturbationFamily fam = make_linear_family(
        make_generator(mat2(0, 0, 0, -1), "base"), -2.0 * Matrix::Identity(2, 2),
        1.0);
    CHECK(sup_e0(fam) == doctest::Approx(2.0).epsilon(1e-12));
}
