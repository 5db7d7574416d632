#include "doctest.h"

#include <random>

#include "semistab/contour.hpp"
#include "semistab/sectorial.hpp"

using namespace semistab;

namespace {

Matrix mat2(Complex a, Complex b, Complex c, Complex d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

GeneratorModel random_sectorial(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss;
    Matrix d = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double r = 0.2 + 2.8 * unif(rng);
        const double beta = 3.0 * pi() / 4.0 + 0.08 +
                            (pi() - 3.0 * pi() / 4.0 - 0.16) * unif(rng);
        const double sign = unif(rng) < 0.5 ? -1.0 : 1.0;
        d(i, i) = r * std::exp(Complex(0, sign * beta));
    }
    Matrix v(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v(i, j) = 0.35 * Complex(gauss(rng), gauss(rng));
    v += Matrix::Identity(n, n);
    return make_generator(v * d * v.inverse(), "random sectorial");
}

}  // namespace

TEST_CASE("sector path construction") {
    const ContourPath path = sector_path(0.0, 2.0 * pi() / 3.0, 1.0);
    REQUIRE(path.segments.size() == 3);
    const auto& arc = std::get<Arc>(path.segments[1]);
    CHECK(arc.radius == doctest::Approx(1.0));
    CHECK(arc.angle_end - arc.angle_begin == doctest::Approx(4.0 * pi() / 3.0));
    const auto& up = std::get<Ray>(path.segments[2]);
    CHECK(up.angle == doctest::Approx(2.0 * pi() / 3.0));

    const ContourPath shifted = sector_path(1.0, 3.0 * pi() / 4.0, 0.5);
    CHECK(std::get<Arc>(shifted.segments[1]).center == Complex(1.0, 0.0));

    CHECK_THROWS_WITH_AS(sector_path(0.0, pi() / 3.0, 1.0),
                         doctest::Contains("BadAngle"), Error);
}

TEST_CASE("truncated sector path geometry") {
    const ContourPath path = truncated_sector_path(1.0, 0.0, 3.0 * pi() / 4.0);
    const auto& seg = std::get<VerticalSegment>(path.segments[1]);
    CHECK(seg.abscissa == doctest::Approx(0.0));
    CHECK(seg.s_end == doctest::Approx(1.0));       // b = 1
    CHECK(std::get<Ray>(path.segments[2]).r_begin ==
          doctest::Approx(std::sqrt(2.0)));          // c = sqrt(2)

    const ContourPath path2 = truncated_sector_path(0.0, -1.0, 2.0 * pi() / 3.0);
    CHECK(std::get<VerticalSegment>(path2.segments[1]).s_end ==
          doctest::Approx(std::sqrt(3.0)));
    CHECK(std::get<Ray>(path2.segments[2]).r_begin == doctest::Approx(2.0));

    CHECK_THROWS_WITH_AS(truncated_sector_path(0.0, 0.0, 2.0),
                         doctest::Contains("BadOrdering"), Error);
}

TEST_CASE("Cauchy integrals over a circle") {
    ContourPath circle;
    circle.segments.push_back(CirclePath{Complex(0, 0), 0.5});
    circle.closed = true;

    const Matrix id = Matrix::Identity(2, 2);
    auto pole = [&id](Complex lam) { return Matrix(id / lam); };
    const QuadratureResult r1 = contour_integral(circle, pole, 1e-12);
    CHECK(operator_norm(Matrix(r1.value.mat - id)) < 1e-11);

    auto analytic = [&id](Complex) { return id; };
    const QuadratureResult r2 = contour_integral(circle, analytic, 1e-12);
    CHECK(operator_norm(r2.value.mat) < 1e-12);

    const GeneratorModel diag = make_generator(mat2(0, 0, 0, -1), "diag(0,-1)");
    auto res = [&diag](Complex lam) { return resolvent(diag, lam).mat; };
    const QuadratureResult r3 = contour_integral(circle, res, 1e-12);
    CHECK(std::abs(r3.value.mat(0, 0) - Complex(1, 0)) < 1e-11);
    CHECK(std::abs(r3.value.mat(1, 1)) < 1e-11);
}

TEST_CASE("semigroup via contour matches the direct exponential") {
    SectorCert cert;
    cert.vertex = 0.0;
    cert.angle = 3.0 * pi() / 4.0;
    cert.bound = 1.5;

    const GeneratorModel scalar = make_generator(Matrix::Constant(1, 1, -1.0), "s");
    const QuadratureResult qv = semigroup_via_contour(
        scalar, cert, 1.0, SemigroupVariant::vertex, 1e-9);
    CHECK(std::abs(qv.value.mat(0, 0) - Complex(std::exp(-1.0), 0)) < 1e-7);

    const GeneratorModel jordan = make_generator(mat2(-1, 1, 0, -1), "jordan");
    const QuadratureResult qj = semigroup_via_contour(
        jordan, cert, 1.0, SemigroupVariant::vertex, 1e-9);
    CHECK(operator_norm(qj.value.mat) ==
          doctest::Approx(0.59524143957771111).epsilon(1e-6));

    SectorCert cert2;
    cert2.vertex = 1.0;
    cert2.angle = 3.0 * pi() / 4.0;
    cert2.bound = 3.0;
    const GeneratorModel diag = make_generator(mat2(0, 0, 0, -1), "diag(0,-1)");
    const QuadratureResult qs = semigroup_via_contour(
        diag, cert2, 2.0, SemigroupVariant::shifted, 1e-9, 0.5);
    CHECK(std::abs(qs.value.mat(0, 0) - Complex(1, 0)) < 1e-7);
    CHECK(std::abs(qs.value.mat(1, 1) - Complex(std::exp(-2.0), 0)) < 1e-7);
}

TEST_CASE("path independence in phi") {
    const GeneratorModel jordan = make_generator(mat2(-1, 1, 0, -1), "jordan");
    SectorCert cert;
    cert.vertex = 0.0;
    cert.angle = 3.0 * pi() / 4.0;
    cert.bound = 2.0;
    const double tol = 1e-9;
    const Matrix a = semigroup_via_contour(jordan, cert, 1.0,
                                           SemigroupVariant::vertex, tol, 0.0,
                                           pi() / 2.0 + 0.3)
                         .value.mat;
    const Matrix b = semigroup_via_contour(jordan, cert, 1.0,
                                           SemigroupVariant::vertex, tol, 0.0,
                                           pi() / 2.0 + 0.6)
                         .value.mat;
    CHECK(operator_norm(Matrix(a - b)) <= 2e-7);
}

TEST_CASE("riesz projection on explicit spectra") {
    const GeneratorModel diag = make_generator(mat2(0, 0, 0, -1), "diag(0,-1)");
    const OperatorValue p = riesz_projection(diag, {Complex(0, 0), 0.5}, 1e-12);
    CHECK(std::abs(p.mat(0, 0) - Complex(1, 0)) < 1e-11);
    CHECK(std::abs(p.mat(1, 1)) < 1e-11);

    const GeneratorModel shifted = make_generator(mat2(-1, 0, 0, -2), "stable");
    const OperatorValue zero = riesz_projection(shifted, {Complex(0, 0), 0.5}, 1e-12);
    CHECK(operator_norm(zero.mat) < 1e-11);

    // A0 of the appendix at b0 = -0.3: P0 is the rank-1 projection onto the
    // third coordinate
    const double b0 = -0.3;
    const GeneratorModel jz = make_generator(mat2(-1, 1 - b0, -b0, -0.25), "JZ");
    const double lam_star = eigenvalues(jz).back().real();
    Eigen::SelfAdjointEigenSolver<Matrix> zs(mat2(1, b0, b0, 0.25));
    const double b1 = 0.25 * std::min(lam_star, zs.eigenvalues()(0));
    Matrix a0 = Matrix::Zero(3, 3);
    a0(0, 0) = -b1;
    a0(0, 1) = 1;
    a0(1, 1) = -b1;
    const OperatorValue p0 = riesz_projection(make_generator(a0, "A0"),
                                              {Complex(0, 0), b1 / 2.0}, 1e-12);
    CHECK(split_projection(p0.mat).rank == 1);
    CHECK(std::abs(p0.mat(2, 2) - Complex(1, 0)) < 1e-10);
    CHECK(std::abs(p0.mat(0, 0)) < 1e-10);

    CHECK_THROWS_WITH_AS(riesz_projection(diag, {Complex(0, 0), 1.0}, 1e-10),
                         doctest::Contains("EigenvalueOnContour"), Error);
}

TEST_CASE("riesz rank counts enclosed eigenvalues (Schur oracle)") {
    std::mt19937 rng(2026u);
    for (int trial = 0; trial < 6; ++trial) {
        const GeneratorModel gen = random_sectorial(rng, 5 + trial % 4);
        // circle through a spectrum-free annulus
        const double radius = 1.6;
        int enclosed = 0;
        bool near = false;
        for (const Complex ev : eigenvalues(gen)) {
            if (std::abs(std::abs(ev) - radius) < 0.08) near = true;
            if (std::abs(ev) < radius) ++enclosed;
        }
        if (near) continue;
        const OperatorValue p =
            riesz_projection(gen, {Complex(0, 0), radius}, 1e-11);
        CHECK(split_projection(p.mat).rank == enclosed);
        // quadrature equals the Schur-reordering projector
        const Matrix oracle = spectral_projector_schur(
            gen.entries, [radius](Complex z) { return std::abs(z) < radius; });
        CHECK(operator_norm(Matrix(p.mat - oracle)) < 1e-9);
    }
}

TEST_CASE("vertical segment sup") {
    const GeneratorModel scalar = make_generator(Matrix::Constant(1, 1, -1.0), "s");
    CHECK(vertical_segment_sup(scalar, 0.0, 1.0, 65) == doctest::Approx(1.0));

    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = -1;
    d(1, 1) = Complex(-1, 5);
    const GeneratorModel offaxis = make_generator(std::move(d), "offaxis");
    CHECK(vertical_segment_sup(offaxis, 0.0, 6.0, 129) ==
          doctest::Approx(1.0).epsilon(1e-6));

    const GeneratorModel jordan = make_generator(mat2(-1, 1, 0, -1), "jordan");
    CHECK(vertical_segment_sup(jordan, 0.0, 2.0, 129) ==
          doctest::Approx(1.6180339887498949).epsilon(1e-6));
}

TEST_CASE("v operator closed form and limits") {
    const GeneratorModel scalar = make_generator(Matrix::Constant(1, 1, -1.0), "s");
    // b = (a - mu)|tan phi| = 2.185 at t = 0 integrates to 2 arctan(b/(1+mu))
    const double phi = pi() - std::atan(2.185);
    const OperatorValue v = v_operator(scalar, 1.0, 0.0, 0.0, phi,
                                       VRoute::quadrature, 1e-10);
    CHECK(std::abs(v.mat(0, 0) - Complex(2.2831715000763958, 0)) < 1e-8);

    // b = (a - mu)|tan phi| -> 0 as phi -> pi- with a - mu fixed
    const OperatorValue small = v_operator(scalar, 1.0, 0.0, 0.0, pi() - 1e-4,
                                           VRoute::quadrature, 1e-12);
    CHECK(operator_norm(small.mat) < 3e-4);
}

TEST_CASE("v operator routes agree") {
    const GeneratorModel diag = make_generator(mat2(-1, 0, 0, -2), "diag(-1,-2)");
    for (const double t : {0.0, 0.5, 1.0}) {
        const OperatorValue quad =
            v_operator(diag, 1.0, t, 0.0, 2.0, VRoute::quadrature, 1e-8);
        const OperatorValue conv =
            v_operator(diag, 1.0, t, 0.0, 2.0, VRoute::convolution, 1e-8);
        const double denom = std::max(operator_norm(quad.mat), 1e-12);
        CHECK(operator_norm(Matrix(quad.mat - conv.mat)) / denom <= 1e-4);
    }
}

TEST_CASE("v operator norm bound via the segment sup") {
    const GeneratorModel jordan = make_generator(mat2(-1, 1, 0, -1), "jordan");
    const double a = 0.5;
    for (const double phi : {pi() / 2.0 + 0.4, 2.2}) {
        for (const double mu : {-0.25, 0.0, 0.2}) {
            for (const double t : {0.1, 1.0, 4.0}) {
                const double b = (a - mu) * std::abs(std::tan(phi));
                const OperatorValue v =
                    v_operator(jordan, a, t, mu, phi, VRoute::quadrature, 1e-9);
                const double seg = vertical_segment_sup(jordan, mu, b, 101);
                CHECK(operator_norm(v.mat) <= 2.0 * b * seg * (1.0 + 1e-6));
            }
        }
    }
}

TEST_CASE("f_tilde reproduces the restricted resolvent") {
    const GeneratorModel diag = make_generator(mat2(0, 0, 0, -1), "diag(0,-1)");
    const double nu = 1.0;
    const Complex lam(nu / 8.0, 0.0);
    const OperatorValue ft = f_tilde(diag, lam, nu, 1e-12);
    CHECK(std::abs(ft.mat(0, 0)) < 1e-11);  // projection part cancels
    CHECK(std::abs(-ft.mat(1, 1) - 1.0 / (lam + 1.0)) < 1e-11);

    // far outside: F~ ~ P / lambda
    const Complex far(40.0, 3.0);
    const OperatorValue ff = f_tilde(diag, far, nu, 1e-12);
    const OperatorValue p = riesz_projection(diag, {Complex(0, 0), nu / 2.0}, 1e-12);
    CHECK(operator_norm(Matrix(ff.mat - p.mat / far)) < 1e-3);

    // no spectrum inside the circle: -F~ equals the full resolvent
    const GeneratorModel stable = make_generator(mat2(-1, 0, 0, -2), "stable");
    const Complex inside(0.05, 0.1);
    const OperatorValue fs = f_tilde(stable, inside, nu, 1e-12);
    CHECK(operator_norm(Matrix(-fs.mat - resolvent(stable, inside).mat)) < 1e-10);

    CHECK_THROWS_WITH_AS(f_tilde(diag, Complex(0.5, 0), 1.0, 1e-10),
                         doctest::Contains("LambdaOnContour"), Error);
    const GeneratorModel on_circle = make_generator(mat2(-0.5, 0, 0, -2), "hit");
    CHECK_THROWS_WITH_AS(f_tilde(on_circle, Complex(0.1, 0), 1.0, 1e-10),
                         doctest::Contains("EigenvalueOnContour"), Error);
}
