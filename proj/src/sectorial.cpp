#include "semistab/sectorial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

namespace semistab {

namespace {

double csc(double x) { return 1.0 / std::sin(x); }

bool in_sector(Complex z, double a, double theta) {
    const Complex w = z - a;
    if (w == Complex(0, 0)) return false;
    return std::abs(std::arg(w)) < theta;
}

}  // namespace

SectorCert certify_sector(const GeneratorModel& gen, double a, double theta,
                          const SectorGridSpec& grid) {
    if (!(theta > pi() / 2.0 && theta < pi()))
        throw Error("BadAngle", "theta must lie in (pi/2, pi)");
    const double scale = std::max(operator_norm(gen.entries), 1e-12);
    for (const Complex ev : eigenvalues(gen))
        if (in_sector(ev, a, theta - kSpectralTol))
            throw Error("SpectrumInSector", "eigenvalue inside Omega_{a,theta}");

    double sup = 0.0;
    long samples = 0;
    const auto radii =
        log_spaced(grid.r_min_scale * scale, grid.r_max_scale * scale,
                   grid.ray_points);
    const double inset = theta - grid.angular_inset;
    for (const double sgn : {-1.0, 1.0}) {
        for (const double r : radii) {
            const Complex lam = a + r * std::exp(Complex(0, sgn * inset));
            sup = std::max(sup, std::abs(lam - a) * resolvent_norm(gen, lam));
            ++samples;
        }
    }
    const double r_arc = grid.r_min_scale * scale;
    for (int i = 0; i < grid.arc_points; ++i) {
        const double ang = -inset + 2.0 * inset * i / (grid.arc_points - 1);
        const Complex lam = a + r_arc * std::exp(Complex(0, ang));
        sup = std::max(sup, std::abs(lam - a) * resolvent_norm(gen, lam));
        ++samples;
    }
    SectorCert cert;
    cert.vertex = a;
    cert.angle = theta;
    cert.bound = kSupSafety * sup;
    cert.evidence = {"boundary rays +-(theta-delta), log radii in [" +
                         std::to_string(grid.r_min_scale * scale) + ", " +
                         std::to_string(grid.r_max_scale * scale) +
                         "], plus vertex arc",
                     samples, sup, kSupSafety};
    return cert;
}

SectorCert numerical_range_sector(const GeneratorModel& gen, double a,
                                  double theta, double phi, int psi_samples) {
    if (!(theta > pi() / 2.0 && theta < pi()))
        throw Error("BadAngle", "theta must lie in (pi/2, pi)");
    if (!(phi > pi() / 2.0 && phi < theta))
        throw Error("BadAngle", "phi must lie in (pi/2, theta)");
    const Index n = gen.dim();
    Matrix shifted = gen.entries;
    shifted.diagonal().array() -= a;
    // W(A - a) avoids Omega_{0,theta} iff the support function of W is <= 0
    // for every direction psi with |psi| <= theta - pi/2.
    const double span = theta - pi() / 2.0;
    const double tol = 1e-10 * std::max(1.0, operator_norm(shifted));
    double worst = -std::numeric_limits<double>::infinity();
    double worst_psi = 0.0;
    Eigen::VectorXcd worst_vec = Eigen::VectorXcd::Zero(n);
    for (int i = 0; i < psi_samples; ++i) {
        const double psi = -span + 2.0 * span * i / (psi_samples - 1);
        const Matrix rotated = std::exp(Complex(0, -psi)) * shifted;
        const Matrix herm = 0.5 * (rotated + rotated.adjoint());
        Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
        const Index top = n - 1;
        if (es.eigenvalues()(top) > worst) {
            worst = es.eigenvalues()(top);
            worst_psi = psi;
            worst_vec = es.eigenvectors().col(top);
        }
    }
    if (worst > tol)
        throw Error("NumericalRangeViolation",
                    "support function positive at psi = " +
                        std::to_string(worst_psi) + " (value " +
                        std::to_string(worst) + ")");
    SectorCert cert;
    cert.vertex = a;
    cert.angle = phi;
    cert.bound = csc(theta - phi);
    cert.evidence = {"numerical-range support function over " +
                         std::to_string(psi_samples) + " rotations",
                     psi_samples, worst, 1.0};
    return cert;
}

SectorCert halfplane_to_sector(double omega, double n0) {
    SectorCert cert;
    cert.vertex = omega;
    cert.angle = pi() - std::atan(2.0 * n0);
    cert.bound = std::sqrt(4.0 * n0 * n0 + 1.0);
    cert.evidence = {"Lunardi half-plane conversion at N0 = " + std::to_string(n0),
                     0, n0, 1.0};
    return cert;
}

double estimate_halfplane_bound(const GeneratorModel& gen, double omega,
                                const HalfplaneGridSpec& grid) {
    for (const Complex ev : eigenvalues(gen))
        if (ev.real() >= omega - kSpectralTol)
            throw Error("SpectrumInHalfplane",
                        "eigenvalue with Re lambda >= omega");
    auto value_at = [&](Complex lam) {
        return std::abs(lam - omega) * resolvent_norm(gen, lam);
    };
    // the map z -> z R(z, A - omega) is analytic on Re z > 0 and tends to I at
    // infinity, so the boundary plus the limit value 1 dominate the half-plane
    double sup = 1.0;
    for (const double s : log_spaced(grid.im_min, grid.im_max, grid.boundary_points))
        for (const double sgn : {-1.0, 1.0})
            sup = std::max(sup, value_at(Complex(omega, sgn * s)));
    sup = std::max(sup, value_at(Complex(omega, 0.0)));
    // interior spot checks guard the boundary-only argument
    std::mt19937 rng(0x5eed5u);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < grid.interior_checks; ++i) {
        const double re = omega + std::pow(10.0, -2.0 + 4.0 * unif(rng));
        const double im = (unif(rng) - 0.5) * 2.0 * grid.im_max * unif(rng);
        sup = std::max(sup, value_at(Complex(re, im)));
    }
    return kSupSafety * sup;
}

SectorCert perturbed_sector(const SectorCert& cert, double w_norm) {
    if (w_norm < 0.0) throw Error("BadArgument", "perturbation norm must be >= 0");
    SectorCert out;
    out.vertex = cert.vertex + 2.0 * cert.bound * w_norm * csc(cert.angle);
    out.angle = cert.angle;
    out.bound = 2.0 * cert.bound * (1.0 + csc(cert.angle));
    out.evidence = {"bounded-perturbation vertex move, ||W|| = " +
                        std::to_string(w_norm),
                    0, cert.evidence.max_observed, cert.evidence.safety};
    return out;
}

Alpha0Estimate locate_alpha0(const PerturbationFamily& fam, double alpha_max,
                             int samples) {
    const double ell = fam.asymptotic_ratio;
    const auto alphas = log_spaced(1e-3, alpha_max, samples);
    double alpha0 = alphas.front();
    for (std::size_t i = 0; i < alphas.size(); ++i)
        if (operator_norm(fam.perturb(alphas[i])) > (ell + 1.0) * fam.q(alphas[i]))
            alpha0 = i + 1 < alphas.size() ? alphas[i + 1] : alphas[i];
    Alpha0Estimate est;
    est.alpha0 = std::max(alpha0, 1e-3);
    double sup = 0.0;
    for (const double a : log_spaced(1e-6, est.alpha0, samples))
        sup = std::max(sup, operator_norm(fam.perturb(a)));
    est.sup_e_small = sup;
    return est;
}

FamilyCert uniform_family_sector(const PerturbationFamily& fam,
                                 const SectorCert& cert, double alpha0,
                                 double sup_e_small, const FamilyGridSpec& grid) {
    if (!(cert.vertex > 0.0))
        throw Error("VertexNotPositive",
                    "the family certificate needs a base vertex a > 0; "
                    "certify a pre-shifted operator first");
    const double a = cert.vertex, theta = cert.angle, m0 = cert.bound;
    const double m1 = fam.resolvent_const, ell = fam.asymptotic_ratio;
    if (!(m1 > 0.0))
        throw Error("MissingIngredient", "family resolvent constant M1 not set");

    FamilyCert fc;
    fc.a1 = a + 2.0 * m0 * sup_e_small * csc(theta);
    fc.n_tilde = m0 * (1.0 + fc.a1) *
                 (1.0 + std::max(csc(theta), m1 * (ell + 1.0)));
    fc.vertex = fc.a1 + 1.0;
    fc.bound = std::sqrt(4.0 * fc.n_tilde * fc.n_tilde + 1.0);
    fc.angle = pi() - std::atan(2.0 * fc.n_tilde);
    fc.m1 = m1;
    fc.ell = ell;
    fc.alpha0 = alpha0;

    // sampled verification of ||lambda R(lambda, A_alpha)|| <= N~ on Re = a~
    double observed = 0.0;
    long count = 0;
    std::vector<double> alphas{0.0};
    for (const double al :
         log_spaced(1e-4, std::max(grid.alpha_max, 2.0 * alpha0), grid.alpha_points))
        alphas.push_back(al);
    for (const double al : alphas) {
        const GeneratorModel member = family_member(fam, al);
        std::vector<double> ss{0.0};
        for (const double s : log_spaced(1e-2, grid.im_max, grid.im_points)) {
            ss.push_back(s);
            ss.push_back(-s);
        }
        for (const double s : ss) {
            const Complex lam(fc.vertex, s);
            const double v = std::abs(lam) * resolvent_norm(member, lam);
            observed = std::max(observed, v);
            ++count;
            if (v > fc.n_tilde * (1.0 + 1e-9))
                throw Error("FamilyBoundViolated",
                            "||lambda R|| = " + std::to_string(v) +
                                " exceeds N~ at alpha = " + std::to_string(al));
        }
    }
    fc.evidence = {"||lambda R(lambda, A_alpha)|| on Re lambda = a~ over " +
                       std::to_string(alphas.size()) + " alphas",
                   count, observed, 1.0};
    return fc;
}

}  // namespace semistab
