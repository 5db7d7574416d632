#pragma once

#include "semistab/operator_core.hpp"

namespace semistab {

struct EvidenceGrid {
    std::string description;
    long samples = 0;
    double max_observed = 0.0;
    double safety = kSupSafety;
};

// Sectoriality certificate: ||R(lambda, A)|| <= bound / |lambda - vertex| on
// the sector Omega_{vertex, angle}, with the sampling evidence that backs it.
struct SectorCert {
    double vertex = 0.0;
    double angle = 0.0;  // in (pi/2, pi)
    double bound = 1.0;  // M0
    EvidenceGrid evidence;
};

// Uniform-in-alpha certificate for a perturbation family.
struct FamilyCert {
    double vertex = 0.0;      // a~
    double angle = 0.0;       // theta~
    double bound = 0.0;       // M~ = sqrt(4 N~^2 + 1)
    double a1 = 0.0;
    double n_tilde = 0.0;
    double m1 = 0.0;          // resolvent constant of the family
    double ell = 0.0;
    double alpha0 = 0.0;
    EvidenceGrid evidence;
};

struct SectorGridSpec {
    int ray_points = 160;
    int arc_points = 65;
    double r_min_scale = 1e-3;
    double r_max_scale = 1e3;
    double angular_inset = 1e-3;  // rad, inset from the boundary rays
};

// Empirical sector certificate: no spectrum inside Omega_{a,theta}, bound from
// 1.05 x the sampled sup of ||(lambda - a) R(lambda, A)|| on the inset
// boundary rays and a small arc around the vertex.
SectorCert certify_sector(const GeneratorModel& gen, double a, double theta,
                          const SectorGridSpec& grid = {});

// Numerical-range route: verifies W(A) avoids Omega_{a,theta} through the
// extreme eigenvalues of the rotated Hermitian parts, then returns the sector
// at angle phi with the csc(theta - phi) bound.
SectorCert numerical_range_sector(const GeneratorModel& gen, double a,
                                  double theta, double phi,
                                  int psi_samples = 181);

// Half-plane bound N0 into a sector: vertex omega, angle pi - arctan(2 N0),
// bound sqrt(4 N0^2 + 1).
SectorCert halfplane_to_sector(double omega, double n0);

struct HalfplaneGridSpec {
    int boundary_points = 200;
    double im_min = 1e-3;
    double im_max = 1e4;
    int interior_checks = 10;
};

// sup over Re lambda = omega of ||(lambda - omega) R(lambda, A)|| times 1.05,
// plus fixed pseudo-random interior spot checks.
double estimate_halfplane_bound(const GeneratorModel& gen, double omega,
                                const HalfplaneGridSpec& grid = {});

// Bounded-perturbation vertex move: vertex a + 2 M0 ||W|| csc(theta), bound
// 2 M0 (1 + csc(theta)), same angle.
SectorCert perturbed_sector(const SectorCert& cert, double w_norm);

struct FamilyGridSpec {
    int alpha_points = 12;
    double alpha_max = 10.0;
    int im_points = 17;
    double im_max = 1e4;
};

// Uniform family certificate: a1 = a + 2 M0 sup_small csc(theta),
// N~ = M0 (1 + a1)(1 + max{csc(theta), M1 (ell + 1)}), a~ = a1 + 1,
// M~ = sqrt(4 N~^2 + 1), theta~ = pi - arctan(2 N~); verified by sampling
// ||lambda R(lambda, A_alpha)|| on Re lambda = a~.
FamilyCert uniform_family_sector(const PerturbationFamily& fam,
                                 const SectorCert& cert, double alpha0,
                                 double sup_e_small, const FamilyGridSpec& = {});

// Locates alpha0 with ||E(alpha)|| <= (ell + 1) q(alpha) for sampled
// alpha >= alpha0, plus the companion sup of ||E|| on [0, alpha0].
struct Alpha0Estimate {
    double alpha0 = 0.0;
    double sup_e_small = 0.0;
};
Alpha0Estimate locate_alpha0(const PerturbationFamily& fam, double alpha_max = 100.0,
                             int samples = 64);

}  // namespace semistab
