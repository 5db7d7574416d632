#pragma once

#include "semistab/contour.hpp"

namespace semistab {

// The spectral decomposition of a family member at one alpha: projections,
// the transformation operator, the conjugated operator and its two blocks.
struct SpectralDecomposition {
    double nu = 0.0;
    double alpha = 0.0;
    Matrix p0;        // spectral projection of A for D(0, nu/2)
    Matrix p_alpha;   // same circle, A_alpha
    Matrix u, u_inv;  // U(alpha) = P_a P_0 + (I - P_a)(I - P_0)
    Matrix b_alpha;   // U^{-1} A_alpha U
    Matrix k_block;   // K_alpha, k x k in the Im P_0 basis
    Matrix b_tilde;   // B~_alpha, (n-k) x (n-k) in the Ker P_0 basis
    Matrix im_basis, ker_basis;
    double m2 = 0.0, eps0 = 0.0, eps1 = 0.0;
};

// sup_{t >= 0} e^{rate t} ||exp(tM)||, certified by locating t0 with
// e^{rate t0} ||exp(t0 M)|| <= 1/2; submultiplicativity then confines the sup
// to [0, t0], which is scanned on a log grid with local refinement. Requires
// rate < -max Re sigma(M). The 1.05 safety factor is applied.
double certified_growth_sup(const Matrix& m, double rate, int grid_points = 176);

// M2 = 1.05 * sup_t e^{7 nu t / 8} ||T(t)|_{Ker P0}||.
double m2_constant(const GeneratorModel& gen, double nu);

struct ThresholdPair {
    double eps0 = 0.0;
    double eps1 = 0.0;
};
ThresholdPair thresholds(double nu, double m2, double sup_e0);

SpectralDecomposition build_decomposition(const PerturbationFamily& fam, double nu,
                                          double alpha, double tol);

struct LipschitzReport {
    double lhs = 0.0;   // ||P_{a1} - P_{a2}||
    double rhs = 0.0;   // (128 M2^2 / nu) ||E(a1) - E(a2)||
    double ratio = 0.0; // lhs / rhs (0 when both vanish)
    bool holds = true;
};
LipschitzReport projection_lipschitz_check(const PerturbationFamily& fam, double nu,
                                           double alpha1, double alpha2,
                                           double tol = 1e-10);

// G(alpha) with its norm bound and the K_alpha identity verified to 10*tol.
OperatorValue g_operator(const PerturbationFamily& fam, double nu, double alpha,
                         double tol);

struct ExpansionRow {
    double alpha = 0.0;
    double lhs = 0.0;   // ||K_alpha - alpha P0 E0(0)|Im||
    double rhs = 0.0;   // (8 M2 nu / eps1^2) a^2 + 768 M2^2 a r(a)
    double ratio = 0.0;
};
struct ExpansionReport {
    std::vector<ExpansionRow> rows;
    double leading_max_re = 0.0;  // max Re sigma(P0 E0(0)|Im)
    double q1 = 0.0;
    bool leading_ok = false;      // leading_max_re <= -q1 (within tolerance)
    bool all_hold = true;
};
ExpansionReport leading_block_expansion_check(const PerturbationFamily& fam,
                                              double nu,
                                              const std::vector<double>& alphas,
                                              double tol = 1e-10);

struct BtildeReport {
    double bound = 0.0;         // 96 M2 / nu
    double max_on_line = 0.0;   // sup sampled on Re = -nu/2
    double max_on_circle = 0.0; // sup sampled on |lambda| = nu/4
    double spectrum_max_re = 0.0;
    bool holds = true;
};
BtildeReport b_tilde_resolvent_bound(const SpectralDecomposition& dec,
                                     int samples = 64);

}  // namespace semistab
