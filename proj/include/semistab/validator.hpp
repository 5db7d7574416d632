#pragma once

#include "semistab/envelope.hpp"

namespace semistab {

struct ValidationRow {
    double alpha = 0.0;
    double t = 0.0;
    double measured = 0.0;
    double envelope = 0.0;
    double ratio = 0.0;
};

struct ValidationReport {
    std::vector<ValidationRow> rows;
    double max_ratio = 0.0;
    std::size_t argmax = 0;
    bool pass = false;
    std::string grids;
};

// Default sweep grids: 64 log-spaced points plus 0.
std::vector<double> default_alpha_grid();
std::vector<double> default_t_grid();

// Measures ||exp(t A_alpha)|| with the direct exponential and checks
// domination by the envelope on the grid product.
ValidationReport validate_envelope(const PerturbationFamily& fam,
                                   const DecayEnvelope& env,
                                   const std::vector<double>& alphas,
                                   const std::vector<double>& ts,
                                   unsigned threads = 0);

// max over ts of the relative deviation between the contour and direct
// exponentials; runs the vertex variant, plus the shifted variant when mu_opt
// is supplied.
double crosscheck_semigroup(const GeneratorModel& gen, const SectorCert& cert,
                            const std::vector<double>& ts, double tol,
                            const double* mu_opt = nullptr);

struct AppendixA1Report {
    double b0 = 0.0;
    bool z0_posdef = false;
    double m0 = 0.0;          // smallest eigenvalue of Z0
    double lambda_star = 0.0; // positive eigenvalue of J0 - Z0
    double mu_star = 0.0;     // negative eigenvalue of J0 - Z0
    double b1 = 0.0;
    std::vector<Complex> spectrum_a0;
    bool h1_h2_hold = false;  // 0 simple, gap b1
    bool w0_negdef = false;
    double w0_max_eig = 0.0;
    double destabilized_max_re = 0.0;  // max Re sigma(A0 + W0), equals lambda*
    Matrix a0, w0;
};
AppendixA1Report appendix_a1(double b0);

struct AppendixA2Report {
    double b0 = 0.0;
    int s_samples = 0;
    double neg_hull_lo = 0.0, neg_hull_hi = 0.0;  // hull of s * mu0*
    double pos_hull_lo = 0.0, pos_hull_hi = 0.0;  // hull of s * lambda0*
    double stable_hull_lo = 0.0, stable_hull_hi = 0.0;  // hull of -s b1
    bool essential_instability = false;  // positive hull nonempty
};
AppendixA2Report appendix_a2(double b0, int s_samples);

struct LambdaGridSpec {
    int re_offsets = 12;
    double re_min = 1e-3, re_max = 1e2;
    int im_points = 9;
    double im_max = 1e2;
};

// Estimates M1 = 1.05 * sup (Re lambda + q(alpha)) ||R(lambda, A_alpha)|| and
// checks sigma(A_alpha) stays left of -q(alpha) on the alpha grid.
double resolvent_family_bound_check(const PerturbationFamily& fam,
                                    const std::vector<double>& alphas,
                                    const LambdaGridSpec& grid = {});

}  // namespace semistab
