#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semistab/common.hpp"

namespace semistab {

// A dense n-by-n complex matrix regarded as the generator of the analytic
// semigroup t -> exp(tA). Entries carry units 1/time.
struct GeneratorModel {
    Matrix entries;
    std::string label;
    std::string provenance = "matrix";

    Index dim() const { return entries.rows(); }
};

GeneratorModel make_generator(Matrix entries, std::string label = {},
                              std::string provenance = "matrix");

// Matrix value together with the evaluation point (lambda or t) it came from.
struct OperatorValue {
    Matrix mat;
    Complex context{0.0, 0.0};
};

// A + E(alpha) with the decay-rate data of the hypotheses: q(alpha) = q1*alpha
// on [0, q2], resolvent constant M1, asymptotic ratio ell, and (optionally)
// the continuity modulus r of E0(alpha) = E(alpha)/alpha.
struct PerturbationFamily {
    GeneratorModel base;
    std::function<Matrix(double)> perturb;  // E(alpha), E(0) = 0
    double q_slope = 0.0;                   // q1
    double q_knee = std::numeric_limits<double>::infinity();  // q2
    std::function<double(double)> q;        // increasing, q(a) = q1*a on [0,q2]
    double resolvent_const = 0.0;           // M1
    double asymptotic_ratio = 0.0;          // ell
    std::optional<std::function<double(double)>> modulus;  // r, increasing, r(0)=0
    std::optional<Matrix> e0_limit;         // E0(0) when known analytically
    std::string label;

    Matrix e0(double alpha) const;   // E(alpha)/alpha, alpha > 0
    Matrix e0_at_zero() const;       // supplied limit, else E0(alpha_min) sample
};

PerturbationFamily make_linear_family(GeneratorModel base, Matrix direction,
                                      double q1, std::string label = {});

// Largest singular value.
double operator_norm(const Matrix& m);
inline double operator_norm(const OperatorValue& v) { return operator_norm(v.mat); }

// (lambda I - A)^{-1} by pivoted dense solve. Throws SingularResolvent when the
// estimated condition number exceeds kSingularCondition.
OperatorValue resolvent(const GeneratorModel& gen, Complex lambda);
double resolvent_norm(const GeneratorModel& gen, Complex lambda);

struct Eigenvalue {
    Complex value;
    int multiplicity;
};

// Raw eigenvalues sorted by (re, im).
std::vector<Complex> eigenvalues(const GeneratorModel& gen);
// Eigenvalues clustered within 1e-7 * ||A||, with algebraic multiplicities.
std::vector<Eigenvalue> spectrum(const GeneratorModel& gen);
double spectral_abscissa(const GeneratorModel& gen);

// exp(tA) by scaling-and-squaring with the order-13 diagonal rational
// approximant. Throws Overflow when ||tA|| exceeds the 1e6 safety cap.
OperatorValue semigroup_direct(const GeneratorModel& gen, double t);

GeneratorModel family_member(const PerturbationFamily& fam, double alpha);

// sup_{alpha in (0,1]} ||E0(alpha)||, sampled on a log grid plus the limit.
double sup_e0(const PerturbationFamily& fam, int samples = 48);

// Sampled checks of the family invariants: E(0) = 0, E0 bounded on (0,1],
// q increasing with q(alpha) = q1 alpha below the knee, and the modulus r
// dominating ||E0(alpha) - E0(0)|| when supplied.
void validate_family(const PerturbationFamily& fam, int samples = 16);

// Spectral projector onto the invariant subspace of the eigenvalues selected
// by `inside`, via Schur reordering and a triangular Sylvester solve. This is
// the quadrature-free route used as the oracle for contour projections.
Matrix spectral_projector_schur(const Matrix& a,
                                const std::function<bool(Complex)>& inside);

// Orthonormal bases for the range and the null space of a projection, split by
// singular-value thresholding at 1e-7.
struct ProjectionSplit {
    Matrix im_basis;   // n x k, columns span Im P
    Matrix ker_basis;  // n x (n-k), columns span Ker P
    int rank = 0;
};
ProjectionSplit split_projection(const Matrix& p, double threshold = 1e-7);

struct GapStructureReport {
    bool semisimple = false;
    bool gap_ok = false;
    int kernel_dim = 0;
    double zero_cluster_abs = 0.0;  // max |lambda| over the zero cluster
    double gap = 0.0;               // -max Re over the nonzero spectrum
};

// Gap check at nu: zero eigenvalue isolated in D(0, nu/4), remaining
// spectrum left of -nu, and the zero eigenvalue semisimple.
GapStructureReport verify_semisimple_gap(const GeneratorModel& gen, double nu);

}  // namespace semistab
