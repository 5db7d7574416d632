#pragma once

#include <limits>
#include <map>

#include "semistab/sectorial.hpp"

namespace semistab {

// Everything the uniform prefactors consume. q2 may be infinite; the leading
// block and the modulus r are optional (the simple-eigenvalue route needs
// neither).
struct EnvelopeIngredients {
    FamilyCert fcert;
    double m1 = 0.0;
    double nu = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;
    double q1 = 0.0;
    double q2 = std::numeric_limits<double>::infinity();
    double sup_e0 = 0.0;
    double eps0 = 0.0;
    double eps1 = 0.0;
    std::optional<Matrix> leading_block;  // G0(0) = P0 E0(0)|Im P0
    std::optional<std::function<double(double)>> modulus;  // r
    std::function<double(double)> q;
    int rank_p0 = 0;
};

// One validated bound piece: value(alpha, t) = exp(log_prefactor - rate(alpha) t),
// applicable for alpha <= alpha_max. Prefactors are carried in log space: the
// uniform constants contain exp(a~/q(eps)) terms that overflow doubles while
// remaining finite numbers.
struct EnvelopePiece {
    double log_prefactor = 0.0;
    std::function<double(double)> rate;  // alpha -> decay rate (may be negative)
    double alpha_max = std::numeric_limits<double>::infinity();

    double prefactor() const { return std::exp(log_prefactor); }
    double value(double alpha, double t) const {
        return std::exp(log_prefactor - rate(alpha) * t);
    }
};

struct DecayEnvelope {
    double kappa = 0.0;
    std::string tag;  // semisimple | simple-eigenvalue | away | vertex | shifted
    std::vector<EnvelopePiece> pieces;
    std::map<std::string, double> ledger;  // ingredient snapshot

    double log_prefactor() const {
        return pieces.empty() ? -std::numeric_limits<double>::infinity()
                              : pieces[0].log_prefactor;
    }
    double prefactor() const { return std::exp(log_prefactor()); }
    // smallest applicable bound at (alpha, t)
    double value(double alpha, double t) const;
};

// Vertex-path bound: prefactor M0 (e phi - sec phi)/pi, growth e^{a t}.
DecayEnvelope vertex_bound(const SectorCert& cert, double phi);

// Shifted-path pointwise bound; as_envelope packages the t >= t0 tail.
struct ShiftedBound {
    double m0 = 0.0, a = 0.0, mu = 0.0, sup_v = 0.0;
    double operator()(double t) const;
    DecayEnvelope as_envelope(double t0) const;
};
ShiftedBound shifted_bound(const SectorCert& cert, double mu, double phi,
                           double sup_v);

// Away-from-zero bound: the max of the resolvent branch and the short-time
// branch, evaluated at phi = theta~/2 + pi/4.
struct BranchValue {
    double value = 0.0;
    int branch = 0;  // 1 = resolvent branch, 2 = short-time branch
};
BranchValue family_bound_away(const FamilyCert& fc, double m1, double q_value,
                              double kappa);
// The alpha-monotone majorant of the away bound, used by the uniform
// prefactors (it dominates the two-branch value for every larger alpha).
double family_bound_majorant(const FamilyCert& fc, double m1, double q_value,
                             double kappa);
// log of the majorant; finite even where the linear value overflows.
double family_bound_majorant_log(const FamilyCert& fc, double m1, double q_value,
                                 double kappa);
// Hilbert-space variant of the away bound.
double hilbert_family_bound(const FamilyCert& fc, double m1, double q_value,
                            double kappa);

// Uniform decay constant of the Ker P0 block semigroup.
double m3_constant(const FamilyCert& fc, double nu, double m2);

// sup_t e^{(1+kappa) q1 t / 2} ||exp(t G0(0))||, times the 1.05 safety.
double m4_of_kappa(const Matrix& leading_block, double q1, double kappa);

struct Eps23 {
    double eps2 = 0.0;
    double eps3 = 0.0;
};
// Leading-block validity thresholds; r == nullptr means the r^{-1} term
// is +inf (constant E0).
Eps23 eps23(double kappa, double eps1, double q1, double q2, double nu, double m2,
            const std::function<double(double)>* r);

// Numerical inverse of an increasing unbounded modulus.
double invert_modulus(const std::function<double(double)>& r, double y);

// Uniform-decay envelopes with the full ingredient ledger: the semisimple
// route needs the leading block and the modulus r; the simple-eigenvalue
// route needs neither and adds the full-rate piece near zero.
DecayEnvelope semisimple_family_envelope(const EnvelopeIngredients& ing, double kappa);
DecayEnvelope simple_eigenvalue_envelope(const EnvelopeIngredients& ing, double kappa);

}  // namespace semistab
