#pragma once

#include "semistab/validator.hpp"

namespace semistab {

// Reaction-diffusion front problem on a truncated interval with Dirichlet
// closure. V0 holds the k x k multiplication blocks F'(hbar(y_i)) per node.
struct RDProblem {
    int k = 1;
    Matrix D;                 // k x k diffusion matrix
    double d = 0.0;           // reference diffusion
    double c = 0.0;           // wave speed
    std::vector<Matrix> V0;   // n blocks
    double L = 0.0;
    int n = 0;
    double zero_shift = 0.0;  // recentering of the near-zero eigenvalue
    double nu = 0.0;          // fixture spectral gap
    double Mtilde0 = 0.0;     // sup_t ||exp(t Lhat(0))||
    double delta0 = 0.0;

    double h() const { return 2.0 * L / (n + 1); }
    std::vector<double> nodes() const;
};

// Dense discretization of Lhat(xi): second difference x D + centered first
// difference x cI + blockdiag(V0) - xi_sq (I x D), minus the recentering shift.
GeneratorModel rd_operator(const RDProblem& prob, double xi_sq);

struct RdRates {
    double delta0 = 0.0;
    double q_slope = 0.0;  // delta0 * d
    double rho = 0.0;      // ||J|| Mtilde0 / d
};
RdRates rd_delta0(const RDProblem& prob);

PerturbationFamily rd_family(const RDProblem& prob);

// Cubic bistable fixture: f(u) = u(1-u)(u-a) with the explicit kink profile.
// Fills the profile, the recentering shift, nu, Mtilde0 and delta0.
RDProblem make_nagumo_rd(double a_cubic, double d, double L, int n);

double cubic_f(double u, double a);
double cubic_fprime(double u, double a);

struct BidomainConstants {
    double N0_sq = 0.0;
    double eta0 = 0.0;
    double eta1 = 0.0;
    double beta0 = 0.0;
    double beta1 = 0.0;
};

// Anisotropy matrices A_{i/e} rotated by gamma; decomposition of Q_gamma(s,1)
// into N0^2 (s - eta1)^2 + eta0 + (beta1 s + beta0)/(s^2 + 1).
BidomainConstants bidomain_symbol_constants(double nu1, double nu2, double gamma);

// The harmonic-mean symbol Q_gamma(xi) = Q_i Q_e / (Q_i + Q_e).
double q_gamma(double nu1, double nu2, double gamma, double xi1, double xi2);

struct GExtrema {
    double g_inf = 0.0;
    double g_sup = 0.0;
    double g_bar = 0.0;
    double g_delta = 0.0;
};
GExtrema g_extrema(double beta0, double beta1);

struct BidomainProblem {
    double nu1 = 0.0, nu2 = 0.0, gamma = 0.0;
    double a_cubic = 0.0;
    double c = 0.0;  // wave speed
    BidomainConstants sym;
    GExtrema gx;
    double Mb = 0.0;
    std::vector<double> fprime;  // multiplication coefficient per node
    double period = 0.0;
    double window = 0.0;  // half-width of the unwindowed profile region
    int n = 0;
    double zero_shift = 0.0;
    double nu = 0.0;

    std::vector<double> nodes() const;
    std::vector<double> wavenumbers() const;
};

// Periodic-spectral discretization of Ahat(xi2): Fourier multiplier
// -Q_gamma(., xi2), spectral derivative times c, pointwise f'(wbar).
GeneratorModel bidomain_operator(const BidomainProblem& prob, double xi2);

// H(xi2) assembled on the grid (no recentering shift; H(0) = 0).
Matrix bidomain_h_operator(const BidomainProblem& prob, double xi2);

// Diagonal modulation exp(i kappa y) with kappa = eta1 xi2 rounded to the
// nearest grid mode; the rounded value is reported through rounded_kappa.
Matrix bidomain_modulation(const BidomainProblem& prob, double xi2,
                           double* rounded_kappa = nullptr);

struct MbGridSpec {
    double r0 = 1e-3;        // keep-out radius around the origin
    double s_max = 1e4;
    int axis_points = 160;
    int arc_points = 33;
};
double bidomain_mb(const BidomainProblem& prob, const MbGridSpec& grid = {});

// E_pm(alpha) = H(+-sqrt(alpha)) -+ c i eta1 sqrt(alpha) I as a family; the
// spectral-stability condition eta0 > Mb g_Delta - g_bar must hold.
PerturbationFamily bidomain_family(const BidomainProblem& prob, char branch);

BidomainProblem make_bistable_bidomain(double nu1, double nu2, double gamma,
                                       double a_cubic, double period,
                                       double window, int n);

struct WaveRow {
    double xi = 0.0;
    double alpha = 0.0;
    double measured_sup = 0.0;   // sup_t e^{kappa q(alpha) t} ||exp(t Ahat(xi))||
    double envelope = 0.0;
    double ratio = 0.0;
    double abscissa = 0.0;
};
struct WaveReport {
    std::vector<WaveRow> rows;
    double global_sup = 0.0;
    bool bounded = false;
    bool pass = false;
};

WaveReport uniform_wave_report(const RDProblem& prob, const DecayEnvelope& env,
                               const std::vector<double>& xis,
                               const std::vector<double>& ts);
WaveReport uniform_wave_report(const BidomainProblem& prob,
                               const DecayEnvelope& env,
                               const std::vector<double>& xis,
                               const std::vector<double>& ts);

// 1.05 x sup_t ||exp(tA)|| for a semigroup that converges to its spectral
// projection, certified through the Ker P0 decay.
double bounded_semigroup_sup(const GeneratorModel& gen, double nu);

// Fixture rule: nu = 0.9 x (distance from the nonzero spectrum to the
// imaginary axis), after recentering.
double fixture_gap_nu(const GeneratorModel& gen);

}  // namespace semistab
