#pragma once

#include <variant>

#include "semistab/operator_core.hpp"

namespace semistab {

// Integration paths are built from four segment kinds. Rays and arcs are
// anchored at a sector vertex; a vertical segment closes the truncated sector
// path; a circle stands alone as a closed path.

struct Ray {
    Complex vertex;
    double angle;     // radians
    double r_begin;   // traversal from r_begin to r_end (either order)
    double r_end;
};

struct Arc {
    Complex center;
    double radius;
    double angle_begin;
    double angle_end;
};

struct VerticalSegment {
    double abscissa;  // mu
    double s_begin;   // imaginary part range, traversed begin -> end
    double s_end;
};

struct CirclePath {
    Complex center;
    double radius;    // counterclockwise, closed
};

using Segment = std::variant<Ray, Arc, VerticalSegment, CirclePath>;

struct ContourPath {
    std::vector<Segment> segments;
    bool closed = false;

    Complex point(std::size_t seg, double u) const;      // u in [0,1]
    Complex derivative(std::size_t seg, double u) const; // d lambda / du
};

// Endpoint-connectivity check; throws on a broken chain.
void validate_path(const ContourPath& path, double tol = 1e-12);

struct QuadratureResult {
    OperatorValue value;
    double est_error = 0.0;
    long nodes = 0;
};

// Vertex path Lambda_{a,phi,eps}: two rays at +-phi truncated at r_max, joined
// by the arc of radius eps, counterclockwise.
ContourPath sector_path(double a, double phi, double eps, double r_max = 0.0);

// Truncated sector path Gamma_{a,mu,phi}: rays from radius c = (a-mu)|sec phi|
// joined by the vertical segment at mu of half-height b = (a-mu)|tan phi|.
ContourPath truncated_sector_path(double a, double mu, double phi,
                                  double r_max = 0.0);

// (1/2 pi i) * integral of the matrix-valued integrand along the path.
// Rays/arcs/segments use adaptive 15-node Gauss-Kronrod bisection; circles use
// the trapezoid rule with node doubling (64 nodes up). Throws ToleranceNotMet
// past the node cap.
QuadratureResult contour_integral(const ContourPath& path,
                                  const std::function<Matrix(Complex)>& integrand,
                                  double tol);

struct SectorCert;  // sectorial.hpp

enum class SemigroupVariant { vertex, shifted };

// exp(tA) via the contour representation on Lambda_{a,phi,eps/t} (vertex,
// eps = 1) or Gamma_{a,mu,phi} (shifted).
QuadratureResult semigroup_via_contour(const GeneratorModel& gen,
                                       const SectorCert& cert, double t,
                                       SemigroupVariant variant, double tol,
                                       double mu = 0.0, double phi = 0.0);

// Riesz spectral projection (1/2 pi i) * closed integral of R(., A) over the
// circle. Verifies idempotency and commutation with A to 10*tol.
OperatorValue riesz_projection(const GeneratorModel& gen, const CirclePath& circle,
                               double tol);

// max_{|s| <= b} ||R(mu + i s, A)|| over a uniform grid with one local
// refinement pass around the coarse argmax.
double vertical_segment_sup(const GeneratorModel& gen, double mu, double b,
                            int samples);

enum class VRoute { quadrature, convolution };

// V_A(t, mu, phi) = integral over |s| <= (a-mu)|tan phi| of e^{ist} R(mu+is,A).
// The convolution route integrates sin(b(t-xi))/(t-xi) e^{-mu xi} T(xi) d xi.
OperatorValue v_operator(const GeneratorModel& gen, double a, double t, double mu,
                         double phi, VRoute route, double tol = 1e-8);

// F~(lambda, alpha) = (1/2 pi i) * integral over |zeta| = nu/2 of
// (lambda - zeta)^{-1} R(zeta, A_alpha).
OperatorValue f_tilde(const GeneratorModel& gen_alpha, Complex lambda, double nu,
                      double tol);

}  // namespace semistab
