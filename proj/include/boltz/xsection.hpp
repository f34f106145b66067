#pragma once

#include <string>
#include <vector>

#include "boltz/core.hpp"

// Collision cross sections B(r, theta) = r^gamma * b(cos theta) with the
// non-cutoff angular singularity b(cos theta) ~ |theta|^{-(dim-1)-nu} at
// grazing angles and the tame side b ~ |sin theta|^{gamma+nu+1} for
// cos theta < 0. Angle convention: theta is the angle between sigma and the
// pre-collision relative velocity v - v_star, so theta = 0 means v' = v.
//
// The reference kernel b_ref(cos t) = cos(t/2)^{gamma+nu+1} sin(t/2)^{1-dim-nu}
// satisfies r^{gamma-dim+2} b_ref = |w|^{gamma+nu+1} |v'-v|^{1-dim-nu} exactly
// (|w| = r cos(t/2), |v'-v| = r sin(t/2)), which makes the collision kernel
// separable; everything else accepts a tabulated b as well.

namespace boltz {

struct AngularTable {
  std::vector<double> theta;  // strictly increasing in (0, pi]
  std::vector<double> b;      // positive samples
};

struct XsInvariantReport {
  bool even_ok = true;
  bool positive_ok = true;
  bool origin_envelope_ok = true;  // two-sided |theta|^{-(dim-1)-nu} near 0
  bool pi_side_ok = true;          // two-sided |sin theta|^{gamma+nu+1} near pi
  double C_origin = 0;             // measured envelope constant near 0
  double C_pi = 0;
  std::string detail;
  bool pass() const { return even_ok && positive_ok && origin_envelope_ok && pi_side_ok; }
};

struct CrossSection {
  enum class Kind { reference, tabulated };

  int dim = 2;
  double gamma = 0;  // kinetic exponent, gamma > -dim
  double nu = 1;     // angular singularity order, nu in (0, 2)
  Kind kind = Kind::reference;
  AngularTable table;      // tabulated kind only
  double envelope_C = 0;   // filled by validate()

  // Angular factor as a function of c = cos(theta), c in (-1, 1).
  double b(double c) const;
  // Same factor from half-angle values cos(theta/2), sin(theta/2) >= 0.
  // Callers that know the half-angles exactly (the collision kernel knows
  // |w|/r and |v'-v|/r algebraically) avoid the cancellation near c = +-1.
  double b_half(double cos_half, double sin_half) const;
  bool product_form() const { return kind == Kind::reference; }
};

CrossSection reference_b(double gamma, double nu, int dim);
CrossSection tabulated_b(double gamma, double nu, int dim, AngularTable table);
// Inverse-power-law potential 1/x^{s-1}: gamma = (s-2*dim+1)/(s-1), nu = 2/(s-1).
CrossSection from_inverse_power(double s, int dim);

// Structural checks (sampled, not assumed); fills xs.envelope_C on success.
XsInvariantReport validate(CrossSection& xs);

// B(r, theta); throws std::domain_error at theta = 0 (non-integrable ray) or r < 0.
double eval_B(const CrossSection& xs, double r, double theta);

// Convolution coefficient: Btilde(r) = coef * r^gamma, obtained by a two-sided
// graded quadrature of (2^{(dim+gamma)/2} (1 + sigma.e)^{-(dim+gamma)/2} - 1)
// b(sigma.e) over the unit sphere. The integrand is singular like
// |theta|^{-dim+3-nu} at sigma = e (integrable, nu < 2) and like
// |sin theta|^{-dim+1+nu} at sigma = -e (integrable, nu > 0), and the value
// does not depend on e.
struct BtildeModel {
  double coef = 0;
  double gamma = 0;
  int nodes = 0;
  double err_estimate = 0;  // Richardson two-mesh estimate, relative
};

BtildeModel btilde(const CrossSection& xs, const Vec& e, int n_base = 8192, double rel_tol = 1e-6);
BtildeModel btilde(const CrossSection& xs);  // default axis e, default resolution

double btilde_eval(const BtildeModel& m, double r);

}  // namespace boltz
