#pragma once
// Three independent evaluations of the collision operator:
//
//   q_direct  the raw (vstar, sigma) double integral, antipodal-paired so the
//             grazing singularity appears only through second differences
//   q1        jump part: symmetrized integral of g against the hyperplane
//             kernel K_f
//   q2        multiplier part: g(v) * (Btilde conv f)(v)
//
// plus the geometry chart shared by all three and the two integral identities
// (flat change of variables, dual polar) that make the representations
// provably equal.
//
// Angle convention, used consistently everywhere: cos(theta) = sigma.(v - vstar)/r.
// theta = 0 is the grazing ray, where vprime = v and vstarprime = vstar, and
// the chart relation cos(theta/2) = |w|/r with w = vstarprime - v holds. The
// angular kernel b is singular at theta = 0.

#include <limits>
#include <vector>

#include "boltz/grid.hpp"
#include "boltz/xsection.hpp"

namespace boltz {

struct CollisionGeometry {
  Vec v{}, vstar{}, sigma{};   // pre-collision pair + scattering direction
  Vec vprime{}, vsprime{};     // post-collision pair
  Vec w{};                     // chart vector: w = vsprime - v, perpendicular to vprime - v
  double r = 0;                // |vstar - v| = |vsprime - vprime|
  double cos_theta = 0;        // sigma.(v - vstar)/r
};

// (v, vstar, sigma) -> full geometry. Throws std::domain_error when vstar == v.
CollisionGeometry geometry_forward(const Vec& v, const Vec& vstar, const Vec& sigma, int dim);

// Inverse chart: given (v, vprime, w) with w perpendicular to vprime - v,
// recover (vstar, sigma) and the rest. Round-trips with geometry_forward.
CollisionGeometry geometry_from_chart(const Vec& v, const Vec& vprime, const Vec& w, int dim);

// Explicit resolution knobs for every evaluator. No hidden adaptive state:
// identical params + identical inputs give bit-identical results.
struct QuadParams {
  // hyperplane kernel quadrature
  double plane_spacing = 0.5;  // radial node spacing as a multiple of grid h
  int plane_nphi = 16;         // azimuth nodes on the 2-plane (dim 3 only)
  // q1 polar mesh in y
  int n_dir = 32;              // direction lattice size
  int n_rad = 48;              // radial cells per direction
  double y_min = 0.01;         // exclusion radius as a multiple of grid h
  double rad_grading = 2.0;    // radial mesh grading exponent toward y_min
  // q_direct
  int n_theta = 96;            // cells on [theta_min, pi]
  double theta_min = 0.25;     // cutoff as a multiple of h/L
  int nphi_direct = 8;         // azimuth pairs around khat (dim 3 only)
  // q2 / Btilde
  int btilde_n = 8192;
  double btilde_tol = 1e-5;
  // Evaluation window for the g slot. Densities clamp at 0 because the spline
  // can undershoot; the linearized equation evolves a signed g and turns the
  // clamp off. The upper cap is for callers holding a sharp pointwise bound
  // on g (the max-principle record caps at max g): capping tightens the
  // interpolant, so a sign conclusion is not at the mercy of spline overshoot.
  bool clamp_g = true;
  double g_clamp_hi = std::numeric_limits<double>::infinity();
  static QuadParams defaults(int dim);
};

struct KernelEvaluation {
  Vec v{}, vprime{};
  double value = 0;
  double err_estimate = 0;  // relative two-resolution difference
  int nodes = 0;
};

// K_f(v, vprime) = 2^{N-1} |vprime-v|^{-1} int_{w perp (vprime-v)} f(v+w) B(r,theta) r^{-N+2} dw.
// Throws std::domain_error when vprime == v.
KernelEvaluation kernel_Kf(const CrossSection& xs, const DistributionFunction& f,
                           const Vec& v, const Vec& vprime, const QuadParams& qp);

// Hyperplane moment int_{w perp sigma} f(v+w) |w|^{gamma+nu+1} dw. For the
// reference kernel K_f = 2^{N-1} * phi_weight * |vprime-v|^{-N-nu}, which is
// what makes the per-step cache in apply_collision exact.
double phi_weight(const CrossSection& xs, const DistributionFunction& f,
                  const Vec& v, const Vec& sigma, const QuadParams& qp);

struct DirectEval {
  double value = 0;
  // |modeled theta < theta_min slice| already folded into value; treat as the
  // uncertainty the grazing cutoff contributes.
  double grazing_truncation = 0;
};

DirectEval q_direct(const CrossSection& xs, const DistributionFunction& f,
                    const DistributionFunction& g, const Vec& v, const QuadParams& qp);

struct Q1Eval {
  double value = 0;
  double excluded_bound = 0;  // estimated |contribution of |y| < y_min|
  double diag_coef = 0;       // c >= 0 with q1 = (terms without g(v)) - c * g(v)
};

Q1Eval q1(const CrossSection& xs, const DistributionFunction& f,
          const DistributionFunction& g, const Vec& v, const QuadParams& qp);

double q2(const CrossSection& xs, const DistributionFunction& f,
          const DistributionFunction& g, const Vec& v, const QuadParams& qp);
// Same with a precomputed Btilde model (avoids re-deriving it in loops).
double q2_with_model(const BtildeModel& bm, const DistributionFunction& f,
                     const DistributionFunction& g, const Vec& v, bool clamp_g = true);

// Full-grid operator application. For a product-form cross section the
// hyperplane moments Phi(v, direction) are cached once, making the apply
// O(nodes * directions * radial); otherwise each kernel value is integrated
// on the fly.
struct CollisionField {
  std::vector<double> q1, q2;     // per grid node
  std::vector<double> q1_diag;    // per-node diagonal coefficient (see Q1Eval)
  std::vector<double> q2_coef;    // per-node multiplier: q2 = q2_coef * g
  double excluded_bound_max = 0;  // worst q1 exclusion estimate over nodes
  double btilde_coef = 0;
};

CollisionField apply_collision(const CrossSection& xs, const DistributionFunction& f,
                               const DistributionFunction& g, const QuadParams& qp,
                               int threads = 1);

struct IdentityReport {
  double lhs = 0, rhs = 0;
  double rel_gap = 0;
  long nodes = 0;
};

// int int F(vstar, sigma) B dsigma dvstar against its (vprime, w) flat chart,
// both by independent quadratures. level scales all node counts by 2^level.
IdentityReport verify_change_of_variables(const CrossSection& xs, int dim, int level);

// Dual polar identity: lhs = int_{S^{N-1}} int_{w.sigma=0} g dw dsigma,
// rhs = int g(z)|z|^{-1} dz; rel_gap compares lhs/rhs to the dimensional
// constant |S^{N-2}|. testfn 0 is a gaussian, 1 an anisotropic bump.
IdentityReport verify_dual_polar(int dim, int level, int testfn);

}  // namespace boltz
