#pragma once

#include <string>
#include <vector>

#include "boltz/collision.hpp"
#include "boltz/grid.hpp"
#include "boltz/xsection.hpp"

// Measured counterparts of the a-priori bounds satisfied by the collision
// kernel and by solutions: annulus-averaged upper bounds on K_f, the lifted
// level set that seeds every lower bound, the coercivity cone at a maximum,
// the barrier envelope for max f(t), the positive lower bound emerging inside
// a ball, and windowed Holder seminorms. Constants the theory leaves abstract
// are reported as measurements, never assumed; each certifier returns the
// numbers plus a pass flag and leaves judgement to the caller.

namespace boltz {

// Shared report for the two kernel bounds around one probe point v:
// kernel_upper_bound fills the annulus part, cone_lower_bound the cone part.
struct KernelBoundsReport {
  Vec v{};
  // r^nu * int_{B_2r \ B_r} K_f(v, v+z) dz per requested inner radius.
  std::vector<double> annulus_r;
  std::vector<double> annulus_scaled;
  double Lambda = 0;   // max of annulus_scaled
  double ceiling = 0;  // (1-2^-nu)/nu * 2^{N-1} * |S^{N-2}| * int f(v+w)|w|^{gamma+nu} dw
  double ratio = 0;    // Lambda / ceiling; 1 in the continuum for the reference kernel
  // Directions sigma whose hyperplane moment of the lifted-set indicator
  // clears the pigeonhole threshold.
  std::vector<Vec> cone;
  double cone_measure = 0;        // |A| = passing fraction * |S^{N-1}|
  double kappa = 0;               // int over the sphere of the plane moments
  double threshold = 0;           // kappa / (2 |S^{N-1}|)
  double sup_plane = 0;           // largest plane moment seen
  double guaranteed_measure = 0;  // kappa / (2 sup_plane), the pigeonhole floor for |A|
  double lambda = 0;              // level * 2^{N-1} * min over A of the plane moment
  double band = 0;                // sup over A of |sigma . v|
  bool cone_ok = false;
  std::string detail;
};

// Quadrature of the annulus integrals of K_f plus the analytic ceiling that
// the hyperplane representation and the dual polar identity force. Linear in
// f (exactly: doubling f doubles Lambda and ceiling bit-for-bit).
KernelBoundsReport kernel_upper_bound(const CrossSection& xs, const DistributionFunction& f,
                                      const Vec& v, const std::vector<double>& annuli,
                                      const QuadParams& qp);

// Ball + level + guaranteed measure derived from moment bounds alone:
//   r = sqrt(2 E0 / M1) (1 + 1e-6),  level = M1 / (8 |B_r|),
//   mass_lb = (M1/8) exp(-8 Htilde0 / M1),
// where Htilde0 bounds the unsigned entropy int f |log f|. The report also
// measures |{f > level} ∩ B_r| on the grid (one cell of volume h^N per node)
// and whether it clears mass_lb. Failure is a report, not an error: it means
// the supplied bounds do not hold or the grid is too coarse.
struct LiftedSet {
  double r = 0;
  double level = 0;
  double mass_lb = 0;
  double measured = 0;
  bool moments_ok = false;  // grid moments of f consistent with the supplied bounds
  bool pass = false;        // measured >= mass_lb
  std::string detail;
};
LiftedSet lifted_set(const DistributionFunction& f, double M0, double M1, double E0,
                     double Htilde0);

// Cone of directions along which K_f is bounded below, built from the lifted
// set: for each sampled sigma the moment int_{w perp sigma} 1_S(v+w)
// |w|^{gamma+nu+1} dw is compared against half its spherical mean. S is the
// union of grid cells where f clears the level inside the ball, so lambda is
// a kernel floor certified by f >= level * 1_S alone.
KernelBoundsReport cone_lower_bound(const CrossSection& xs, const DistributionFunction& f,
                                    const LiftedSet& ls, const Vec& v, int n_samples);

// mu = min over reports of |A| (1 + |v|), C = max band width: the decay law
// the cone obeys for large |v| (the set concentrates on the equator
// perpendicular to v, a band of width ~ 1/|v|).
struct ConeDecayFit {
  double mu = 0;
  double C = 0;
  bool ok = false;  // every report had a nonempty cone
};
ConeDecayFit fit_cone_decay(const std::vector<KernelBoundsReport>& reports);

// sigma is in the cone iff sigma . axis >= cos_min; cos_min = -1 is the full
// sphere, 0 a half space.
struct Cone {
  Vec axis = {1, 0, 0};
  double cos_min = 0;
};
double cone_aperture(const Cone& c, int dim);

// At a global max f(v) = m the cone integral of (m - f) against the
// |v'-v|^{-N-nu} weight admits the explicit floor
//   rhs = c m^{1+p nu/N} mu^{1+nu/N} / (int_cone f^p)^{nu/N},
//   c = (1/(2 nu)) (N 2^p)^{-nu/N}.
// lhs is quadrature outside |v'-v| < h with a curvature model of the omitted
// shell reported; the cone Lp mass is a nodal sum, the center cell entering
// with full weight h^N. The ratio is invariant under f -> alpha f.
struct CoercivityReport {
  double lhs = 0;
  double rhs = 0;
  double ratio = 0;     // lhs / rhs
  double excluded = 0;  // curvature estimate of the omitted |v'-v| < h piece
  double mu = 0;
  double lp_mass = 0;
  bool pass = false;  // lhs >= rhs
};
CoercivityReport cone_coercivity(const DistributionFunction& f, const Vec& v,
                                 const Cone& cone, double p, double nu, int n_dir = 64,
                                 int n_rad = 96);

// One step record at the argmax (ties broken by smallest flat index): the two
// operator parts there, their normalized strengths, and the coercivity ratio
// with the full-sphere cone at p = 1. q1 is evaluated with the g slot capped
// at m, so q1_nonpositive is exact up to summation roundoff rather than
// limited by spline overshoot.
struct MaxRecord {
  double t = 0;
  std::size_t argmax_index = 0;
  Vec argmax{};
  double m = 0;
  double q1 = 0;
  double q2 = 0;
  double c_tilde = 0;  // -q1 / (m^{1+nu/N} (1+|v|)^{nu(1+1/N)+gamma})
  double C_tilde = 0;  // q2 / (m (1+|v|)^gamma) if gamma >= 0, else q2 / m^{1-gamma/N}
  double coercivity_ratio = 0;
  bool q1_nonpositive = false;
};
MaxRecord max_principle_report(const CrossSection& xs, const DistributionFunction& f,
                               const QuadParams& qp, double t = 0);

// Fit m(t) <= a + b t^{-beta}, beta = N/(p nu), by least squares on the tail
// t >= t_end/4, then inflate (a, b) by a common factor until the barrier
// dominates every recorded t > 0. decay_fit_ok reports whether the raw fit
// already had a, b >= 0 (it cannot for a growing maximum); residual is the
// rms misfit before inflation.
struct EnvelopeFit {
  double a = 0;
  double b = 0;
  double beta = 0;
  double residual = 0;
  bool decay_fit_ok = false;
  bool holds = false;
};
EnvelopeFit linfty_envelope(const std::vector<double>& t, const std::vector<double>& m,
                            double p, int dim, double nu);

// min over grid nodes with |v| <= R; +inf when the ball holds no node.
double min_over_ball(const DistributionFunction& f, double R);

// Time series of the minimum over B_R along a trajectory of snapshots.
struct LowerBoundSeries {
  double R = 0;
  std::vector<double> t;
  std::vector<double> min_in_ball;
  double final_min = 0;
};
LowerBoundSeries lower_bound_probe(const std::vector<double>& times,
                                   const std::vector<DistributionFunction>& snaps,
                                   double R);

// Windowed Holder seminorms over grid pairs inside B_R separated by at least
// 2h (below that the quotient only reports interpolation, not the function):
//   space: sup_t sup_pairs |f(t,v)-f(t,w)| / |v-w|^alpha
//   time:  sup_v sup_{t != s} |f(t,v)-f(s,v)| / |t-s|^{alpha/nu}
// The alpha/nu time scaling mirrors the order-nu parabolic scaling of the
// equation; it is a labeled convention here, reported separately from space.
struct HolderReport {
  double t0 = 0, t1 = 0, R = 0;
  std::vector<double> alphas;
  std::vector<double> space;
  std::vector<double> time_diff;
};
HolderReport holder_seminorm(const std::vector<double>& times,
                             const std::vector<DistributionFunction>& snaps, double t0,
                             double t1, double R, double nu,
                             const std::vector<double>& alphas);

// Largest ladder alpha whose space seminorm changes by less than `factor`
// between two resolutions of the same run; 0 when none is stable.
double select_alpha(const HolderReport& coarse, const HolderReport& fine,
                    double factor = 2.0);

}  // namespace boltz
