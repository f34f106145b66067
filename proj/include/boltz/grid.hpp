#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "boltz/core.hpp"

// Velocity-space discretization: a uniform Cartesian grid on [-L, L]^dim with
// nodal values, multilinear interpolation (zero outside the box, which is the
// truncation contract for every operator in the library), trapezoid-type
// moment sums, and a CSV snapshot format that round-trips doubles exactly.

namespace boltz {

struct VelocityGrid {
  int dim = 2;   // 2 or 3
  int n = 0;     // nodes per axis
  double L = 0;  // half-width
  double h = 0;  // spacing 2L/(n-1); nodes at -L + i*h, symmetric about 0

  static VelocityGrid make(int dim, int n, double L);

  std::size_t size() const;
  std::size_t flat(int i, int j, int k = 0) const;
  Vec point(std::size_t idx) const;
  double axis(int i) const { return -L + i * h; }
};

struct DistributionFunction {
  VelocityGrid grid;
  std::vector<double> values;  // flat order: x-index slowest (lexicographic)

  double& at(int i, int j, int k = 0) { return values[grid.flat(i, j, k)]; }
  double at(int i, int j, int k = 0) const { return values[grid.flat(i, j, k)]; }
};

DistributionFunction zeros(const VelocityGrid& g);

// Multilinear interpolation; exactly zero outside [-L, L]^dim. The result
// never exceeds the max of the nodal values (convex combination).
double interpolate(const DistributionFunction& f, const Vec& v);

struct MacroscopicState {
  double t = 0;
  double mass = 0;
  double energy = 0;   // ∫ |v|^2 f
  double entropy = 0;  // ∫ f log f, with 0 log 0 = 0
};

MacroscopicState moments(const DistributionFunction& f, double t = 0);

// ∫ f |log f| (the entropy variant controlling sub-level mass).
double entropy_abs(const DistributionFunction& f);

// ∫ (1+|v|)^q f^p
double weighted_lp(const DistributionFunction& f, double p, double q);

// sup over probe points of ∫ |w|^s f(v+w) dw; the cell containing w = 0 uses
// the exact cell average of the weight, so s in (-dim, 0) stays finite.
double moment_sup(const DistributionFunction& f, double s, const std::vector<Vec>& probes);

// Initial data builders used by tests and the CLI.
DistributionFunction maxwellian(const VelocityGrid& g, double mass, double temperature, const Vec& center);
DistributionFunction bimodal(const VelocityGrid& g, double mass, double temperature, double separation);
DistributionFunction ball_indicator(const VelocityGrid& g, const Vec& center, double radius, double height = 1.0);
// Deterministic random mixture of 'components' isotropic Gaussians.
DistributionFunction gaussian_mixture(const VelocityGrid& g, std::uint64_t seed, int components);

// C^2 cubic-spline view of a grid function, for quadratures whose singular
// weights would amplify the kinks of multilinear interpolation (a second
// difference of a C^0 interpolant does not shrink with the stencil, and the
// collision kernels multiply exactly that by a blowing-up weight). Natural end
// conditions, exact at the nodes, zero outside the box. The spline can
// undershoot slightly; callers integrating nonnegative densities clamp at 0.
struct SmoothField {
  VelocityGrid grid;
  std::vector<double> coef;  // B-spline coefficients with one ghost layer per side

  static SmoothField build(const DistributionFunction& f);
  double operator()(const Vec& v) const;
};

// CSV snapshot: header "# N=<n> L=<L> dim=<d>", then one "v1,...,vd,value"
// row per node at 17 significant digits (exact double round-trip).
void write_csv(const DistributionFunction& f, const std::string& path);
DistributionFunction read_csv(const std::string& path);

}  // namespace boltz
