#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

// Small numeric utilities shared by every module: fixed-size vectors with a
// runtime dimension (2 or 3), deterministic chunked parallelism, graded 1-D
// quadrature meshes, power-weight integrals, direction lattices on the unit
// sphere, and a checksum for run manifests.
//
// Determinism policy: all reductions run in a fixed left-to-right order and
// parallel loops split work into contiguous index ranges that write disjoint
// outputs, so results are bit-identical for any thread count.

namespace boltz {

using Vec = std::array<double, 3>;

inline Vec vec2(double x, double y) { return {x, y, 0.0}; }
inline Vec vec3(double x, double y, double z) { return {x, y, z}; }

inline Vec add(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec sub(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec scale(double c, const Vec& a) { return {c * a[0], c * a[1], c * a[2]}; }
inline Vec axpy(const Vec& a, double c, const Vec& d) {
  return {a[0] + c * d[0], a[1] + c * d[1], a[2] + c * d[2]};
}

double dot(const Vec& a, const Vec& b, int dim);
double norm2(const Vec& a, int dim);
double norm(const Vec& a, int dim);

// Unit vector perpendicular to u (dim 2 only).
Vec perp2(const Vec& u);

// Orthonormal basis (e1, e2) of the hyperplane perpendicular to the unit
// vector u. For dim 2 only e1 is filled. Deterministic in u.
void plane_basis(const Vec& u, int dim, Vec& e1, Vec& e2);

// Runs body(begin, end) over a partition of [0, n). threads <= 1 runs inline.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& body);

std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64_str(const std::string& s);
std::uint64_t fnv1a64_file(const std::string& path);
std::string hex64(std::uint64_t v);

// Composite-midpoint mesh on [a, b]: cell edges follow a power map with
// exponent q clustering nodes at a (or at b), x holds cell midpoints and w
// cell widths. Handles integrable endpoint singularities when q is chosen
// against the singularity strength.
struct Mesh1D {
  std::vector<double> x, w;
};
Mesh1D graded_mesh(double a, double b, int n, double q, bool cluster_at_a);
// Mesh on [a, b] clustered at both ends (split at the midpoint).
Mesh1D two_sided_graded_mesh(double a, double b, int n, double qa, double qb);

// Exact ∫_a^b s^alpha ds for 0 <= a < b, any alpha (alpha == -1 included).
double pow_integral(double a, double b, double alpha);

// Exact-in-radius integral of |z|^s over the cube cell [-h/2, h/2]^dim.
// Finite for s > -dim; angular factor by Gauss quadrature (smooth).
double cell_integral_abs_pow(int dim, double h, double s);

// Same integral over the cube cell of side h centered at c, valid whether or
// not the singularity z = 0 lies inside the cell: a singular cell is split at
// the origin into corner boxes, each reduced to exact radial integrals times
// a smooth Gauss face factor.
double cell_integral_abs_pow_offset(int dim, const Vec& c, double h, double s);

// Gauss-Legendre nodes/weights on [-1, 1], computed by Newton iteration.
std::vector<std::pair<double, double>> gauss_legendre(int n);

// Symmetric direction lattice on the unit sphere: m even, the set is closed
// under sigma -> -sigma, each direction carrying equal weight
// sphere_measure(dim)/m. dim 2: uniform half-step-offset angles; dim 3:
// Fibonacci points on the upper half plus their mirrors.
std::vector<Vec> sphere_lattice(int dim, int m);

double sphere_measure(int dim);  // |S^{dim-1}|: 2*pi or 4*pi
double ball_volume(int dim);     // |B_1|: pi or 4*pi/3

}  // namespace boltz
