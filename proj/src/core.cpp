#include "boltz/core.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace boltz {

double dot(const Vec& a, const Vec& b, int dim) {
  double s = a[0] * b[0] + a[1] * b[1];
  if (dim == 3) s += a[2] * b[2];
  return s;
}

double norm2(const Vec& a, int dim) { return dot(a, a, dim); }
double norm(const Vec& a, int dim) { return std::sqrt(norm2(a, dim)); }

Vec perp2(const Vec& u) { return {-u[1], u[0], 0.0}; }

void plane_basis(const Vec& u, int dim, Vec& e1, Vec& e2) {
  if (dim == 2) {
    e1 = perp2(u);
    e2 = {0, 0, 0};
    return;
  }
  // Pick the coordinate axis least aligned with u, then Gram-Schmidt.
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::fabs(u[i]) < std::fabs(u[k])) k = i;
  Vec a{0, 0, 0};
  a[k] = 1.0;
  double p = dot(a, u, 3);
  e1 = sub(a, scale(p, u));
  double n1 = norm(e1, 3);
  e1 = scale(1.0 / n1, e1);
  e2 = {u[1] * e1[2] - u[2] * e1[1], u[2] * e1[0] - u[0] * e1[2], u[0] * e1[1] - u[1] * e1[0]};
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  if (threads <= 1 || n == 1) {
    body(0, n);
    return;
  }
  std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::thread> pool;
  pool.reserve(t);
  std::size_t chunk = (n + t - 1) / t;
  for (std::size_t i = 0; i < t; ++i) {
    std::size_t b = i * chunk, e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&body, b, e] { body(b, e); });
  }
  for (auto& th : pool) th.join();
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a64_str(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for checksum: " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Mesh1D graded_mesh(double a, double b, int n, double q, bool cluster_at_a) {
  if (!(b > a) || n < 1) throw std::invalid_argument("graded_mesh: bad interval or count");
  Mesh1D m;
  m.x.resize(n);
  m.w.resize(n);
  double len = b - a;
  auto edge = [&](int i) {
    double t = static_cast<double>(i) / n;
    double u = std::pow(t, q);
    return cluster_at_a ? a + len * u : b - len * std::pow(1.0 - t, q);
  };
  double e0 = edge(0);
  for (int i = 0; i < n; ++i) {
    double e1 = edge(i + 1);
    m.x[i] = 0.5 * (e0 + e1);
    m.w[i] = e1 - e0;
    e0 = e1;
  }
  return m;
}

Mesh1D two_sided_graded_mesh(double a, double b, int n, double qa, double qb) {
  double mid = 0.5 * (a + b);
  int nl = n / 2, nr = n - nl;
  Mesh1D l = graded_mesh(a, mid, nl, qa, true);
  Mesh1D r = graded_mesh(mid, b, nr, qb, false);
  l.x.insert(l.x.end(), r.x.begin(), r.x.end());
  l.w.insert(l.w.end(), r.w.begin(), r.w.end());
  return l;
}

double pow_integral(double a, double b, double alpha) {
  if (a < 0 || b < a) throw std::invalid_argument("pow_integral: need 0 <= a <= b");
  if (std::fabs(alpha + 1.0) < 1e-12) return std::log(b / a);
  double p = alpha + 1.0;
  return (std::pow(b, p) - std::pow(a, p)) / p;
}

std::vector<std::pair<double, double>> gauss_legendre(int n) {
  std::vector<std::pair<double, double>> nw(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev-based initial guess, Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    nw[i] = {x, 2.0 / ((1.0 - x * x) * pp * pp)};
  }
  return nw;
}

double cell_integral_abs_pow(int dim, double h, double s) {
  if (s <= -dim) throw std::invalid_argument("cell_integral_abs_pow: s must exceed -dim");
  // Reduce to the boundary of the unit-half-width cube: radial part exact,
  // the remaining face integrand (1 + |u|^2)^{s/2} is smooth.
  static const auto gl = gauss_legendre(32);
  double half = 0.5 * h;
  if (dim == 2) {
    double acc = 0;
    for (const auto& [t, w] : gl) acc += w * std::pow(1.0 + t * t, 0.5 * s);
    return std::pow(half, s + 2) / (s + 2) * 4.0 * acc;
  }
  double acc = 0;
  for (const auto& [tu, wu] : gl)
    for (const auto& [tv, wv] : gl) acc += wu * wv * std::pow(1.0 + tu * tu + tv * tv, 0.5 * s);
  return std::pow(half, s + 3) / (s + 3) * 6.0 * acc;
}

namespace {

// Gauss panels on dyadic subdivisions of [0, B]. Every panel sees bounded
// relative variation of any power-law-ish integrand no matter where its scale
// knee sits, so this stays accurate for arbitrarily lopsided corner boxes.
template <class Fn>
double dyadic_gauss(Fn&& F, double B) {
  if (!(B > 0)) return 0.0;
  static const auto gl = gauss_legendre(12);
  double acc = 0, hi = B;
  for (int k = 0; k < 44; ++k) {
    double lo = 0.5 * hi;
    double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
    double seg = 0;
    for (const auto& [t, w] : gl) seg += w * F(c + r * t);
    acc += seg * r;
    hi = lo;
  }
  return acc + hi * F(0.5 * hi);  // leftover [0, B*2^-44]; integrand bounded here
}

// int over the corner box [0,a0] x [0,a1] (x [0,a2]) of |z|^s dz, extents >= 0.
// Fans the box from the origin: the radial integral is exact, the remaining
// face/edge factor is smooth per dyadic panel.
double corner_pow_box(int dim, const double* a, double s) {
  for (int i = 0; i < dim; ++i)
    if (!(a[i] > 0)) return 0.0;
  if (dim == 2) {
    double acc = 0;
    for (int e = 0; e < 2; ++e) {
      double d = a[e], b = a[1 - e];  // far edge at distance d, length b
      acc += d / (s + 2) *
             dyadic_gauss([&](double y) { return std::pow(d * d + y * y, 0.5 * s); }, b);
    }
    return acc;
  }
  double p = 0.5 * (s + 2);
  // Exact int_0^R (rho^2+c^2)^{s/2} rho drho on a face at distance c, in a
  // cancellation-free form (R may be far below or above c).
  auto radial = [&](double R2, double c) {
    double q = R2 / (c * c);
    if (p == 0.0) return 0.5 * std::log1p(q);
    return std::pow(c * c, p) * std::expm1(p * std::log1p(q)) / (2.0 * p);
  };
  double acc = 0;
  for (int e = 0; e < 3; ++e) {
    double c = a[e], ax = a[(e + 1) % 3], ay = a[(e + 2) % 3];
    double wedges = 0;
    for (int swap = 0; swap < 2; ++swap) {
      double u = swap ? ay : ax, t_max = swap ? ax / ay : ay / ax;
      wedges += dyadic_gauss(
          [&](double t) { return radial(u * u * (1.0 + t * t), c) / (1.0 + t * t); }, t_max);
    }
    acc += c / (s + 3) * wedges;
  }
  return acc;
}

}  // namespace

double cell_integral_abs_pow_offset(int dim, const Vec& c, double h, double s) {
  if (s <= -dim) throw std::invalid_argument("cell_integral_abs_pow_offset: s must exceed -dim");
  double half = 0.5 * h;
  double dist2 = 0;
  for (int i = 0; i < dim; ++i) {
    double lo = c[i] - half, hi = c[i] + half;
    double d = lo > 0 ? lo : (hi < 0 ? -hi : 0.0);
    dist2 += d * d;
  }
  if (dist2 >= 4.0 * h * h) {
    // Singularity at least two widths away: the integrand is analytic on the
    // cell and the singularity distance sets the Gauss order needed.
    int order = dist2 >= 16.0 * h * h ? 4 : 10;
    const auto gl = gauss_legendre(order);
    double acc = 0;
    if (dim == 2) {
      for (const auto& [tx, wx] : gl)
        for (const auto& [ty, wy] : gl) {
          double x = c[0] + half * tx, y = c[1] + half * ty;
          acc += wx * wy * std::pow(x * x + y * y, 0.5 * s);
        }
      return acc * half * half;
    }
    for (const auto& [tx, wx] : gl)
      for (const auto& [ty, wy] : gl)
        for (const auto& [tz, wz] : gl) {
          double x = c[0] + half * tx, y = c[1] + half * ty, z = c[2] + half * tz;
          acc += wx * wy * wz * std::pow(x * x + y * y + z * z, 0.5 * s);
        }
    return acc * half * half * half;
  }
  // Singularity inside the cell or close to it: alternating sum of corner-box
  // primitives, extended oddly per axis (d-dimensional rectangle rule). The
  // primitives stay accurate for any corner position, and this close to the
  // origin the sign cancellation amplifies their error by a bounded factor.
  double acc = 0;
  for (int m = 0; m < (1 << dim); ++m) {
    double corner[3] = {1, 1, 1};
    double sgn = 1;
    for (int i = 0; i < dim; ++i) {
      double xi = c[i] + ((m >> i & 1) ? half : -half);
      if (!(m >> i & 1)) sgn = -sgn;
      if (xi < 0) sgn = -sgn;
      corner[i] = std::fabs(xi);
    }
    acc += sgn * corner_pow_box(dim, corner, s);
  }
  return acc;
}

std::vector<Vec> sphere_lattice(int dim, int m) {
  if (m < 2 || m % 2) throw std::invalid_argument("sphere_lattice: m must be even and >= 2");
  std::vector<Vec> out;
  out.reserve(m);
  if (dim == 2) {
    for (int i = 0; i < m; ++i) {
      double a = 2.0 * M_PI * (i + 0.5) / m;
      out.push_back(vec2(std::cos(a), std::sin(a)));
    }
    return out;
  }
  int half = m / 2;
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  for (int i = 0; i < half; ++i) {
    double z = (i + 0.5) / half;  // upper hemisphere
    double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = 2.0 * M_PI * std::fmod(i / golden, 1.0);
    out.push_back(vec3(rho * std::cos(phi), rho * std::sin(phi), z));
  }
  for (int i = 0; i < half; ++i) out.push_back(scale(-1.0, out[i]));
  return out;
}

double sphere_measure(int dim) { return dim == 2 ? 2.0 * M_PI : 4.0 * M_PI; }
double ball_volume(int dim) { return dim == 2 ? M_PI : 4.0 * M_PI / 3.0; }

}  // namespace boltz
