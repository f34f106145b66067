#include "boltz/grid.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace boltz {

VelocityGrid VelocityGrid::make(int dim, int n, double L) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("grid: dim must be 2 or 3");
  if (n < 2 || L <= 0) throw std::invalid_argument("grid: need n >= 2 and L > 0");
  VelocityGrid g;
  g.dim = dim;
  g.n = n;
  g.L = L;
  g.h = 2.0 * L / (n - 1);
  return g;
}

std::size_t VelocityGrid::size() const {
  std::size_t s = static_cast<std::size_t>(n) * n;
  return dim == 3 ? s * n : s;
}

std::size_t VelocityGrid::flat(int i, int j, int k) const {
  std::size_t s = static_cast<std::size_t>(i) * n + j;
  return dim == 3 ? s * n + k : s;
}

Vec VelocityGrid::point(std::size_t idx) const {
  int k = 0;
  if (dim == 3) {
    k = static_cast<int>(idx % n);
    idx /= n;
  }
  int j = static_cast<int>(idx % n);
  int i = static_cast<int>(idx / n);
  return {axis(i), axis(j), dim == 3 ? axis(k) : 0.0};
}

DistributionFunction zeros(const VelocityGrid& g) {
  return DistributionFunction{g, std::vector<double>(g.size(), 0.0)};
}

double interpolate(const DistributionFunction& f, const Vec& v) {
  const VelocityGrid& g = f.grid;
  double xi[3];
  int i0[3];
  double t[3];
  for (int d = 0; d < g.dim; ++d) {
    if (v[d] < -g.L || v[d] > g.L) return 0.0;
    xi[d] = (v[d] + g.L) / g.h;
    int i = static_cast<int>(std::floor(xi[d]));
    if (i > g.n - 2) i = g.n - 2;
    if (i < 0) i = 0;
    i0[d] = i;
    t[d] = xi[d] - i;
  }
  const double* a = f.values.data();
  if (g.dim == 2) {
    std::size_t b = g.flat(i0[0], i0[1]);
    double f00 = a[b], f01 = a[b + 1];
    double f10 = a[b + g.n], f11 = a[b + g.n + 1];
    double u = t[0], w = t[1];
    return (1 - u) * ((1 - w) * f00 + w * f01) + u * ((1 - w) * f10 + w * f11);
  }
  std::size_t nn = static_cast<std::size_t>(g.n);
  std::size_t b = g.flat(i0[0], i0[1], i0[2]);
  double u = t[0], w = t[1], s = t[2];
  auto pl = [&](std::size_t off) { return (1 - s) * a[off] + s * a[off + 1]; };
  double c00 = pl(b), c01 = pl(b + nn);
  double c10 = pl(b + nn * nn), c11 = pl(b + nn * nn + nn);
  return (1 - u) * ((1 - w) * c00 + w * c01) + u * ((1 - w) * c10 + w * c11);
}

namespace {

// Natural cubic-spline coefficients along one line of n samples with the
// given stride: solves (c_{i-1} + 4 c_i + c_{i+1})/6 = y_i by the Thomas
// algorithm, with S'' = 0 at both ends fixing c_0 = y_0, c_{n-1} = y_{n-1}
// and the two ghost coefficients. Output layout: out[i+1] = c_i, ghosts at
// out[0] and out[n+1].
void spline_line(const double* y, int n, std::size_t stride, double* out,
                 std::vector<double>& scratch) {
  double c0 = y[0], cn = y[(std::size_t)(n - 1) * stride];
  out[1] = c0;
  out[n] = cn;
  int m = n - 2;
  if (m > 0) {
    scratch.resize(2 * (std::size_t)m);
    double* d = scratch.data();
    double* cp = scratch.data() + m;
    for (int i = 0; i < m; ++i) {
      double rhs = 6.0 * y[(std::size_t)(i + 1) * stride];
      if (i == 0) rhs -= c0;
      if (i == m - 1) rhs -= cn;
      if (i == 0) {
        cp[0] = 0.25;
        d[0] = rhs * 0.25;
      } else {
        double w = 1.0 / (4.0 - cp[i - 1]);
        cp[i] = w;
        d[i] = (rhs - d[i - 1]) * w;
      }
    }
    out[m + 1] = d[m - 1];
    for (int i = m - 2; i >= 0; --i) out[i + 2] = d[i] - cp[i] * out[i + 3];
  }
  out[0] = 2.0 * out[1] - out[2];
  out[n + 1] = 2.0 * out[n] - out[n - 1];
}

inline void bspline_weights(double t, double* w) {
  double u = 1.0 - t;
  w[0] = u * u * u / 6.0;
  w[1] = ((3.0 * t - 6.0) * t * t + 4.0) / 6.0;
  w[2] = (((-3.0 * t + 3.0) * t + 3.0) * t + 1.0) / 6.0;
  w[3] = t * t * t / 6.0;
}

}  // namespace

SmoothField SmoothField::build(const DistributionFunction& f) {
  const VelocityGrid& g = f.grid;
  const int n = g.n, m = n + 2;
  SmoothField s;
  s.grid = g;
  std::vector<double> scratch, line(m);
  if (g.dim == 2) {
    std::vector<double> t1((std::size_t)n * m);
    for (int i = 0; i < n; ++i)
      spline_line(&f.values[(std::size_t)i * n], n, 1, &t1[(std::size_t)i * m], scratch);
    s.coef.resize((std::size_t)m * m);
    for (int j = 0; j < m; ++j) {
      spline_line(&t1[j], n, m, line.data(), scratch);
      for (int i = 0; i < m; ++i) s.coef[(std::size_t)i * m + j] = line[i];
    }
    return s;
  }
  std::vector<double> t1((std::size_t)n * n * m);
  for (std::size_t ij = 0; ij < (std::size_t)n * n; ++ij)
    spline_line(&f.values[ij * n], n, 1, &t1[ij * m], scratch);
  std::vector<double> t2((std::size_t)n * m * m);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < m; ++k) {
      spline_line(&t1[(std::size_t)i * n * m + k], n, m, line.data(), scratch);
      for (int j = 0; j < m; ++j) t2[((std::size_t)i * m + j) * m + k] = line[j];
    }
  s.coef.resize((std::size_t)m * m * m);
  for (std::size_t jk = 0; jk < (std::size_t)m * m; ++jk) {
    spline_line(&t2[jk], n, (std::size_t)m * m, line.data(), scratch);
    for (int i = 0; i < m; ++i) s.coef[(std::size_t)i * m * m + jk] = line[i];
  }
  return s;
}

double SmoothField::operator()(const Vec& v) const {
  const VelocityGrid& g = grid;
  const int m = g.n + 2;
  int base[3] = {0, 0, 0};
  double w[3][4] = {};
  for (int d = 0; d < g.dim; ++d) {
    if (v[d] < -g.L || v[d] > g.L) return 0.0;
    double x = (v[d] + g.L) / g.h;
    int i = static_cast<int>(std::floor(x));
    if (i > g.n - 2) i = g.n - 2;
    if (i < 0) i = 0;
    base[d] = i;  // coefficient c_{i-1} lives at slot i
    bspline_weights(x - i, w[d]);
  }
  const double* c = coef.data();
  double acc = 0;
  if (g.dim == 2) {
    for (int a = 0; a < 4; ++a) {
      const double* row = c + (std::size_t)(base[0] + a) * m + base[1];
      acc += w[0][a] * (w[1][0] * row[0] + w[1][1] * row[1] + w[1][2] * row[2] +
                        w[1][3] * row[3]);
    }
    return acc;
  }
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const double* row =
          c + ((std::size_t)(base[0] + a) * m + base[1] + b) * m + base[2];
      acc += w[0][a] * w[1][b] *
             (w[2][0] * row[0] + w[2][1] * row[1] + w[2][2] * row[2] + w[2][3] * row[3]);
    }
  return acc;
}

MacroscopicState moments(const DistributionFunction& f, double t) {
  const VelocityGrid& g = f.grid;
  double cell = std::pow(g.h, g.dim);
  MacroscopicState s;
  s.t = t;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    double fv = f.values[i];
    Vec v = g.point(i);
    s.mass += fv;
    s.energy += fv * norm2(v, g.dim);
    if (fv > 0) s.entropy += fv * std::log(fv);
  }
  s.mass *= cell;
  s.energy *= cell;
  s.entropy *= cell;
  return s;
}

double entropy_abs(const DistributionFunction& f) {
  double acc = 0;
  for (double fv : f.values)
    if (fv > 0) acc += fv * std::fabs(std::log(fv));
  return acc * std::pow(f.grid.h, f.grid.dim);
}

double weighted_lp(const DistributionFunction& f, double p, double q) {
  const VelocityGrid& g = f.grid;
  double acc = 0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    double fv = f.values[i];
    if (fv <= 0) continue;
    acc += std::pow(1.0 + norm(g.point(i), g.dim), q) * std::pow(fv, p);
  }
  return acc * std::pow(g.h, g.dim);
}

double moment_sup(const DistributionFunction& f, double s, const std::vector<Vec>& probes) {
  const VelocityGrid& g = f.grid;
  double cell = std::pow(g.h, g.dim);
  double cavg = cell_integral_abs_pow(g.dim, g.h, s);  // exact over the singular cell
  double best = 0;
  for (const Vec& v : probes) {
    double acc = 0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      double fv = f.values[i];
      if (fv == 0) continue;
      double d = norm(sub(g.point(i), v), g.dim);
      acc += fv * (d < 0.5 * g.h ? cavg / cell : std::pow(d, s));
    }
    acc *= cell;
    if (acc > best) best = acc;
  }
  return best;
}

DistributionFunction maxwellian(const VelocityGrid& g, double mass, double temperature, const Vec& center) {
  DistributionFunction f = zeros(g);
  double norm_c = mass / std::pow(2.0 * M_PI * temperature, 0.5 * g.dim);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    double d2 = norm2(sub(g.point(i), center), g.dim);
    f.values[i] = norm_c * std::exp(-0.5 * d2 / temperature);
  }
  return f;
}

DistributionFunction bimodal(const VelocityGrid& g, double mass, double temperature, double separation) {
  Vec c1 = vec2(separation / 2, 0), c2 = vec2(-separation / 2, 0);
  DistributionFunction a = maxwellian(g, mass / 2, temperature, c1);
  DistributionFunction b = maxwellian(g, mass / 2, temperature, c2);
  for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] += b.values[i];
  return a;
}

DistributionFunction ball_indicator(const VelocityGrid& g, const Vec& center, double radius, double height) {
  DistributionFunction f = zeros(g);
  double r2 = radius * radius;
  for (std::size_t i = 0; i < f.values.size(); ++i)
    if (norm2(sub(g.point(i), center), g.dim) <= r2) f.values[i] = height;
  return f;
}

DistributionFunction gaussian_mixture(const VelocityGrid& g, std::uint64_t seed, int components) {
  std::mt19937_64 rng(seed);
  // Keep centers and widths tight enough that the trace on the box edge is
  // below ~1e-8 of the peak: a nonzero edge value makes the truncated-box
  // direct collision integral grazing-divergent (the integrand picks up an
  // O(f_edge) jump on a strip of angular width theta, against b ~ theta^{-2}),
  // while the hyperplane-kernel form stays finite, so the two representations
  // would drift apart as the angular cutoff tightens.
  std::uniform_real_distribution<double> uc(-g.L / 6.0, g.L / 6.0);
  std::uniform_real_distribution<double> us(g.L / 10.0, g.L / 7.5);
  std::uniform_real_distribution<double> uw(0.3, 1.0);
  DistributionFunction f = zeros(g);
  for (int c = 0; c < components; ++c) {
    Vec ctr{uc(rng), uc(rng), g.dim == 3 ? uc(rng) : 0.0};
    double sig = us(rng), w = uw(rng);
    double nc = w / std::pow(2.0 * M_PI * sig * sig, 0.5 * g.dim);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      double d2 = norm2(sub(g.point(i), ctr), g.dim);
      f.values[i] += nc * std::exp(-0.5 * d2 / (sig * sig));
    }
  }
  return f;
}

void write_csv(const DistributionFunction& f, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw std::runtime_error("cannot write " + path);
  const VelocityGrid& g = f.grid;
  std::fprintf(out, "# N=%d L=%.17g dim=%d\n", g.n, g.L, g.dim);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    Vec v = g.point(i);
    if (g.dim == 2)
      std::fprintf(out, "%.17g,%.17g,%.17g\n", v[0], v[1], f.values[i]);
    else
      std::fprintf(out, "%.17g,%.17g,%.17g,%.17g\n", v[0], v[1], v[2], f.values[i]);
  }
  std::fclose(out);
}

DistributionFunction read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string header;
  std::getline(in, header);
  int n = 0, dim = 0;
  double L = 0;
  if (std::sscanf(header.c_str(), "# N=%d L=%lf dim=%d", &n, &L, &dim) != 3)
    throw std::runtime_error("bad snapshot header in " + path);
  DistributionFunction f = zeros(VelocityGrid::make(dim, n, L));
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    double c[4] = {0, 0, 0, 0};
    int got = std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &c[0], &c[1], &c[2], &c[3]);
    if (got != dim + 1) throw std::runtime_error("bad snapshot row in " + path + ": " + line);
    int idx[3] = {0, 0, 0};
    for (int d = 0; d < dim; ++d) {
      double x = (c[d] + f.grid.L) / f.grid.h;
      idx[d] = static_cast<int>(std::lround(x));
      if (idx[d] < 0 || idx[d] >= n || std::fabs(x - idx[d]) > 1e-9)
        throw std::runtime_error("off-grid coordinate in " + path + ": " + line);
    }
    f.values[f.grid.flat(idx[0], idx[1], idx[2])] = c[dim];
    ++rows;
  }
  if (rows != f.grid.size()) throw std::runtime_error("snapshot row count mismatch in " + path);
  return f;
}

}  // namespace boltz
