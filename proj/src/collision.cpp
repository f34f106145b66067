#include "boltz/collision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace boltz {

namespace {

constexpr double kTinyR = 1e-13;

// Distance to the box boundary along the ray v + t*u, t >= 0.
double ray_box_exit(const Vec& v, const Vec& u, double L, int dim) {
  double t = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim; ++i) {
    if (u[i] > 1e-15)
      t = std::min(t, (L - v[i]) / u[i]);
    else if (u[i] < -1e-15)
      t = std::min(t, (-L - v[i]) / u[i]);
  }
  return std::max(t, 0.0);
}

// One plane sample: signed 1-D abscissa never matters, only |w| does.
struct PlaneSample {
  double s;   // |w|
  double fw;  // f(v + w) * exact power-weight of the cell
};

// Samples of f on the hyperplane through v perpendicular to u, with the cell
// weights of |w|^power integrated exactly. The radial spacing is uniform
// (<= delta), so the only error is the midpoint rule on the smooth factor.
// dim 3 adds the polar Jacobian: radial exponent power + 1, times dphi.
void plane_samples(const SmoothField& f, const Vec& v, const Vec& u,
                   double power, double delta, int nphi,
                   std::vector<PlaneSample>& out) {
  out.clear();
  const int dim = f.grid.dim;
  Vec e1, e2;
  plane_basis(u, dim, e1, e2);
  auto sweep = [&](const Vec& dir, double angle_w) {
    double t = ray_box_exit(v, dir, f.grid.L, dim);
    if (t <= 0) return;
    int m = std::max(1, (int)std::ceil(t / delta));
    double step = t / m;
    double p = dim == 2 ? power : power + 1.0;
    for (int k = 0; k < m; ++k) {
      double lo = k * step, hi = lo + step;
      double mid = 0.5 * (lo + hi);
      double fv = std::max(0.0, f(axpy(v, mid, dir)));
      if (fv != 0.0) out.push_back({mid, angle_w * fv * pow_integral(lo, hi, p)});
    }
  };
  if (dim == 2) {
    sweep(e1, 1.0);
    sweep(scale(-1.0, e1), 1.0);
    return;
  }
  double dphi = 2.0 * M_PI / nphi;
  for (int j = 0; j < nphi; ++j) {
    double phi = dphi * (j + 0.5);
    Vec dir = axpy(scale(std::cos(phi), e1), std::sin(phi), e2);
    sweep(dir, dphi);
  }
}

// r^{gamma-dim+2} b(cos theta) = |w|^{gamma+nu+1} * smooth(|w|, d); this is the
// smooth factor. For the reference kernel it is exactly d^{1-dim-nu}.
double kernel_smooth_factor(const CrossSection& xs, double s, double d) {
  double r = std::hypot(s, d);
  double ch = s / r, sh = d / r;
  return std::pow(r, xs.gamma - xs.dim + 2) * xs.b_half(ch, sh) *
         std::pow(s, -(xs.gamma + xs.nu + 1.0));
}

double plane_moment(const std::vector<PlaneSample>& ps) {
  double acc = 0;
  for (const auto& p : ps) acc += p.fw;
  return acc;
}

// K(v, v + d*u) from stored plane samples; the samples do not depend on d.
double kernel_from_samples(const CrossSection& xs, const std::vector<PlaneSample>& ps,
                           double d) {
  double pre = std::pow(2.0, xs.dim - 1) / d;
  if (xs.product_form()) {
    return pre * std::pow(d, 1.0 - xs.dim - xs.nu) * plane_moment(ps);
  }
  double acc = 0;
  for (const auto& p : ps) acc += p.fw * kernel_smooth_factor(xs, p.s, d);
  return pre * acc;
}

double local_curvature(const SmoothField& g, const Vec& v) {
  const int dim = g.grid.dim;
  const double h = g.grid.h;
  double g0 = g(v), c2 = 0;
  for (int i = 0; i < dim; ++i) {
    Vec e{};
    e[i] = 1.0;
    double d2 = g(axpy(v, h, e)) + g(axpy(v, -h, e)) - 2.0 * g0;
    c2 = std::max(c2, std::fabs(d2) / (h * h));
  }
  return c2;
}

// Graded theta mesh for the direct integral, clustered at both the grazing
// cutoff (where the pair-cancelled integrand still varies like theta^{1-nu})
// and at pi (where b may vanish or blow up like sin^{gamma+nu+1}).
Mesh1D direct_theta_mesh(const CrossSection& xs, double theta_min, int n) {
  double ql = std::clamp(3.0 / (2.0 - xs.nu), 2.0, 12.0);
  double qr = std::clamp(3.0 / (xs.gamma + xs.nu + xs.dim), 1.0, 8.0);
  return two_sided_graded_mesh(theta_min, M_PI, n, ql, qr);
}

// int theta^2 b(cos theta) dmu over [lo, hi], the measure being dtheta (dim 2)
// or sin(theta) dtheta (dim 3). Drives the grazing truncation estimate.
double theta2_b_mass(const CrossSection& xs, double lo, double hi, int n) {
  Mesh1D m = lo == 0.0
                 ? graded_mesh(0.0, hi, n, std::clamp(3.0 / (2.0 - xs.nu), 2.0, 12.0), true)
                 : graded_mesh(lo, hi, n, 1.0, true);
  double acc = 0;
  for (std::size_t i = 0; i < m.x.size(); ++i) {
    double th = m.x[i];
    double bh = xs.b_half(std::cos(0.5 * th), std::sin(0.5 * th));
    double mu = xs.dim == 3 ? std::sin(th) : 1.0;
    acc += th * th * bh * mu * m.w[i];
  }
  return acc;
}

struct Q1Work {
  std::vector<PlaneSample> plane;
};

Q1Eval q1_core(const CrossSection& xs, const SmoothField& f, const SmoothField& g,
               const Vec& v, const QuadParams& qp, Q1Work& work) {
  const int dim = f.grid.dim;
  const double h = f.grid.h;
  const double ymin = qp.y_min * h;
  const double nu = xs.nu;
  const auto dirs = sphere_lattice(dim, qp.n_dir);
  const double mu = sphere_measure(dim) / qp.n_dir;
  auto geval = [&](const Vec& x) {
    double t = g(x);
    if (qp.clamp_g) t = std::max(0.0, t);
    return std::min(t, qp.g_clamp_hi);
  };
  const double gv = geval(v);
  const bool product = xs.product_form();

  double pos = 0, diag = 0, excl_coef = 0;
  for (const auto& u : dirs) {
    plane_samples(f, v, u, xs.gamma + nu + 1.0, qp.plane_spacing * h, qp.plane_nphi,
                  work.plane);
    if (work.plane.empty()) continue;
    double kappa0 = 0;  // kappa(rho) = K(rho) * rho^{dim+nu}, constant in the product case
    if (product) kappa0 = std::pow(2.0, dim - 1) * plane_moment(work.plane);
    double tbox = std::max(ray_box_exit(v, u, f.grid.L, dim),
                           ray_box_exit(v, scale(-1.0, u), f.grid.L, dim));
    auto kappa_at = [&](double rho) {
      return product ? kappa0
                     : kernel_from_samples(xs, work.plane, rho) * std::pow(rho, dim + nu);
    };
    if (tbox > ymin) {
      Mesh1D mesh = graded_mesh(ymin, tbox, qp.n_rad, qp.rad_grading, true);
      for (std::size_t c = 0; c < mesh.x.size(); ++c) {
        double clo = mesh.x[c] - 0.5 * mesh.w[c], chi = mesh.x[c] + 0.5 * mesh.w[c];
        double W = pow_integral(clo, chi, -1.0 - nu);
        // Evaluate the shifted g at the radius that makes cellwise integration
        // exact for a rho^2 bracket against the rho^{-1-nu} weight; the g(v)
        // part below uses W itself and is exact for any evaluation point.
        double rho = std::sqrt(pow_integral(clo, chi, 1.0 - nu) / W);
        double k = kappa_at(rho);
        double gp = geval(axpy(v, rho, u)) + geval(axpy(v, -rho, u));
        pos += 0.5 * mu * k * W * gp;
        diag += mu * k * W;
      }
    }
    // Beyond the box both shifted g values vanish, so the remainder of the
    // radial integral is -g(v) times an exact power tail. kappa is constant
    // there: exactly for the product form, asymptotically for tabulated b
    // (the pi-side envelope of b makes K ~ rho^{-dim-nu} far out).
    double tlo = std::max(tbox, ymin);
    diag += mu * kappa_at(tlo) * pow_integral(tlo, std::numeric_limits<double>::infinity(),
                                              -1.0 - nu);
    excl_coef += mu * kappa_at(ymin);
  }
  Q1Eval out;
  out.diag_coef = diag;
  out.value = pos - diag * gv;
  out.excluded_bound =
      0.5 * local_curvature(g, v) * excl_coef * pow_integral(0.0, ymin, 1.0 - nu);
  return out;
}

}  // namespace

CollisionGeometry geometry_forward(const Vec& v, const Vec& vstar, const Vec& sigma,
                                   int dim) {
  CollisionGeometry geo;
  geo.v = v;
  geo.vstar = vstar;
  geo.sigma = sigma;
  geo.r = norm(sub(vstar, v), dim);
  if (geo.r < kTinyR) throw std::domain_error("collision geometry: vstar == v");
  Vec mid = scale(0.5, add(v, vstar));
  geo.vprime = axpy(mid, 0.5 * geo.r, sigma);
  geo.vsprime = axpy(mid, -0.5 * geo.r, sigma);
  geo.w = sub(geo.vsprime, v);
  geo.cos_theta = dot(sigma, sub(v, vstar), dim) / geo.r;
  return geo;
}

CollisionGeometry geometry_from_chart(const Vec& v, const Vec& vprime, const Vec& w,
                                      int dim) {
  Vec y = sub(vprime, v);
  double d = norm(y, dim);
  if (d < kTinyR) throw std::domain_error("collision geometry: vprime == v");
  CollisionGeometry geo;
  geo.v = v;
  geo.vprime = vprime;
  geo.w = w;
  geo.vstar = add(vprime, w);
  geo.vsprime = add(v, w);
  geo.r = std::hypot(d, norm(w, dim));
  geo.sigma = scale(1.0 / geo.r, sub(y, w));
  geo.cos_theta = (norm2(w, dim) - d * d) / (geo.r * geo.r);
  return geo;
}

QuadParams QuadParams::defaults(int dim) {
  QuadParams qp;
  if (dim == 3) {
    qp.n_dir = 64;
    qp.n_theta = 64;
    qp.nphi_direct = 6;
  }
  return qp;
}

KernelEvaluation kernel_Kf(const CrossSection& xs, const DistributionFunction& f,
                           const Vec& v, const Vec& vprime, const QuadParams& qp) {
  const int dim = f.grid.dim;
  Vec y = sub(vprime, v);
  double d = norm(y, dim);
  if (d < kTinyR) throw std::domain_error("kernel: vprime == v");
  Vec u = scale(1.0 / d, y);
  KernelEvaluation out;
  out.v = v;
  out.vprime = vprime;
  SmoothField sf = SmoothField::build(f);
  std::vector<PlaneSample> ps;
  plane_samples(sf, v, u, xs.gamma + xs.nu + 1.0, qp.plane_spacing * f.grid.h,
                qp.plane_nphi, ps);
  out.value = kernel_from_samples(xs, ps, d);
  out.nodes = (int)ps.size();
  std::vector<PlaneSample> coarse;
  plane_samples(sf, v, u, xs.gamma + xs.nu + 1.0, 2.0 * qp.plane_spacing * f.grid.h,
                std::max(2, qp.plane_nphi / 2), coarse);
  double cv = kernel_from_samples(xs, coarse, d);
  out.nodes += (int)coarse.size();
  out.err_estimate = std::fabs(out.value - cv) / std::max(std::fabs(out.value), 1e-300);
  return out;
}

double phi_weight(const CrossSection& xs, const DistributionFunction& f, const Vec& v,
                  const Vec& sigma, const QuadParams& qp) {
  std::vector<PlaneSample> ps;
  plane_samples(SmoothField::build(f), v, sigma, xs.gamma + xs.nu + 1.0,
                qp.plane_spacing * f.grid.h, qp.plane_nphi, ps);
  return plane_moment(ps);
}

DirectEval q_direct(const CrossSection& xs, const DistributionFunction& f,
                    const DistributionFunction& g, const Vec& v, const QuadParams& qp) {
  const int dim = f.grid.dim;
  const VelocityGrid& gr = f.grid;
  const double h = gr.h, L = gr.L;
  const double theta_min = qp.theta_min * h / L;
  const double sdim = std::sqrt((double)dim);
  // Gain terms live on vstar outside the box: both post-collision points are
  // in the box only if r <= sqrt(2)(sqrt(dim) L + |v|), which bounds the
  // lattice extension needed for the full integral.
  const double rmax = std::sqrt(2.0) * (sdim * L + norm(v, dim));
  const int ext = (int)std::ceil(rmax / h) + 1;
  const double cellw = std::pow(h, dim);
  const SmoothField sf = SmoothField::build(f);
  const SmoothField sg = SmoothField::build(g);
  auto geval = [&](const Vec& x) {
    double t = sg(x);
    if (qp.clamp_g) t = std::max(0.0, t);
    return std::min(t, qp.g_clamp_hi);
  };
  const double gv = geval(v);

  Mesh1D tmesh = direct_theta_mesh(xs, theta_min, qp.n_theta);
  struct ThetaCell {
    double c, s, bw;  // cos, sin, b * measure weight
  };
  std::vector<ThetaCell> cells(tmesh.x.size());
  for (std::size_t i = 0; i < tmesh.x.size(); ++i) {
    double th = tmesh.x[i];
    double bh = xs.b_half(std::cos(0.5 * th), std::sin(0.5 * th));
    double mu = dim == 3 ? std::sin(th) : 1.0;
    cells[i] = {std::cos(th), std::sin(th), bh * mu * tmesh.w[i]};
  }
  const int mphi = dim == 3 ? 2 * qp.nphi_direct : 2;
  const double dphi = dim == 3 ? 2.0 * M_PI / mphi : 1.0;
  // Band used to fit the theta^2 coefficient for the grazing model. A single
  // graded cell is far too thin to average out quadrature noise, which the
  // J0/Jband ratio would then amplify.
  const double band_hi = std::min(2.0 * theta_min, theta_min + 0.25 * (M_PI - theta_min));
  std::size_t nband = 0;
  while (nband < cells.size() && tmesh.x[nband] <= band_hi) ++nband;
  if (nband == 0) nband = 1;

  double total = 0, band_total = 0;
  int ij[3] = {0, 0, 0};
  int lo = -ext, hi = gr.n - 1 + ext;
  for (ij[0] = lo; ij[0] <= hi; ++ij[0])
    for (ij[1] = lo; ij[1] <= hi; ++ij[1])
      for (ij[2] = dim == 3 ? lo : 0; ij[2] <= (dim == 3 ? hi : 0); ++ij[2]) {
        Vec vstar = {gr.axis(ij[0]), gr.axis(ij[1]), dim == 3 ? gr.axis(ij[2]) : 0.0};
        Vec rel = sub(v, vstar);
        double r = norm(rel, dim);
        if (r < kTinyR || r > rmax) continue;
        Vec mid = scale(0.5, add(v, vstar));
        // Quick reject: every post-collision point sits at distance r/2 from
        // mid, so if that sphere misses the box the gain is zero; the loss is
        // zero too when vstar is outside.
        bool inside = ij[0] >= 0 && ij[0] < gr.n && ij[1] >= 0 && ij[1] < gr.n &&
                      (dim == 2 || (ij[2] >= 0 && ij[2] < gr.n));
        double loss = inside ? f.at(ij[0], ij[1], ij[2]) * gv : 0.0;
        if (loss == 0.0 && norm(mid, dim) - 0.5 * r > sdim * L) continue;
        Vec khat = scale(1.0 / r, rel);
        Vec e1, e2;
        plane_basis(khat, dim, e1, e2);
        double node_acc = 0, node_band = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
          const ThetaCell& tc = cells[c];
          double pairsum = 0;
          for (int t = 0; t < mphi; ++t) {
            Vec tau;
            if (dim == 2) {
              tau = t == 0 ? e1 : scale(-1.0, e1);
            } else {
              double phi = dphi * (t + 0.5);
              tau = axpy(scale(std::cos(phi), e1), std::sin(phi), e2);
            }
            Vec sigma = axpy(scale(tc.c, khat), tc.s, tau);
            Vec vpr = axpy(mid, 0.5 * r, sigma);
            Vec vspr = axpy(mid, -0.5 * r, sigma);
            pairsum += std::max(0.0, sf(vspr)) * geval(vpr) - loss;
          }
          double contrib = pairsum * tc.bw * dphi;
          node_acc += contrib;
          if (c < nband) node_band += contrib;
        }
        double wr = std::pow(r, xs.gamma) * cellw;
        total += wr * node_acc;
        band_total += wr * node_band;
      }

  DirectEval out;
  // The pair-cancelled integrand behaves like curvature * theta^2 below the
  // cutoff, so scaling the first resolved band by the ratio of theta^2 b dmu
  // masses models the discarded slice. Fold the signed model into the value
  // and report its magnitude as the uncertainty attributed to the cutoff.
  double band_edge = tmesh.x[nband - 1] + 0.5 * tmesh.w[nband - 1];
  double Jband = theta2_b_mass(xs, theta_min, band_edge, 32);
  double graze =
      Jband > 0 ? band_total * theta2_b_mass(xs, 0.0, theta_min, 48) / Jband : 0.0;
  out.value = total + graze;
  out.grazing_truncation = std::fabs(graze);
  return out;
}

Q1Eval q1(const CrossSection& xs, const DistributionFunction& f,
          const DistributionFunction& g, const Vec& v, const QuadParams& qp) {
  Q1Work work;
  return q1_core(xs, SmoothField::build(f), SmoothField::build(g), v, qp, work);
}

double q2_with_model(const BtildeModel& bm, const DistributionFunction& f,
                     const DistributionFunction& g, const Vec& v, bool clamp_g) {
  const VelocityGrid& gr = f.grid;
  const int dim = gr.dim;
  double conv = 0;
  for (std::size_t j = 0; j < f.values.size(); ++j) {
    if (f.values[j] == 0.0) continue;
    conv += f.values[j] * cell_integral_abs_pow_offset(dim, sub(gr.point(j), v), gr.h,
                                                       bm.gamma);
  }
  // The convolution factor is O(mass), so g needs the C^2 field here: the h^2
  // kink error of multilinear interpolation off the nodes would be amplified
  // far above the quadrature error of everything else.
  double gval = SmoothField::build(g)(v);
  if (clamp_g) gval = std::max(0.0, gval);
  return bm.coef * conv * gval;
}

double q2(const CrossSection& xs, const DistributionFunction& f,
          const DistributionFunction& g, const Vec& v, const QuadParams& qp) {
  Vec e = xs.dim == 2 ? vec2(1, 0) : vec3(0, 0, 1);
  BtildeModel bm = btilde(xs, e, qp.btilde_n, qp.btilde_tol);
  return q2_with_model(bm, f, g, v, qp.clamp_g);
}

CollisionField apply_collision(const CrossSection& xs, const DistributionFunction& f,
                               const DistributionFunction& g, const QuadParams& qp,
                               int threads) {
  const VelocityGrid& gr = f.grid;
  const int dim = gr.dim, n = gr.n;
  const std::size_t nn = gr.size();
  CollisionField out;
  out.q1.resize(nn);
  out.q2.resize(nn);
  out.q1_diag.resize(nn);
  out.q2_coef.resize(nn);

  Vec e = dim == 2 ? vec2(1, 0) : vec3(0, 0, 1);
  BtildeModel bm = btilde(xs, e, qp.btilde_n, qp.btilde_tol);
  out.btilde_coef = bm.coef;

  // Node-to-node convolution weights depend only on the index offset, so the
  // singular-cell integrals are shared by the whole grid.
  const int tn = 2 * n - 1;
  std::size_t tsize = 1;
  for (int i = 0; i < dim; ++i) tsize *= tn;
  std::vector<double> table(tsize);
  parallel_for(tsize, threads, [&](std::size_t b, std::size_t eidx) {
    for (std::size_t t = b; t < eidx; ++t) {
      std::size_t rem = t;
      Vec c{};
      for (int ax = dim - 1; ax >= 0; --ax) {
        c[ax] = ((int)(rem % tn) - (n - 1)) * gr.h;
        rem /= tn;
      }
      table[t] = cell_integral_abs_pow_offset(dim, c, gr.h, bm.gamma);
    }
  });

  parallel_for(nn, threads, [&](std::size_t b, std::size_t eidx) {
    for (std::size_t i = b; i < eidx; ++i) {
      int i0 = (int)(i / (dim == 3 ? (std::size_t)n * n : (std::size_t)n));
      int i1 = dim == 3 ? (int)(i / n % n) : (int)(i % n);
      int i2 = dim == 3 ? (int)(i % n) : 0;
      double conv = 0;
      std::size_t j = 0;
      for (int j0 = 0; j0 < n; ++j0)
        for (int j1 = 0; j1 < n; ++j1)
          for (int j2 = 0; j2 < (dim == 3 ? n : 1); ++j2, ++j) {
            double fv = f.values[j];
            if (fv == 0.0) continue;
            std::size_t t = (std::size_t)(j0 - i0 + n - 1);
            t = t * tn + (j1 - i1 + n - 1);
            if (dim == 3) t = t * tn + (j2 - i2 + n - 1);
            conv += fv * table[t];
          }
      out.q2_coef[i] = bm.coef * conv;
      out.q2[i] = out.q2_coef[i] * g.values[i];
    }
  });

  const SmoothField sf = SmoothField::build(f);
  const SmoothField sg = SmoothField::build(g);
  std::vector<double> excl(nn);
  parallel_for(nn, threads, [&](std::size_t b, std::size_t eidx) {
    Q1Work work;
    for (std::size_t i = b; i < eidx; ++i) {
      Q1Eval ev = q1_core(xs, sf, sg, gr.point(i), qp, work);
      out.q1[i] = ev.value;
      out.q1_diag[i] = ev.diag_coef;
      excl[i] = ev.excluded_bound;
    }
  });
  for (std::size_t i = 0; i < nn; ++i)
    out.excluded_bound_max = std::max(out.excluded_bound_max, excl[i]);
  return out;
}

IdentityReport verify_change_of_variables(const CrossSection& xs, int dim, int level) {
  const double sc = std::pow(2.0, level);
  const Vec v = dim == 2 ? vec2(0.2, 0.1) : vec3(0.2, 0.1, -0.1);
  const Vec a = dim == 2 ? vec2(0.3, -0.2) : vec3(0.3, -0.2, 0.1);
  Vec ehat = dim == 2 ? vec2(1, 2) : vec3(1, 2, -1);
  ehat = scale(1.0 / norm(ehat, dim), ehat);
  const double ccut = std::cos(0.5);
  auto eta = [&](double c) {
    double t = std::max(0.0, ccut - c);
    return t * t * t;
  };
  auto G = [&](const Vec& vs) { return std::exp(-norm2(sub(vs, a), dim)); };

  IdentityReport rep;

  // Left side in the raw (vstar, sigma) variables. The azimuthal part of
  // sigma around khat integrates in closed form against 1 + 0.5 sigma.ehat,
  // leaving a theta quadrature; eta removes the grazing singularity.
  {
    int mg = (int)(24 * sc), mt = (int)(64 * sc);
    const auto gl = gauss_legendre(mg);
    const double R = 6.0;
    std::vector<double> tc(mt), tw(mt), tb(mt);
    for (int i = 0; i < mt; ++i) {
      double th = M_PI * (i + 0.5) / mt;
      tc[i] = std::cos(th);
      tw[i] = M_PI / mt * (dim == 3 ? std::sin(th) : 1.0);
      tb[i] = eta(tc[i]) > 0 ? xs.b_half(std::cos(0.5 * th), std::sin(0.5 * th)) : 0.0;
    }
    auto inner = [&](const Vec& vstar) {
      double r = norm(sub(v, vstar), dim);
      if (r < 1e-9) return 0.0;
      double ke = dot(sub(v, vstar), ehat, dim) / r;
      double acc = 0;
      for (int i = 0; i < mt; ++i) {
        if (tb[i] == 0.0) continue;
        double ang = dim == 3 ? 2.0 * M_PI * (1.0 + 0.5 * tc[i] * ke)
                              : 2.0 + tc[i] * ke;  // both azimuth branches
        acc += eta(tc[i]) * tb[i] * ang * tw[i];
      }
      return G(vstar) * std::pow(r, xs.gamma) * acc;
    };
    if (dim == 2) {
      for (const auto& [tx, wx] : gl)
        for (const auto& [ty, wy] : gl) {
          rep.lhs += wx * wy * inner(vec2(R * tx, R * ty));
          rep.nodes += mt;
        }
      rep.lhs *= R * R;
    } else {
      for (const auto& [tx, wx] : gl)
        for (const auto& [ty, wy] : gl)
          for (const auto& [tz, wz] : gl) {
            rep.lhs += wx * wy * wz * inner(vec3(R * tx, R * ty, R * tz));
            rep.nodes += mt;
          }
      rep.lhs *= R * R * R;
    }
  }

  // Right side in the flat chart (vprime, w): vstar = vprime + w,
  // sigma = (vprime - v - w)/r, with the polar 1/|vprime - v| cancelling the
  // polar Jacobian.
  {
    const double D = 6.0, S = 6.0;
    auto F = [&](const Vec& vpr, const Vec& w, double d2, double w2) {
      double r2 = d2 + w2;
      double ct = (w2 - d2) / r2;
      double et = eta(ct);
      if (et == 0.0) return 0.0;
      double r = std::sqrt(r2);
      Vec sigma = scale(1.0 / r, sub(sub(vpr, v), w));
      double bh = xs.b_half(std::sqrt(w2 / r2), std::sqrt(d2 / r2));
      return G(add(vpr, w)) * et * (1.0 + 0.5 * dot(sigma, ehat, dim)) * bh *
             std::pow(r, xs.gamma - dim + 2);
    };
    if (dim == 2) {
      int ma = (int)(64 * sc), md = (int)(48 * sc), ms = (int)(96 * sc);
      double acc = 0;
      for (int ia = 0; ia < ma; ++ia) {
        double al = 2.0 * M_PI * (ia + 0.5) / ma;
        Vec uh = vec2(std::cos(al), std::sin(al));
        Vec ph = perp2(uh);
        for (int id = 0; id < md; ++id) {
          double d = D * (id + 0.5) / md;
          Vec vpr = axpy(v, d, uh);
          for (int is = 0; is < ms; ++is) {
            double s = -S + 2.0 * S * (is + 0.5) / ms;
            acc += F(vpr, scale(s, ph), d * d, s * s);
            ++rep.nodes;
          }
        }
      }
      rep.rhs = 2.0 * acc * (2.0 * M_PI / ma) * (D / md) * (2.0 * S / ms);
    } else {
      int mo = (int)(64 * sc), md = (int)(32 * sc), mr = (int)(32 * sc), mp = (int)(16 * sc);
      auto dirs = sphere_lattice(3, mo);
      double acc = 0;
      for (const auto& uh : dirs) {
        Vec e1, e2;
        plane_basis(uh, 3, e1, e2);
        for (int id = 0; id < md; ++id) {
          double d = D * (id + 0.5) / md;
          Vec vpr = axpy(v, d, uh);
          for (int ir = 0; ir < mr; ++ir) {
            double rho = S * (ir + 0.5) / mr;
            for (int ip = 0; ip < mp; ++ip) {
              double phi = 2.0 * M_PI * (ip + 0.5) / mp;
              Vec w = axpy(scale(rho * std::cos(phi), e1), rho * std::sin(phi), e2);
              acc += F(vpr, w, d * d, rho * rho) * rho * d;
              ++rep.nodes;
            }
          }
        }
      }
      rep.rhs = 4.0 * acc * (4.0 * M_PI / mo) * (D / md) * (S / mr) * (2.0 * M_PI / mp);
    }
  }
  rep.rel_gap = std::fabs(rep.lhs - rep.rhs) / std::max(std::fabs(rep.lhs), 1e-300);
  return rep;
}

IdentityReport verify_dual_polar(int dim, int level, int testfn) {
  const double sc = std::pow(2.0, level);
  const double S = 5.0;
  auto g = [&](const Vec& z) {
    double z2 = norm2(z, dim);
    double base = std::exp(-z2);
    if (testfn == 0) return base;
    return base * (1.0 + 0.5 * (z[0] * z[0] - z[1] * z[1]) / (1.0 + z2));
  };
  IdentityReport rep;
  // The anisotropic part of the test function cancels only across the whole
  // direction lattice, and the Fibonacci set does that at first order in the
  // count, so dim 3 starts from a denser sphere than dim 2 needs.
  int msig = (int)((dim == 2 ? 32 : 256) * sc);
  auto dirs = sphere_lattice(dim, msig);
  double mu = sphere_measure(dim) / msig;
  if (dim == 2) {
    int ms = (int)(128 * sc);
    for (const auto& u : dirs) {
      Vec e1, e2;
      plane_basis(u, 2, e1, e2);
      for (int i = 0; i < ms; ++i) {
        double s = -S + 2.0 * S * (i + 0.5) / ms;
        rep.lhs += mu * (2.0 * S / ms) * g(scale(s, e1));
        ++rep.nodes;
      }
    }
    int ma = (int)(128 * sc), mr = (int)(128 * sc);
    double acc = 0;
    for (int ia = 0; ia < ma; ++ia) {
      double al = 2.0 * M_PI * (ia + 0.5) / ma;
      Vec uh = vec2(std::cos(al), std::sin(al));
      for (int ir = 0; ir < mr; ++ir) {
        acc += g(scale(S * (ir + 0.5) / mr, uh));
        ++rep.nodes;
      }
    }
    rep.rhs = 2.0 * acc * (2.0 * M_PI / ma) * (S / mr);
  } else {
    int mr = (int)(64 * sc), mp = (int)(32 * sc);
    for (const auto& u : dirs) {
      Vec e1, e2;
      plane_basis(u, 3, e1, e2);
      for (int ir = 0; ir < mr; ++ir) {
        double rho = S * (ir + 0.5) / mr;
        for (int ip = 0; ip < mp; ++ip) {
          double phi = 2.0 * M_PI * (ip + 0.5) / mp;
          rep.lhs += mu * rho * (S / mr) * (2.0 * M_PI / mp) *
                     g(axpy(scale(rho * std::cos(phi), e1), rho * std::sin(phi), e2));
          ++rep.nodes;
        }
      }
    }
    auto zdirs = sphere_lattice(3, (int)(256 * sc));
    double zmu = sphere_measure(3) / zdirs.size();
    double acc = 0;
    for (const auto& u : zdirs)
      for (int ir = 0; ir < mr; ++ir) {
        double rho = S * (ir + 0.5) / mr;
        acc += rho * g(scale(rho, u));
        ++rep.nodes;
      }
    rep.rhs = 2.0 * M_PI * acc * zmu * (S / mr);
  }
  rep.rel_gap = std::fabs(rep.lhs - rep.rhs) / std::max(std::fabs(rep.rhs), 1e-300);
  return rep;
}

}  // namespace boltz
