#include "boltz/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace boltz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

KernelBoundsReport kernel_upper_bound(const CrossSection& xs, const DistributionFunction& f,
                                      const Vec& v, const std::vector<double>& annuli,
                                      const QuadParams& qp) {
  KernelBoundsReport rep;
  rep.v = v;
  const int dim = f.grid.dim;
  const double nu = xs.nu;
  const auto dirs = sphere_lattice(dim, qp.n_dir);
  const double wsig = sphere_measure(dim) / dirs.size();

  if (xs.product_form()) {
    // The kernel factors into (plane moment) * |z|^{-N-nu}, so the radial
    // part of each annulus integral is a power integral we take exactly; the
    // direction lattice and the plane quadrature carry all the error.
    double phisum = 0;
    for (const auto& u : dirs) phisum += phi_weight(xs, f, v, u, qp);
    const double pre = std::pow(2.0, dim - 1) * wsig * phisum;
    for (double r : annuli) {
      rep.annulus_r.push_back(r);
      rep.annulus_scaled.push_back(std::pow(r, nu) * pre *
                                   pow_integral(r, 2.0 * r, -1.0 - nu));
    }
  } else {
    const int nrad = 16;
    for (double r : annuli) {
      double acc = 0;
      double dr = r / nrad;
      for (int k = 0; k < nrad; ++k) {
        double rho = r + (k + 0.5) * dr;
        double shell = std::pow(rho, dim - 1) * dr;
        for (const auto& u : dirs)
          acc += wsig * shell * kernel_Kf(xs, f, v, axpy(v, rho, u), qp).value;
      }
      rep.annulus_r.push_back(r);
      rep.annulus_scaled.push_back(std::pow(r, nu) * acc);
    }
  }
  for (double s : rep.annulus_scaled) rep.Lambda = std::max(rep.Lambda, s);

  // Ceiling via the dual polar identity: integrating the plane moments over
  // all directions collapses to the gamma+nu moment of f around v, and the
  // dyadic radial factor is (1 - 2^-nu)/nu exactly.
  const double cN = dim == 2 ? 2.0 : 2.0 * M_PI;
  const double K0 = moment_sup(f, xs.gamma + nu, {v});
  rep.ceiling = (1.0 - std::pow(2.0, -nu)) / nu * std::pow(2.0, dim - 1) * cN * K0;
  rep.ratio = rep.ceiling > 0 ? rep.Lambda / rep.ceiling : 0.0;
  return rep;
}

LiftedSet lifted_set(const DistributionFunction& f, double M0, double M1, double E0,
                     double Htilde0) {
  LiftedSet out;
  const int dim = f.grid.dim;
  if (M1 <= 0 || E0 <= 0 || Htilde0 < 0) {
    out.detail = "need M1 > 0, E0 > 0, Htilde0 >= 0";
    return out;
  }
  // r puts at most half of M1 outside the ball, the level keeps at least half
  // of the ball mass above it, and the entropy bound caps how concentrated
  // that half can be. All three are the explicit constants of the proof.
  out.r = std::sqrt(2.0 * E0 / M1) * (1.0 + 1e-6);
  out.level = M1 / (8.0 * ball_volume(dim) * std::pow(out.r, dim));
  out.mass_lb = M1 / 8.0 * std::exp(-8.0 * Htilde0 / M1);

  MacroscopicState ms = moments(f);
  double habs = entropy_abs(f);
  out.moments_ok = ms.mass >= M1 && ms.mass <= M0 && ms.energy <= E0 && habs <= Htilde0;

  const double cell = std::pow(f.grid.h, dim);
  for (std::size_t j = 0; j < f.values.size(); ++j)
    if (f.values[j] > out.level && norm(f.grid.point(j), dim) <= out.r)
      out.measured += cell;
  out.pass = out.measured >= out.mass_lb;
  if (!out.moments_ok)
    out.detail = "grid moments violate the supplied bounds";
  else if (!out.pass)
    out.detail = "level set smaller than the guaranteed measure";
  return out;
}

KernelBoundsReport cone_lower_bound(const CrossSection& xs, const DistributionFunction& f,
                                    const LiftedSet& ls, const Vec& v, int n_samples) {
  KernelBoundsReport rep;
  rep.v = v;
  const VelocityGrid& gr = f.grid;
  const int dim = gr.dim;
  const double h = gr.h;

  std::vector<char> flag(f.values.size(), 0);
  std::size_t count = 0;
  for (std::size_t j = 0; j < f.values.size(); ++j)
    if (f.values[j] > ls.level && norm(gr.point(j), dim) <= ls.r) {
      flag[j] = 1;
      ++count;
    }
  if (count == 0) {
    rep.detail = "level set empty within the ball";
    return rep;
  }
  // The lifted set as a union of grid cells; membership of a point is that of
  // its nearest node, matching the cell count lifted_set reports.
  auto inside = [&](const Vec& x) {
    int idx[3] = {0, 0, 0};
    for (int a = 0; a < dim; ++a) {
      int i = (int)std::lround((x[a] + gr.L) / h);
      if (i < 0 || i >= gr.n) return false;
      idx[a] = i;
    }
    return flag[gr.flat(idx[0], idx[1], idx[2])] != 0;
  };

  const double power = xs.gamma + xs.nu + 1.0;
  const double smax = ls.r + norm(v, dim) + h;
  const auto dirs = sphere_lattice(dim, n_samples);
  const double wsig = sphere_measure(dim) / dirs.size();
  const int msteps = std::max(8, (int)std::ceil(4.0 * smax / h));
  const double step = smax / msteps;

  std::vector<double> mom(dirs.size(), 0.0);
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    Vec e1, e2;
    plane_basis(dirs[d], dim, e1, e2);
    double acc = 0;
    if (dim == 2) {
      for (int k = 0; k < msteps; ++k) {
        double s = (k + 0.5) * step;
        double wgt = std::pow(s, power) * step;
        if (inside(axpy(v, s, e1))) acc += wgt;
        if (inside(axpy(v, -s, e1))) acc += wgt;
      }
    } else {
      const int nphi = 64;
      const double dphi = 2.0 * M_PI / nphi;
      for (int j = 0; j < nphi; ++j) {
        double phi = dphi * (j + 0.5);
        Vec ua = axpy(scale(std::cos(phi), e1), std::sin(phi), e2);
        for (int k = 0; k < msteps; ++k) {
          double s = (k + 0.5) * step;
          if (inside(axpy(v, s, ua))) acc += std::pow(s, power + 1.0) * step * dphi;
        }
      }
    }
    mom[d] = acc;
  }

  for (double m : mom) {
    rep.kappa += wsig * m;
    rep.sup_plane = std::max(rep.sup_plane, m);
  }
  // Pigeonhole: directions above half the spherical mean must carry a sphere
  // measure of at least kappa / (2 sup); we record who passes and the floor.
  rep.threshold = rep.kappa / (2.0 * sphere_measure(dim));
  double minpass = kInf;
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    if (mom[d] < rep.threshold || mom[d] <= 0) continue;
    rep.cone.push_back(dirs[d]);
    minpass = std::min(minpass, mom[d]);
    rep.band = std::max(rep.band, std::fabs(dot(dirs[d], v, dim)));
  }
  rep.cone_measure = wsig * rep.cone.size();
  rep.guaranteed_measure = rep.sup_plane > 0 ? rep.kappa / (2.0 * rep.sup_plane) : 0.0;
  rep.cone_ok = !rep.cone.empty();
  if (rep.cone_ok)
    rep.lambda = ls.level * std::pow(2.0, dim - 1) * minpass;
  else
    rep.detail = "no direction cleared the threshold";
  return rep;
}

ConeDecayFit fit_cone_decay(const std::vector<KernelBoundsReport>& reports) {
  ConeDecayFit out;
  if (reports.empty()) return out;
  out.ok = true;
  out.mu = kInf;
  for (const auto& r : reports) {
    if (!r.cone_ok) {
      out.ok = false;
      continue;
    }
    out.mu = std::min(out.mu, r.cone_measure * (1.0 + norm(r.v, 3)));
    out.C = std::max(out.C, r.band);
  }
  if (out.mu == kInf) out.mu = 0;
  return out;
}

double cone_aperture(const Cone& c, int dim) {
  double cm = std::clamp(c.cos_min, -1.0, 1.0);
  return dim == 2 ? 2.0 * std::acos(cm) : 2.0 * M_PI * (1.0 - cm);
}

CoercivityReport cone_coercivity(const DistributionFunction& f, const Vec& v,
                                 const Cone& cone, double p, double nu, int n_dir,
                                 int n_rad) {
  CoercivityReport rep;
  const VelocityGrid& gr = f.grid;
  const int dim = gr.dim;
  const double h = gr.h;
  const double m = interpolate(f, v);
  rep.mu = cone_aperture(cone, dim);
  if (m <= 0 || rep.mu <= 0) return rep;

  const double cm = std::clamp(cone.cos_min, -1.0, 1.0);
  Vec ax = scale(1.0 / norm(cone.axis, dim), cone.axis);
  std::vector<std::pair<Vec, double>> dirs;
  if (dim == 2) {
    double chi = std::acos(cm);
    double a0 = std::atan2(ax[1], ax[0]);
    for (int i = 0; i < n_dir; ++i) {
      double a = a0 + chi * (2.0 * (i + 0.5) / n_dir - 1.0);
      dirs.push_back({vec2(std::cos(a), std::sin(a)), 2.0 * chi / n_dir});
    }
  } else {
    Vec e1, e2;
    plane_basis(ax, 3, e1, e2);
    int ncos = std::max(4, n_dir / 8), nphi = 16;
    double du = (1.0 - cm) / ncos;
    for (int iu = 0; iu < ncos; ++iu) {
      double u = cm + (iu + 0.5) * du;
      double s = std::sqrt(std::max(0.0, 1.0 - u * u));
      for (int ip = 0; ip < nphi; ++ip) {
        double phi = 2.0 * M_PI * (ip + 0.5) / nphi;
        Vec dir = axpy(axpy(scale(u, ax), s * std::cos(phi), e1), s * std::sin(phi), e2);
        dirs.push_back({dir, du * 2.0 * M_PI / nphi});
      }
    }
  }

  // Radial integral with the singular weight exact per cell; beyond the box
  // f vanishes and the tail is a closed-form power integral.
  const double rho_max = norm(v, dim) + gr.L * std::sqrt((double)dim) + h;
  Mesh1D mesh = graded_mesh(h, rho_max, n_rad, 2.0, true);
  double lhs = 0;
  for (const auto& [u, w] : dirs) {
    for (std::size_t c = 0; c < mesh.x.size(); ++c) {
      double clo = mesh.x[c] - 0.5 * mesh.w[c], chi = mesh.x[c] + 0.5 * mesh.w[c];
      double W = pow_integral(clo, chi, -1.0 - nu);
      double rho = std::sqrt(pow_integral(clo, chi, 1.0 - nu) / W);
      lhs += w * W * (m - interpolate(f, axpy(v, rho, u)));
    }
  }
  lhs += m * rep.mu * pow_integral(rho_max, kInf, -1.0 - nu);
  rep.lhs = lhs;

  double c2 = 0;
  for (int a = 0; a < dim; ++a) {
    Vec e{};
    e[a] = 1.0;
    double d2 = interpolate(f, axpy(v, h, e)) + interpolate(f, axpy(v, -h, e)) - 2.0 * m;
    c2 = std::max(c2, std::fabs(d2) / (h * h));
  }
  rep.excluded = 0.5 * c2 * rep.mu * pow_integral(0.0, h, 1.0 - nu);

  // Nodal cone mass; the center cell always counts in full, mirroring the
  // single-cell closed form m^p h^N.
  const double cell = std::pow(h, dim);
  double lp = 0;
  for (std::size_t j = 0; j < f.values.size(); ++j) {
    Vec y = sub(gr.point(j), v);
    double dy = norm(y, dim);
    if (dy <= 0.5 * h)
      lp += std::pow(m, p) * cell;
    else if (dot(y, ax, dim) >= cm * dy)
      lp += std::pow(std::max(0.0, f.values[j]), p) * cell;
  }
  rep.lp_mass = lp;

  const double cconst = 1.0 / (2.0 * nu) * std::pow(dim * std::pow(2.0, p), -nu / dim);
  rep.rhs = cconst * std::pow(m, 1.0 + p * nu / dim) * std::pow(rep.mu, 1.0 + nu / dim) /
            std::pow(lp, nu / dim);
  rep.ratio = rep.rhs > 0 ? rep.lhs / rep.rhs : kInf;
  rep.pass = rep.lhs >= rep.rhs;
  return rep;
}

MaxRecord max_principle_report(const CrossSection& xs, const DistributionFunction& f,
                               const QuadParams& qp, double t) {
  MaxRecord rec;
  rec.t = t;
  const int dim = f.grid.dim;
  for (std::size_t j = 1; j < f.values.size(); ++j)
    if (f.values[j] > f.values[rec.argmax_index]) rec.argmax_index = j;
  rec.argmax = f.grid.point(rec.argmax_index);
  rec.m = f.values[rec.argmax_index];
  if (rec.m <= 0) return rec;

  QuadParams capped = qp;
  capped.g_clamp_hi = rec.m;
  Q1Eval e1 = q1(xs, f, f, rec.argmax, capped);
  rec.q1 = e1.value;
  rec.q2 = q2(xs, f, f, rec.argmax, qp);

  const double speed = 1.0 + norm(rec.argmax, dim);
  rec.c_tilde = -rec.q1 / (std::pow(rec.m, 1.0 + xs.nu / dim) *
                           std::pow(speed, xs.nu * (1.0 + 1.0 / dim) + xs.gamma));
  rec.C_tilde = xs.gamma >= 0
                    ? rec.q2 / (rec.m * std::pow(speed, xs.gamma))
                    : rec.q2 / std::pow(rec.m, 1.0 - xs.gamma / dim);
  rec.coercivity_ratio =
      cone_coercivity(f, rec.argmax, Cone{{1, 0, 0}, -1.0}, 1.0, xs.nu).ratio;
  // With the cap, every positive term is dominated termwise by the diagonal,
  // so only summation roundoff can push the value above zero.
  rec.q1_nonpositive = rec.q1 <= 1e-12 * (1.0 + e1.diag_coef * rec.m);
  return rec;
}

EnvelopeFit linfty_envelope(const std::vector<double>& t, const std::vector<double>& m,
                            double p, int dim, double nu) {
  EnvelopeFit fit;
  fit.beta = dim / (p * nu);
  std::vector<std::size_t> rec;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] > 0) rec.push_back(i);
  if (rec.empty()) return fit;

  const double t_end = t[rec.back()];
  double n = 0, Sx = 0, Sxx = 0, Sy = 0, Sxy = 0;
  for (std::size_t i : rec) {
    if (t[i] < 0.25 * t_end) continue;
    double x = std::pow(t[i], -fit.beta);
    n += 1;
    Sx += x;
    Sxx += x * x;
    Sy += m[i];
    Sxy += x * m[i];
  }
  double det = n * Sxx - Sx * Sx;
  if (det > 1e-30 * n * Sxx) {
    fit.b = (n * Sxy - Sx * Sy) / det;
    fit.a = (Sy - fit.b * Sx) / n;
  } else if (n > 0) {
    fit.a = Sy / n;
  }
  fit.decay_fit_ok = fit.b >= 0 && fit.a >= 0;
  if (fit.a < 0 && fit.b >= 0) fit.a = 0;
  if (!fit.decay_fit_ok && fit.b < 0) {
    fit.b = 0;
    fit.a = 0;
    for (std::size_t i : rec) fit.a = std::max(fit.a, m[i]);
  }
  double ss = 0;
  for (std::size_t i : rec) {
    if (t[i] < 0.25 * t_end) continue;
    double r = m[i] - (fit.a + fit.b * std::pow(t[i], -fit.beta));
    ss += r * r;
  }
  fit.residual = n > 0 ? std::sqrt(ss / n) : 0.0;

  // Inflate to an actual barrier: scale both coefficients by the worst
  // exceedance so the curve dominates every recorded point.
  double s = 1.0;
  for (std::size_t i : rec) {
    double env = fit.a + fit.b * std::pow(t[i], -fit.beta);
    if (env <= 0) {
      if (m[i] > 0) fit.a = std::max(fit.a, m[i]);
      continue;
    }
    s = std::max(s, m[i] / env);
  }
  fit.a *= s;
  fit.b *= s;
  fit.holds = true;
  for (std::size_t i : rec)
    if (m[i] > (fit.a + fit.b * std::pow(t[i], -fit.beta)) * (1.0 + 1e-12)) fit.holds = false;
  return fit;
}

double min_over_ball(const DistributionFunction& f, double R) {
  double best = kInf;
  for (std::size_t j = 0; j < f.values.size(); ++j)
    if (norm(f.grid.point(j), f.grid.dim) <= R) best = std::min(best, f.values[j]);
  return best;
}

LowerBoundSeries lower_bound_probe(const std::vector<double>& times,
                                   const std::vector<DistributionFunction>& snaps,
                                   double R) {
  LowerBoundSeries out;
  out.R = R;
  for (std::size_t k = 0; k < snaps.size() && k < times.size(); ++k) {
    out.t.push_back(times[k]);
    out.min_in_ball.push_back(min_over_ball(snaps[k], R));
  }
  if (!out.min_in_ball.empty()) out.final_min = out.min_in_ball.back();
  return out;
}

HolderReport holder_seminorm(const std::vector<double>& times,
                             const std::vector<DistributionFunction>& snaps, double t0,
                             double t1, double R, double nu,
                             const std::vector<double>& alphas) {
  HolderReport rep;
  rep.t0 = t0;
  rep.t1 = t1;
  rep.R = R;
  rep.alphas = alphas;
  rep.space.assign(alphas.size(), 0.0);
  rep.time_diff.assign(alphas.size(), 0.0);
  if (snaps.empty()) return rep;

  const VelocityGrid& gr = snaps[0].grid;
  const int dim = gr.dim;
  const double h = gr.h;
  std::vector<std::size_t> ball;
  std::vector<std::array<int, 3>> coord;
  for (std::size_t j = 0; j < gr.size(); ++j) {
    if (norm(gr.point(j), dim) > R) continue;
    ball.push_back(j);
    std::size_t rem = j;
    std::array<int, 3> c{0, 0, 0};
    for (int a = dim - 1; a >= 0; --a) {
      c[a] = (int)(rem % gr.n);
      rem /= gr.n;
    }
    coord.push_back(c);
  }
  std::vector<std::size_t> win;
  for (std::size_t k = 0; k < times.size() && k < snaps.size(); ++k)
    if (times[k] >= t0 - 1e-12 && times[k] <= t1 + 1e-12) win.push_back(k);
  if (ball.empty() || win.empty()) return rep;

  // Lattice pairs share distances by index offset, so we keep one max
  // difference per offset class and apply the alpha powers per class, not per
  // pair.
  const int tn = 2 * gr.n - 1;
  std::size_t tsize = 1;
  for (int a = 0; a < dim; ++a) tsize *= tn;
  std::vector<double> cls(tsize, 0.0);
  for (std::size_t k : win) {
    const auto& val = snaps[k].values;
    for (std::size_t ai = 0; ai < ball.size(); ++ai)
      for (std::size_t bi = ai + 1; bi < ball.size(); ++bi) {
        double diff = std::fabs(val[ball[ai]] - val[ball[bi]]);
        if (diff == 0.0) continue;
        std::size_t tidx = 0;
        for (int a = 0; a < dim; ++a)
          tidx = tidx * tn + (coord[bi][a] - coord[ai][a] + gr.n - 1);
        cls[tidx] = std::max(cls[tidx], diff);
      }
  }
  for (std::size_t tidx = 0; tidx < tsize; ++tidx) {
    if (cls[tidx] == 0.0) continue;
    std::size_t rem = tidx;
    long d2 = 0;
    for (int a = dim - 1; a >= 0; --a) {
      long o = (long)(rem % tn) - (gr.n - 1);
      d2 += o * o;
      rem /= tn;
    }
    if (d2 < 4) continue;  // pairs closer than 2h only report interpolation
    double d = h * std::sqrt((double)d2);
    for (std::size_t ia = 0; ia < alphas.size(); ++ia)
      rep.space[ia] = std::max(rep.space[ia], cls[tidx] / std::pow(d, alphas[ia]));
  }

  for (std::size_t ki = 0; ki < win.size(); ++ki)
    for (std::size_t li = ki + 1; li < win.size(); ++li) {
      double dt = std::fabs(times[win[li]] - times[win[ki]]);
      if (dt <= 0) continue;
      double diff = 0;
      for (std::size_t j : ball)
        diff = std::max(diff, std::fabs(snaps[win[li]].values[j] - snaps[win[ki]].values[j]));
      for (std::size_t ia = 0; ia < alphas.size(); ++ia)
        rep.time_diff[ia] =
            std::max(rep.time_diff[ia], diff / std::pow(dt, alphas[ia] / nu));
    }
  return rep;
}

double select_alpha(const HolderReport& coarse, const HolderReport& fine, double factor) {
  std::size_t n = std::min(coarse.alphas.size(), fine.alphas.size());
  for (std::size_t i = n; i-- > 0;) {
    double c = coarse.space[i], f = fine.space[i];
    bool stable = (c == 0.0 && f == 0.0) ||
                  (c > 0.0 && f > 0.0 && std::max(f / c, c / f) < factor);
    if (stable) return coarse.alphas[i];
  }
  return 0.0;
}

}  // namespace boltz
