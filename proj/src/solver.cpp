#include "boltz/solver.hpp"

#include <algorithm>
#include <cmath>

namespace boltz {

namespace {

// Moments against 1, |v|^2, |v|^4 in one sweep (the projection needs the
// fourth moment for its normal equations).
struct ThreeMoments {
  double m0 = 0, m2 = 0, m4 = 0;
};

ThreeMoments low_moments(const DistributionFunction& f) {
  ThreeMoments t;
  const double cell = std::pow(f.grid.h, f.grid.dim);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double r2 = norm2(f.grid.point(i), f.grid.dim);
    const double fv = f.values[i];
    t.m0 += fv * cell;
    t.m2 += fv * r2 * cell;
    t.m4 += fv * r2 * r2 * cell;
  }
  return t;
}

double clip_negative(DistributionFunction& f) {
  const double cell = std::pow(f.grid.h, f.grid.dim);
  double lost = 0;
  for (double& x : f.values)
    if (x < 0) {
      lost -= x * cell;
      x = 0;
    }
  return lost;
}

// f <- f * (a + b |v|^2) with (a, b) restoring the target mass and energy.
// Declines (returns false) when the system is singular or the multiplier
// would go negative inside the box; callers keep the unprojected state then.
bool project_to_moments(DistributionFunction& f, double M0, double E0) {
  ThreeMoments t = low_moments(f);
  const double det = t.m0 * t.m4 - t.m2 * t.m2;
  if (!(det > 1e-14 * t.m0 * t.m4)) return false;
  const double a = (M0 * t.m4 - E0 * t.m2) / det;
  const double b = (t.m0 * E0 - t.m2 * M0) / det;
  const double r2max = f.grid.dim * f.grid.L * f.grid.L;
  if (a + std::min(0.0, b) * r2max < 0 || a < 0) return false;
  for (std::size_t i = 0; i < f.values.size(); ++i)
    f.values[i] *= a + b * norm2(f.grid.point(i), f.grid.dim);
  return true;
}

struct Stage {
  DistributionFunction f;
  double clipped = 0;
  double diag_sup = 0;
  bool ok = true;
  std::string detail;
};

// One forward-Euler substage u = f + dt (Q(f,g) + source), with g = f in the
// nonlinear equation. Clips when asked and enforces the per-stage clip and
// ceiling contracts.
Stage euler_stage(const CrossSection& xs, const DistributionFunction& f,
                  const DistributionFunction* source, double dt,
                  const SolverConfig& cfg, bool clip) {
  Stage st;
  CollisionField cf = apply_collision(xs, f, f, cfg.quad, cfg.threads);
  for (double d : cf.q1_diag) st.diag_sup = std::max(st.diag_sup, d);
  const double ceiling = st.diag_sup > 0 ? cfg.sigma_cfl / st.diag_sup : 0;
  if (ceiling > 0 && dt > ceiling) {
    st.ok = false;
    st.detail = "dt " + std::to_string(dt) + " above stability ceiling " +
                std::to_string(ceiling) + " (sup diag " +
                std::to_string(st.diag_sup) + ")";
    return st;
  }
  st.f = f;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    double rhs = cf.q1[i] + cf.q2[i];
    if (source) rhs += source->values[i];
    st.f.values[i] += dt * rhs;
  }
  if (clip) {
    st.clipped = clip_negative(st.f);
    const double mass = low_moments(f).m0;
    if (st.clipped > 0.01 * mass) {
      st.ok = false;
      st.detail = "clipped " + std::to_string(st.clipped) + " of mass " +
                  std::to_string(mass) + " in one stage; reduce dt";
    }
  }
  return st;
}

Stage scheme_step(const CrossSection& xs, const DistributionFunction& f,
                  const DistributionFunction* source, double dt,
                  const SolverConfig& cfg, bool clip) {
  Stage s1 = euler_stage(xs, f, source, dt, cfg, clip);
  if (!s1.ok || cfg.scheme == Scheme::euler) return s1;
  Stage s2 = euler_stage(xs, s1.f, source, dt, cfg, clip);
  if (!s2.ok) return s2;
  Stage out;
  out.f = f;
  for (std::size_t i = 0; i < f.values.size(); ++i)
    out.f.values[i] = 0.5 * (f.values[i] + s2.f.values[i]);
  out.clipped = s1.clipped + s2.clipped;
  if (clip) out.clipped += clip_negative(out.f);  // no-op: average of two floors
  out.diag_sup = std::max(s1.diag_sup, s2.diag_sup);
  return out;
}

void record_state(Trajectory& traj, const CrossSection& xs,
                  const DistributionFunction& f, double t, const SolverConfig& cfg,
                  bool with_max) {
  traj.times.push_back(t);
  traj.macro.push_back(moments(f, t));
  traj.min_ball.push_back(min_over_ball(f, traj.monitor_radius));
  if (with_max) traj.records.push_back(max_principle_report(xs, f, cfg.quad, t));
}

long planned_steps(const SolverConfig& cfg, Trajectory& traj) {
  long nsteps = std::lround(cfg.t_end / cfg.dt);
  if (std::fabs(nsteps * cfg.dt - cfg.t_end) > 1e-9 * std::max(cfg.dt, cfg.t_end)) {
    nsteps = (long)std::ceil(cfg.t_end / cfg.dt - 1e-12);
    traj.detail = "t_end not a multiple of dt; running " + std::to_string(nsteps) +
                  " steps to t = " + std::to_string(nsteps * cfg.dt);
  }
  return nsteps;
}

}  // namespace

QuadParams solver_quad(int dim) {
  QuadParams qp = QuadParams::defaults(dim);
  qp.y_min = 0.25;
  qp.n_dir = dim == 2 ? 16 : 32;
  qp.n_rad = 24;
  return qp;
}

StepResult step(const CrossSection& xs, const DistributionFunction& f, double dt,
                const SolverConfig& cfg) {
  StepResult out;
  if (!(dt > 0)) {
    out.ok = false;
    out.detail = "dt must be positive";
    return out;
  }
  Stage st = scheme_step(xs, f, nullptr, dt, cfg, true);
  out.ok = st.ok;
  out.detail = st.detail;
  out.clipped_mass = st.clipped;
  out.diag_sup = st.diag_sup;
  out.dt_ceiling = st.diag_sup > 0 ? cfg.sigma_cfl / st.diag_sup : 0;
  if (st.ok) out.f = std::move(st.f);
  return out;
}

Trajectory run(const CrossSection& xs, const DistributionFunction& f0,
               const SolverConfig& cfg) {
  Trajectory traj;
  traj.monitor_radius = cfg.monitor_radius > 0 ? cfg.monitor_radius : 0.5 * f0.grid.L;
  traj.dt_ceiling_min = std::numeric_limits<double>::infinity();
  if (!(cfg.dt > 0) || cfg.t_end < 0 || cfg.stride < 1) {
    traj.detail = "invalid config: need dt > 0, t_end >= 0, stride >= 1";
    return traj;
  }
  ThreeMoments m0 = low_moments(f0);
  if (!(m0.m0 > 0)) {
    traj.detail = "initial data must carry positive mass";
    return traj;
  }

  DistributionFunction f = f0;
  record_state(traj, xs, f, 0.0, cfg, cfg.record_max);
  traj.snapshot_times.push_back(0.0);
  traj.snapshots.push_back(f);

  const long nsteps = planned_steps(cfg, traj);
  bool projection_declined = false;
  for (long k = 1; k <= nsteps; ++k) {
    StepResult s = step(xs, f, cfg.dt, cfg);
    if (!s.ok) {
      traj.detail = "aborted at t = " + std::to_string((k - 1) * cfg.dt) + ": " +
                    s.detail;
      return traj;
    }
    f = std::move(s.f);
    traj.clipped_total += s.clipped_mass;
    if (s.dt_ceiling > 0) traj.dt_ceiling_min = std::min(traj.dt_ceiling_min, s.dt_ceiling);

    ThreeMoments mk = low_moments(f);
    traj.raw_mass_drift += std::fabs(mk.m0 - (traj.macro.back().mass));
    traj.raw_energy_drift += std::fabs(mk.m2 - (traj.macro.back().energy));
    if (cfg.project_moments && !project_to_moments(f, m0.m0, m0.m2))
      projection_declined = true;

    record_state(traj, xs, f, k * cfg.dt, cfg, cfg.record_max);
    if (k % cfg.stride == 0 || k == nsteps) {
      traj.snapshot_times.push_back(k * cfg.dt);
      traj.snapshots.push_back(f);
    }
  }
  traj.raw_mass_drift /= m0.m0;
  if (m0.m2 > 0) traj.raw_energy_drift /= m0.m2;
  traj.mass_drift = std::fabs(traj.macro.back().mass / m0.m0 - 1.0);
  traj.energy_drift = m0.m2 > 0 ? std::fabs(traj.macro.back().energy / m0.m2 - 1.0) : 0;
  if (projection_declined)
    traj.detail += std::string(traj.detail.empty() ? "" : "; ") +
                   "moment projection declined on some steps";
  traj.completed = true;
  return traj;
}

Trajectory run_linear(const CrossSection& xs, const DistributionFunction& g0,
                      const DistributionFunction& f_frozen,
                      const DistributionFunction& h_source, const SolverConfig& cfg) {
  Trajectory traj;
  traj.monitor_radius = cfg.monitor_radius > 0 ? cfg.monitor_radius : 0.5 * g0.grid.L;
  traj.dt_ceiling_min = std::numeric_limits<double>::infinity();
  const VelocityGrid& gr = g0.grid;
  if (gr.dim != f_frozen.grid.dim || gr.n != f_frozen.grid.n ||
      gr.L != f_frozen.grid.L || gr.n != h_source.grid.n) {
    traj.detail = "g0, frozen f and source must share one grid";
    return traj;
  }
  if (!(cfg.dt > 0) || cfg.t_end < 0 || cfg.stride < 1) {
    traj.detail = "invalid config: need dt > 0, t_end >= 0, stride >= 1";
    return traj;
  }

  SolverConfig lcfg = cfg;
  lcfg.quad.clamp_g = false;  // g is signed; evaluate the interpolant as is

  // The nonlinear stage evaluates Q(state, state); here the kernel slot is
  // pinned to f, so drive the stages directly.
  DistributionFunction g = g0;
  record_state(traj, xs, g, 0.0, lcfg, false);
  traj.snapshot_times.push_back(0.0);
  traj.snapshots.push_back(g);

  const long nsteps = planned_steps(cfg, traj);
  auto substage = [&](const DistributionFunction& gin) {
    Stage st;
    CollisionField cf = apply_collision(xs, f_frozen, gin, lcfg.quad, lcfg.threads);
    for (double d : cf.q1_diag) st.diag_sup = std::max(st.diag_sup, d);
    const double ceiling = st.diag_sup > 0 ? cfg.sigma_cfl / st.diag_sup : 0;
    if (ceiling > 0 && cfg.dt > ceiling) {
      st.ok = false;
      st.detail = "dt above stability ceiling " + std::to_string(ceiling);
      return st;
    }
    st.f = gin;
    for (std::size_t i = 0; i < gin.values.size(); ++i)
      st.f.values[i] += cfg.dt * (cf.q1[i] + cf.q2[i] + h_source.values[i]);
    return st;
  };

  for (long k = 1; k <= nsteps; ++k) {
    Stage s1 = substage(g);
    if (s1.ok && cfg.scheme == Scheme::ssprk2) {
      Stage s2 = substage(s1.f);
      if (!s2.ok) {
        s1 = s2;
      } else {
        for (std::size_t i = 0; i < g.values.size(); ++i)
          s1.f.values[i] = 0.5 * (g.values[i] + s2.f.values[i]);
        s1.diag_sup = std::max(s1.diag_sup, s2.diag_sup);
      }
    }
    if (!s1.ok) {
      traj.detail = "aborted at t = " + std::to_string((k - 1) * cfg.dt) + ": " +
                    s1.detail;
      return traj;
    }
    g = std::move(s1.f);
    if (s1.diag_sup > 0)
      traj.dt_ceiling_min = std::min(traj.dt_ceiling_min, cfg.sigma_cfl / s1.diag_sup);
    record_state(traj, xs, g, k * cfg.dt, lcfg, false);
    if (k % cfg.stride == 0 || k == nsteps) {
      traj.snapshot_times.push_back(k * cfg.dt);
      traj.snapshots.push_back(g);
    }
  }
  traj.completed = true;
  return traj;
}

}  // namespace boltz
