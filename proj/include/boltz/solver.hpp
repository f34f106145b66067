#pragma once

#include <string>
#include <vector>

#include "boltz/collision.hpp"
#include "boltz/estimates.hpp"

// Explicit time stepping for f_t = Q(f,f) and, with frozen coefficients, for
// the linear equation g_t = Q(f,g) + h. One step is a parallel map over grid
// nodes reading the previous snapshot; the trajectory recorder is the single
// writer. No implicit solves: the dense kernel matrix would need O(n^{2N})
// storage, so stability comes from a reported dt ceiling instead.

namespace boltz {

enum class Scheme { euler, ssprk2 };

// Quadrature preset for time stepping: a softer near-field cutoff and fewer
// directions than the verification defaults. The diagonal weight scales like
// y_min^{-nu}, so this buys a ~5x larger stability ceiling; the dropped near
// field is reported per step through the operator's exclusion bound.
QuadParams solver_quad(int dim);

struct SolverConfig {
  double dt = 1e-3;
  double t_end = 0.1;
  Scheme scheme = Scheme::ssprk2;
  int stride = 10;      // keep every stride-th snapshot (first and last always)
  double sigma_cfl = 0.5;  // require dt * sup_v (diagonal weight) <= sigma_cfl
  // Restore mass and energy after each step with an (a + b|v|^2) multiplier
  // fitted to the initial moments; raw per-step drift stays recorded. Off for
  // scheme-accuracy measurements.
  bool project_moments = true;
  bool record_max = true;     // per-step argmax record (nonlinear runs only)
  double monitor_radius = 0;  // ball for the min monitor; 0 means L/2
  int threads = 1;
  QuadParams quad = solver_quad(2);
};

struct StepResult {
  DistributionFunction f;
  double clipped_mass = 0;  // mass removed by the positivity floor, all stages
  double diag_sup = 0;      // sup_v diagonal weight seen this step
  double dt_ceiling = 0;    // sigma_cfl / diag_sup
  bool ok = true;
  std::string detail;
};

struct Trajectory {
  std::vector<double> times;  // t = 0 and every accepted step
  std::vector<MacroscopicState> macro;
  std::vector<MaxRecord> records;  // empty when record_max is off or linear
  std::vector<double> min_ball;
  double monitor_radius = 0;

  std::vector<double> snapshot_times;
  std::vector<DistributionFunction> snapshots;

  double clipped_total = 0;    // mass clipped over the whole run
  double mass_drift = 0;       // |M(T)/M(0) - 1| of the recorded states
  double energy_drift = 0;
  double raw_mass_drift = 0;   // accumulated per-step drift before projection
  double raw_energy_drift = 0;
  double dt_ceiling_min = 0;   // tightest stability ceiling along the run
  bool completed = false;
  std::string detail;
};

// One explicit step of f_t = Q(f,f). Negative nodes produced by quadrature
// error are clipped to zero with the lost mass returned, never silently; a
// clip above 1% of the mass in one stage aborts (dt too large), as does a dt
// above the measured ceiling.
StepResult step(const CrossSection& xs, const DistributionFunction& f, double dt,
                const SolverConfig& cfg);

// March f_t = Q(f,f) to t_end, recording moments, the argmax record, the
// ball minimum and strided snapshots at every accepted step.
Trajectory run(const CrossSection& xs, const DistributionFunction& f0,
               const SolverConfig& cfg);

// March g_t = Q(f,g) + h with f frozen. g may be signed: the interpolation
// clamp is lifted and nothing is clipped; projection and argmax records do
// not apply.
Trajectory run_linear(const CrossSection& xs, const DistributionFunction& g0,
                      const DistributionFunction& f_frozen,
                      const DistributionFunction& h_source, const SolverConfig& cfg);

}  // namespace boltz
