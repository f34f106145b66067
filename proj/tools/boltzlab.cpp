// boltzlab verify|simulate|bounds --config <path> --out <dir> [--threads k] [--seed s]
//
// verify    cross-checks the operator representations and identities on the
//           configured initial data and writes one certificate per check.
// simulate  marches the homogeneous equation, emitting timeseries.csv,
//           strided snapshot CSVs and conservation certificates.
// bounds    kernel upper bound, lifted set, direction cones and coercivity
//           reports around configurable probe speeds.
//
// Exit codes: 0 all certificates pass, 1 a certificate or run failed,
// 2 unusable config or command line.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "boltz/collision.hpp"
#include "boltz/config.hpp"
#include "boltz/estimates.hpp"
#include "boltz/report.hpp"
#include "boltz/solver.hpp"
#include "json.hpp"

using namespace boltz;

namespace {

struct Session {
  RunConfig cfg;
  CrossSection xs;
  XsInvariantReport xrep;
  VelocityGrid grid{};
  DistributionFunction f0{VelocityGrid{}, {}};
  RunManifest manifest;
  std::string out;
  std::vector<Certificate> certs;

  std::chrono::steady_clock::time_point phase_start;
  void phase(const std::string& name) {
    auto now = std::chrono::steady_clock::now();
    if (!manifest.timings_s.empty() || !phase_name.empty())
      manifest.timings_s.emplace_back(
          phase_name, std::chrono::duration<double>(now - phase_start).count());
    phase_name = name;
    phase_start = now;
  }
  std::string phase_name;
};

void add_cert(Session& s, Certificate c) {
  std::string err;
  if (!emit_artifact(s.manifest, s.out, "certs/" + c.lemma + ".json",
                     certificate_json(c), &err))
    std::cerr << err << "\n";
  std::cout << (c.pass ? "ok   " : "FAIL ") << c.lemma;
  if (!c.pass && !c.detail.empty()) std::cout << "  (" << c.detail << ")";
  std::cout << "\n";
  s.certs.push_back(std::move(c));
}

int finish(Session& s) {
  s.phase("emit");
  bool all = true;
  for (const auto& c : s.certs) all &= c.pass;
  s.phase("");
  std::string err;
  if (!emit_artifact(s.manifest, s.out, "manifest.json", manifest_json(s.manifest), &err)) {
    std::cerr << err << "\n";
    return 2;
  }
  return all ? 0 : 1;
}

// Common setup: config, cross section with its invariant report, grid, f0.
// Returns -1 to continue, otherwise the exit code.
int setup(Session& s, const std::string& config_path, int threads, long seed) {
  ConfigResult res = load_config(config_path);
  if (!res.ok) {
    for (const auto& e : res.errors) std::cerr << "config: " << e << "\n";
    return 2;
  }
  s.cfg = res.cfg;
  if (threads > 0) {
    s.cfg.threads = threads;
    s.cfg.solver.threads = threads;
  }
  if (seed >= 0) s.cfg.seed = unsigned(seed);

  std::string effective;
  for (const auto& [k, v] : res.raw) effective += k + " = " + v + "\n";
  effective += "threads = " + std::to_string(s.cfg.threads) + "\n";
  effective += "seed = " + std::to_string(s.cfg.seed) + "\n";
  s.manifest.config_hash = hex64(fnv1a64_str(effective));

  std::string err;
  s.xs = make_xsection(s.cfg, &err);
  if (!err.empty()) {
    std::cerr << "config: " << err << "\n";
    return 2;
  }
  s.xrep = validate(s.xs);

  s.manifest.xsection = {{"kind", s.cfg.b_kind},
                         {"gamma", fmt17(s.cfg.gamma)},
                         {"nu", fmt17(s.cfg.nu)},
                         {"dim", std::to_string(s.cfg.dim)},
                         {"envelope_C", fmt17(s.xs.envelope_C)}};
  s.grid = VelocityGrid::make(s.cfg.dim, s.cfg.grid_n, s.cfg.grid_L);
  s.manifest.grid = {{"dim", std::to_string(s.cfg.dim)},
                     {"n", std::to_string(s.cfg.grid_n)},
                     {"L", fmt17(s.cfg.grid_L)},
                     {"h", fmt17(s.grid.h)}};
  s.f0 = make_initial(s.cfg, s.grid);

  Certificate c;
  c.lemma = "angular-kernel-invariants";
  c.inputs = {{"gamma", s.cfg.gamma}, {"nu", s.cfg.nu}, {"dim", double(s.cfg.dim)}};
  c.measured = {{"even_ok", double(s.xrep.even_ok)},
                {"positive_ok", double(s.xrep.positive_ok)},
                {"origin_envelope_ok", double(s.xrep.origin_envelope_ok)},
                {"pi_side_ok", double(s.xrep.pi_side_ok)},
                {"C_origin", s.xrep.C_origin},
                {"C_pi", s.xrep.C_pi}};
  c.threshold = {{"all_flags", 1}};
  c.pass = s.xrep.pass();
  c.detail = s.xrep.detail;
  add_cert(s, std::move(c));
  if (!s.xrep.pass()) return finish(s);
  return -1;
}

Vec probe_vec(double speed) { return {speed, 0, 0}; }

int cmd_verify(Session& s) {
  const QuadParams acc = QuadParams::defaults(s.cfg.dim);
  const int dim = s.cfg.dim;

  s.phase("change-of-variables");
  {
    IdentityReport r = verify_change_of_variables(s.xs, dim, 2);
    Certificate c;
    c.lemma = "collision-chart-change-of-variables";
    c.inputs = {{"level", 2}};
    c.measured = {{"lhs", r.lhs}, {"rhs", r.rhs}, {"rel_gap", r.rel_gap},
                  {"nodes", double(r.nodes)}};
    c.threshold = {{"rel_gap", 1e-3}};
    c.pass = r.rel_gap <= 1e-3;
    add_cert(s, std::move(c));
  }

  s.phase("dual-polar");
  {
    IdentityReport g0 = verify_dual_polar(dim, 1, 0);
    IdentityReport g1 = verify_dual_polar(dim, 1, 1);
    Certificate c;
    c.lemma = "dual-polar-identity";
    c.inputs = {{"level", 1}};
    c.measured = {{"gap_gaussian", g0.rel_gap}, {"gap_bump", g1.rel_gap},
                  {"nodes", double(g0.nodes + g1.nodes)}};
    c.threshold = {{"rel_gap", 1e-3}};
    c.pass = g0.rel_gap <= 1e-3 && g1.rel_gap <= 1e-3;
    add_cert(s, std::move(c));
  }

  s.phase("btilde");
  {
    BtildeModel bm = btilde(s.xs);
    BtildeModel be = btilde(s.xs, dim == 2 ? vec2(0.6, 0.8) : vec3(0.6, 0, 0.8),
                            8192, 1e-6);
    double want = std::pow(2.0, s.cfg.gamma);
    double ratio_gap = std::fabs(btilde_eval(bm, 2.0) / btilde_eval(bm, 1.0) / want - 1.0);
    double spread = std::fabs(be.coef / bm.coef - 1.0);
    Certificate c;
    c.lemma = "convolution-coefficient-power-law";
    c.inputs = {{"gamma", s.cfg.gamma}, {"nu", s.cfg.nu}};
    c.measured = {{"coef", bm.coef}, {"ratio_gap", ratio_gap}, {"axis_spread", spread},
                  {"err_estimate", bm.err_estimate}};
    c.threshold = {{"ratio_gap", 1e-6}, {"axis_spread", 1e-5}, {"coef_min", 0}};
    c.pass = ratio_gap <= 1e-6 && spread <= 1e-5 && bm.coef > 0;
    add_cert(s, std::move(c));
  }

  s.phase("kernel-scaling");
  {
    Vec v = probe_vec(0.3);
    Vec u = dim == 2 ? vec2(std::cos(0.7), std::sin(0.7))
                     : vec3(std::cos(0.7), std::sin(0.7), 0);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int nd = 8;
    for (int i = 0; i < nd; ++i) {
      double d = 0.5 * std::pow(4.0, double(i) / (nd - 1));
      auto ke = kernel_Kf(s.xs, s.f0, v, axpy(v, d, u), acc);
      double X = std::log(d), Y = std::log(ke.value);
      sx += X, sy += Y, sxx += X * X, sxy += X * Y;
    }
    double slope = (nd * sxy - sx * sy) / (nd * sxx - sx * sx);
    double slope_gap = std::fabs(slope + dim + s.cfg.nu);

    double sym = 0, tol = 1e-12;
    for (int k = 0; k < 64; ++k) {
      double ang = 0.1 + 6.0 * k / 64.0;
      double d = 0.6 + 0.01 * k;
      Vec uu = dim == 2 ? vec2(std::cos(ang), std::sin(ang))
                        : vec3(std::cos(ang) * 0.8, std::sin(ang) * 0.8, 0.6);
      auto a = kernel_Kf(s.xs, s.f0, v, axpy(v, d, uu), acc);
      auto b = kernel_Kf(s.xs, s.f0, v, axpy(v, -d, uu), acc);
      sym = std::max(sym, std::fabs(a.value - b.value) /
                              std::max({std::fabs(a.value), std::fabs(b.value), 1e-300}));
      tol = std::max({tol, 3 * a.err_estimate, 3 * b.err_estimate});
    }
    Certificate c;
    c.lemma = "kernel-power-scaling";
    c.inputs = {{"expected_slope", -double(dim) - s.cfg.nu}};
    c.measured = {{"slope", slope}, {"slope_gap", slope_gap}, {"symmetry_residual", sym},
                  {"symmetry_tol", tol}};
    double slope_tol = s.xs.product_form() ? 1e-3 : 1e-2;
    c.threshold = {{"slope_gap", slope_tol}};
    c.pass = slope_gap <= slope_tol && sym <= tol;
    add_cert(s, std::move(c));
  }

  s.phase("decomposition");
  {
    BtildeModel bm = btilde(s.xs);
    double worst = 0;
    int mid = s.cfg.grid_n / 2;
    std::vector<std::pair<int, int>> nodes = {
        {mid, mid}, {mid + 2, mid - 1}, {mid - 3, mid + 1}, {mid + 1, mid + 3}, {mid - 2, mid - 2}};
    for (auto [i, j] : nodes) {
      Vec v = dim == 2 ? vec2(s.grid.axis(i), s.grid.axis(j))
                       : vec3(s.grid.axis(i), s.grid.axis(j), s.grid.axis(mid));
      double direct = q_direct(s.xs, s.f0, s.f0, v, acc).value;
      double split = q1(s.xs, s.f0, s.f0, v, acc).value + q2_with_model(bm, s.f0, s.f0, v);
      worst = std::max(worst, std::fabs(direct - split) / std::max(1.0, std::fabs(direct)));
    }
    Certificate c;
    c.lemma = "decomposition-equivalence";
    c.inputs = {{"probes", double(nodes.size())}};
    c.measured = {{"worst_rel_gap", worst}};
    c.threshold = {{"worst_rel_gap", 0.02}};
    c.pass = worst <= 0.02;
    add_cert(s, std::move(c));
  }

  s.phase("kernel-upper-bound");
  {
    auto rep = kernel_upper_bound(s.xs, s.f0, probe_vec(0), {0.5, 1.0, 2.0, 4.0}, acc);
    double lo = 1e300, hi = 0;
    for (double x : rep.annulus_scaled) lo = std::min(lo, x), hi = std::max(hi, x);
    Certificate c;
    c.lemma = "kernel-upper-bound";
    c.inputs = {{"annuli", double(rep.annulus_r.size())}};
    c.measured = {{"Lambda", rep.Lambda}, {"ceiling", rep.ceiling},
                  {"flatness", lo > 0 ? hi / lo : 1e300}};
    // ratio -> 1 in the continuum for the product-form kernel, so the pass
    // band must absorb the two independent quadratures that meet here
    c.threshold = {{"flatness", 1.1}, {"Lambda_over_ceiling", 1.005}};
    c.pass = rep.Lambda <= 1.005 * rep.ceiling && lo > 0 && hi / lo <= 1.1;
    add_cert(s, std::move(c));
  }

  s.phase("lifted-set");
  MacroscopicState mom = moments(s.f0);
  LiftedSet ls = lifted_set(s.f0, mom.mass, mom.mass, mom.energy, entropy_abs(s.f0));
  {
    Certificate c;
    c.lemma = "lifted-level-set";
    c.inputs = {{"M0", mom.mass}, {"M1", mom.mass}, {"E0", mom.energy}};
    c.measured = {{"r", ls.r}, {"level", ls.level}, {"mass_lb", ls.mass_lb},
                  {"measured", ls.measured}};
    c.threshold = {{"measured_over_lb", 1.0}};
    c.pass = ls.pass && ls.moments_ok;
    c.detail = ls.detail;
    add_cert(s, std::move(c));
  }

  s.phase("cone");
  if (ls.pass) {
    auto rep = cone_lower_bound(s.xs, s.f0, ls, probe_vec(s.cfg.probe_speeds.empty()
                                                              ? 0.0
                                                              : s.cfg.probe_speeds[0]),
                                256);
    Certificate c;
    c.lemma = "cone-lower-bound";
    c.measured = {{"cone_measure", rep.cone_measure},
                  {"guaranteed_measure", rep.guaranteed_measure},
                  {"lambda", rep.lambda}, {"band", rep.band}};
    c.threshold = {{"measure_over_guaranteed", 1.0}, {"lambda_min", 0}};
    c.pass = rep.cone_ok && rep.cone_measure >= rep.guaranteed_measure && rep.lambda > 0;
    c.detail = rep.detail;
    add_cert(s, std::move(c));
  }

  s.phase("coercivity");
  {
    std::size_t arg = 0;
    for (std::size_t i = 0; i < s.f0.values.size(); ++i)
      if (s.f0.values[i] > s.f0.values[arg]) arg = i;
    auto rep = cone_coercivity(s.f0, s.grid.point(arg), Cone{{1, 0, 0}, -1.0}, 2.0,
                               s.cfg.nu);
    Certificate c;
    c.lemma = "coercivity-at-max";
    c.inputs = {{"p", 2}, {"nu", s.cfg.nu}};
    c.measured = {{"lhs", rep.lhs}, {"rhs", rep.rhs}, {"ratio", rep.ratio}};
    c.threshold = {{"ratio", 1.0}};
    c.pass = rep.pass;
    add_cert(s, std::move(c));
  }

  s.phase("max-principle");
  {
    MaxRecord rec = max_principle_report(s.xs, s.f0, s.cfg.solver.quad);
    Certificate c;
    c.lemma = "loss-dominates-at-argmax";
    c.measured = {{"m", rec.m}, {"q1", rec.q1}, {"q2", rec.q2},
                  {"c_tilde", rec.c_tilde}, {"C_tilde", rec.C_tilde}};
    c.threshold = {{"q1_max", 0}};
    c.pass = rec.q1_nonpositive;
    add_cert(s, std::move(c));
  }

  return finish(s);
}

int cmd_simulate(Session& s) {
  s.phase("run");
  Trajectory tr = run(s.xs, s.f0, s.cfg.solver);
  if (!tr.completed) {
    Certificate c;
    c.lemma = "trajectory-completed";
    c.threshold = {{"completed", 1}};
    c.pass = false;
    c.detail = tr.detail;
    add_cert(s, std::move(c));
    std::cerr << "run aborted: " << tr.detail << "\n";
    return finish(s);
  }

  s.phase("timeseries");
  std::ostringstream csv;
  csv << "t,m,minBR,mass,energy,entropy,c_tilde,C_tilde\n";
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const MaxRecord* r = k < tr.records.size() ? &tr.records[k] : nullptr;
    csv << fmt17(tr.times[k]) << ',' << fmt17(r ? r->m : 0.0) << ','
        << fmt17(tr.min_ball[k]) << ',' << fmt17(tr.macro[k].mass) << ','
        << fmt17(tr.macro[k].energy) << ',' << fmt17(tr.macro[k].entropy) << ','
        << fmt17(r ? r->c_tilde : 0.0) << ',' << fmt17(r ? r->C_tilde : 0.0) << '\n';
  }
  std::string err;
  if (!emit_artifact(s.manifest, s.out, "timeseries.csv", csv.str(), &err)) {
    std::cerr << err << "\n";
    return 2;
  }

  s.phase("snapshots");
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "snapshots/f_%04zu.csv", k);
    std::ostringstream hdr;
    std::filesystem::create_directories(std::filesystem::path(s.out) / "snapshots");
    std::string path = s.out + "/" + name;
    write_csv(tr.snapshots[k], path);
    s.manifest.artifacts.push_back({name, hex64(fnv1a64_file(path))});
  }

  s.phase("certs");
  {
    Certificate c;
    c.lemma = "mass-energy-conservation";
    c.measured = {{"mass_drift", tr.mass_drift}, {"energy_drift", tr.energy_drift},
                  {"raw_mass_drift", tr.raw_mass_drift},
                  {"raw_energy_drift", tr.raw_energy_drift}};
    c.threshold = {{"mass_drift", 1e-3}, {"energy_drift", 1e-2}};
    c.pass = tr.mass_drift <= 1e-3 && tr.energy_drift <= 1e-2;
    add_cert(s, std::move(c));
  }
  {
    double worst = -1e300;
    for (std::size_t k = 1; k < tr.macro.size(); ++k)
      worst = std::max(worst, tr.macro[k].entropy - tr.macro[k - 1].entropy);
    Certificate c;
    c.lemma = "entropy-monotone";
    c.measured = {{"max_step_increase", worst}};
    c.threshold = {{"max_step_increase", 1e-6}};
    c.pass = worst <= 1e-6;
    add_cert(s, std::move(c));
  }
  {
    Certificate c;
    c.lemma = "positivity-with-logged-clips";
    c.measured = {{"clipped_total", tr.clipped_total},
                  {"mass", tr.macro.front().mass},
                  {"dt_ceiling_min", tr.dt_ceiling_min}};
    c.threshold = {{"clipped_over_mass", 1e-3}};
    c.pass = tr.clipped_total <= 1e-3 * tr.macro.front().mass;
    add_cert(s, std::move(c));
  }
  if (!tr.records.empty()) {
    bool all = true;
    for (const auto& r : tr.records) all &= r.q1_nonpositive;
    Certificate c;
    c.lemma = "loss-dominates-at-argmax";
    c.measured = {{"steps", double(tr.records.size())}, {"all_nonpositive", double(all)},
                  {"final_m", tr.records.back().m}};
    c.threshold = {{"all_nonpositive", 1}};
    c.pass = all;
    add_cert(s, std::move(c));
  }
  if (!tr.detail.empty()) std::cout << "note: " << tr.detail << "\n";
  return finish(s);
}

nlohmann::ordered_json cone_json(const KernelBoundsReport& r, int dim) {
  nlohmann::ordered_json j;
  j["v"] = {r.v[0], r.v[1], r.v[2]};
  j["cone_measure"] = r.cone_measure;
  j["kappa"] = r.kappa;
  j["threshold"] = r.threshold;
  j["sup_plane"] = r.sup_plane;
  j["guaranteed_measure"] = r.guaranteed_measure;
  j["lambda"] = r.lambda;
  j["band"] = r.band;
  j["ok"] = r.cone_ok;
  j["directions"] = double(r.cone.size());
  (void)dim;
  return j;
}

int cmd_bounds(Session& s) {
  s.phase("kernel-upper-bound");
  const QuadParams acc = QuadParams::defaults(s.cfg.dim);
  {
    auto rep = kernel_upper_bound(s.xs, s.f0, probe_vec(0), {0.5, 1.0, 2.0, 4.0}, acc);
    nlohmann::ordered_json j;
    j["v"] = {0, 0, 0};
    j["annulus_r"] = rep.annulus_r;
    j["annulus_scaled"] = rep.annulus_scaled;
    j["Lambda"] = rep.Lambda;
    j["ceiling"] = rep.ceiling;
    j["ratio"] = rep.ratio;
    std::string err;
    emit_artifact(s.manifest, s.out, "kernel_bounds.json", j.dump(2) + "\n", &err);
    double lo = 1e300, hi = 0;
    for (double x : rep.annulus_scaled) lo = std::min(lo, x), hi = std::max(hi, x);
    Certificate c;
    c.lemma = "kernel-upper-bound";
    c.measured = {{"Lambda", rep.Lambda}, {"ceiling", rep.ceiling},
                  {"flatness", lo > 0 ? hi / lo : 1e300}};
    // ratio -> 1 in the continuum for the product-form kernel, so the pass
    // band must absorb the two independent quadratures that meet here
    c.threshold = {{"flatness", 1.1}, {"Lambda_over_ceiling", 1.005}};
    c.pass = rep.Lambda <= 1.005 * rep.ceiling && lo > 0 && hi / lo <= 1.1;
    add_cert(s, std::move(c));
  }

  s.phase("lifted-set");
  MacroscopicState mom = moments(s.f0);
  LiftedSet ls = lifted_set(s.f0, mom.mass, mom.mass, mom.energy, entropy_abs(s.f0));
  {
    nlohmann::ordered_json j;
    j["r"] = ls.r;
    j["level"] = ls.level;
    j["mass_lb"] = ls.mass_lb;
    j["measured"] = ls.measured;
    j["moments_ok"] = ls.moments_ok;
    j["pass"] = ls.pass;
    if (!ls.detail.empty()) j["detail"] = ls.detail;
    std::string err;
    emit_artifact(s.manifest, s.out, "lifted_set.json", j.dump(2) + "\n", &err);
    Certificate c;
    c.lemma = "lifted-level-set";
    c.inputs = {{"M0", mom.mass}, {"M1", mom.mass}, {"E0", mom.energy}};
    c.measured = {{"measured", ls.measured}, {"mass_lb", ls.mass_lb}};
    c.threshold = {{"measured_over_lb", 1.0}};
    c.pass = ls.pass && ls.moments_ok;
    c.detail = ls.detail;
    add_cert(s, std::move(c));
  }
  if (!(ls.pass && ls.moments_ok)) return finish(s);

  s.phase("cones");
  {
    std::vector<KernelBoundsReport> far;
    bool all_ok = true;
    for (std::size_t i = 0; i < s.cfg.probe_speeds.size(); ++i) {
      auto rep = cone_lower_bound(s.xs, s.f0, ls, probe_vec(s.cfg.probe_speeds[i]), 256);
      all_ok &= rep.cone_ok && rep.cone_measure >= rep.guaranteed_measure;
      char name[48];
      std::snprintf(name, sizeof name, "cone_%02zu.json", i);
      std::string err;
      emit_artifact(s.manifest, s.out, name, cone_json(rep, s.cfg.dim).dump(2) + "\n",
                    &err);
      if (s.cfg.probe_speeds[i] > 0) far.push_back(rep);
    }
    Certificate c;
    c.lemma = "cone-lower-bound";
    c.inputs = {{"probes", double(s.cfg.probe_speeds.size())}};
    c.threshold = {{"measure_over_guaranteed", 1.0}};
    c.pass = all_ok;
    if (!far.empty()) {
      ConeDecayFit fit = fit_cone_decay(far);
      c.measured = {{"decay_mu", fit.mu}, {"band_C", fit.C}, {"fit_ok", double(fit.ok)}};
      nlohmann::ordered_json j;
      j["mu"] = fit.mu;
      j["C"] = fit.C;
      j["ok"] = fit.ok;
      std::string err;
      emit_artifact(s.manifest, s.out, "cone_decay.json", j.dump(2) + "\n", &err);
      c.pass = all_ok && fit.ok;
    }
    add_cert(s, std::move(c));
  }

  s.phase("coercivity");
  {
    std::size_t arg = 0;
    for (std::size_t i = 0; i < s.f0.values.size(); ++i)
      if (s.f0.values[i] > s.f0.values[arg]) arg = i;
    auto rep = cone_coercivity(s.f0, s.grid.point(arg), Cone{{1, 0, 0}, -1.0}, 2.0,
                               s.cfg.nu);
    nlohmann::ordered_json j;
    j["lhs"] = rep.lhs;
    j["rhs"] = rep.rhs;
    j["ratio"] = rep.ratio;
    j["excluded"] = rep.excluded;
    j["mu"] = rep.mu;
    j["lp_mass"] = rep.lp_mass;
    j["pass"] = rep.pass;
    std::string err;
    emit_artifact(s.manifest, s.out, "coercivity.json", j.dump(2) + "\n", &err);
    Certificate c;
    c.lemma = "coercivity-at-max";
    c.inputs = {{"p", 2}, {"nu", s.cfg.nu}};
    c.measured = {{"lhs", rep.lhs}, {"rhs", rep.rhs}, {"ratio", rep.ratio}};
    c.threshold = {{"ratio", 1.0}};
    c.pass = rep.pass;
    add_cert(s, std::move(c));
  }

  return finish(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"non-cutoff collision operator laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 0;
  long seed = -1;
  CLI::App* sub[3] = {
      app.add_subcommand("verify", "cross-check operator representations and identities"),
      app.add_subcommand("simulate", "march the homogeneous equation"),
      app.add_subcommand("bounds", "kernel, lifted-set, cone and coercivity reports"),
  };
  for (CLI::App* cmd : sub) {
    cmd->add_option("--config", config_path, "key = value run file")->required();
    cmd->add_option("--out", out_dir, "output directory")->required();
    cmd->add_option("--threads", threads, "worker threads (overrides config)");
    cmd->add_option("--seed", seed, "mixture seed (overrides config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Session s;
  s.out = out_dir;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "cannot create --out " << out_dir << "\n";
    return 2;
  }

  int rc = setup(s, config_path, threads, seed);
  if (rc >= 0) return rc;

  if (sub[0]->parsed()) return cmd_verify(s);
  if (sub[1]->parsed()) return cmd_simulate(s);
  return cmd_bounds(s);
}
