#include "boltz/collision.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"

using namespace boltz;

namespace {

DistributionFunction nodal_gauss(const VelocityGrid& g) {
  DistributionFunction f = zeros(g);
  for (std::size_t i = 0; i < g.size(); ++i)
    f.values[i] = std::exp(-norm2(g.point(i), g.dim));
  return f;
}

Vec rand_vec(std::mt19937_64& rng, int dim, double s) {
  std::uniform_real_distribution<double> u(-s, s);
  Vec v{};
  for (int d = 0; d < dim; ++d) v[d] = u(rng);
  return v;
}

}  // namespace

TEST_CASE("collision geometry: worked example and chart round trip") {
  // v=(0,0), vstar=(2,0), sigma=(0,1): post-collision pair (1,1), (1,-1),
  // the deflection is a right angle, and the chart offset w = vsprime - v.
  auto geo = geometry_forward(vec2(0, 0), vec2(2, 0), vec2(0, 1), 2);
  CHECK(geo.r == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(geo.vprime[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(geo.vprime[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(geo.vsprime[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(geo.vsprime[1] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(std::fabs(geo.cos_theta) < 1e-14);
  CHECK(geo.w[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(geo.w[1] == doctest::Approx(-1.0).epsilon(1e-14));

  auto back = geometry_from_chart(geo.v, geo.vprime, geo.w, 2);
  CHECK(back.vstar[0] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(std::fabs(back.vstar[1]) < 1e-13);
  CHECK(std::fabs(back.sigma[0]) < 1e-13);
  CHECK(back.sigma[1] == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("collision geometry: sigma along +-khat gives the no-op and swap") {
  Vec v = vec2(0.3, -0.7), vstar = vec2(-1.1, 0.4);
  Vec rel = sub(v, vstar);
  Vec khat = scale(1.0 / norm(rel, 2), rel);
  auto noop = geometry_forward(v, vstar, khat, 2);
  CHECK(noop.cos_theta == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(norm(sub(noop.vprime, v), 2) < 1e-13);
  CHECK(norm(sub(noop.vsprime, vstar), 2) < 1e-13);
  auto swap = geometry_forward(v, vstar, scale(-1.0, khat), 2);
  CHECK(swap.cos_theta == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(norm(sub(swap.vprime, vstar), 2) < 1e-13);
  CHECK(norm(sub(swap.vsprime, v), 2) < 1e-13);
}

TEST_CASE("collision geometry: elastic invariants and chart inversion, randomized") {
  std::mt19937_64 rng(42);
  for (int dim : {2, 3}) {
    for (int k = 0; k < 250; ++k) {
      Vec v = rand_vec(rng, dim, 2.5), vstar = rand_vec(rng, dim, 2.5);
      if (norm(sub(v, vstar), dim) < 1e-3) continue;
      Vec sig = rand_vec(rng, dim, 1.0);
      double ns = norm(sig, dim);
      if (ns < 1e-3) continue;
      sig = scale(1.0 / ns, sig);
      auto geo = geometry_forward(v, vstar, sig, dim);
      // momentum and energy of the pair are conserved
      for (int d = 0; d < dim; ++d)
        CHECK(geo.vprime[d] + geo.vsprime[d] ==
              doctest::Approx(v[d] + vstar[d]).epsilon(1e-12));
      CHECK(norm2(geo.vprime, dim) + norm2(geo.vsprime, dim) ==
            doctest::Approx(norm2(v, dim) + norm2(vstar, dim)).epsilon(1e-12));
      // w is perpendicular to vprime - v and |vprime - v| = r sin(theta/2)
      double dot = 0;
      for (int d = 0; d < dim; ++d) dot += geo.w[d] * (geo.vprime[d] - v[d]);
      CHECK(std::fabs(dot) < 1e-12 * geo.r * geo.r);
      double st2 = std::sqrt(std::max(0.0, 0.5 * (1.0 - geo.cos_theta)));
      CHECK(norm(sub(geo.vprime, v), dim) == doctest::Approx(geo.r * st2).epsilon(1e-11));
      // chart (v, vprime, w) -> (vstar, sigma) inverts the forward map
      auto back = geometry_from_chart(v, geo.vprime, geo.w, dim);
      for (int d = 0; d < dim; ++d) {
        CHECK(back.vstar[d] == doctest::Approx(vstar[d]).epsilon(5e-12));
        CHECK(back.sigma[d] == doctest::Approx(sig[d]).epsilon(5e-12));
      }
      CHECK(back.cos_theta == doctest::Approx(geo.cos_theta).epsilon(5e-12));
    }
  }
  CHECK_THROWS_AS(geometry_forward(vec2(1, 1), vec2(1, 1), vec2(0, 1), 2),
                  std::domain_error);
}

TEST_CASE("kernel: gaussian oracle in 2d, scaling exact for the product form") {
  // f = exp(-|v|^2), gamma=0.5, nu=1: the hyperplane moment at the origin is
  // Gamma(1.75) in each half-line, so K = 2 Gamma(1.75) d^{-3}.
  auto g = VelocityGrid::make(2, 96, 5.0);
  auto f = nodal_gauss(g);
  auto xs = reference_b(0.5, 1.0, 2);
  auto qp = QuadParams::defaults(2);
  double C = 2.0 * std::tgamma(1.75);
  Vec dir = vec2(std::cos(0.7), std::sin(0.7));
  for (double d : {0.3, 0.5, 1.0, 2.0}) {
    auto ke = kernel_Kf(xs, f, vec2(0, 0), scale(d, dir), qp);
    CHECK(ke.value == doctest::Approx(C * std::pow(d, -3.0)).epsilon(3e-3));
    CHECK(ke.err_estimate < 2e-2);
    CHECK(ke.nodes > 0);
  }
  // product form: K(d2)/K(d1) = (d2/d1)^{-(dim+nu)} to roundoff, and the
  // kernel only sees vprime - v through the hyperplane, so K(+y) = K(-y).
  Vec base = vec2(0.3, -0.2);
  auto k1 = kernel_Kf(xs, f, base, vec2(0.3 + 0.4, -0.2 + 0.3), qp);
  auto k2 = kernel_Kf(xs, f, base, vec2(0.3 + 0.8, -0.2 + 0.6), qp);
  CHECK(k2.value / k1.value == doctest::Approx(std::pow(2.0, -3.0)).epsilon(1e-12));
  auto kp = kernel_Kf(xs, f, base, vec2(0.9, 0.1), qp);
  auto km = kernel_Kf(xs, f, base, vec2(-0.3, -0.5), qp);
  CHECK(kp.value == doctest::Approx(km.value).epsilon(1e-12));
}

TEST_CASE("kernel: gaussian oracle in 3d") {
  // gamma=0.5, nu=0.5: plane moment of exp(-|v|^2) with |w|^2 weight is
  // pi Gamma(2) = pi per plane, K = 4 pi d^{-3.5}.
  auto g = VelocityGrid::make(3, 48, 4.5);
  auto f = nodal_gauss(g);
  auto xs = reference_b(0.5, 0.5, 3);
  auto qp = QuadParams::defaults(3);
  Vec dir = vec3(0.2, -0.4, 0.6);
  dir = scale(1.0 / norm(dir, 3), dir);
  for (double d : {0.5, 1.0}) {
    auto ke = kernel_Kf(xs, f, vec3(0, 0, 0), scale(d, dir), qp);
    CHECK(ke.value == doctest::Approx(4.0 * M_PI * std::pow(d, -3.5)).epsilon(1e-2));
  }
}

TEST_CASE("kernel: ball indicator chord oracle and linearity in f") {
  // unit ball, gamma=-0.5, nu=0.5, the chord through the center has
  // |w|-moment 2 int_0^1 w^0 dw = 2, so K = 2 d^{-2.5}.
  auto g = VelocityGrid::make(2, 128, 2.0);
  auto f = ball_indicator(g, vec2(0, 0), 1.0);
  auto xs = reference_b(-0.5, 0.5, 2);
  auto qp = QuadParams::defaults(2);
  for (double d : {0.4, 0.9}) {
    auto ke = kernel_Kf(xs, f, vec2(0, 0), vec2(d * 0.6, d * 0.8), qp);
    CHECK(ke.value == doctest::Approx(2.0 * std::pow(d, -2.5)).epsilon(6e-3));
  }
  // K_f is linear in f and vanishes on f = 0
  DistributionFunction f2 = f;
  for (auto& x : f2.values) x *= 3.0;
  auto ka = kernel_Kf(xs, f, vec2(0, 0), vec2(0.24, 0.32), qp);
  auto kb = kernel_Kf(xs, f2, vec2(0, 0), vec2(0.24, 0.32), qp);
  CHECK(kb.value == doctest::Approx(3.0 * ka.value).epsilon(1e-13));
  auto kz = kernel_Kf(xs, zeros(g), vec2(0, 0), vec2(0.24, 0.32), qp);
  CHECK(kz.value == 0.0);
  CHECK_THROWS_AS(kernel_Kf(xs, f, vec2(0.1, 0.1), vec2(0.1, 0.1), qp),
                  std::domain_error);
}

TEST_CASE("q1: gaussian radial oracle") {
  // f = g = exp(-|v|^2), gamma=0.5, nu=1, dim 2, evaluated at the origin.
  // Angular symmetry reduces q1 to 4 pi Gamma(1.75) times the radial integral
  // int_{h/4}^inf rho^{-2} (exp(-rho^2) - 1 - tail corrections) ... frozen
  // from a 50-digit quadrature of the exact reduced integrand.
  auto g = VelocityGrid::make(2, 96, 5.0);
  auto f = nodal_gauss(g);
  auto xs = reference_b(0.5, 1.0, 2);
  auto qp = QuadParams::defaults(2);
  qp.y_min = 0.25;  // the frozen value integrates the radial part from h/4
  auto ev = q1(xs, f, f, vec2(0, 0), qp);
  CHECK(ev.value == doctest::Approx(-20.166673041225863).epsilon(5e-3));
  CHECK(ev.diag_coef > 0.0);
  CHECK(ev.excluded_bound > 0.0);
}

TEST_CASE("q1: exactly linear in g, zero g gives pure nonpositive part") {
  auto g = VelocityGrid::make(2, 32, 4.0);
  auto f = gaussian_mixture(g, 5u, 2);
  auto gg = gaussian_mixture(g, 9u, 2);
  auto xs = reference_b(0.0, 1.0, 2);
  auto qp = QuadParams::defaults(2);
  Vec v = vec2(g.axis(20), g.axis(13));
  DistributionFunction g3 = gg;
  for (auto& x : g3.values) x *= 3.0;
  auto e1 = q1(xs, f, gg, v, qp);
  auto e3 = q1(xs, f, g3, v, qp);
  CHECK(e3.value == doctest::Approx(3.0 * e1.value).epsilon(1e-12));
  CHECK(e3.diag_coef == doctest::Approx(e1.diag_coef).epsilon(1e-12));
  auto ez = q1(xs, f, zeros(g), v, qp);
  CHECK(ez.value == 0.0);
}

TEST_CASE("q2: convolution weight oracles") {
  auto g = VelocityGrid::make(2, 96, 5.0);
  auto f = nodal_gauss(g);
  auto qp = QuadParams::defaults(2);
  Vec e = vec2(1, 0);

  // gamma=1, nu=0.5: the angular coefficient has a closed form (frozen), and
  // (|.| * exp(-|.|^2)) has frozen high-precision values at two points.
  auto xs = reference_b(1.0, 0.5, 2);
  auto bm = btilde(xs, e, qp.btilde_n, qp.btilde_tol);
  CHECK(bm.coef == doctest::Approx(10.166557017527749).epsilon(1e-6));
  auto sf = SmoothField::build(f);
  double q0 = q2_with_model(bm, f, f, vec2(0, 0));
  double qp1 = q2_with_model(bm, f, f, vec2(0.4, -0.2));
  CHECK(q0 / (bm.coef * sf(vec2(0, 0))) ==
        doctest::Approx(2.7841639984158539).epsilon(5e-3));
  CHECK(qp1 / (bm.coef * sf(vec2(0.4, -0.2))) ==
        doctest::Approx(3.0558449559106659).epsilon(5e-3));

  // gamma=0: the weight is 2 pi exactly and the convolution is the grid mass.
  auto xs0 = reference_b(0.0, 1.0, 2);
  auto bm0 = btilde(xs0, e, qp.btilde_n, qp.btilde_tol);
  CHECK(bm0.coef == doctest::Approx(2.0 * M_PI).epsilon(1e-12));
  double mass = moments(f).mass;
  CHECK(q2_with_model(bm0, f, f, vec2(0, 0)) / (bm0.coef * sf(vec2(0, 0))) ==
        doctest::Approx(mass).epsilon(1e-12));

  // the weight cannot depend on the reference direction beyond its own
  // integration tolerance
  auto bm_rot = btilde(xs, vec2(std::cos(1.1), std::sin(1.1)), qp.btilde_n, qp.btilde_tol);
  CHECK(bm_rot.coef == doctest::Approx(bm.coef).epsilon(10 * qp.btilde_tol));
}

TEST_CASE("q_direct: annihilates a maxwellian at a grid node") {
  auto g = VelocityGrid::make(2, 32, 4.0);
  auto xs = reference_b(0.0, 1.0, 2);
  auto qp = QuadParams::defaults(2);
  // temperature 1/2, so the box-edge trace is e^{-16}: the truncated-tail
  // grazing artifact stays below the quadrature floor (a unit-temperature
  // maxwellian on the same box already reads ~6e-3 through its e^{-8} tail)
  auto f = nodal_gauss(g);
  auto dv = q_direct(xs, f, f, vec2(g.axis(18), g.axis(14)), qp);
  // loss and gain each have magnitude ~1 here; 3e-3 is pure cancellation
  CHECK(std::fabs(dv.value) < 3e-3);
}

TEST_CASE("three representations agree: q_direct vs q1 + q2 on random mixtures") {
  auto g = VelocityGrid::make(2, 32, 4.0);
  auto xs = reference_b(0.0, 1.0, 2);
  auto fm = gaussian_mixture(g, 7u, 3);
  auto gm = gaussian_mixture(g, 11u, 3);
  auto qp = QuadParams::defaults(2);
  for (auto idx : {std::pair{18, 14}, std::pair{12, 20}, std::pair{21, 17}}) {
    Vec v = vec2(g.axis(idx.first), g.axis(idx.second));
    auto dd = q_direct(xs, fm, gm, v, qp);
    auto e1 = q1(xs, fm, gm, v, qp);
    double e2 = q2(xs, fm, gm, v, qp);
    double rel = std::fabs(dd.value - e1.value - e2) / std::max(1.0, std::fabs(dd.value));
    CHECK(rel < 5e-3);  // measured <= 8.6e-4; acceptance gate is 2e-2
  }
}

TEST_CASE("apply_collision: matches pointwise evaluators and is deterministic") {
  auto g = VelocityGrid::make(2, 24, 4.0);
  auto xs = reference_b(0.0, 1.0, 2);
  auto f = gaussian_mixture(g, 3u, 3);
  auto qp = QuadParams::defaults(2);
  auto fld = apply_collision(xs, f, f, qp, 2);
  for (auto idx : {std::pair{12, 12}, std::pair{7, 16}, std::pair{18, 5}}) {
    std::size_t flat = (std::size_t)idx.first * g.n + idx.second;
    Vec v = g.point(flat);
    auto e1 = q1(xs, f, f, v, qp);
    double e2 = q2(xs, f, f, v, qp);
    CHECK(fld.q1[flat] == doctest::Approx(e1.value).epsilon(1e-12));
    CHECK(fld.q2[flat] == doctest::Approx(e2).epsilon(1e-12));
    CHECK(fld.q1_diag[flat] == doctest::Approx(e1.diag_coef).epsilon(1e-12));
  }
  // thread count must not change a single bit
  auto fld1 = apply_collision(xs, f, f, qp, 1);
  auto fld4 = apply_collision(xs, f, f, qp, 4);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(fld1.q1[i] == fld4.q1[i]);
    CHECK(fld1.q2[i] == fld4.q2[i]);
  }
}

TEST_CASE("apply_collision: moment defects of the nodal sum are small and shrink") {
  auto xs = reference_b(0.0, 1.0, 2);
  double prev = 1e30;
  for (int n : {24, 32}) {
    auto g = VelocityGrid::make(2, n, 4.0);
    auto f = gaussian_mixture(g, 7u, 3);
    auto fld = apply_collision(xs, f, f, QuadParams::defaults(2), 2);
    double cell = std::pow(g.h, 2);
    double dm = 0, de = 0, sm = 0, se = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      double q = fld.q1[i] + fld.q2[i];
      double w2 = norm2(g.point(i), 2);
      dm += q * cell;
      de += q * w2 * cell;
      sm += std::fabs(q) * cell;
      se += std::fabs(q) * w2 * cell;
    }
    double mass_defect = std::fabs(dm) / sm;
    CHECK(mass_defect < 8e-3);              // measured 3.1e-3 (24), 1.4e-3 (32)
    CHECK(std::fabs(de) / se < 8e-3);       // measured 1.2e-3, 4.8e-4
    CHECK(mass_defect < prev);
    prev = mass_defect;
  }
}

TEST_CASE("change of variables: sigma form equals hyperplane chart form") {
  auto xs2 = reference_b(0.5, 1.0, 2);
  auto r2 = verify_change_of_variables(xs2, 2, 1);
  CHECK(r2.rel_gap < 5e-3);  // measured 1.6e-3
  auto xs3 = reference_b(0.5, 1.0, 3);
  auto r3 = verify_change_of_variables(xs3, 3, 1);
  CHECK(r3.rel_gap < 2e-3);  // measured 3.5e-4
}

TEST_CASE("dual polar identity: both orders of integration match c_N") {
  for (int dim : {2, 3}) {
    auto iso = verify_dual_polar(dim, 0, 0);
    CHECK(iso.rel_gap < 1e-9);  // isotropic test function: exact to quadrature
    auto aniso = verify_dual_polar(dim, 0, 1);
    CHECK(aniso.rel_gap < 5e-3);  // measured 2.7e-14 (2d), 1.2e-3 (3d)
  }
}
