#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <initializer_list>
#include <limits>
#include <random>

#include "tentkit/dg1d.hpp"
#include "tentkit/errors.hpp"
#include "tentkit/models.hpp"

using namespace tentkit;
using doctest::Approx;

namespace {

const double kPi = std::acos(-1.0);

double moment(const Eigen::VectorXd& xi, const Eigen::VectorXd& w, int k) {
  double acc = 0.0;
  for (int i = 0; i < xi.size(); ++i) acc += w[i] * std::pow(xi[i], k);
  return acc;
}

}  // namespace

TEST_CASE("quadrature nodes and weights") {
  Eigen::VectorXd xi, w;
  gauss_legendre(1, xi, w);
  CHECK(xi[0] == 0.0);
  CHECK(w[0] == 2.0);

  gauss_legendre(2, xi, w);
  CHECK(std::abs(xi[0] + 1.0 / std::sqrt(3.0)) < 1e-15);
  CHECK(std::abs(xi[1] - 1.0 / std::sqrt(3.0)) < 1e-15);
  CHECK(std::abs(w[0] - 1.0) < 1e-15);
  CHECK(std::abs(w[1] - 1.0) < 1e-15);

  // An n-point rule integrates monomials up to degree 2n - 1 exactly.
  for (int n : {3, 5, 8, 11}) {
    gauss_legendre(n, xi, w);
    CHECK(std::abs(w.sum() - 2.0) < 1e-14);
    for (int i = 1; i < n; ++i) CHECK(xi[i] > xi[i - 1]);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      const double exact = k % 2 == 1 ? 0.0 : 2.0 / (k + 1);
      CHECK(std::abs(moment(xi, w, k) - exact) < 2e-14);
    }
    // ... and gets degree 2n wrong.
    CHECK(std::abs(moment(xi, w, 2 * n) - 2.0 / (2 * n + 1)) > 1e-8);
  }

  CHECK_THROWS_AS(gauss_legendre(0, xi, w), Error);
}

TEST_CASE("legendre values and derivatives") {
  Eigen::VectorXd v = legendre_at(3, 0.5);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 0.5);
  CHECK(std::abs(v[2] - (3.0 * 0.25 - 1.0) / 2.0) < 1e-15);
  CHECK(std::abs(v[3] - (5.0 * 0.125 - 3.0 * 0.5) / 2.0) < 1e-15);

  // Endpoint values drive the trace vectors.
  Eigen::VectorXd left = legendre_at(4, -1.0), right = legendre_at(4, 1.0);
  for (int i = 0; i <= 4; ++i) {
    CHECK(right[i] == 1.0);
    CHECK(left[i] == (i % 2 == 0 ? 1.0 : -1.0));
  }
}

TEST_CASE("space tables") {
  DgSpace space(Mesh1D::uniform(0.0, 1.0, 10), 2);
  CHECK(space.degree() == 2);
  CHECK(space.elem_dim() == 3);
  CHECK(space.total_dim() == 30);
  CHECK(space.quad_count() == 5);     // p + 3
  CHECK(space.err_xi().size() == 9);  // p + 7

  for (int i = 0; i <= 2; ++i) {
    CHECK(space.trace_right()[i] == 1.0);
    CHECK(space.trace_left()[i] == (i % 2 == 0 ? 1.0 : -1.0));
    CHECK(space.inv_mass_ref()[i] == (2 * i + 1) / 2.0);
  }

  // Basis table columns match pointwise evaluation; derivative table matches
  // the closed forms P1' = 1, P2' = 3 xi.
  for (int iq = 0; iq < space.quad_count(); ++iq) {
    const double xi = space.quad_xi()[iq];
    Eigen::VectorXd v = legendre_at(2, xi);
    for (int i = 0; i <= 2; ++i)
      CHECK(space.basis_at_quad()(i, iq) == Approx(v[i]).epsilon(1e-15));
    CHECK(space.dbasis_at_quad()(0, iq) == 0.0);
    CHECK(space.dbasis_at_quad()(1, iq) == 1.0);
    CHECK(std::abs(space.dbasis_at_quad()(2, iq) - 3.0 * xi) < 1e-15);
  }

  CHECK(space.elem_x(3, -1.0) == Approx(0.3).epsilon(1e-15));
  CHECK(space.elem_x(3, 1.0) == Approx(0.4).epsilon(1e-15));

  CHECK_THROWS_AS(DgSpace(Mesh1D::uniform(0.0, 1.0, 10), -1), Error);
}

TEST_CASE("projection reproduces polynomials and integrals") {
  DgSpace space(Mesh1D::uniform(0.0, 1.0, 10), 2);
  auto quadratic = [](double x) { return 3.0 * x * x - 2.0 * x + 0.25; };
  GlobalState st = project_initial(space, quadratic);
  CHECK(st.front.size() == 11);
  for (double t : st.front) CHECK(t == 0.0);
  CHECK(st.snapshot == 0);

  // Degree <= p data projects exactly.
  CHECK(l2_error(space, st, quadratic) < 1e-14);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const double x = unif(rng);
    CHECK(std::abs(eval_state(space, st, x) - quadratic(x)) < 1e-13);
  }

  // Integral of the projection equals the integral of the datum
  // (1 - 1 + 1/4 for the quadratic).
  CHECK(integral(space, st) == Approx(0.25).epsilon(1e-14));

  // Frozen best-approximation error for the Gaussian pulse.
  GlobalState pulse = project_initial(space, burgers_initial);
  CHECK(l2_error(space, pulse, burgers_initial) ==
        Approx(1.7734716478584381e-03).epsilon(1e-12));

  // The error norm demands a flat front.
  pulse.front[4] = 0.1;
  CHECK_THROWS_AS(l2_error(space, pulse, burgers_initial), Error);
}

TEST_CASE("patch mass operators invert each other") {
  Mesh1D mesh = Mesh1D::uniform(0.0, 1.0, 8, true);
  TentSlab slab = pitch_slab(mesh, 2.0, 0.2, 0.99);
  DgSpace space(mesh, 2);
  Advection1D advection(1.0, [](double x) { return std::sin(2.0 * kPi * x); });
  Burgers1D burgers;

  // A tent from a later level sees a genuinely sloped bottom front.
  const Tent* sloped = nullptr;
  for (const Tent& tent : slab.tents)
    if (tent.level >= 1) {
      sloped = &tent;
      break;
    }
  REQUIRE(sloped != nullptr);

  std::mt19937_64 rng(20260814);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (const FluxModel* model :
       std::initializer_list<const FluxModel*>{&advection, &burgers}) {
    const int r = 4;
    PatchSystem ps(space, *model, *sloped, r);
    CHECK(ps.dim() == 2 * space.elem_dim());
    CHECK(ps.is_linear() == model->is_linear());
    // The linear path solves the diagonal system directly; the nonlinear
    // path stops at the 1e-12 residual, worth ~5e-11 in the solution here.
    const double tol = model->is_linear() ? 1e-13 : 1e-10;
    Eigen::VectorXd w(ps.dim()), rhs(ps.dim()), back(ps.dim());
    for (int i = 0; i < w.size(); ++i) w[i] = 0.5 * unif(rng);
    for (int k = 0; k < r; ++k) {
      ps.set_substep(k);
      ps.apply_m0(w, rhs);
      ps.solve_m0(rhs, back);
      CHECK((back - w).norm() < tol);
    }
    // The mass operator at the top of substep k is the one at the bottom of
    // substep k + 1.
    ps.set_substep(1);
    ps.apply_m0(w, rhs);
    ps.set_substep(0);
    ps.solve_m(1.0, rhs, back);
    CHECK((back - w).norm() < tol);

    CHECK_THROWS_AS(ps.set_substep(r), Error);
    CHECK_THROWS_AS(ps.solve_m(1.5, rhs, back), Error);
  }

  // On a flat bottom front at substep 0 the mass operator is the plain
  // diagonal Legendre mass matrix.
  const Tent& flat = slab.tents.front();
  REQUIRE(flat.level == 0);
  PatchSystem ps(space, advection, flat, 4);
  ps.set_substep(0);
  Eigen::VectorXd w(ps.dim()), rhs(ps.dim());
  for (int i = 0; i < w.size(); ++i) w[i] = unif(rng);
  ps.apply_m0(w, rhs);
  const int nd = space.elem_dim();
  for (int le = 0; le < 2; ++le)
    for (int i = 0; i < nd; ++i) {
      const double mass = 0.5 * mesh.h(flat.elements[le]) * 2.0 / (2 * i + 1);
      CHECK(rhs[le * nd + i] == Approx(mass * w[le * nd + i]).epsilon(1e-14));
    }

  CHECK_THROWS_AS(PatchSystem(space, advection, flat, 0), Error);
}

TEST_CASE("transport operator balances the mean modes") {
  // The tent height vanishes at the patch rim, so no flux leaves the patch:
  // the mean-mode rows of A (each already integrated over its element)
  // cancel between the two elements of an interior tent.
  Mesh1D mesh = Mesh1D::uniform(0.0, 1.0, 8, true);
  TentSlab slab = pitch_slab(mesh, 2.0, 0.2, 0.99);
  DgSpace space(mesh, 2);
  Advection1D advection(1.0, [](double x) { return std::sin(2.0 * kPi * x); });
  Burgers1D burgers;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (const FluxModel* model :
       std::initializer_list<const FluxModel*>{&advection, &burgers}) {
    for (const Tent* tent : {&slab.tents.front(), &slab.tents.back()}) {
      PatchSystem ps(space, *model, *tent, 2);
      ps.set_substep(0);
      Eigen::VectorXd w(ps.dim()), a(ps.dim());
      for (int i = 0; i < w.size(); ++i) w[i] = 0.4 * unif(rng);
      ps.apply_a(w, a);
      double balance = 0.0;
      for (std::size_t le = 0; le < tent->elements.size(); ++le)
        balance += a[le * space.elem_dim()];
      CHECK(std::abs(balance) < 1e-16);
    }
  }
}

TEST_CASE("tent propagation preserves constants and guards its front") {
  Mesh1D mesh = Mesh1D::uniform(0.0, 1.0, 8, true);
  TentSlab slab = pitch_slab(mesh, 2.0, 0.2, 0.99);
  DgSpace space(mesh, 2);
  Advection1D advection(1.0, [](double) { return 0.75; });
  GlobalState st = project_initial(space, [](double) { return 0.75; });
  const Tent& first = slab.tents.front();

  propagate_tent(space, advection, first, builtin_sark("sark2-ralston"), 4, st);
  CHECK(st.snapshot == 1);
  CHECK(st.front[first.center] == first.phi_top[first.center_pos]);
  const int nd = space.elem_dim();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    CHECK(std::abs(st.coeffs[e * nd] - 0.75) < 1e-13);
    CHECK(std::abs(st.coeffs[e * nd + 1]) < 1e-14);
    CHECK(std::abs(st.coeffs[e * nd + 2]) < 1e-14);
  }

  // Replaying the same tent violates its bottom-front precondition.
  CHECK_THROWS_WITH_AS(
      propagate_tent(space, advection, first, builtin_sark("sark2-ralston"), 4,
                     st),
      doctest::Contains("tent 0"), Error);
}

TEST_CASE("slab propagation: nonlinear free stream stays constant") {
  Mesh1D mesh = Mesh1D::uniform(0.0, 1.0, 10);
  TentSlab slab = pitch_slab(mesh, 8.0, 0.1, 0.99);
  DgSpace space(mesh, 2);
  Burgers1D burgers([](double) { return 0.7; });
  GlobalState st =
      project_initial(space, [&](double x) { return burgers.initial(x); });
  propagate_slab(space, burgers, slab, builtin_sark("sark2-ralston"), 4, st);
  CHECK(st.snapshot == static_cast<int>(slab.tents.size()));
  for (double t : st.front) CHECK(t == slab.t_max);
  CHECK(l2_error(space, st, [](double) { return 0.7; }) < 1e-11);
}

TEST_CASE("slab propagation conserves the integral on a periodic domain") {
  Mesh1D mesh = Mesh1D::uniform(0.0, 1.0, 16, true);
  TentSlab slab = pitch_slab(mesh, 2.0, 0.2, 0.99);
  DgSpace space(mesh, 2);
  Advection1D advection(1.0, [](double x) { return std::sin(2.0 * kPi * x) + 0.3; });
  GlobalState st = project_initial(space, [&](double x) { return advection.initial(x); });
  const double before = integral(space, st);
  propagate_slab(space, advection, slab, builtin_sark("sark3-heun"), 4, st);
  CHECK(std::abs(integral(space, st) - before) < 1e-13);
}

TEST_CASE("slab propagation matches frozen transport errors") {
  // End-to-end anchors: L2 errors of complete slab runs, frozen from an
  // independent implementation of the same discretization.
  const int r = 4;
  DgSpace space16(Mesh1D::uniform(0.0, 1.0, 16, true), 2);
  Advection1D advection(1.0, [](double x) { return std::sin(2.0 * kPi * x); });
  TentSlab slab16 = pitch_slab(space16.mesh(), 2.0, 0.2, 0.99);
  CHECK(slab16.tents.size() == 100);
  GlobalState st = project_initial(space16, [&](double x) { return advection.initial(x); });
  propagate_slab(space16, advection, slab16, builtin_sark("sark3-heun"), r, st);
  auto exact16 = [&](double x) { return advection.exact(x, 0.2); };
  CHECK(l2_error(space16, st, exact16) ==
        Approx(3.3640458773863543e-04).epsilon(1e-10));

  DgSpace space32(Mesh1D::uniform(0.0, 1.0, 32, true), 2);
  TentSlab slab32 = pitch_slab(space32.mesh(), 2.0, 0.2, 0.99);
  CHECK(slab32.tents.size() == 374);
  GlobalState st32 = project_initial(space32, [&](double x) { return advection.initial(x); });
  propagate_slab(space32, advection, slab32, builtin_sark("sark3-heun"), r, st32);
  CHECK(l2_error(space32, st32, exact16) ==
        Approx(5.2538505767991389e-05).epsilon(1e-10));
}

TEST_CASE("concurrent slab execution is bitwise equal to sequential") {
  Mesh1D mesh = Mesh1D::uniform(0.0, 1.0, 32, true);
  TentSlab slab = pitch_slab(mesh, 2.0, 0.2, 0.99);
  DgSpace space(mesh, 3);
  Advection1D advection(1.0, [](double x) { return std::sin(2.0 * kPi * x); });
  auto ic = [&](double x) { return advection.initial(x); };

  GlobalState seq = project_initial(space, ic);
  propagate_slab(space, advection, slab, builtin_sark("sark2-ralston"), 4, seq);

  for (int threads : {2, 4, 7}) {
    GlobalState par = project_initial(space, ic);
    propagate_slab(space, advection, slab, builtin_sark("sark2-ralston"), 4,
                   par, threads);
    CHECK(par.snapshot == seq.snapshot);
    CHECK((par.coeffs.array() == seq.coeffs.array()).all());
    CHECK(par.front == seq.front);
  }

  // The classical path shares the driver; check one thread count there too.
  GlobalState rk_seq = project_initial(space, ic);
  propagate_slab(space, advection, slab, builtin_rk("rk2-ralston"), 4, rk_seq);
  GlobalState rk_par = project_initial(space, ic);
  propagate_slab(space, advection, slab, builtin_rk("rk2-ralston"), 4, rk_par,
                 4);
  CHECK((rk_par.coeffs.array() == rk_seq.coeffs.array()).all());

  // Failures inside a worker surface on the caller with full context.
  Burgers1D nan_data([](double) { return std::numeric_limits<double>::quiet_NaN(); });
  TentSlab bslab = pitch_slab(Mesh1D::uniform(0.0, 1.0, 10), 8.0, 0.1, 0.99);
  DgSpace bspace(bslab.mesh, 2);
  GlobalState bad = project_initial(bspace, [&](double x) { return nan_data.initial(x); });
  CHECK_THROWS_WITH_AS(
      propagate_slab(bspace, nan_data, bslab, builtin_sark("sark2-ralston"), 4,
                     bad, 4),
      doctest::Contains("element"), Error);
}

TEST_CASE("solver failures carry tent and element context") {
  Mesh1D mesh = Mesh1D::uniform(0.0, 1.0, 10);
  TentSlab slab = pitch_slab(mesh, 8.0, 0.1, 0.99);
  DgSpace space(mesh, 2);
  Burgers1D nan_data([](double) { return std::numeric_limits<double>::quiet_NaN(); });
  GlobalState st = project_initial(space, [&](double x) { return nan_data.initial(x); });
  try {
    propagate_slab(space, nan_data, slab, builtin_sark("sark2-ralston"), 4, st);
    FAIL("expected the mass inversion to reject NaN data");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(what.find("tent 0") != std::string::npos);
    CHECK(what.find("substep") != std::string::npos);
    CHECK(what.find("element") != std::string::npos);
  }
}
