#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "tentkit/errors.hpp"
#include "tentkit/ode_core.hpp"
#include "tentkit/tableau.hpp"

using namespace tentkit;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Fixed 4x4 test pair with ||L||, ||B|| about one; the reference values below
// were tabulated beforehand with an independent 50-digit integrator.
MatrixXd test_l() {
  MatrixXd l(4, 4);
  l << 0, 1, 0, 0,
      -1, 0, 0.5, 0,
      0, -0.5, 0, 1.0 / 3,
      0, 0, -1.0 / 3, 0;
  return l;
}

MatrixXd test_b() {
  MatrixXd b(4, 4);
  b << 0.25, 0, 0.125, 0,
      0, -0.25, 0, 0.125,
      0.125, 0, 0.25, 0,
      0, 0.125, 0, -0.25;
  return b;
}

VectorXd test_y0() {
  VectorXd y0(4);
  y0 << 1.0, 0.5, -1.0 / 3, 0.25;
  return y0;
}

void check_close(const VectorXd& got, const std::vector<double>& want, double tol) {
  REQUIRE(got.size() == static_cast<long>(want.size()));
  for (long i = 0; i < got.size(); ++i) {
    CAPTURE(i);
    CHECK(std::abs(got[i] - want[i]) <= tol);
  }
}

MatrixXd random_unit_norm(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = dist(rng);
  const double norm2 = Eigen::JacobiSVD<MatrixXd>(m).singularValues()(0);
  return m / norm2;
}

struct FakeNonlinear : DenseLinearOde {
  using DenseLinearOde::DenseLinearOde;
  bool is_linear() const override { return false; }
};

struct BrokenSolve : StructuredOde {
  int dim() const override { return 1; }
  bool is_linear() const override { return true; }
  void apply_m0(const VectorXd& w, VectorXd& out) const override { out = w; }
  void apply_m1(const VectorXd& w, VectorXd& out) const override { out = w; }
  void apply_a(const VectorXd& w, VectorXd& out) const override { out = w; }
  void solve_m0(const VectorXd&, VectorXd&) const override {
    fail("inner solve exploded");
  }
  void solve_m(double, const VectorXd&, VectorXd&) const override {
    fail("inner solve exploded");
  }
};

}  // namespace

TEST_CASE("reference flow reproduces the tabulated 4x4 values") {
  const std::vector<double> at_one = {
      0.8988393169791295, -0.8151100372677503,
      -0.19856174606111061, 0.33798115714812489};
  const std::vector<double> at_half = {
      1.0932723943418842, -0.15073064069310908,
      -0.33595758843504638, 0.30524026844962473};

  SUBCASE("identity mass operator") {
    DenseLinearOde ode(MatrixXd::Identity(4, 4), test_b(), test_l());
    check_close(reference_flow(ode, test_y0(), 1.0), at_one, 1e-11);
    check_close(reference_flow(ode, test_y0(), 0.5), at_half, 1e-11);
  }
  SUBCASE("non-identity mass operator with the same reduced maps") {
    MatrixXd p(4, 4);
    p << 2, 0.5, 0, 0,
        0.5, 2, 0.5, 0,
        0, 0.5, 2, 0.5,
        0, 0, 0.5, 2;
    // A = L P and M1 = B P give A o M0^-1 = L, M1 o M0^-1 = B.
    DenseLinearOde ode(p, test_b() * p, test_l() * p);
    check_close(reference_flow(ode, test_y0(), 1.0), at_one, 1e-11);
  }
}

TEST_CASE("reference flow trivial limits") {
  SUBCASE("zero transport keeps Y frozen") {
    DenseLinearOde ode(MatrixXd::Identity(4, 4), test_b(), MatrixXd::Zero(4, 4));
    VectorXd y = reference_flow(ode, test_y0(), 1.0);
    CHECK((y - test_y0()).norm() == 0.0);
  }
  SUBCASE("zero mass change reduces to the matrix exponential") {
    MatrixXd l(2, 2);
    l << 0, 1, -1, 0;
    DenseLinearOde ode(MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2), l);
    VectorXd y0(2);
    y0 << 1, 0;
    VectorXd y = reference_flow(ode, y0, 1.0);
    CHECK(std::abs(y[0] - std::cos(1.0)) <= 1e-12);
    CHECK(std::abs(y[1] + std::sin(1.0)) <= 1e-12);
  }
  SUBCASE("nonlinear systems are rejected") {
    FakeNonlinear ode(MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2),
                      MatrixXd::Zero(2, 2));
    CHECK_THROWS_AS(reference_flow(ode, VectorXd::Zero(2), 1.0), Error);
  }
}

TEST_CASE("sark_step basics") {
  DenseLinearOde ode(MatrixXd::Identity(4, 4), test_b(), test_l());
  SarkTableau heun = builtin_sark("sark2-heun");

  SUBCASE("zero step width returns the input") {
    VectorXd y = sark_step(ode, heun, 0.0, test_y0());
    CHECK((y - test_y0()).norm() == 0.0);
  }
  SUBCASE("scalar step matches the two-stage closed form") {
    const double lam = 0.7, beta = -0.3, tau = 0.25, y0 = 1.3;
    DenseLinearOde scalar(MatrixXd::Identity(1, 1),
                          MatrixXd::Constant(1, 1, beta),
                          MatrixXd::Constant(1, 1, lam));
    VectorXd y(1);
    y << y0;
    const double want =
        y0 * (1.0 + tau * lam + 0.5 * tau * tau * lam * (beta + lam));
    CHECK(std::abs(sark_step(scalar, heun, tau, y)[0] - want) <= 1e-15);
  }
  SUBCASE("schemes of equal stage count coincide on linear systems") {
    VectorXd mid = sark_step(ode, builtin_sark("sark2-midpoint"), 0.3, test_y0());
    VectorXd ral = sark_step(ode, builtin_sark("sark2-ralston"), 0.3, test_y0());
    VectorXd heu = sark_step(ode, heun, 0.3, test_y0());
    CHECK((mid - ral).norm() <= 1e-13);
    CHECK((mid - heu).norm() <= 1e-13);
    VectorXd kut = sark_step(ode, builtin_sark("sark3-kutta"), 0.3, test_y0());
    VectorXd he3 = sark_step(ode, builtin_sark("sark3-heun"), 0.3, test_y0());
    CHECK((kut - he3).norm() <= 1e-13);
  }
  SUBCASE("stage recording") {
    std::vector<VectorXd> stages;
    sark_step(ode, heun, 0.1, test_y0(), &stages);
    REQUIRE(stages.size() == 2);
    CHECK((stages[0] - test_y0()).norm() == 0.0);
  }
}

TEST_CASE("tent solve composes subtent steps and the top recovery") {
  const double lam = 0.8, beta = 0.25;
  DenseLinearOde scalar(MatrixXd::Identity(1, 1), MatrixXd::Constant(1, 1, beta),
                        MatrixXd::Constant(1, 1, lam));
  auto provider = [&](int) -> const StructuredOde& { return scalar; };
  SarkTableau heun = builtin_sark("sark2-heun");
  VectorXd u0(1);
  u0 << 1.7;

  SUBCASE("subtent product against the scalar closed form") {
    SubtentPlan plan{4};
    StepTrace trace;
    VectorXd u1 = sark_tent_solve(provider, heun, plan, u0, &trace);
    REQUIRE(trace.y.size() == 5);
    REQUIRE(trace.stages.size() == 4);
    CHECK(trace.stages[0].size() == 2);
    CHECK(trace.y[0][0] == u0[0]);
    const double tau = plan.tau();
    const double t_step = 1.0 + tau * lam + 0.5 * tau * tau * lam * (beta + lam);
    const double y_top = u0[0] * std::pow(t_step, 4);
    CHECK(std::abs(trace.y[4][0] - y_top) <= 1e-14 * std::abs(y_top));
    CHECK(std::abs(u1[0] - trace.y[4][0] / (1.0 - beta)) <= 1e-15);
  }
  SUBCASE("r = 1 equals one step plus the top solve") {
    VectorXd direct = sark_step(scalar, heun, 1.0, u0);
    VectorXd u_direct(1);
    scalar.solve_m(1.0, direct, u_direct);
    VectorXd u1 = sark_tent_solve(provider, heun, SubtentPlan{1}, u0);
    CHECK(u1[0] == u_direct[0]);
  }
  SUBCASE("coefficient and dual entry points agree") {
    VectorXd y0(1);
    scalar.apply_m0(u0, y0);
    VectorXd a = sark_tent_solve(provider, heun, SubtentPlan{3}, u0);
    VectorXd b = sark_tent_solve_dual(provider, heun, SubtentPlan{3}, y0);
    CHECK((a - b).norm() == 0.0);
  }
  SUBCASE("determinism") {
    VectorXd a = sark_tent_solve(provider, heun, SubtentPlan{5}, u0);
    VectorXd b = sark_tent_solve(provider, heun, SubtentPlan{5}, u0);
    CHECK((a - b).norm() == 0.0);
  }
}

TEST_CASE("classical path") {
  SUBCASE("forward Euler on one subtent, scalar system") {
    const double lam = -0.6, beta = 0.4;
    DenseLinearOde scalar(MatrixXd::Identity(1, 1),
                          MatrixXd::Constant(1, 1, beta),
                          MatrixXd::Constant(1, 1, lam));
    auto provider = [&](int) -> const StructuredOde& { return scalar; };
    ButcherTableau euler;
    euler.name = "euler";
    euler.stages = 1;
    euler.nominal_order = 1;
    euler.a = {0.0};
    euler.b = {1.0};
    euler.c = {0.0};
    VectorXd u0(1);
    u0 << 2.0;
    VectorXd u1 = classical_rk_tent_solve(provider, euler, SubtentPlan{1}, u0);
    const double want = u0[0] * (1.0 + lam) / (1.0 - beta);
    CHECK(std::abs(u1[0] - want) <= 1e-15);
  }
  SUBCASE("vanishing mass change reduces to the underlying classical scheme") {
    DenseLinearOde ode(MatrixXd::Identity(4, 4), MatrixXd::Zero(4, 4), test_l());
    auto provider = [&](int) -> const StructuredOde& { return ode; };
    for (auto [sark_name, rk_name] :
         {std::pair{"sark2-ralston", "rk2-ralston"},
          std::pair{"sark3-heun", "rk3-heun"}}) {
      CAPTURE(sark_name);
      VectorXd a = sark_tent_solve(provider, builtin_sark(sark_name),
                                   SubtentPlan{3}, test_y0());
      VectorXd b = classical_rk_tent_solve(provider, builtin_rk(rk_name),
                                           SubtentPlan{3}, test_y0());
      CHECK((a - b).norm() <= 1e-13);
    }
  }
}

TEST_CASE("local order estimates sit one above the attained order") {
  std::mt19937_64 rng(20260814);
  const std::vector<double> taus = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64,
                                    1.0 / 128, 1.0 / 256};
  for (int rep = 0; rep < 2; ++rep) {
    DenseLinearOde ode(MatrixXd::Identity(4, 4), random_unit_norm(rng, 4),
                       random_unit_norm(rng, 4));
    VectorXd y0 = VectorXd::Ones(4);
    const double s2 =
        local_order_estimate(builtin_sark("sark2-ralston"), ode, y0, taus);
    CHECK(s2 > 2.8);
    CHECK(s2 < 3.2);
    const double s3 =
        local_order_estimate(builtin_sark("sark3-heun"), ode, y0, taus);
    CHECK(s3 > 3.8);
    CHECK(s3 < 4.2);
  }
}

TEST_CASE("solver failures carry substep and stage context") {
  BrokenSolve ode;
  auto provider = [&](int) -> const StructuredOde& { return ode; };
  VectorXd y0 = VectorXd::Ones(1);
  try {
    sark_tent_solve_dual(provider, builtin_sark("sark2-heun"), SubtentPlan{2}, y0);
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("substep") != std::string::npos);
    CHECK(msg.find("stage") != std::string::npos);
    CHECK(msg.find("inner solve exploded") != std::string::npos);
  }
}
