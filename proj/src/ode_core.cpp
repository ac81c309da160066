#include "tentkit/ode_core.hpp"

#include <cmath>

#include "tentkit/errors.hpp"

namespace tentkit {

DenseLinearOde::DenseLinearOde(Eigen::MatrixXd m0, Eigen::MatrixXd m1,
                               Eigen::MatrixXd a)
    : m0_(std::move(m0)), m1_(std::move(m1)), a_(std::move(a)) {
  require(m0_.rows() == m0_.cols() && m1_.rows() == m1_.cols() &&
              a_.rows() == a_.cols() && m0_.rows() == m1_.rows() &&
              m0_.rows() == a_.rows(),
          "DenseLinearOde: operator matrices must be square and equally sized");
  lu_m0_.compute(m0_);
}

void DenseLinearOde::apply_m0(const Eigen::VectorXd& w, Eigen::VectorXd& out) const {
  out.noalias() = m0_ * w;
}
void DenseLinearOde::apply_m1(const Eigen::VectorXd& w, Eigen::VectorXd& out) const {
  out.noalias() = m1_ * w;
}
void DenseLinearOde::apply_a(const Eigen::VectorXd& w, Eigen::VectorXd& out) const {
  out.noalias() = a_ * w;
}
void DenseLinearOde::solve_m0(const Eigen::VectorXd& rhs, Eigen::VectorXd& w) const {
  w = lu_m0_.solve(rhs);
}
void DenseLinearOde::solve_m(double that, const Eigen::VectorXd& rhs,
                             Eigen::VectorXd& w) const {
  if (that == 0.0) {
    solve_m0(rhs, w);
    return;
  }
  w = (m0_ - that * m1_).partialPivLu().solve(rhs);
}

namespace {

// Shared stage recursion; writes A~(Z_i), M1~(Z_i) for all stages of one step.
// substep is only used to annotate solver failures (-1: standalone step).
void sark_stages(const StructuredOde& ode, const SarkTableau& t, double tau,
                 const Eigen::VectorXd& y, std::vector<Eigen::VectorXd>& az,
                 std::vector<Eigen::VectorXd>& mz,
                 std::vector<Eigen::VectorXd>* stages, int substep = -1) {
  const int s = t.stages;
  Eigen::VectorXd z, w(ode.dim());
  for (int i = 0; i < s; ++i) {
    z = y;
    for (int j = 0; j < i; ++j) {
      const double dij = t.D(i, j), aij = t.A(i, j);
      if (dij != 0.0) z.noalias() += (tau * dij) * mz[j];
      if (aij != 0.0) z.noalias() += (tau * aij) * az[j];
    }
    if (stages) stages->push_back(z);
    try {
      ode.solve_m0(z, w);
    } catch (const std::exception& e) {
      if (substep >= 0) fail("stage ", i, " of substep ", substep, ": ", e.what());
      fail("stage ", i, ": ", e.what());
    }
    ode.apply_a(w, az[i]);
    ode.apply_m1(w, mz[i]);
  }
}

}  // namespace

Eigen::VectorXd sark_step(const StructuredOde& ode, const SarkTableau& t,
                          double tau, const Eigen::VectorXd& y,
                          std::vector<Eigen::VectorXd>* stages) {
  validate(t);
  require(y.size() == ode.dim(), "sark_step: state size ", y.size(),
          " does not match system dimension ", ode.dim());
  std::vector<Eigen::VectorXd> az(t.stages), mz(t.stages);
  sark_stages(ode, t, tau, y, az, mz, stages);
  Eigen::VectorXd out = y;
  for (int i = 0; i < t.stages; ++i)
    if (t.b[i] != 0.0) out.noalias() += (tau * t.b[i]) * az[i];
  return out;
}

Eigen::VectorXd sark_tent_solve_dual(const OdeProvider& ode_for,
                                     const SarkTableau& t, const SubtentPlan& plan,
                                     const Eigen::VectorXd& y0, StepTrace* trace) {
  validate(t);
  require(plan.r >= 1, "sark_tent_solve: subtent count must be positive, got ",
          plan.r);
  const double tau = plan.tau();
  Eigen::VectorXd y = y0;
  if (trace) trace->y.push_back(y);
  std::vector<Eigen::VectorXd> az(t.stages), mz(t.stages);
  for (int k = 0; k < plan.r; ++k) {
    const StructuredOde& ode = ode_for(k);
    std::vector<Eigen::VectorXd>* stages = nullptr;
    if (trace) {
      trace->stages.emplace_back();
      stages = &trace->stages.back();
    }
    sark_stages(ode, t, tau, y, az, mz, stages, k);
    for (int i = 0; i < t.stages; ++i)
      if (t.b[i] != 0.0) y.noalias() += (tau * t.b[i]) * az[i];
    if (trace) trace->y.push_back(y);
  }
  Eigen::VectorXd u1(y.size());
  ode_for(plan.r - 1).solve_m(1.0, y, u1);
  return u1;
}

Eigen::VectorXd sark_tent_solve(const OdeProvider& ode_for, const SarkTableau& t,
                                const SubtentPlan& plan, const Eigen::VectorXd& u0,
                                StepTrace* trace) {
  Eigen::VectorXd y0(u0.size());
  ode_for(0).apply_m0(u0, y0);
  return sark_tent_solve_dual(ode_for, t, plan, y0, trace);
}

Eigen::VectorXd classical_rk_tent_solve(const OdeProvider& ode_for,
                                        const ButcherTableau& t,
                                        const SubtentPlan& plan,
                                        const Eigen::VectorXd& u0,
                                        StepTrace* trace) {
  validate(t);
  require(plan.r >= 1,
          "classical_rk_tent_solve: subtent count must be positive, got ",
          plan.r);
  const double tau = plan.tau();
  const int s = t.stages;
  Eigen::VectorXd y(u0.size()), g, w(u0.size());
  ode_for(0).apply_m0(u0, y);
  if (trace) trace->y.push_back(y);
  std::vector<Eigen::VectorXd> kk(s);
  for (int k = 0; k < plan.r; ++k) {
    const StructuredOde& ode = ode_for(k);
    if (trace) trace->stages.emplace_back();
    for (int i = 0; i < s; ++i) {
      g = y;
      for (int j = 0; j < i; ++j)
        if (t.A(i, j) != 0.0) g.noalias() += (tau * t.A(i, j)) * kk[j];
      if (trace) trace->stages.back().push_back(g);
      try {
        ode.solve_m(t.c[i], g, w);
      } catch (const std::exception& e) {
        fail("stage ", i, " of substep ", k, ": ", e.what());
      }
      kk[i].resize(y.size());
      ode.apply_a(w, kk[i]);
    }
    for (int i = 0; i < s; ++i)
      if (t.b[i] != 0.0) y.noalias() += (tau * t.b[i]) * kk[i];
    if (trace) trace->y.push_back(y);
  }
  Eigen::VectorXd u1(y.size());
  ode_for(plan.r - 1).solve_m(1.0, y, u1);
  return u1;
}

namespace {

// Extracts the matrix of a linear map columnwise.
Eigen::MatrixXd matrix_of(const StructuredOde& ode,
                          void (StructuredOde::*apply)(const Eigen::VectorXd&,
                                                       Eigen::VectorXd&) const) {
  const int m = ode.dim();
  Eigen::MatrixXd out(m, m);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(m), col(m), w(m);
  for (int j = 0; j < m; ++j) {
    e[j] = 1.0;
    ode.solve_m0(e, w);
    (ode.*apply)(w, col);
    out.col(j) = col;
    e[j] = 0.0;
  }
  return out;
}

// One fixed-step RK4 pass over the coupled (Y, Z) exact-flow system.
Eigen::VectorXd rk4_flow(const Eigen::MatrixXd& l, const Eigen::MatrixXd& b,
                         const Eigen::VectorXd& y0, double t_end, long nsteps) {
  const long m = y0.size();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd lpb = l + b;
  auto rhs = [&](double th, const Eigen::VectorXd& z, Eigen::VectorXd& dy,
                 Eigen::VectorXd& dz) {
    dy.noalias() = l * z;
    dz = (eye - th * b).partialPivLu().solve(lpb * z);
  };
  Eigen::VectorXd y = y0, z = y0;
  Eigen::VectorXd k1y(m), k1z(m), k2y(m), k2z(m), k3y(m), k3z(m), k4y(m), k4z(m);
  const double h = t_end / static_cast<double>(nsteps);
  double th = 0.0;
  for (long n = 0; n < nsteps; ++n) {
    rhs(th, z, k1y, k1z);
    rhs(th + h / 2, z + (h / 2) * k1z, k2y, k2z);
    rhs(th + h / 2, z + (h / 2) * k2z, k3y, k3z);
    rhs(th + h, z + h * k3z, k4y, k4z);
    y += (h / 6) * (k1y + 2 * k2y + 2 * k3y + k4y);
    z += (h / 6) * (k1z + 2 * k2z + 2 * k3z + k4z);
    th += h;
  }
  return y;
}

}  // namespace

Eigen::VectorXd reference_flow(const StructuredOde& ode, const Eigen::VectorXd& y0,
                               double t_end, double tol) {
  require(ode.is_linear(),
          "reference_flow: requires a linear system (matrix extraction)");
  require(y0.size() == ode.dim(), "reference_flow: state size mismatch");
  const Eigen::MatrixXd l = matrix_of(ode, &StructuredOde::apply_a);
  const Eigen::MatrixXd b = matrix_of(ode, &StructuredOde::apply_m1);
  long n = 8;
  Eigen::VectorXd prev = rk4_flow(l, b, y0, t_end, n);
  for (;;) {
    n *= 2;
    Eigen::VectorXd cur = rk4_flow(l, b, y0, t_end, n);
    if ((cur - prev).norm() < tol) return cur;
    require(n < (1L << 24), "reference_flow: no convergence to tol ", tol,
            " within ", n, " steps");
    prev = cur;
  }
}

double local_order_estimate(const SarkTableau& t, const StructuredOde& ode,
                            const Eigen::VectorXd& y0,
                            const std::vector<double>& taus,
                            std::vector<double>* errors) {
  require(taus.size() >= 2, "local_order_estimate: needs at least two step sizes");
  const size_t n = taus.size();
  std::vector<double> lx(n), ly(n);
  for (size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd approx = sark_step(ode, t, taus[i], y0);
    const Eigen::VectorXd exact = reference_flow(ode, y0, taus[i]);
    const double err = (approx - exact).norm();
    require(err > 0.0, "local_order_estimate: error at rounding floor for tau ",
            taus[i], "; slope would be degenerate");
    if (errors) errors->push_back(err);
    lx[i] = std::log(taus[i]);
    ly[i] = std::log(err);
  }
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  return sxy / sxx;
}

}  // namespace tentkit
