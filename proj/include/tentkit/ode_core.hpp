#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "tentkit/tableau.hpp"

namespace tentkit {

/// Right-hand-side structure of a tent system in dual-vector form:
///   d/dt M(t, U) = A(U),   M(t, W) = M0(W) - t * M1(W),   t in [0, 1].
///
/// apply_* map a coefficient vector W to the dual vector of the operator
/// tested against the basis. solve_m0 / solve_m invert M0 resp. M(t) for the
/// coefficient vector, where solve_m interpolates between this system's own
/// bottom (t=0, identical to solve_m0) and top (t=1) fronts.
class StructuredOde {
 public:
  virtual ~StructuredOde() = default;
  virtual int dim() const = 0;
  virtual bool is_linear() const = 0;
  virtual void apply_m0(const Eigen::VectorXd& w, Eigen::VectorXd& out) const = 0;
  virtual void apply_m1(const Eigen::VectorXd& w, Eigen::VectorXd& out) const = 0;
  virtual void apply_a(const Eigen::VectorXd& w, Eigen::VectorXd& out) const = 0;
  virtual void solve_m0(const Eigen::VectorXd& rhs, Eigen::VectorXd& w) const = 0;
  virtual void solve_m(double that, const Eigen::VectorXd& rhs,
                       Eigen::VectorXd& w) const = 0;
};

/// Matrix-backed linear structured system (synthetic test systems and the
/// building block for per-subtent propagation matrices).
class DenseLinearOde : public StructuredOde {
 public:
  DenseLinearOde(Eigen::MatrixXd m0, Eigen::MatrixXd m1, Eigen::MatrixXd a);

  int dim() const override { return static_cast<int>(m0_.rows()); }
  bool is_linear() const override { return true; }
  void apply_m0(const Eigen::VectorXd& w, Eigen::VectorXd& out) const override;
  void apply_m1(const Eigen::VectorXd& w, Eigen::VectorXd& out) const override;
  void apply_a(const Eigen::VectorXd& w, Eigen::VectorXd& out) const override;
  void solve_m0(const Eigen::VectorXd& rhs, Eigen::VectorXd& w) const override;
  void solve_m(double that, const Eigen::VectorXd& rhs,
               Eigen::VectorXd& w) const override;

  const Eigen::MatrixXd& m0() const { return m0_; }
  const Eigen::MatrixXd& m1() const { return m1_; }
  const Eigen::MatrixXd& a() const { return a_; }

 private:
  Eigen::MatrixXd m0_, m1_, a_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_m0_;
};

/// Uniform subdivision of a tent into r subtents of pseudo-time width 1/r.
struct SubtentPlan {
  int r = 1;
  double tau() const { return 1.0 / r; }
};

/// Yields the structured system of subtent k (operators built on the k-th
/// interpolated front). All subtents share the transport and mass-change
/// operators; only the bottom-front mass operator moves.
using OdeProvider = std::function<const StructuredOde&(int k)>;

/// Optional record of a tent solve: Y^[0..r] and the per-subtent stage vectors.
struct StepTrace {
  std::vector<Eigen::VectorXd> y;
  std::vector<std::vector<Eigen::VectorXd>> stages;
};

/// One SARK step of width tau from the dual vector y on one structured system.
Eigen::VectorXd sark_step(const StructuredOde& ode, const SarkTableau& t,
                          double tau, const Eigen::VectorXd& y,
                          std::vector<Eigen::VectorXd>* stages = nullptr);

/// Runs r SARK substeps across a tent from the initial coefficients u0
/// (Y^[0] = M0(u0) on subtent 0) and recovers the tent-top coefficients via
/// the final subtent's top-front solve.
Eigen::VectorXd sark_tent_solve(const OdeProvider& ode_for, const SarkTableau& t,
                                const SubtentPlan& plan, const Eigen::VectorXd& u0,
                                StepTrace* trace = nullptr);

/// Same, starting directly from the dual vector y0 = M0(U0).
Eigen::VectorXd sark_tent_solve_dual(const OdeProvider& ode_for,
                                     const SarkTableau& t, const SubtentPlan& plan,
                                     const Eigen::VectorXd& y0,
                                     StepTrace* trace = nullptr);

/// Classical explicit RK on the substituted form Y' = A(M^-1(t, Y)) over the
/// same subtent breakpoints; stage solves use M at the stage abscissae.
/// Returns the tent-top coefficients.
Eigen::VectorXd classical_rk_tent_solve(const OdeProvider& ode_for,
                                        const ButcherTableau& t,
                                        const SubtentPlan& plan,
                                        const Eigen::VectorXd& u0,
                                        StepTrace* trace = nullptr);

/// Brute-force reference for the exact structured flow
///   Z' = (I - t B)^-1 (L + B) Z,  Y' = L Z,  Y(0) = Z(0) = y0,
/// with L = A o M0^-1 and B = M1 o M0^-1 extracted columnwise (the system
/// must be linear). Fixed-step RK4, steps halved until successive answers
/// differ by less than tol. Returns Y(t_end).
Eigen::VectorXd reference_flow(const StructuredOde& ode, const Eigen::VectorXd& y0,
                               double t_end, double tol = 1e-12);

/// Least-squares slope of log(one-step error) vs log(tau): runs sark_step
/// against reference_flow for each tau. Optionally reports the errors.
double local_order_estimate(const SarkTableau& t, const StructuredOde& ode,
                            const Eigen::VectorXd& y0,
                            const std::vector<double>& taus,
                            std::vector<double>* errors = nullptr);

}  // namespace tentkit
