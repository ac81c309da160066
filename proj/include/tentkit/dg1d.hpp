#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "tentkit/mesh_tents.hpp"
#include "tentkit/ode_core.hpp"
#include "tentkit/tableau.hpp"

namespace tentkit {

/// Scalar conservation law d/dt u + d/dx f(u) = 0 on [x0, x1]. The temporal
/// flux is the identity for every in-scope model, so only the spatial flux
/// and its derivative appear here.
class FluxModel {
 public:
  virtual ~FluxModel() = default;
  virtual std::string name() const = 0;
  virtual bool is_linear() const = 0;
  virtual bool is_periodic() const = 0;
  virtual double flux(double u) const = 0;
  virtual double flux_jacobian(double u) const = 0;
  virtual double wavespeed(double u) const = 0;  // c(u) >= 0
  /// Numerical flux f_n(u_plus, u_minus, n) for a facet with normal n, where
  /// u_minus is the trace on the side the normal points away from.
  /// Consistency: f_n(u, u, n) = f(u) n.
  virtual double numerical_flux(double u_plus, double u_minus, double n) const = 0;
  /// Exterior trace at a domain-boundary facet at position x and time t;
  /// side is -1 at the left end, +1 at the right end.
  virtual double boundary_value(double x, double t, int side,
                                double interior) const = 0;
  /// Initial datum of the run this model instance belongs to.
  virtual double initial(double x) const = 0;
  virtual bool has_exact() const = 0;
  virtual double exact(double x, double t) const = 0;
};

/// Gauss-Legendre rule with n points on [-1, 1].
void gauss_legendre(int n, Eigen::VectorXd& xi, Eigen::VectorXd& w);

/// Values of P_0..P_p at a reference point.
Eigen::VectorXd legendre_at(int p, double xi);

/// Modal Legendre DG space of degree p on a 1D mesh. Basis functions are the
/// Legendre polynomials mapped from [-1, 1] (orthogonal, diagonal mass
/// matrix h/2 * 2/(2i+1)). Carries two quadrature rules: q = p + 3 points for
/// the operators and projection, q + 4 points for error integrals.
class DgSpace {
 public:
  DgSpace(Mesh1D mesh, int p);

  const Mesh1D& mesh() const { return mesh_; }
  int degree() const { return p_; }
  int elem_dim() const { return p_ + 1; }
  int total_dim() const { return elem_dim() * mesh_.num_elements(); }
  int quad_count() const { return static_cast<int>(quad_xi_.size()); }

  const Eigen::VectorXd& quad_xi() const { return quad_xi_; }
  const Eigen::VectorXd& quad_w() const { return quad_w_; }
  const Eigen::MatrixXd& basis_at_quad() const { return basis_q_; }     // (p+1) x q
  const Eigen::MatrixXd& dbasis_at_quad() const { return dbasis_q_; }   // dP/dxi
  const Eigen::VectorXd& err_xi() const { return err_xi_; }
  const Eigen::VectorXd& err_w() const { return err_w_; }
  const Eigen::MatrixXd& basis_at_err() const { return basis_e_; }
  const Eigen::VectorXd& trace_left() const { return trace_left_; }     // P_i(-1)
  const Eigen::VectorXd& trace_right() const { return trace_right_; }   // P_i(+1)
  const Eigen::VectorXd& inv_mass_ref() const { return inv_mass_ref_; } // (2i+1)/2

  /// Physical coordinate of reference point xi within element e.
  double elem_x(int e, double xi) const {
    return mesh_.x[e] + 0.5 * (xi + 1.0) * mesh_.h(e);
  }

 private:
  Mesh1D mesh_;
  int p_;
  Eigen::VectorXd quad_xi_, quad_w_, err_xi_, err_w_;
  Eigen::MatrixXd basis_q_, dbasis_q_, basis_e_;
  Eigen::VectorXd trace_left_, trace_right_, inv_mass_ref_;
};

/// Piecewise polynomial on the whole mesh plus the front bookkeeping needed
/// to feed tents in causal order. coeffs holds (p+1) modal coefficients per
/// element, element-major. front tracks the per-vertex time the coefficients
/// represent; snapshot counts the tents applied so far.
struct GlobalState {
  Eigen::VectorXd coeffs;
  std::vector<double> front;
  int snapshot = 0;
};

/// Element-wise L2 projection (using the operator quadrature rule).
GlobalState project_initial(const DgSpace& space,
                            const std::function<double(double)>& u0);

/// Point evaluation of the state (for diagnostics and tests).
double eval_state(const DgSpace& space, const GlobalState& state, double x);

/// Integral of u_h over the domain.
double integral(const DgSpace& space, const GlobalState& state);

/// L2 distance between the state and a reference function, integrated with
/// the finer error rule. Requires a flat front (a completed slab).
double l2_error(const DgSpace& space, const GlobalState& state,
                const std::function<double(double)>& reference);

/// The structured system of one tent: dual-vector evaluators for the mass
/// operators and the transport operator on the vertex patch, per substep.
///
/// For substep k of r, apply_m0 integrates against the front phi^[k], while
/// apply_m1 and apply_a carry the full tent height (they are substep
/// independent). solve_m(that) inverts the mass operator of the front
/// interpolated between this substep's bottom (that = 0) and top (that = 1),
/// i.e. along one r-th of the tent.
class PatchSystem : public StructuredOde {
 public:
  PatchSystem(const DgSpace& space, const FluxModel& model, const Tent& tent,
              int r);

  void set_substep(int k);
  int substep() const { return k_; }

  int dim() const override { return m_; }
  bool is_linear() const override;
  void apply_m0(const Eigen::VectorXd& w, Eigen::VectorXd& out) const override;
  void apply_m1(const Eigen::VectorXd& w, Eigen::VectorXd& out) const override;
  void apply_a(const Eigen::VectorXd& w, Eigen::VectorXd& out) const override;
  void solve_m0(const Eigen::VectorXd& rhs, Eigen::VectorXd& w) const override;
  void solve_m(double that, const Eigen::VectorXd& rhs,
               Eigen::VectorXd& w) const override;

  /// Forward application of M at local pseudo-time that of the current
  /// substep (the operator solve_m(that) inverts); apply_m(0) == apply_m0.
  void apply_m(double that, const Eigen::VectorXd& w, Eigen::VectorXd& out) const;

  /// Front slope on patch element le at local pseudo-time that of substep k.
  double front_slope(int le, double that) const {
    return grad_bot_[le] + (k_ + that) / r_ * grad_delta_[le];
  }

 private:
  void mass_apply(const Eigen::VectorXd& w, double shift, Eigen::VectorXd& out) const;
  void mass_solve(const Eigen::VectorXd& rhs, double shift, Eigen::VectorXd& w) const;

  const DgSpace* space_;
  const FluxModel* model_;
  const Tent* tent_;
  int r_;
  int k_ = 0;
  int ne_;  // patch elements
  int m_;
  std::vector<double> h_;           // element lengths
  std::vector<double> grad_bot_;    // d(phi_bot)/dx per element
  std::vector<double> grad_delta_;  // d(delta)/dx per element
  Eigen::MatrixXd delta_q_;         // delta at quad nodes, (ne x q)
  double pole_;                     // delta at the centre vertex
  double boundary_x_ = 0.0;         // domain boundary position (boundary tents)
  double boundary_t_ = 0.0;         // bottom time at that facet
  mutable Eigen::VectorXd uq_, integrand_, res_, welem_, relem_;
  mutable Eigen::MatrixXd jac_;
};

/// Advances the state across one tent with the structure aware scheme
/// (r substeps) and writes the tent-top coefficients back into the patch.
void propagate_tent(const DgSpace& space, const FluxModel& model,
                    const Tent& tent, const SarkTableau& scheme, int r,
                    GlobalState& state);

/// Same, using the classical scheme on the substituted form (stage solves of
/// the time-dependent mass operator).
void propagate_tent(const DgSpace& space, const FluxModel& model,
                    const Tent& tent, const ButcherTableau& scheme, int r,
                    GlobalState& state);

/// Runs all tents of a slab in causal order. With threads > 1 the tents of
/// one dependency level run concurrently (their patches are vertex disjoint,
/// so reads and writes never overlap); results are bitwise independent of
/// the thread count.
void propagate_slab(const DgSpace& space, const FluxModel& model,
                    const TentSlab& slab, const SarkTableau& scheme, int r,
                    GlobalState& state, int threads = 1);
void propagate_slab(const DgSpace& space, const FluxModel& model,
                    const TentSlab& slab, const ButcherTableau& scheme, int r,
                    GlobalState& state, int threads = 1);

}  // namespace tentkit
