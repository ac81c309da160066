#include "tentkit/dg1d.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "tentkit/errors.hpp"

namespace tentkit {

void gauss_legendre(int n, Eigen::VectorXd& xi, Eigen::VectorXd& w) {
  require(n >= 1, "gauss_legendre: need at least one point, got ", n);
  xi.resize(n);
  w.resize(n);
  const double pi = std::acos(-1.0);
  // Legendre value and derivative via the three-term recurrence.
  auto eval = [n](double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    const double dp = n == 0 ? 0.0 : n * (x * p1 - p0) / (x * x - 1.0);
    return std::pair<double, double>(p1, dp);
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto [p, dp] = eval(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double dp = eval(x).second;
    xi[i] = -x;
    xi[n - 1 - i] = x;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  if (n % 2 == 1) xi[n / 2] = 0.0;
}

Eigen::VectorXd legendre_at(int p, double xi) {
  Eigen::VectorXd vals(p + 1);
  vals[0] = 1.0;
  if (p >= 1) vals[1] = xi;
  for (int k = 2; k <= p; ++k)
    vals[k] = ((2 * k - 1) * xi * vals[k - 1] - (k - 1) * vals[k - 2]) / k;
  return vals;
}

namespace {

// P_0..P_p and their xi-derivatives at each node, one node per column.
void basis_tables(int p, const Eigen::VectorXd& nodes, Eigen::MatrixXd& vals,
                  Eigen::MatrixXd* ders) {
  const int q = static_cast<int>(nodes.size());
  vals.resize(p + 1, q);
  if (ders) ders->resize(p + 1, q);
  for (int iq = 0; iq < q; ++iq) {
    vals.col(iq) = legendre_at(p, nodes[iq]);
    if (!ders) continue;
    (*ders)(0, iq) = 0.0;
    if (p >= 1) (*ders)(1, iq) = 1.0;
    for (int k = 2; k <= p; ++k)
      (*ders)(k, iq) = (*ders)(k - 2, iq) + (2 * k - 1) * vals(k - 1, iq);
  }
}

}  // namespace

DgSpace::DgSpace(Mesh1D mesh, int p) : mesh_(std::move(mesh)), p_(p) {
  validate(mesh_);
  require(p >= 0, "DgSpace: polynomial degree must be nonnegative, got ", p);
  const int q = p + 3;
  gauss_legendre(q, quad_xi_, quad_w_);
  gauss_legendre(q + 4, err_xi_, err_w_);
  basis_tables(p, quad_xi_, basis_q_, &dbasis_q_);
  basis_tables(p, err_xi_, basis_e_, nullptr);
  trace_left_.resize(p + 1);
  trace_right_.resize(p + 1);
  inv_mass_ref_.resize(p + 1);
  for (int i = 0; i <= p; ++i) {
    trace_left_[i] = (i % 2 == 0) ? 1.0 : -1.0;
    trace_right_[i] = 1.0;
    inv_mass_ref_[i] = (2 * i + 1) / 2.0;
  }
}

GlobalState project_initial(const DgSpace& space,
                            const std::function<double(double)>& u0) {
  GlobalState st;
  st.coeffs.resize(space.total_dim());
  st.front.assign(space.mesh().num_vertices(), 0.0);
  const int nd = space.elem_dim();
  const int q = space.quad_count();
  Eigen::VectorXd fv(q);
  for (int e = 0; e < space.mesh().num_elements(); ++e) {
    for (int iq = 0; iq < q; ++iq)
      fv[iq] = space.quad_w()[iq] * u0(space.elem_x(e, space.quad_xi()[iq]));
    // The element length cancels between the load vector and the mass matrix.
    st.coeffs.segment(static_cast<long>(e) * nd, nd) =
        (space.basis_at_quad() * fv).cwiseProduct(space.inv_mass_ref());
  }
  return st;
}

double eval_state(const DgSpace& space, const GlobalState& state, double x) {
  const Mesh1D& mesh = space.mesh();
  auto it = std::upper_bound(mesh.x.begin(), mesh.x.end(), x);
  int e = static_cast<int>(it - mesh.x.begin()) - 1;
  e = std::clamp(e, 0, mesh.num_elements() - 1);
  const double xi = 2.0 * (x - mesh.x[e]) / mesh.h(e) - 1.0;
  const int nd = space.elem_dim();
  return state.coeffs.segment(static_cast<long>(e) * nd, nd)
      .dot(legendre_at(space.degree(), xi));
}

double integral(const DgSpace& space, const GlobalState& state) {
  const int nd = space.elem_dim();
  double acc = 0.0;
  for (int e = 0; e < space.mesh().num_elements(); ++e)
    acc += state.coeffs[static_cast<long>(e) * nd] * space.mesh().h(e);
  return acc;
}

double l2_error(const DgSpace& space, const GlobalState& state,
                const std::function<double(double)>& reference) {
  for (double t : state.front)
    require(t == state.front.front(),
            "l2_error: front is not flat; the slab is incomplete");
  const int nd = space.elem_dim();
  const int qe = static_cast<int>(space.err_xi().size());
  Eigen::VectorXd ue(qe);
  double acc = 0.0;
  for (int e = 0; e < space.mesh().num_elements(); ++e) {
    ue.noalias() = space.basis_at_err().transpose() *
                   state.coeffs.segment(static_cast<long>(e) * nd, nd);
    double elem = 0.0;
    for (int iq = 0; iq < qe; ++iq) {
      const double d = ue[iq] - reference(space.elem_x(e, space.err_xi()[iq]));
      elem += space.err_w()[iq] * d * d;
    }
    acc += elem * 0.5 * space.mesh().h(e);
  }
  return std::sqrt(acc);
}

PatchSystem::PatchSystem(const DgSpace& space, const FluxModel& model,
                         const Tent& tent, int r)
    : space_(&space), model_(&model), tent_(&tent), r_(r) {
  require(r >= 1, "PatchSystem: substep count must be positive, got ", r);
  ne_ = static_cast<int>(tent.elements.size());
  m_ = ne_ * space.elem_dim();
  const Mesh1D& mesh = space.mesh();
  h_.resize(ne_);
  grad_bot_.resize(ne_);
  grad_delta_.resize(ne_);
  std::vector<double> dl(ne_ + 1);
  for (int j = 0; j <= ne_; ++j) dl[j] = tent.phi_top[j] - tent.phi_bot[j];
  const int q = space.quad_count();
  delta_q_.resize(ne_, q);
  for (int le = 0; le < ne_; ++le) {
    const int e = tent.elements[le];
    require(e >= 0 && e < mesh.num_elements(), "PatchSystem: element ", e,
            " outside the space's mesh");
    h_[le] = mesh.h(e);
    grad_bot_[le] = (tent.phi_bot[le + 1] - tent.phi_bot[le]) / h_[le];
    grad_delta_[le] = (dl[le + 1] - dl[le]) / h_[le];
    for (int iq = 0; iq < q; ++iq)
      delta_q_(le, iq) =
          dl[le] + 0.5 * (space.quad_xi()[iq] + 1.0) * (dl[le + 1] - dl[le]);
  }
  pole_ = dl[tent.center_pos];
  if (tent.on_boundary) {
    boundary_x_ = tent.center_pos == 0 ? mesh.x.front() : mesh.x.back();
    boundary_t_ = tent.phi_bot[tent.center_pos];
  }
  uq_.resize(q);
  integrand_.resize(q);
  res_.resize(space.elem_dim());
  welem_.resize(space.elem_dim());
  relem_.resize(space.elem_dim());
  jac_.resize(space.elem_dim(), space.elem_dim());
}

void PatchSystem::set_substep(int k) {
  require(k >= 0 && k < r_, "PatchSystem: substep ", k, " outside plan of ", r_);
  k_ = k;
}

bool PatchSystem::is_linear() const { return model_->is_linear(); }

void PatchSystem::mass_apply(const Eigen::VectorXd& w, double shift,
                             Eigen::VectorXd& out) const {
  const int nd = space_->elem_dim();
  const Eigen::MatrixXd& v = space_->basis_at_quad();
  const Eigen::VectorXd& wq = space_->quad_w();
  const int q = space_->quad_count();
  out.resize(m_);
  for (int le = 0; le < ne_; ++le) {
    const double s = grad_bot_[le] + shift * grad_delta_[le];
    uq_.noalias() = v.transpose() * w.segment(static_cast<long>(le) * nd, nd);
    for (int iq = 0; iq < q; ++iq)
      integrand_[iq] = wq[iq] * (uq_[iq] - model_->flux(uq_[iq]) * s);
    out.segment(static_cast<long>(le) * nd, nd).noalias() =
        v * integrand_ * (0.5 * h_[le]);
  }
}

void PatchSystem::apply_m0(const Eigen::VectorXd& w, Eigen::VectorXd& out) const {
  mass_apply(w, static_cast<double>(k_) / r_, out);
}

void PatchSystem::apply_m1(const Eigen::VectorXd& w, Eigen::VectorXd& out) const {
  const int nd = space_->elem_dim();
  const Eigen::MatrixXd& v = space_->basis_at_quad();
  const Eigen::VectorXd& wq = space_->quad_w();
  const int q = space_->quad_count();
  out.resize(m_);
  for (int le = 0; le < ne_; ++le) {
    uq_.noalias() = v.transpose() * w.segment(static_cast<long>(le) * nd, nd);
    for (int iq = 0; iq < q; ++iq)
      integrand_[iq] = wq[iq] * model_->flux(uq_[iq]) * grad_delta_[le];
    out.segment(static_cast<long>(le) * nd, nd).noalias() =
        v * integrand_ * (0.5 * h_[le]);
  }
}

void PatchSystem::apply_a(const Eigen::VectorXd& w, Eigen::VectorXd& out) const {
  const int nd = space_->elem_dim();
  const Eigen::MatrixXd& v = space_->basis_at_quad();
  const Eigen::VectorXd& wq = space_->quad_w();
  const int q = space_->quad_count();
  out.resize(m_);
  for (int le = 0; le < ne_; ++le) {
    uq_.noalias() = v.transpose() * w.segment(static_cast<long>(le) * nd, nd);
    for (int iq = 0; iq < q; ++iq)
      integrand_[iq] = wq[iq] * delta_q_(le, iq) * model_->flux(uq_[iq]);
    // d(psi)/dx carries 2/h, the volume element h/2: they cancel.
    out.segment(static_cast<long>(le) * nd, nd).noalias() =
        space_->dbasis_at_quad() * integrand_;
  }
  // Only facets under the pole carry a nonzero tent height.
  if (ne_ == 2) {
    const double um = w.head(nd).dot(space_->trace_right());
    const double up = w.segment(nd, nd).dot(space_->trace_left());
    const double fn = model_->numerical_flux(up, um, 1.0);
    out.head(nd) -= (pole_ * fn) * space_->trace_right();
    out.segment(nd, nd) += (pole_ * fn) * space_->trace_left();
  } else if (tent_->center_pos == 0) {  // pole on the left domain boundary
    const double ui = w.head(nd).dot(space_->trace_left());
    const double ue = model_->boundary_value(boundary_x_, boundary_t_, -1, ui);
    const double fn = model_->numerical_flux(ue, ui, -1.0);
    out.head(nd) -= (pole_ * fn) * space_->trace_left();
  } else {  // pole on the right domain boundary
    const double ui = w.head(nd).dot(space_->trace_right());
    const double ue = model_->boundary_value(boundary_x_, boundary_t_, +1, ui);
    const double fn = model_->numerical_flux(ue, ui, +1.0);
    out.head(nd) -= (pole_ * fn) * space_->trace_right();
  }
}

void PatchSystem::mass_solve(const Eigen::VectorXd& rhs, double shift,
                             Eigen::VectorXd& w) const {
  const int nd = space_->elem_dim();
  const Eigen::MatrixXd& v = space_->basis_at_quad();
  const Eigen::VectorXd& wq = space_->quad_w();
  const int q = space_->quad_count();
  w.resize(m_);
  for (int le = 0; le < ne_; ++le) {
    const double s = grad_bot_[le] + shift * grad_delta_[le];
    const double h2 = 0.5 * h_[le];
    relem_ = rhs.segment(static_cast<long>(le) * nd, nd);
    if (model_->is_linear()) {
      const double factor = 1.0 - model_->flux_jacobian(0.0) * s;
      require(factor > 0.0, "element ", tent_->elements[le],
              ": front too steep for the wavespeed (mass factor ", factor, ")");
      w.segment(static_cast<long>(le) * nd, nd) =
          relem_.cwiseProduct(space_->inv_mass_ref()) / (h2 * factor);
      continue;
    }
    welem_ = relem_.cwiseProduct(space_->inv_mass_ref()) / h2;  // mass guess
    // The element operator and the right-hand side both scale with h, so the
    // absolute floor of the stopping test must too; a flat "1 +" floor would
    // let the solution error grow like 1/h under refinement.
    const double stop = 1e-12 * (h_[le] + relem_.norm());
    for (int it = 0;; ++it) {
      uq_.noalias() = v.transpose() * welem_;
      for (int iq = 0; iq < q; ++iq)
        integrand_[iq] = wq[iq] * (uq_[iq] - model_->flux(uq_[iq]) * s);
      res_.noalias() = v * integrand_ * h2;
      res_ -= relem_;
      if (res_.norm() <= stop) break;
      require(it < 50, "element ", tent_->elements[le],
              ": mass inversion did not converge (residual ", res_.norm(), ")");
      for (int iq = 0; iq < q; ++iq)
        integrand_[iq] =
            wq[iq] * (1.0 - model_->flux_jacobian(uq_[iq]) * s) * h2;
      jac_.noalias() = v * integrand_.asDiagonal() * v.transpose();
      welem_ -= jac_.partialPivLu().solve(res_);
    }
    w.segment(static_cast<long>(le) * nd, nd) = welem_;
  }
}

void PatchSystem::solve_m0(const Eigen::VectorXd& rhs, Eigen::VectorXd& w) const {
  mass_solve(rhs, static_cast<double>(k_) / r_, w);
}

void PatchSystem::solve_m(double that, const Eigen::VectorXd& rhs,
                          Eigen::VectorXd& w) const {
  require(that >= 0.0 && that <= 1.0, "solve_m: pseudo-time ", that,
          " outside [0, 1]");
  mass_solve(rhs, (k_ + that) / r_, w);
}

void PatchSystem::apply_m(double that, const Eigen::VectorXd& w,
                          Eigen::VectorXd& out) const {
  require(that >= 0.0 && that <= 1.0, "apply_m: pseudo-time ", that,
          " outside [0, 1]");
  mass_apply(w, (k_ + that) / r_, out);
}

namespace {

void check_front(const DgSpace& space, const Tent& tent,
                 const GlobalState& state) {
  require(state.front.size() ==
              static_cast<std::size_t>(space.mesh().num_vertices()),
          "propagate_tent: state front size does not match the mesh");
  const std::vector<int> verts = patch_vertices(space.mesh(), tent);
  for (std::size_t j = 0; j < verts.size(); ++j)
    require(state.front[verts[j]] == tent.phi_bot[j], "tent ", tent.id,
            ": state front does not match the tent bottom at vertex ", verts[j]);
}

Eigen::VectorXd gather_patch(const DgSpace& space, const Tent& tent,
                             const GlobalState& state) {
  const int nd = space.elem_dim();
  Eigen::VectorXd u0(nd * tent.elements.size());
  for (std::size_t le = 0; le < tent.elements.size(); ++le)
    u0.segment(le * nd, nd) =
        state.coeffs.segment(static_cast<long>(tent.elements[le]) * nd, nd);
  return u0;
}

void scatter_patch(const DgSpace& space, const Tent& tent,
                   const Eigen::VectorXd& u1, GlobalState& state) {
  const int nd = space.elem_dim();
  for (std::size_t le = 0; le < tent.elements.size(); ++le)
    state.coeffs.segment(static_cast<long>(tent.elements[le]) * nd, nd) =
        u1.segment(le * nd, nd);
  state.front[tent.center] = tent.phi_top[tent.center_pos];
}

Eigen::VectorXd solve_tent(const OdeProvider& provider, const SarkTableau& scheme,
                           const SubtentPlan& plan, const Eigen::VectorXd& u0) {
  return sark_tent_solve(provider, scheme, plan, u0);
}

Eigen::VectorXd solve_tent(const OdeProvider& provider,
                           const ButcherTableau& scheme, const SubtentPlan& plan,
                           const Eigen::VectorXd& u0) {
  return classical_rk_tent_solve(provider, scheme, plan, u0);
}

// Shared tent update without the snapshot bookkeeping (so that concurrent
// level execution touches no shared counter).
template <class Scheme>
void run_tent(const DgSpace& space, const FluxModel& model, const Tent& tent,
              const Scheme& scheme, int r, GlobalState& state) {
  check_front(space, tent, state);
  PatchSystem ps(space, model, tent, r);
  auto provider = [&ps](int k) -> const StructuredOde& {
    ps.set_substep(k);
    return ps;
  };
  const Eigen::VectorXd u0 = gather_patch(space, tent, state);
  Eigen::VectorXd u1;
  try {
    u1 = solve_tent(provider, scheme, SubtentPlan{r}, u0);
  } catch (const std::exception& e) {
    fail("tent ", tent.id, ": ", e.what());
  }
  scatter_patch(space, tent, u1, state);
}

template <class Scheme>
void slab_driver(const DgSpace& space, const FluxModel& model,
                 const TentSlab& slab, const Scheme& scheme, int r,
                 GlobalState& state, int threads) {
  if (threads <= 1) {
    for (const Tent& tent : slab.tents) {
      run_tent(space, model, tent, scheme, r, state);
      ++state.snapshot;
    }
    return;
  }
  std::vector<std::vector<int>> by_level(slab.num_levels);
  for (std::size_t i = 0; i < slab.tents.size(); ++i)
    by_level[slab.tents[i].level].push_back(static_cast<int>(i));
  for (const std::vector<int>& level : by_level) {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex mu;
    std::exception_ptr first_error;
    auto worker = [&]() {
      while (!stop.load(std::memory_order_relaxed)) {
        const std::size_t i = next.fetch_add(1);
        if (i >= level.size()) return;
        try {
          run_tent(space, model, slab.tents[level[i]], scheme, r, state);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first_error) first_error = std::current_exception();
          stop.store(true);
          return;
        }
      }
    };
    const int pool_size =
        std::min<int>(threads, static_cast<int>(level.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < pool_size; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    state.snapshot += static_cast<int>(level.size());
  }
}

}  // namespace

void propagate_tent(const DgSpace& space, const FluxModel& model,
                    const Tent& tent, const SarkTableau& scheme, int r,
                    GlobalState& state) {
  run_tent(space, model, tent, scheme, r, state);
  ++state.snapshot;
}

void propagate_tent(const DgSpace& space, const FluxModel& model,
                    const Tent& tent, const ButcherTableau& scheme, int r,
                    GlobalState& state) {
  run_tent(space, model, tent, scheme, r, state);
  ++state.snapshot;
}

void propagate_slab(const DgSpace& space, const FluxModel& model,
                    const TentSlab& slab, const SarkTableau& scheme, int r,
                    GlobalState& state, int threads) {
  slab_driver(space, model, slab, scheme, r, state, threads);
}

void propagate_slab(const DgSpace& space, const FluxModel& model,
                    const TentSlab& slab, const ButcherTableau& scheme, int r,
                    GlobalState& state, int threads) {
  slab_driver(space, model, slab, scheme, r, state, threads);
}

}  // namespace tentkit
