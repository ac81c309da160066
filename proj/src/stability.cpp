#include "tentkit/stability.hpp"

#include <cmath>
#include <limits>

#include "tentkit/errors.hpp"
#include "tentkit/ode_core.hpp"

namespace tentkit {

namespace {

// Dense matrix of a linear vector map, extracted column by column.
template <class Apply>
Eigen::MatrixXd matrix_of(int dim, const Apply& apply) {
  Eigen::MatrixXd m(dim, dim);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim), col(dim);
  for (int j = 0; j < dim; ++j) {
    e[j] = 1.0;
    apply(e, col);
    m.col(j) = col;
    e[j] = 0.0;
  }
  return m;
}

}  // namespace

TentOperators assemble_tent_operators(const DgSpace& space,
                                      const FluxModel& model, const Tent& tent,
                                      int r) {
  require(model.is_linear(),
          "tent operators are matrices only for linear models; got ",
          model.name());
  PatchSystem ps(space, model, tent, r);
  const int m = ps.dim();
  TentOperators ops;
  ops.m0.reserve(r + 1);
  for (int k = 0; k < r; ++k) {
    ps.set_substep(k);
    ops.m0.push_back(matrix_of(
        m, [&](const Eigen::VectorXd& w, Eigen::VectorXd& out) {
          ps.apply_m0(w, out);
        }));
  }
  ps.set_substep(r - 1);
  ops.m0.push_back(matrix_of(
      m, [&](const Eigen::VectorXd& w, Eigen::VectorXd& out) {
        ps.apply_m(1.0, w, out);
      }));
  ops.m1 = matrix_of(m, [&](const Eigen::VectorXd& w, Eigen::VectorXd& out) {
    ps.apply_m1(w, out);
  });
  ops.a = matrix_of(m, [&](const Eigen::VectorXd& w, Eigen::VectorXd& out) {
    ps.apply_a(w, out);
  });
  return ops;
}

Eigen::MatrixXd subtent_step_matrix(const TentOperators& ops,
                                    const SarkTableau& scheme, int r, int k) {
  require(k >= 0 && k < r, "subtent_step_matrix: substep ", k,
          " outside plan of ", r);
  DenseLinearOde ode(ops.m0[k], ops.m1, ops.a);
  const double tau = 1.0 / r;
  return matrix_of(static_cast<int>(ops.a.rows()),
                   [&](const Eigen::VectorXd& y, Eigen::VectorXd& out) {
                     out = sark_step(ode, scheme, tau, y);
                   });
}

Eigen::MatrixXd subtent_step_closed_form(const TentOperators& ops, int stages,
                                         int r, int k) {
  require(stages == 2 || stages == 3,
          "closed-form subtent step supports 2 or 3 stages, got ", stages);
  require(k >= 0 && k < r, "subtent_step_closed_form: substep ", k,
          " outside plan of ", r);
  const int m = static_cast<int>(ops.a.rows());
  const double tau = 1.0 / r;
  const Eigen::MatrixXd inv_m0 = ops.m0[k].partialPivLu().inverse();
  const Eigen::MatrixXd at = ops.a * inv_m0;
  const Eigen::MatrixXd mt = ops.m1 * inv_m0;
  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(m, m) + tau * at +
                      0.5 * tau * tau * at * (mt + at);
  if (stages == 3)
    t += (tau * tau * tau / 6.0) * at * (2.0 * mt + at) * (mt + at);
  return t;
}

Eigen::MatrixXd tent_transfer_matrix(const TentOperators& ops,
                                     const SarkTableau& scheme, int r) {
  require(static_cast<int>(ops.m0.size()) == r + 1,
          "tent_transfer_matrix: operators were assembled for ",
          ops.m0.size() - 1, " substeps, asked for ", r);
  Eigen::MatrixXd acc = ops.m0.front();
  for (int k = 0; k < r; ++k) acc = subtent_step_matrix(ops, scheme, r, k) * acc;
  return ops.m0.back().partialPivLu().solve(acc);
}

double weighted_norm(const Eigen::MatrixXd& s, const Eigen::MatrixXd& m_bot,
                     const Eigen::MatrixXd& m_top) {
  Eigen::MatrixXd lhs = s.transpose() * m_top * s;
  lhs = 0.5 * (lhs + lhs.transpose()).eval();
  Eigen::MatrixXd rhs = 0.5 * (m_bot + m_bot.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(lhs, rhs,
                                                                Eigen::EigenvaluesOnly);
  require(eig.info() == Eigen::Success,
          "weighted_norm: generalized eigenvalue solve failed");
  return std::sqrt(eig.eigenvalues().maxCoeff());
}

double max_growth(const DgSpace& space, const FluxModel& model,
                  const TentSlab& slab, const SarkTableau& scheme, int r) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const Tent& tent : slab.tents) {
    const TentOperators ops = assemble_tent_operators(space, model, tent, r);
    const Eigen::MatrixXd s = tent_transfer_matrix(ops, scheme, r);
    worst = std::max(
        worst, weighted_norm(s, ops.m0.front(), ops.m0.back()) - 1.0);
  }
  return worst;
}

StabilityReport stability_sweep(const DgSpace& space, const FluxModel& model,
                                const TentSlab& slab, const SarkTableau& scheme,
                                const std::vector<int>& r_values,
                                int fit_from) {
  require(!r_values.empty(), "stability_sweep: no substep counts given");
  StabilityReport report;
  report.scheme = scheme.name;
  report.p = space.degree();
  report.stages = scheme.stages;
  report.fit_from = fit_from;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (int r : r_values) {
    const double cbar = max_growth(space, model, slab, scheme, r);
    report.points.push_back({r, cbar});
    if (r < fit_from) continue;
    require(cbar > 0.0, "stability_sweep: nonpositive growth ", cbar, " at r = ",
            r, " cannot enter the log-log fit");
    const double x = std::log(static_cast<double>(r)), y = std::log(cbar);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  require(n >= 2, "stability_sweep: need at least two substep counts >= ",
          fit_from, " for the slope fit");
  report.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return report;
}

}  // namespace tentkit
