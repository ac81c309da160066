#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tentkit/dg1d.hpp"
#include "tentkit/mesh_tents.hpp"
#include "tentkit/tableau.hpp"

namespace tentkit {

/// Dense operators of one tent of a linear model: the mass matrices on the
/// r + 1 interpolated fronts (m0[k] at height k/r, so m0[0] is the tent
/// bottom and m0[r] the tent top), the tent-height mass dilation m1 and the
/// transport operator a (both front independent).
struct TentOperators {
  std::vector<Eigen::MatrixXd> m0;
  Eigen::MatrixXd m1;
  Eigen::MatrixXd a;
};

/// Builds the dense tent operators column by column from the patch
/// evaluators. Only meaningful for linear models.
TentOperators assemble_tent_operators(const DgSpace& space,
                                      const FluxModel& model, const Tent& tent,
                                      int r);

/// Matrix of one substep of the structure aware scheme in the mass-form
/// variable: Yeval^[k+1] = T Y^[k] with step size 1/r on the front m0[k].
Eigen::MatrixXd subtent_step_matrix(const TentOperators& ops,
                                    const SarkTableau& scheme, int r, int k);

/// Closed form of the same matrix; any tableau of the nominal order gives
/// the identical linear step, so only the stage count enters. Supports
/// stages = 2 (I + tau At + tau^2/2 At (Mt + At)) and stages = 3 (adding
/// tau^3/6 At (2 Mt + At)(Mt + At)) with At = a m0k^-1, Mt = m1 m0k^-1.
Eigen::MatrixXd subtent_step_closed_form(const TentOperators& ops, int stages,
                                         int r, int k);

/// Full tent propagation matrix S = m0[r]^-1 T^[r-1] ... T^[0] m0[0]; maps
/// tent-bottom coefficients to tent-top coefficients.
Eigen::MatrixXd tent_transfer_matrix(const TentOperators& ops,
                                     const SarkTableau& scheme, int r);

/// Operator norm of S between the weighted norms |U|^2 = U^T m_bot U at the
/// bottom and U^T m_top U at the top: the square root of the largest
/// eigenvalue of (S^T m_top S) X = lambda m_bot X.
double weighted_norm(const Eigen::MatrixXd& s, const Eigen::MatrixXd& m_bot,
                     const Eigen::MatrixXd& m_top);

/// Largest tent-wise growth max_i (|S_i| - 1) over a slab.
double max_growth(const DgSpace& space, const FluxModel& model,
                  const TentSlab& slab, const SarkTableau& scheme, int r);

/// Growth sweep over substep counts for one scheme/degree combination.
struct StabilityPoint {
  int r = 0;
  double cbar = 0.0;
};

struct StabilityReport {
  std::string scheme;
  int p = 0;
  int stages = 0;
  std::vector<StabilityPoint> points;
  double slope = 0.0;  // least-squares slope of log cbar vs log r (r >= fit_from)
  int fit_from = 0;    // smallest r included in the fit
};

/// Runs max_growth for each r and fits the decay slope on the tail
/// r >= fit_from (all points when fit_from <= min r).
StabilityReport stability_sweep(const DgSpace& space, const FluxModel& model,
                                const TentSlab& slab, const SarkTableau& scheme,
                                const std::vector<int>& r_values,
                                int fit_from = 0);

}  // namespace tentkit
