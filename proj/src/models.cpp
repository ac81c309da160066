#include "tentkit/models.hpp"

#include <cmath>
#include <utility>

#include "tentkit/errors.hpp"

namespace tentkit {

double burgers_initial(double x) {
  const double d = x - 0.5;
  return std::exp(-50.0 * d * d);
}

double burgers_exact(double x, double t, double tol) {
  require(t >= 0.0, "burgers_exact: negative time ", t);
  require(tol > 0.0, "burgers_exact: tolerance must be positive");
  double xi = x;
  for (int it = 0; it < 100; ++it) {
    const double u = burgers_initial(xi);
    const double f = xi + t * u - x;
    if (std::abs(f) <= tol) return u;
    const double df = 1.0 + t * (-100.0 * (xi - 0.5) * u);
    require(df > 0.0,
            "burgers_exact: characteristics crossed; no smooth solution at t = ",
            t);
    xi -= f / df;
  }
  fail("burgers_exact: characteristic relation did not converge at x = ", x,
       ", t = ", t);
}

double advection_exact(double x, double t, double speed,
                       const std::function<double(double)>& u0) {
  double y = x - speed * t;
  y -= std::floor(y);
  return u0(y);
}

Advection1D::Advection1D(double speed, std::function<double(double)> u0)
    : b_(speed), u0_(std::move(u0)) {
  require(static_cast<bool>(u0_), "Advection1D: initial datum is empty");
}

double Advection1D::numerical_flux(double u_plus, double u_minus,
                                   double n) const {
  const double bn = b_ * n;
  return bn > 0.0 ? bn * u_minus : bn * u_plus;
}

Burgers1D::Burgers1D() : u0_(burgers_initial), has_exact_(true) {}

Burgers1D::Burgers1D(std::function<double(double)> u0)
    : u0_(std::move(u0)), has_exact_(false) {
  require(static_cast<bool>(u0_), "Burgers1D: initial datum is empty");
}

double Burgers1D::numerical_flux(double u_plus, double u_minus,
                                 double n) const {
  const double lambda = std::max(wavespeed(u_plus), wavespeed(u_minus));
  return 0.5 * (flux(u_plus) + flux(u_minus)) * n -
         0.5 * lambda * (u_plus - u_minus);
}

double Burgers1D::boundary_value(double x, double t, int side,
                                 double interior) const {
  (void)t;
  if (side < 0) return u0_(x);  // inflow: pin to the datum at the left end
  (void)x;
  return interior;  // outflow: copy the interior trace
}

double Burgers1D::exact(double x, double t) const {
  require(has_exact_,
          "Burgers1D: no closed-form solution for a custom initial datum");
  return burgers_exact(x, t);
}

}  // namespace tentkit
