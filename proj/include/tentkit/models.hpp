#pragma once

#include <functional>
#include <string>

#include "tentkit/dg1d.hpp"

namespace tentkit {

/// Gaussian pulse exp(-50 (x - 1/2)^2).
double burgers_initial(double x);

/// Solution of d/dt u + d/dx (u^2/2) = 0 with the Gaussian pulse datum,
/// evaluated by solving the characteristic relation xi + t u0(xi) = x with
/// Newton's method to the given residual tolerance. Valid strictly before
/// characteristics cross (the pulse sharpens into a shock at t ~ 0.165);
/// past that point the relation loses monotonicity and this throws.
double burgers_exact(double x, double t, double tol = 1e-13);

/// Solution of d/dt u + b d/dx u = 0 with 1-periodic datum u0 on [0, 1].
double advection_exact(double x, double t, double speed,
                       const std::function<double(double)>& u0);

/// Linear advection with constant speed on a periodic domain, upwind flux.
class Advection1D : public FluxModel {
 public:
  Advection1D(double speed, std::function<double(double)> u0);

  std::string name() const override { return "advection1d"; }
  bool is_linear() const override { return true; }
  bool is_periodic() const override { return true; }
  double flux(double u) const override { return b_ * u; }
  double flux_jacobian(double) const override { return b_; }
  double wavespeed(double) const override { return std::abs(b_); }
  double numerical_flux(double u_plus, double u_minus, double n) const override;
  double boundary_value(double, double, int, double interior) const override {
    return interior;  // periodic domains have no boundary facets
  }
  double initial(double x) const override { return u0_(x); }
  bool has_exact() const override { return true; }
  double exact(double x, double t) const override {
    return advection_exact(x, t, b_, u0_);
  }

 private:
  double b_;
  std::function<double(double)> u0_;
};

/// Inviscid Burgers equation d/dt u + d/dx (u^2/2) = 0 on a bounded domain
/// with Rusanov flux. The left end is inflow (exterior trace pinned to the
/// initial datum there), the right end is outflow (exterior trace copies the
/// interior). The default instance carries the Gaussian pulse datum and its
/// characteristic-relation solution; a custom datum has no exact solution.
class Burgers1D : public FluxModel {
 public:
  Burgers1D();
  explicit Burgers1D(std::function<double(double)> u0);

  std::string name() const override { return "burgers1d"; }
  bool is_linear() const override { return false; }
  bool is_periodic() const override { return false; }
  double flux(double u) const override { return 0.5 * u * u; }
  double flux_jacobian(double u) const override { return u; }
  double wavespeed(double u) const override { return std::abs(u); }
  double numerical_flux(double u_plus, double u_minus, double n) const override;
  double boundary_value(double x, double t, int side,
                        double interior) const override;
  double initial(double x) const override { return u0_(x); }
  bool has_exact() const override { return has_exact_; }
  double exact(double x, double t) const override;

 private:
  std::function<double(double)> u0_;
  bool has_exact_;
};

}  // namespace tentkit
