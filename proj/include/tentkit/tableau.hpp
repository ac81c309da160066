#pragma once

#include <array>
#include <string>
#include <vector>

namespace tentkit {

/// Coefficients of a structure aware Runge-Kutta scheme: two strictly lower
/// triangular stage matrices a (transport stages) and d (mass-change stages),
/// weights b and abscissae c with c_i = sum_{j<i} a_ij.
struct SarkTableau {
  std::string name;
  int stages = 0;
  int nominal_order = 0;
  std::vector<double> a;  // row-major stages x stages
  std::vector<double> d;
  std::vector<double> b;
  std::vector<double> c;

  double A(int i, int j) const { return a[static_cast<size_t>(i) * stages + j]; }
  double D(int i, int j) const { return d[static_cast<size_t>(i) * stages + j]; }
};

/// Classical explicit Runge-Kutta tableau (a, b, c), strictly lower triangular.
struct ButcherTableau {
  std::string name;
  int stages = 0;
  int nominal_order = 0;
  std::vector<double> a;  // row-major stages x stages
  std::vector<double> b;
  std::vector<double> c;

  double A(int i, int j) const { return a[static_cast<size_t>(i) * stages + j]; }
};

/// Residuals (LHS - 1) of the order conditions up to order three.
/// r2 = (mass-stage sum, transport-stage sum). r3 holds the seven third-order
/// conditions in the fixed listed order: the three "square" conditions on the
/// row sums of a and d (aa, dd, ad), then the four nested conditions
/// (b a a, b a d, b d a, b d d).
struct OrderReport {
  double r1 = 0.0;
  std::array<double, 2> r2{};
  std::array<double, 7> r3{};
  int attained_order = 0;
  double tol = 0.0;
};

/// Built-in SARK tableaus: sark2-midpoint, sark2-ralston, sark2-heun,
/// sark3-kutta, sark3-heun. Throws on unknown names.
SarkTableau builtin_sark(const std::string& name);

/// Built-in classical tableaus: rk2-ralston, rk3-heun, rk4-classic.
ButcherTableau builtin_rk(const std::string& name);

std::vector<std::string> builtin_sark_names();
std::vector<std::string> builtin_rk_names();

/// Structural checks: shape, strict lower triangularity, c_i = sum_j a_ij.
void validate(const SarkTableau& t);
void validate(const ButcherTableau& t);

/// Evaluates all order-condition residuals and the attained order (largest k
/// with every residual up to level k of magnitude <= tol).
OrderReport order_residuals(const SarkTableau& t, double tol = 1e-12);

/// Attained order only.
int verify_order(const SarkTableau& t, double tol = 1e-12);

}  // namespace tentkit
