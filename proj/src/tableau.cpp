#include "tentkit/tableau.hpp"

#include <cmath>
#include <cstdlib>

#include "tentkit/errors.hpp"

namespace tentkit {
namespace {

// Compensated accumulator (Neumaier). The built-in tableaus satisfy their
// conditions in exact rational arithmetic; compensation keeps the short
// floating-point sums exact as well, so residuals of satisfied conditions
// come out as 0.0 rather than an ulp away.
class Acc {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

SarkTableau make_sark(std::string name, int stages, int order,
                      std::vector<double> a, std::vector<double> d,
                      std::vector<double> b) {
  SarkTableau t;
  t.name = std::move(name);
  t.stages = stages;
  t.nominal_order = order;
  t.a = std::move(a);
  t.d = std::move(d);
  t.b = std::move(b);
  t.c.assign(stages, 0.0);
  for (int i = 0; i < stages; ++i) {
    Acc row;
    for (int j = 0; j < i; ++j) row.add(t.A(i, j));
    t.c[i] = row.value();
  }
  validate(t);
  return t;
}

ButcherTableau make_rk(std::string name, int stages, int order,
                       std::vector<double> a, std::vector<double> b,
                       std::vector<double> c) {
  ButcherTableau t;
  t.name = std::move(name);
  t.stages = stages;
  t.nominal_order = order;
  t.a = std::move(a);
  t.b = std::move(b);
  t.c = std::move(c);
  validate(t);
  return t;
}

}  // namespace

SarkTableau builtin_sark(const std::string& name) {
  if (name == "sark2-midpoint")
    return make_sark(name, 2, 2,
                     {0, 0, 1. / 2, 0},
                     {0, 0, 1. / 2, 0},
                     {0, 1});
  if (name == "sark2-ralston")
    return make_sark(name, 2, 2,
                     {0, 0, 2. / 3, 0},
                     {0, 0, 2. / 3, 0},
                     {1. / 4, 3. / 4});
  if (name == "sark2-heun")
    return make_sark(name, 2, 2,
                     {0, 0, 1, 0},
                     {0, 0, 1, 0},
                     {1. / 2, 1. / 2});
  if (name == "sark3-kutta")
    return make_sark(name, 3, 3,
                     {0, 0, 0, 1. / 2, 0, 0, -1, 2, 0},
                     {0, 0, 0, 1. / 2, 0, 0, -3, 4, 0},
                     {1. / 6, 2. / 3, 1. / 6});
  if (name == "sark3-heun")
    return make_sark(name, 3, 3,
                     {0, 0, 0, 1. / 3, 0, 0, 0, 2. / 3, 0},
                     {0, 0, 0, 1. / 3, 0, 0, -2. / 3, 4. / 3, 0},
                     {1. / 4, 0, 3. / 4});
  fail("unknown SARK tableau '", name, "' (expected one of",
       " sark2-midpoint, sark2-ralston, sark2-heun, sark3-kutta, sark3-heun)");
}

ButcherTableau builtin_rk(const std::string& name) {
  if (name == "rk2-ralston")
    return make_rk(name, 2, 2,
                   {0, 0, 2. / 3, 0},
                   {1. / 4, 3. / 4},
                   {0, 2. / 3});
  if (name == "rk3-heun")
    return make_rk(name, 3, 3,
                   {0, 0, 0, 1. / 3, 0, 0, 0, 2. / 3, 0},
                   {1. / 4, 0, 3. / 4},
                   {0, 1. / 3, 2. / 3});
  if (name == "rk4-classic")
    return make_rk(name, 4, 4,
                   {0, 0, 0, 0, 1. / 2, 0, 0, 0, 0, 1. / 2, 0, 0, 0, 0, 1, 0},
                   {1. / 6, 1. / 3, 1. / 3, 1. / 6},
                   {0, 1. / 2, 1. / 2, 1});
  fail("unknown RK tableau '", name,
       "' (expected one of rk2-ralston, rk3-heun, rk4-classic)");
}

std::vector<std::string> builtin_sark_names() {
  return {"sark2-midpoint", "sark2-ralston", "sark2-heun", "sark3-kutta",
          "sark3-heun"};
}

std::vector<std::string> builtin_rk_names() {
  return {"rk2-ralston", "rk3-heun", "rk4-classic"};
}

void validate(const SarkTableau& t) {
  const size_t s = static_cast<size_t>(t.stages);
  require(t.stages >= 1, "tableau '", t.name, "': needs at least one stage");
  require(t.a.size() == s * s && t.d.size() == s * s && t.b.size() == s &&
              t.c.size() == s,
          "tableau '", t.name, "': inconsistent coefficient sizes");
  for (int i = 0; i < t.stages; ++i)
    for (int j = i; j < t.stages; ++j)
      require(t.A(i, j) == 0.0 && t.D(i, j) == 0.0, "tableau '", t.name,
              "': stage matrices must be strictly lower triangular");
  for (int i = 0; i < t.stages; ++i) {
    Acc row;
    for (int j = 0; j < i; ++j) row.add(t.A(i, j));
    require(std::abs(t.c[i] - row.value()) <= 1e-14, "tableau '", t.name,
            "': c[", i, "] does not match the row sum of a");
  }
}

void validate(const ButcherTableau& t) {
  const size_t s = static_cast<size_t>(t.stages);
  require(t.stages >= 1, "tableau '", t.name, "': needs at least one stage");
  require(t.a.size() == s * s && t.b.size() == s && t.c.size() == s,
          "tableau '", t.name, "': inconsistent coefficient sizes");
  for (int i = 0; i < t.stages; ++i)
    for (int j = i; j < t.stages; ++j)
      require(t.A(i, j) == 0.0, "tableau '", t.name,
              "': stage matrix must be strictly lower triangular");
  for (int i = 0; i < t.stages; ++i) {
    Acc row;
    for (int j = 0; j < i; ++j) row.add(t.A(i, j));
    require(std::abs(t.c[i] - row.value()) <= 1e-14, "tableau '", t.name,
            "': c[", i, "] does not match the row sum of a");
  }
}

OrderReport order_residuals(const SarkTableau& t, double tol) {
  validate(t);
  const int s = t.stages;
  std::vector<double> ra(s, 0.0), rd(s, 0.0);  // row sums of a and d
  for (int i = 0; i < s; ++i) {
    Acc sa, sd;
    for (int j = 0; j < i; ++j) {
      sa.add(t.A(i, j));
      sd.add(t.D(i, j));
    }
    ra[i] = sa.value();
    rd[i] = sd.value();
  }

  OrderReport rep;
  rep.tol = tol;

  Acc c1;
  for (int i = 0; i < s; ++i) c1.add(t.b[i]);
  rep.r1 = c1.value() - 1.0;

  Acc c2d, c2a;
  for (int i = 0; i < s; ++i) {
    c2d.add(t.b[i] * rd[i]);
    c2a.add(t.b[i] * ra[i]);
  }
  rep.r2 = {2.0 * c2d.value() - 1.0, 2.0 * c2a.value() - 1.0};

  Acc qaa, qdd, qad;
  for (int i = 0; i < s; ++i) {
    qaa.add((t.b[i] * ra[i]) * ra[i]);
    qdd.add((t.b[i] * rd[i]) * rd[i]);
    qad.add((t.b[i] * ra[i]) * rd[i]);
  }
  Acc naa, nad, nda, ndd;
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < i; ++j)
      for (int k = 0; k < j; ++k) {
        naa.add((t.b[i] * t.A(i, j)) * t.A(j, k));
        nad.add((t.b[i] * t.A(i, j)) * t.D(j, k));
        nda.add((t.b[i] * t.D(i, j)) * t.A(j, k));
        ndd.add((t.b[i] * t.D(i, j)) * t.D(j, k));
      }
  rep.r3 = {3.0 * qaa.value() - 1.0, 3.0 * qdd.value() - 1.0,
            3.0 * qad.value() - 1.0, 6.0 * naa.value() - 1.0,
            6.0 * nad.value() - 1.0, 3.0 * nda.value() - 1.0,
            3.0 * ndd.value() - 1.0};

  rep.attained_order = 0;
  if (std::abs(rep.r1) <= tol) {
    rep.attained_order = 1;
    bool o2 = true;
    for (double x : rep.r2) o2 = o2 && std::abs(x) <= tol;
    if (o2) {
      rep.attained_order = 2;
      bool o3 = true;
      for (double x : rep.r3) o3 = o3 && std::abs(x) <= tol;
      if (o3) rep.attained_order = 3;
    }
  }
  return rep;
}

int verify_order(const SarkTableau& t, double tol) {
  return order_residuals(t, tol).attained_order;
}

}  // namespace tentkit
