#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "sl2c/quadrature.hpp"

using namespace sl2c;

namespace {

// [z]^E
cplx pw(const ZIndex& E, cplx z) {
  return std::exp((E.alpha + E.alpha_bar()) * std::log(std::abs(z))) * std::polar(1.0, E.m * std::arg(z));
}

cplx ipow(int m) { return std::pow(cplx(0, 1), m); }

// Propagators 1/[a - b]^Z with numeric indices bound to fresh parameters.
struct Builder {
  Binding par;
  int n = 0;
  SymIndex index(const ZIndex& Z) {
    std::string h = "k" + std::to_string(n), a = "kb" + std::to_string(n);
    ++n;
    par.set(h, Z.alpha).set(a, Z.alpha_bar());
    return {Poly::var(h), Poly::var(a)};
  }
  PowExpr prop(const std::string& a, const std::string& b, const ZIndex& Z) {
    return PowExpr::power(a, b, -index(Z));
  }
  PowExpr prop(const std::string& a, const ZIndex& Z) { return PowExpr::power(a, -index(Z)); }
};

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

// Index with Re(alpha + alpha_bar) = sum and alpha - alpha_bar = m.
ZIndex with_sum(double sum, int m, double im) { return {cplx((sum + m) / 2, im), m}; }

Binding points(std::initializer_list<std::pair<const char*, cplx>> l) {
  Binding b;
  for (auto& [k, v] : l) b.set(k, v);
  return b;
}

}  // namespace

TEST_CASE("chain at alpha = beta = 3/4 carries the factor pi") {
  Builder B;
  ZIndex al{0.75, 0}, be{0.75, 0}, ga = 2.0 - al - be;
  PowExpr e = B.prop("z1", "w", al) * B.prop("w", "z2", be);
  QuadOptions o;
  o.tol = 1e-8;
  auto r = integrate2d(e, "w", points({{"z1", 0.0}, {"z2", 1.0}}), B.par, o);
  cplx closed = sign_power(ga.m) * a_of({al, be, ga}) * pw(-(al + be - 1.0), cplx(-1.0));
  CHECK(rel(r.value, kPi * closed) < 1e-4);
  CHECK(rel(r.value, closed) > 0.5);
  CHECK(r.error < 1e-6);
  CHECK(r.method == "adaptive");
}

TEST_CASE("chain relation at generic indices") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> us(1.1, 1.7), ui(-0.3, 0.3);
  std::uniform_int_distribution<int> um(-1, 1);
  for (int draw = 0; draw < 3; ++draw) {
    ZIndex al = with_sum(us(rng), um(rng), ui(rng)), be = with_sum(us(rng), um(rng), ui(rng));
    ZIndex ga = 2.0 - al - be;
    cplx z1(0.3, -0.2), z2(-0.5, 0.7);
    Builder B;
    PowExpr e = B.prop("z1", "w", al) * B.prop("w", "z2", be);
    auto r = integrate2d(e, "w", points({{"z1", z1}, {"z2", z2}}), B.par, {});
    cplx closed = kPi * sign_power(ga.m) * a_of({al, be, ga}) * pw(-(al + be - 1.0), z1 - z2);
    CHECK(rel(r.value, closed) < 1e-4);
  }
}

TEST_CASE("star-triangle relation") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> us(1.1, 1.6), ui(-0.3, 0.3);
  std::uniform_int_distribution<int> um(-1, 1);
  cplx z1(0.0, 0.0), z2(1.0, 0.2), z3(0.3, 0.9);
  for (int draw = 0; draw < 3; ++draw) {
    double sa = us(rng), sb = us(rng);
    ZIndex al = with_sum(sa, um(rng), ui(rng)), be = with_sum(sb, um(rng), ui(rng));
    ZIndex ga = 2.0 - al - be;
    Builder B;
    PowExpr e = B.prop("z1", "w", al) * B.prop("z2", "w", be) * B.prop("z3", "w", ga);
    QuadOptions o;
    o.tol = 1e-6;
    auto r = integrate2d(e, "w", points({{"z1", z1}, {"z2", z2}, {"z3", z3}}), B.par, o);
    cplx closed = kPi * a_of({al, be, ga}) * pw(-(1.0 - ga), z2 - z1) * pw(-(1.0 - be), z1 - z3) *
                  pw(-(1.0 - al), z3 - z2);
    CHECK(rel(r.value, closed) < 1e-3);
  }
}

TEST_CASE("cross relation") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> us(0.5, 1.3), ui(-0.3, 0.3);
  std::uniform_int_distribution<int> um(-1, 1);
  cplx z[4] = {{0, 0}, {1, 0.1}, {0.4, 0.9}, {-0.6, 0.5}};
  Binding pts = points({{"z1", z[0]}, {"z2", z[1]}, {"z3", z[2]}, {"z4", z[3]}});
  for (int draw = 0; draw < 3; ++draw) {
    ZIndex al = with_sum(us(rng), um(rng), ui(rng)), be = with_sum(us(rng), um(rng), ui(rng));
    ZIndex alp = with_sum(us(rng), um(rng), ui(rng));
    ZIndex bep = al + be - alp;
    auto side = [&](ZIndex a, ZIndex b, ZIndex ap, ZIndex bp) {
      Builder B;
      PowExpr e = B.prop("w", "z1", a) * B.prop("w", "z2", 1.0 - ap) * B.prop("w", "z3", b) *
                  B.prop("w", "z4", 1.0 - bp);
      QuadOptions o;
      o.tol = 1e-6;
      return integrate2d(e, "w", pts, B.par, o).value;
    };
    cplx lhs = pw(-(alp - al), z[0] - z[1]) * a_of(alp) * a_of(bep.swapped()) * side(al, be, alp, bep);
    cplx I2 = a_of(al) * a_of(be.swapped()) * side(alp, bep, al, be);
    // the z3 - z4 factor has exponent -(beta - beta'), not -(beta' - beta)
    CHECK(rel(lhs, pw(-(be - bep), z[2] - z[3]) * I2) < 1e-3);
    CHECK(rel(lhs, pw(-(bep - be), z[2] - z[3]) * I2) > 1e-2);
  }
}

TEST_CASE("Fourier pair through the oscillatory far field and finite part") {
  struct Case {
    ZIndex al;
    cplx p;
  };
  for (auto c : {Case{{1.2, 0}, 1.0}, Case{{cplx(0.8, 0.3), 1}, {0.7, -0.4}},
                 Case{{cplx(1.1, -0.2), -1}, {-0.5, 0.9}}, Case{{0.7, 0}, 1.0}}) {
    Builder B;
    B.par.set("p", c.p).set("pbar", std::conj(c.p));
    PowExpr e = B.prop("w", c.al) * PowExpr::wave("w", Poly::var("p"), Poly::var("pbar"));
    QuadOptions o;
    o.finite_part = true;
    o.tol = 1e-8;
    auto r = integrate2d(e, "w", {}, B.par, o);
    cplx closed = kPi * ipow(c.al.m) * a_of(c.al) * pw(-(1.0 - c.al), c.p);
    CHECK(rel(r.value, closed) < 1e-4);
  }
}

TEST_CASE("fractional-derivative representation carries i^(alpha - alpha_bar)") {
  // int [z-w]^-alpha [w]^b = pi c(alpha) a(alpha) kappa(alpha-1, b) [z]^(b-alpha+1)
  struct Case {
    ZIndex al, b;
  };
  for (auto c : {Case{{cplx(1.3, 0.3), 1}, {cplx(-0.5, 0.2), 0}},
                 Case{{cplx(0.4, -0.1), -1}, {cplx(-0.4, 0.1), 1}}}) {
    Builder B;
    PowExpr e = B.prop("z", "w", c.al) * B.prop("w", -c.b);
    cplx z(0.6, 0.8);
    QuadOptions o;
    o.tol = 1e-9;
    auto r = integrate2d(e, "w", points({{"z", z}}), B.par, o);
    ZIndex ord = c.al - ZIndex{1.0, 0};
    cplx base = kPi * a_of(c.al) * frac_coefficient(ord, c.b) * pw(c.b - ord, z);
    CHECK(rel(r.value, ipow(c.al.m) * base) < 1e-6);
    CHECK(rel(r.value, ipow(-c.al.m) * base) > 1);
  }
}

TEST_CASE("integrability gate") {
  Builder B;
  Binding pts = points({{"z", 0.0}});
  CHECK_THROWS_AS(integrate2d(B.prop("w", "z", {1.0, 0}), "w", pts, B.par), NonIntegrable);
  CHECK_THROWS_AS(integrate2d(B.prop("w", "z", {1.5, 0}) * B.prop("w", {1.5, 0}) *
                                  B.prop("w", "z", {0.6, 0}),
                              "w", pts, B.par),
                  NonIntegrable);
  QuadOptions fp;
  fp.finite_part = true;
  CHECK_THROWS_AS(integrate2d(B.prop("w", {2.0, 0}) * B.prop("w", "z", {1.0, 0}), "w", pts, B.par, fp),
                  NonIntegrable);
  B.par.set("p", 1.0).set("pbar", 2.0);
  CHECK_THROWS_AS(integrate2d(B.prop("w", {0.5, 0}) * PowExpr::wave("w", Poly::var("p"), Poly::var("pbar")),
                              "w", {}, B.par),
                  NonIntegrable);
  CHECK_THROWS_AS(integrate2d(B.prop("w", "z", {0.5, 0}), "x", pts, B.par), NonIntegrable);
}

TEST_CASE("Monte Carlo agrees with adaptive quadrature and is seed-deterministic") {
  Builder B;
  PowExpr e = B.prop("z1", "w", {cplx(0.7, 0.1), 0}) * B.prop("w", "z2", {cplx(0.9, -0.1), 1}) *
              B.prop("w", "z3", {0.6, 0});
  Binding pts = points({{"z1", 0.0}, {"z2", 1.0}, {"z3", cplx(0.2, 0.8)}});
  auto a = integrate2d(e, "w", pts, B.par, {});
  QuadOptions mc;
  mc.force_montecarlo = true;
  mc.mc_samples = 1'000'000;
  mc.seed = 5;
  auto m1 = integrate2d(e, "w", pts, B.par, mc);
  CHECK(m1.method == "montecarlo");
  CHECK(std::abs(m1.value - a.value) < m1.error);
  CHECK(m1.error < 0.05 * std::abs(a.value));
  mc.exec = Exec::serial;
  auto m2 = integrate2d(e, "w", pts, B.par, mc);
  CHECK(m2.value == m1.value);
  mc.seed = 6;
  CHECK(integrate2d(e, "w", pts, B.par, mc).value != m1.value);
  QuadOptions big = mc;
  big.mc_samples = big.mc_budget + 1;
  CHECK_THROWS_AS(integrate2d(e, "w", pts, B.par, big), BudgetExceeded);
  QuadOptions ser;
  ser.exec = Exec::serial;
  CHECK(integrate2d(e, "w", pts, B.par, ser).value == a.value);
}

TEST_CASE("iterated integral of a two-loop chain") {
  // w1 and w2 chained between z1 and z2: two applications of the chain rule.
  Builder B;
  ZIndex al{0.7, 0}, be{0.8, 0}, ga{0.75, 0};
  PowExpr e = B.prop("z1", "w1", al) * B.prop("w1", "w2", be) * B.prop("w2", "z2", ga);
  cplx z1 = 0.0, z2 = 1.0;
  QuadOptions o;
  o.tol = 5e-2;
  auto r = integrate_nested(e, {"w1", "w2"}, points({{"z1", z1}, {"z2", z2}}), B.par, o);
  ZIndex ab = al + be - 1.0;
  cplx c1 = kPi * a_of({al, be, 2.0 - al - be});
  cplx c2 = kPi * a_of({ab, ga, 2.0 - ab - ga});
  cplx closed = c1 * c2 * pw(-(ab + ga - 1.0), z1 - z2);
  CHECK(rel(r.value, closed) < 1e-2);
}

TEST_CASE("JSON export and Wynn acceleration") {
  QuadratureResult r{cplx(1.5, -2), 1e-3, "adaptive", 0, 42};
  std::string j = to_json(r);
  for (auto key : {"value_re", "value_im", "error", "method", "samples", "seed"})
    CHECK(j.find(key) != std::string::npos);
  std::vector<cplx> s;
  cplx run = 0;
  for (int k = 1; k <= 15; ++k) {
    run += (k % 2 ? 1.0 : -1.0) / k;
    s.push_back(run);
  }
  CHECK(std::abs(wynn_epsilon(s) - std::log(2.0)) < 1e-9);
}
