#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "sl2c/diagram.hpp"

using namespace sl2c;

namespace {

Poly V(const std::string& n) { return Poly::var(n); }
SymIndex both(long long c) { return SymIndex::both(Poly(c)); }

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

// Fresh symbolic indices bound to numeric values.
struct Params {
  Binding b;
  int n = 0;
  SymIndex fresh(const ZIndex& Z) {
    std::string h = "e" + std::to_string(n), a = "eb" + std::to_string(n);
    ++n;
    b.set(h, Z.alpha).set(a, Z.alpha_bar());
    return {V(h), V(a)};
  }
};

// Index with Re(alpha + alpha_bar) = sum, alpha - alpha_bar = m.
ZIndex with_sum(double sum, int m, double im) { return {cplx((sum + m) / 2, im), m}; }

Binding pts(std::initializer_list<std::pair<const char*, cplx>> l) {
  Binding b;
  for (auto& [k, v] : l) b.set(k, v);
  return b;
}

// Value before and after a rewrite at the same external points.
std::pair<cplx, cplx> before_after(const Diagram& d, Rule r, const Loc& loc, const Binding& p,
                                   const Binding& par) {
  QuadOptions o;
  o.tol = 1e-8;
  cplx lhs = eval_diagram(d, p, par, o).value;
  Diagram after = apply_rule(d, r, loc);
  cplx rhs = eval_diagram(after, p, par, o).value;
  return {lhs, rhs};
}

Binding spin_params(const Spin& s) {
  Binding b;
  b.set("s", s.s()).set("sbar", s.sbar());
  return b;
}

}  // namespace

TEST_CASE("layer kernel structure") {
  for (int N = 1; N <= 3; ++N) {
    Diagram d = build_lambda(N, LambdaFamily::plain, V("x"));
    CHECK(d.count(VertexKind::Internal) == N - 1);
    CHECK(d.count(VertexKind::External) == N);
    CHECK(d.edges.size() == size_t(3 * (N - 1)));
  }
  Diagram t = build_lambda(1, LambdaFamily::tilde, V("x"));
  CHECK(t.serialize() ==
        "sl2c-diagram v1\n"
        "vertex 0 external z1\n"
        "vertex 1 anchor 0\n"
        "edge 0 -> z1 (-1i*x + s, sbar + -1i*xbar)\n"
        "coeff 1\n");
}

TEST_CASE("eigenfunction diagram shapes") {
  Diagram a3 = build_psi(Family::A, 3, {V("x1"), V("x2"), V("x3")});
  CHECK(a3.count(VertexKind::Internal) == 3);
  CHECK(a3.count(VertexKind::Anchor) == 1);
  Diagram b1 = build_psi(Family::B, 1, {});
  CHECK(b1.edges.empty());
  CHECK(b1.waves.size() == 1);
  Diagram b3 = build_psi(Family::B, 3, {V("x1"), V("x2")});
  CHECK(b3.count(VertexKind::Internal) == 3);
  CHECK(b3.waves.size() == 1);
  CHECK_FALSE(b3.waves[0].inverted);
  Diagram c2 = build_psi(Family::C, 2, {V("x1")});
  CHECK(c2.waves.size() == 1);
  CHECK(c2.waves[0].inverted);
  CHECK_THROWS_AS(build_psi(Family::A, 2, {V("x1")}), std::invalid_argument);
}

TEST_CASE("serialization is stable under relabel round trip") {
  Diagram d = build_psi(Family::D, 2, {V("x1"), V("x2")});
  std::string s = d.serialize();
  Diagram e = d;
  e.relabel({{"w1_1", "q"}});
  e.relabel({{"q", "w1_1"}});
  CHECK(e.serialize() == s);
  CHECK(s.rfind("sl2c-diagram v1\n", 0) == 0);
}

TEST_CASE("simplifier preserves values") {
  ParitySamples ps = parity_samples(10, 3);
  const Poly x = V("x"), s = V("s"), I = Poly::I();
  SymIndex A = SymIndex::sym(s + I * x);
  SymIndex Ab{A.anti, A.holo};
  SymIndex one_minus_bar{Poly(1) - A.anti, Poly(1) - A.holo};
  SymIndex plus1 = A + both(1), two_minus = both(2) - A, one_minus = both(1) - A;
  std::vector<CoefficientProduct> cases = {
      {a_factor(A), a_factor(one_minus_bar)},
      {a_factor(A), a_factor(one_minus)},
      {a_factor(A), a_factor(Ab, -1)},
      {a_factor(plus1), a_factor(A, -1)},
      {a_factor(A), a_factor(two_minus)},
      {pi_power(2), pi_power(-1), i_power(Poly(2) * (A.holo - A.anti)), sign_of(A)},
      {linear_factor(x - V("y"), both(-1)), linear_factor(V("y") - x, both(1))},
  };
  for (auto& c : cases) {
    CoefficientProduct r = c.simplified(&ps);
    for (auto& b : ps) CHECK(rel(r.value(b), c.value(b)) < 1e-10);
  }
  CHECK(cases[0].simplified(&ps).atoms().empty());
  CHECK(cases[6].simplified(&ps).atoms().empty());
}

TEST_CASE("physical conjugation is an involution") {
  Poly s = V("s"), sb = V("sbar");
  CHECK(physical_conj(s) == Poly(1) - sb);
  CHECK(physical_conj(physical_conj(V("x") + s)) == V("x") + s);
}

TEST_CASE("chain rule against quadrature") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> sum(0.6, 1.7), im(-0.4, 0.4);
  std::uniform_int_distribution<int> mm(-1, 1);
  int draws = 0;
  while (draws < 3) {
    ZIndex al = with_sum(sum(rng), mm(rng), im(rng)), be = with_sum(sum(rng), mm(rng), im(rng));
    double s1 = (al.alpha + al.alpha_bar()).real(), s2 = (be.alpha + be.alpha_bar()).real();
    if (s1 <= 0.3 || s1 >= 1.7 || s2 <= 0.3 || s2 >= 1.7 || s1 + s2 < 2.3) continue;
    Params P;
    Diagram d;
    d.vertex("w", VertexKind::Internal);
    // one edge reversed on odd draws to exercise the orientation sign
    if (draws % 2) {
      d.add_edge("w", "z1", P.fresh(al));
    } else {
      d.add_edge("z1", "w", P.fresh(al));
    }
    d.add_edge("z2", "w", P.fresh(be));
    auto [l, r] = before_after(d, Rule::chain, {"w", {}}, pts({{"z1", {0.2, 0.1}}, {"z2", {-0.6, 0.7}}}),
                               P.b);
    CHECK(rel(r, l) < 1e-4);
    ++draws;
  }
}

TEST_CASE("star-triangle against quadrature") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> re(0.55, 0.85), im(-0.3, 0.3);
  std::uniform_int_distribution<int> mm(-1, 1);
  int draws = 0;
  while (draws < 3) {
    int m1 = mm(rng), m2 = mm(rng), m3 = -m1 - m2;
    cplx a1(re(rng), im(rng)), a2(re(rng), im(rng)), a3 = 2.0 - a1 - a2;
    ZIndex Z[3] = {{a1, m1}, {a2, m2}, {a3, m3}};
    bool ok = true;
    for (auto& z : Z) {
      double t = (z.alpha + z.alpha_bar()).real();
      ok = ok && t > 0.2 && t < 1.8;
    }
    if (!ok) continue;
    Params P;
    SymIndex A1 = P.fresh(Z[0]), A2 = P.fresh(Z[1]);
    Diagram d;
    d.vertex("w", VertexKind::Internal);
    d.add_edge("w", "z1", A1);
    d.add_edge("z2", "w", A2);  // reversed
    d.add_edge("w", "z3", both(2) - A1 - A2);
    auto [l, r] = before_after(d, Rule::star_triangle, {"w", {}},
                               pts({{"z1", {0.1, 0.2}}, {"z2", {-0.7, -0.3}}, {"z3", {0.8, -0.5}}}), P.b);
    CHECK(rel(r, l) < 1e-3);
    ++draws;
  }
}

TEST_CASE("cross relation against quadrature") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> re(0.45, 0.75), im(-0.2, 0.2);
  std::uniform_int_distribution<int> mm(-1, 1);
  int draws = 0;
  while (draws < 3) {
    ZIndex al{cplx(re(rng), im(rng)), mm(rng)}, be{cplx(re(rng), im(rng)), mm(rng)};
    ZIndex alp{cplx(re(rng), im(rng)), mm(rng)};
    ZIndex bep = al + be - alp;
    ZIndex ex[4] = {al, 1.0 - alp, be, 1.0 - bep};
    bool ok = true;
    double tot = 0;
    for (auto& z : ex) {
      double t = (z.alpha + z.alpha_bar()).real();
      ok = ok && t > 0.2 && t < 1.8;
      tot += t;
    }
    if (!ok || tot < 2.3) continue;
    Params P;
    SymIndex Al = P.fresh(al), Be = P.fresh(be), Alp = P.fresh(alp);
    Diagram d;
    d.vertex("w", VertexKind::Internal);
    d.add_edge("z1", "w", Al);
    d.add_edge("z2", "w", both(1) - Alp);
    d.add_edge("w", "z3", Be);  // reversed
    d.add_edge("z4", "w", both(1) - (Al + Be - Alp));
    auto [l, r] = before_after(
        d, Rule::cross, {"w", {"z1", "z2", "z3", "z4"}},
        pts({{"z1", {0.1, 0.2}}, {"z2", {-0.7, -0.3}}, {"z3", {0.8, -0.5}}, {"z4", {-0.2, 0.9}}}), P.b);
    CHECK(rel(r, l) < 1e-3);
    ++draws;
  }
}

TEST_CASE("Fourier rule against quadrature") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> re(0.6, 0.9), im(-0.3, 0.3);
  std::uniform_int_distribution<int> mm(-1, 1);
  int draws = 0;
  while (draws < 3) {
    ZIndex al{cplx(re(rng), im(rng)), mm(rng)};
    double t = (al.alpha + al.alpha_bar()).real();
    if (t < 1.1 || t > 1.8) continue;
    Params P;
    P.b.set("p", cplx(1.3, -0.4)).set("pbar", cplx(1.3, 0.4));
    Diagram d;
    d.vertex("w", VertexKind::Internal);
    d.add_edge("u", "w", P.fresh(al));
    d.add_wave("w", V("p"), V("pbar"));
    auto [l, r] = before_after(d, Rule::fourier, {"w", {}}, pts({{"u", {0.3, -0.2}}}), P.b);
    CHECK(rel(r, l) < 1e-4);
    ++draws;
  }
}

TEST_CASE("rule preconditions") {
  Diagram d;
  d.vertex("w", VertexKind::Internal);
  d.add_edge("z1", "w", both(1));
  d.add_edge("z2", "w", both(1));
  CHECK_THROWS_AS(apply_rule(d, Rule::chain, {"w", {}}), PreconditionFailed);
  CHECK_NOTHROW(apply_rule(d, Rule::delta_reduce, {"w", {}}));
  CHECK_THROWS_AS(apply_rule(d, Rule::star_triangle, {"w", {}}), PreconditionFailed);
  CHECK_THROWS_AS(apply_rule(d, Rule::chain, {"z1", {}}), PreconditionFailed);
  CHECK_THROWS_AS(apply_rule(d, Rule::fourier, {"w", {}}), PreconditionFailed);
  CHECK_THROWS_AS(apply_rule(d, Rule::chain, {"nowhere", {}}), PreconditionFailed);
  Diagram e = d;
  e.add_edge("z3", "w", SymIndex{V("a"), V("abar")});
  CHECK_THROWS_AS(apply_rule(e, Rule::star_triangle, {"w", {}}), PreconditionFailed);
  CHECK(rule_from_name(rule_name(Rule::star_triangle)) == Rule::star_triangle);
}

TEST_CASE("delta_reduce produces a point delta") {
  Diagram d;
  d.vertex("w", VertexKind::Internal);
  SymIndex a{V("a"), V("abar")};
  d.add_edge("z1", "w", a);
  d.add_edge("w", "z2", both(2) - a);
  Diagram r = apply_rule(d, Rule::delta_reduce, {"w", {}});
  CHECK(r.edges.empty());
  auto ds = r.coeff.deltas();
  REQUIRE(ds.size() == 1);
  CHECK_FALSE(ds[0].spectral);
}

TEST_CASE("script failure reports the step") {
  Diagram d = build_lambda(2, LambdaFamily::plain, V("x"));
  RewriteScript s = {{Rule::merge, {}}, {Rule::star_triangle, {"w1", {}}}};
  try {
    run_script(d, s);
    FAIL("expected StepFailed");
  } catch (const StepFailed& e) {
    CHECK(e.step == 1);
  }
}

TEST_CASE("shipped derivations reduce to their closed forms") {
  for (const std::string& n : derivation_names()) {
    CAPTURE(n);
    Derivation d = derive(n);
    CHECK(d.matches);
    CHECK(d.numeric_residual < 1e-10);
    CHECK(d.result.log.size() >= 2);
  }
  CHECK_THROWS_AS(derive("nope"), std::invalid_argument);
}

TEST_CASE("derivation output is deterministic") {
  Derivation a = derive("exchange2"), b = derive("exchange2");
  CHECK(a.result.diagram.serialize() == b.result.diagram.serialize());
  CHECK(a.result.log == b.result.log);
}

TEST_CASE("measure from exchange relations") {
  ParitySamples ps = parity_samples(6, 5);
  const double pi = kPi;
  for (auto& b : ps) {
    auto xv = [&](int k) { return b.get(sym("x" + std::to_string(k))); };
    auto xb = [&](int k) { return b.get(sym("xbar" + std::to_string(k))); };
    auto alpha = [&](int j, int k) { return pi * pi / ((xv(j) - xv(k)) * (xb(j) - xb(k))); };
    // A family: (2 pi^2)^N prod_{j<k} alpha(x_j, x_k)
    for (int N = 1; N <= 3; ++N) {
      cplx want = std::pow(2 * pi * pi, N);
      for (int j = 1; j <= N; ++j)
        for (int k = j + 1; k <= N; ++k) want *= alpha(j, k);
      CHECK(rel(measure_from_exchange(N, Family::A).value(b), want) < 1e-12);
    }
    // B family: 2^(N-1) pi^(4(N-1)+2) prod_{j<k<N} alpha(x_j, x_k)
    for (int N = 1; N <= 3; ++N) {
      cplx want = std::pow(2.0, N - 1) * std::pow(pi, 4 * (N - 1) + 2);
      for (int j = 1; j < N; ++j)
        for (int k = j + 1; k < N; ++k) want *= alpha(j, k);
      CHECK(rel(measure_from_exchange(N, Family::B).value(b), want) < 1e-12);
    }
  }
  CHECK_THROWS_AS(measure_from_exchange(2, Family::C), std::invalid_argument);
}

TEST_CASE("factorized R kernel: chain rewriting agrees with quadrature") {
  const Poly u = V("u"), v = V("v");
  Diagram r = apply_rule(build_factorized_R(1, u, v), Rule::integrate_delta, {"w1", {}});
  Diagram c = apply_rule(r, Rule::chain, {"w2", {}});
  c.merge_parallel();
  Binding p = pts({{"z1", {0.3, -0.2}}, {"z2", {-0.7, 0.5}}});
  QuadOptions o;
  o.tol = 1e-8;
  // shifted into the absolutely convergent strip; parities of i(u - ubar), i(v - vbar) differ
  for (auto [nu, nv] : {std::pair{0, 0}, {1, 0}, {0, 1}, {2, -1}}) {
    CAPTURE(nu);
    CAPTURE(nv);
    cplx uu = cplx(0.21, -0.3) - cplx(0, nu / 2.0), vv = cplx(-0.13, -0.6) - cplx(0, nv / 2.0);
    Binding par = pts({{"u", uu}, {"ubar", uu + cplx(0, nu)}, {"v", vv}, {"vbar", vv + cplx(0, nv)}});
    cplx q = eval_diagram(r, p, par, o).value;
    cplx chain = eval_diagram(c, p, par, o).value;
    CHECK(rel(chain, q) < 1e-3);
  }
}

TEST_CASE("Psi_D is the inversion of Psi_A at N = 2") {
  Diagram A = build_psi(Family::A, 2, {V("x1"), V("x2")});
  Diagram D = build_psi(Family::D, 2, {V("x1"), V("x2")});
  for (int ns : {0, 1}) {
    Spin s{ns, 0.17};
    SepPoint a{ns, 0.31}, b{ns + 2, -0.22};
    Binding par = spin_params(s);
    par.set("x1", a.x()).set("xbar1", a.xbar()).set("x2", b.x()).set("xbar2", b.xbar());
    cplx z1(-1.1, 0.6), z2(0.9, -0.5);
    cplx d = eval_diagram(D, pts({{"z1", z1}, {"z2", z2}}), par).value;
    cplx av = eval_diagram(A, pts({{"z1", 1.0 / z1}, {"z2", 1.0 / z2}}), par).value;
    ZIndex j{-2.0 * s.s(), -s.two_ns};
    auto pw = [&](cplx z) {
      return std::exp((j.alpha + j.alpha_bar()) * std::log(std::abs(z))) * std::polar(1.0, j.m * std::arg(z));
    };
    CHECK(rel(d, pw(z1) * pw(z2) * av) < 1e-6);
  }
}

TEST_CASE("eval_diagram without integration is exact") {
  Diagram d = build_lambda(1, LambdaFamily::tilde, V("x"));
  Spin s{1, 0.2};
  SepPoint x{1, -0.3};
  Binding par = spin_params(s);
  par.set("x", x.x()).set("xbar", x.xbar());
  auto r = eval_diagram(d, pts({{"z1", {0.4, 0.7}}}), par);
  CHECK(r.method == "closed");
  CHECK(rel(r.value, evaluate(d.integrand(), pts({{"z1", {0.4, 0.7}}}), par)) < 1e-15);
}

TEST_CASE("inner product of plane waves over a box") {
  Diagram f;
  f.vertex("z");
  f.add_wave("z", V("p"), V("pbar"));
  Binding par = pts({{"p", {0.5, 0.2}}, {"pbar", {0.5, -0.2}}});
  auto r = inner_product(f, f, {"z"}, par, 1.0, 20000, 3, Exec::serial);
  CHECK(std::abs(r.value - 4.0) < 1e-9);
  auto q = inner_product(f, f, {"z"}, par, 1.0, 20000, 3, Exec::parallel);
  CHECK(q.value == r.value);
}
