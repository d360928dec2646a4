#include "sl2c/suites.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "sl2c/kernels.hpp"
#include "sl2c/quadrature.hpp"
#include "sl2c/weyl.hpp"

namespace sl2c {

namespace {

Poly V(const std::string& n) { return Poly::var(n); }
SymIndex both(long long c) { return SymIndex::both(Poly(c)); }
double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

Check make(std::string id, double residual, double tol, std::string detail = {}) {
  Check c;
  c.id = std::move(id);
  c.residual = residual;
  c.tol = tol;
  c.pass = std::isfinite(residual) && residual <= tol;
  c.detail = std::move(detail);
  return c;
}

// Exact check: residual is the number of surviving terms.
Check exact(std::string id, size_t nonzero) { return make(std::move(id), double(nonzero), 0); }

size_t nonzero(const std::array<WeylElement, 16>& a) {
  size_t n = 0;
  for (auto& e : a) n += e.size();
  return n;
}

Binding pts(std::initializer_list<std::pair<const char*, cplx>> l) {
  Binding b;
  for (auto& [k, v] : l) b.set(k, v);
  return b;
}

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

ZIndex with_sum(double sum, int m, double im) { return {cplx((sum + m) / 2, im), m}; }
double re_sum(const ZIndex& z) { return (z.alpha + z.alpha_bar()).real(); }

QuadOptions quad_opts(const SuiteConfig& cfg, double tol = 1e-8) {
  QuadOptions o;
  o.tol = tol;
  o.seed = cfg.seed;
  o.exec = cfg.exec;
  return o;
}

Check before_after(const std::string& id, const Diagram& d, Rule r, const Loc& loc, const Binding& p,
                   const Binding& par, double tol, const SuiteConfig& cfg) {
  QuadOptions o = quad_opts(cfg);
  cplx lhs = eval_diagram(d, p, par, o).value;
  cplx rhs = eval_diagram(apply_rule(d, r, loc), p, par, o).value;
  return make(id, rel(rhs, lhs), tol);
}

SepPoint default_sep(const Spin& s) { return {s.two_ns % 2 ? 1 : 2, 0.4}; }

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace

bool SuiteReport::ok() const {
  for (auto& c : checks)
    if (!c.info && !c.pass) return false;
  return true;
}

std::vector<std::string> suite_names() {
  return {"primitives", "algebra", "kernels", "rules", "appendixB", "eigenfunctions"};
}

std::vector<Check> primitive_checks(const SuiteConfig& cfg) {
  std::vector<Check> out;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> re(-3, 3), im(-3, 3);
  std::uniform_int_distribution<int> mm(-3, 3);
  double a_max = 0;
  for (int k = 0; k < cfg.samples; ++k) {
    ZIndex z{cplx(re(rng), im(rng)), mm(rng)};
    a_max = std::max(a_max, check_a_identities(z).max_residual);
  }
  out.push_back(make("a-function identities", a_max, 1e-10, std::to_string(cfg.samples) + " draws"));

  double g_rec = 0, g_refl = 0;
  for (int k = 0; k < cfg.samples; ++k) {
    cplx z(re(rng), im(rng));
    if (near_pole(z) || near_pole(z + 1.0) || near_pole(1.0 - z)) continue;
    g_rec = std::max(g_rec, rel(cgamma(z + 1.0), z * cgamma(z)));
    g_refl = std::max(g_refl, rel(cgamma(z) * cgamma(1.0 - z), kPi / std::sin(kPi * z)));
  }
  out.push_back(make("gamma recurrence", g_rec, 1e-12));
  out.push_back(make("gamma reflection", g_refl, 1e-11));
  double psi = std::max(std::abs(digamma(1.0) + kEulerGamma),
                        std::abs(digamma(0.5) + kEulerGamma + 2 * std::log(2.0)));
  out.push_back(make("digamma special values", psi, 1e-13));
  return out;
}

std::vector<Check> algebra_checks(int N) {
  std::vector<Check> out;
  const Poly S = V("s"), U = V("u"), W = V("v");
  const std::string n = " N=" + std::to_string(N);
  Generators t = total_generators(N, S);
  size_t bad = (commutator(t.plus, t.minus) - WeylElement(Poly(2)) * t.zero).size() +
               (commutator(t.zero, t.plus) - t.plus).size() +
               (commutator(t.zero, t.minus) + t.minus).size();
  out.push_back(exact("sl(2) relations" + n, bad));
  Generators ta = total_generators(N, V("sbar"), Sector::anti);
  size_t cross = 0;
  for (auto* a : {&t.minus, &t.zero, &t.plus})
    for (auto* b : {&ta.minus, &ta.zero, &ta.plus}) cross += commutator(*a, *b).size();
  out.push_back(exact("holo/anti generators commute" + n, cross));
  if (N <= 2) out.push_back(exact("fundamental commutation relation" + n, nonzero(fcr_residual(N, S, U, W))));
  if (N <= 3) {
    OpMatrix2 Tu = monodromy(N, S, U), Tv = monodromy(N, S, W);
    for (int e = 0; e < 4; ++e) {
      const char* name[] = {"A", "B", "C", "D"};
      out.push_back(exact(std::string("[") + name[e] + "(u), " + name[e] + "(v)] = 0" + n,
                          commutator(Tu.e[e], Tv.e[e]).size()));
    }
  }
  return out;
}

std::vector<Check> kernel_checks(int N, const SuiteConfig& cfg) {
  std::vector<Check> out;
  const double tol = 1e-10;
  Binding b = default_kernel_binding(cfg.spin, {0.17, 0.05}, default_sep(cfg.spin));
  const std::string n = " N=" + std::to_string(N);
  auto add = [&](const IdentityResidual& r, bool info = false) {
    Check c = make(r.name, r.residual, tol);
    c.info = info;
    out.push_back(c);
  };
  if (N >= 2)
    for (Family f : {Family::A, Family::B})
      for (Sector s : {Sector::holo, Sector::anti})
        add(intertwining_check(f, N, s, b, cfg.samples, cfg.seed, cfg.exec));
  for (Family f : {Family::A, Family::B, Family::C, Family::D})
    for (Sector s : {Sector::holo, Sector::anti})
      add(baxter_check(f, f, N, s, b, cfg.samples, cfg.seed, cfg.exec));
  // The C-family candidate with Q_A on the right fails; it is reported, not counted.
  for (Sector s : {Sector::holo, Sector::anti}) {
    IdentityResidual r = baxter_check(Family::C, Family::A, N, s, b, cfg.samples, cfg.seed, cfg.exec);
    r.name += " (rhs Q_A)";
    add(r, true);
    out.back().detail = "rejected candidate; the suite uses Q_C";
  }
  return out;
}

std::vector<Check> rule_checks(const SuiteConfig& cfg, int draws) {
  std::vector<Check> out;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> mm(-1, 1);
  auto id = [](const char* r, int k) { return std::string(r) + " draw " + std::to_string(k + 1); };

  std::uniform_real_distribution<double> csum(0.6, 1.7), cim(-0.4, 0.4);
  for (int k = 0; k < draws;) {
    ZIndex al = with_sum(csum(rng), mm(rng), cim(rng)), be = with_sum(csum(rng), mm(rng), cim(rng));
    double s1 = re_sum(al), s2 = re_sum(be);
    if (s1 <= 0.3 || s1 >= 1.7 || s2 <= 0.3 || s2 >= 1.7 || s1 + s2 < 2.3) continue;
    Params P;
    Diagram d;
    d.vertex("w", VertexKind::Internal);
    if (k % 2)
      d.add_edge("w", "z1", P.fresh(al));
    else
      d.add_edge("z1", "w", P.fresh(al));
    d.add_edge("z2", "w", P.fresh(be));
    out.push_back(before_after(id("chain", k), d, Rule::chain, {"w", {}},
                               pts({{"z1", {0.2, 0.1}}, {"z2", {-0.6, 0.7}}}), P.b, 1e-4, cfg));
    ++k;
  }

  std::uniform_real_distribution<double> sre(0.55, 0.85), sim(-0.3, 0.3);
  for (int k = 0; k < draws;) {
    int m1 = mm(rng), m2 = mm(rng);
    cplx a1(sre(rng), sim(rng)), a2(sre(rng), sim(rng));
    ZIndex Z[3] = {{a1, m1}, {a2, m2}, {2.0 - a1 - a2, -m1 - m2}};
    bool ok = true;
    for (auto& z : Z) ok = ok && re_sum(z) > 0.2 && re_sum(z) < 1.8;
    if (!ok) continue;
    Params P;
    SymIndex A1 = P.fresh(Z[0]), A2 = P.fresh(Z[1]);
    Diagram d;
    d.vertex("w", VertexKind::Internal);
    d.add_edge("w", "z1", A1);
    d.add_edge("z2", "w", A2);
    d.add_edge("w", "z3", both(2) - A1 - A2);
    out.push_back(before_after(id("star-triangle", k), d, Rule::star_triangle, {"w", {}},
                               pts({{"z1", {0.1, 0.2}}, {"z2", {-0.7, -0.3}}, {"z3", {0.8, -0.5}}}),
                               P.b, 1e-3, cfg));
    ++k;
  }

  std::uniform_real_distribution<double> xre(0.45, 0.75), xim(-0.2, 0.2);
  for (int k = 0; k < draws;) {
    ZIndex al{cplx(xre(rng), xim(rng)), mm(rng)}, be{cplx(xre(rng), xim(rng)), mm(rng)};
    ZIndex alp{cplx(xre(rng), xim(rng)), mm(rng)};
    ZIndex ex[4] = {al, 1.0 - alp, be, 1.0 - (al + be - alp)};
    bool ok = true;
    double tot = 0;
    for (auto& z : ex) {
      ok = ok && re_sum(z) > 0.2 && re_sum(z) < 1.8;
      tot += re_sum(z);
    }
    if (!ok || tot < 2.3) continue;
    Params P;
    SymIndex Al = P.fresh(al), Be = P.fresh(be), Alp = P.fresh(alp);
    Diagram d;
    d.vertex("w", VertexKind::Internal);
    d.add_edge("z1", "w", Al);
    d.add_edge("z2", "w", both(1) - Alp);
    d.add_edge("w", "z3", Be);
    d.add_edge("z4", "w", both(1) - (Al + Be - Alp));
    out.push_back(before_after(
        id("cross", k), d, Rule::cross, {"w", {"z1", "z2", "z3", "z4"}},
        pts({{"z1", {0.1, 0.2}}, {"z2", {-0.7, -0.3}}, {"z3", {0.8, -0.5}}, {"z4", {-0.2, 0.9}}}), P.b,
        1e-3, cfg));
    ++k;
  }

  std::uniform_real_distribution<double> fre(0.6, 0.9), fim(-0.3, 0.3);
  for (int k = 0; k < draws;) {
    ZIndex al{cplx(fre(rng), fim(rng)), mm(rng)};
    if (re_sum(al) < 1.1 || re_sum(al) > 1.8) continue;
    Params P;
    P.b.set("p", cplx(1.3, -0.4)).set("pbar", cplx(1.3, 0.4));
    Diagram d;
    d.vertex("w", VertexKind::Internal);
    d.add_edge("u", "w", P.fresh(al));
    d.add_wave("w", V("p"), V("pbar"));
    out.push_back(before_after(id("fourier", k), d, Rule::fourier, {"w", {}}, pts({{"u", {0.3, -0.2}}}),
                               P.b, 1e-4, cfg));
    ++k;
  }
  return out;
}

std::vector<Check> appendixB_checks(const SuiteConfig& cfg) {
  std::vector<Check> out;
  const Poly u = V("u"), v = V("v"), I = Poly::I();
  Derivation der = derive("appendixB_2Ra", cfg.seed);
  out.push_back(make("R1 kernel chain rewriting gives A1 (symbolic)", der.matches ? 0.0 : 1.0, 0,
                     der.result.diagram.coeff.str()));
  out.back().residual = der.matches ? der.numeric_residual : 1.0;
  out.back().tol = 1e-10;
  out.back().pass = der.matches && der.numeric_residual <= 1e-10;

  Diagram r = apply_rule(build_factorized_R(1, u, v), Rule::integrate_delta, {"w1", {}});
  Diagram c = apply_rule(r, Rule::chain, {"w2", {}});
  c.merge_parallel();
  // sign variant: pi (-1)^(i(v - vbar)) a(iv, 1 - iu, 1 + iu - iv)
  CoefficientProduct variant = {pi_power(1), sign_of(SymIndex::sym(I * v)), a_factor(SymIndex::sym(I * v)),
                                a_factor(SymIndex::sym(Poly(1) - I * u)),
                                a_factor(SymIndex::sym(Poly(1) + I * u - I * v))};
  Binding p = pts({{"z1", {0.3, -0.2}}, {"z2", {-0.7, 0.5}}});
  QuadOptions o = quad_opts(cfg);
  // Shifted into the absolutely convergent strip; the parities of i(u - ubar), i(v - vbar) vary.
  for (auto [nu, nv] : {std::pair{0, 0}, {1, 0}, {0, 1}, {2, -1}}) {
    cplx uu = cplx(0.21, -0.3) - cplx(0, nu / 2.0), vv = cplx(-0.13, -0.6) - cplx(0, nv / 2.0);
    Binding par = pts({{"u", uu}, {"ubar", uu + cplx(0, nu)}, {"v", vv}, {"vbar", vv + cplx(0, nv)}});
    cplx q = eval_diagram(r, p, par, o).value;
    cplx chain = eval_diagram(c, p, par, o).value;
    std::string tag = " (n_u=" + std::to_string(nu) + ", n_v=" + std::to_string(nv) + ")";
    out.push_back(make("R1 kernel quadrature vs A1" + tag, rel(chain, q), 1e-3));
    cplx alt = chain / c.coeff.value(par) * variant.value(par);
    Check pc = make("R1 kernel quadrature vs A1 with sign (-1)^(i(v-vbar))" + tag, rel(alt, q), 1e-3);
    pc.info = true;
    pc.detail = (nu - nv) % 2 ? "parities differ: this sign flips" : "parities agree";
    out.push_back(pc);
  }
  return out;
}

std::vector<Check> eigenfunction_checks(const SuiteConfig& cfg) {
  std::vector<Check> out;
  QuadOptions o = quad_opts(cfg, 1e-6);
  // B_2(u) Psi_B = p (u - x1) Psi_B with B_2 applied under the integral. Im nu_s = -0.15
  // puts Re(alpha + alpha_bar) = 0.7 on both w-lines, so the differentiated integrand
  // stays absolutely integrable near z1, z2.
  {
    Diagram psi = build_psi(Family::B, 2, {V("x1")});
    PowExpr K = psi.integrand();
    cplx nus(0.3, -0.15);
    cplx s = 0.5 + cplx(0, 1) * nus, sbar = s;
    SepPoint x{0, 0.27};
    cplx p(1.1, -0.6), u(0.31, 0.12);
    Binding par;
    par.set("s", s).set("sbar", sbar).set("x1", x.x()).set("xbar1", x.xbar());
    par.set("p", p).set("pbar", std::conj(p)).set("u", u).set("ubar", u);
    const std::pair<cplx, cplx> points[] = {{{0.4, -0.3}, {-0.5, 0.6}},
                                            {{-0.2, 0.7}, {0.9, 0.1}},
                                            {{1.1, 0.5}, {0.3, -0.8}}};
    for (Sector sec : {Sector::holo, Sector::anti}) {
      bool holo = sec == Sector::holo;
      PowExpr BK = apply_weyl(monodromy_entry(Family::B, 2, V(holo ? "s" : "sbar"), V(holo ? "u" : "ubar"), sec),
                              K, {"z1", "z2"});
      cplx ev = holo ? p * (u - x.x()) : std::conj(p) * (u - x.xbar());
      for (int k = 0; k < 3; ++k) {
        Binding z = pts({{"z1", points[k].first}, {"z2", points[k].second}});
        cplx lhs = integrate2d(BK, "w1_1", z, par, o).value;
        cplx psi0 = integrate2d(K, "w1_1", z, par, o).value;
        out.push_back(make(std::string("Psi_B N=2 ") + (holo ? "B" : "Bbar") + " eigenvalue point " +
                               std::to_string(k + 1),
                           rel(lhs, ev * psi0), 1e-3));
      }
    }
  }
  // Psi_A(lambda z) = [lambda]^(i(x1 + x2) - 2s) Psi_A(z).
  {
    Diagram psi = build_psi(Family::A, 2, {V("x1"), V("x2")});
    Spin sp{0, 0.17};
    SepPoint a{0, 0.31}, b{2, -0.22};
    Binding par;
    par.set("s", sp.s()).set("sbar", sp.sbar());
    par.set("x1", a.x()).set("xbar1", a.xbar()).set("x2", b.x()).set("xbar2", b.xbar());
    const cplx I(0, 1);
    cplx h = I * (a.x() + b.x()) - 2.0 * sp.s(), hb = I * (a.xbar() + b.xbar()) - 2.0 * sp.sbar();
    cplx z1(-0.8, 0.4), z2(0.6, -0.5);
    for (cplx lam : {cplx(1.7, 0.0), std::polar(1.3, 0.9)}) {
      cplx L = std::log(lam);
      cplx factor = std::exp(h * L + hb * std::conj(L));
      cplx v0 = eval_diagram(psi, pts({{"z1", z1}, {"z2", z2}}), par, o).value;
      cplx v1 = eval_diagram(psi, pts({{"z1", lam * z1}, {"z2", lam * z2}}), par, o).value;
      char buf[64];
      std::snprintf(buf, sizeof buf, "Psi_A N=2 scaling lambda=(%.3f,%.3f)", lam.real(), lam.imag());
      out.push_back(make(buf, rel(v1, factor * v0), 1e-3));
    }
  }
  return out;
}

SuiteReport run_suite(const std::string& name, const SuiteConfig& cfg) {
  if (cfg.N < 1 || cfg.N > 4) throw std::invalid_argument("N must be in 1..4");
  if (cfg.samples < 1) throw std::invalid_argument("samples must be positive");
  SuiteReport r;
  r.name = name;
  r.inputs = {{"N", cfg.N},
              {"ns", cfg.spin.ns()},
              {"nus", cfg.spin.nu_s},
              {"seed", double(cfg.seed)},
              {"samples", cfg.samples}};
  if (name == "primitives")
    r.checks = primitive_checks(cfg);
  else if (name == "algebra")
    r.checks = algebra_checks(cfg.N);
  else if (name == "kernels")
    r.checks = kernel_checks(cfg.N, cfg);
  else if (name == "rules")
    r.checks = rule_checks(cfg);
  else if (name == "appendixB")
    r.checks = appendixB_checks(cfg);
  else if (name == "eigenfunctions")
    r.checks = eigenfunction_checks(cfg);
  else
    throw std::invalid_argument("unknown suite " + name);
  if (cfg.tol > 0)
    for (auto& c : r.checks) {
      c.tol = cfg.tol;
      c.pass = std::isfinite(c.residual) && c.residual <= c.tol;
    }
  return r;
}

std::string render(const SuiteReport& r, const std::string& format) {
  std::ostringstream os;
  if (format == "text") {
    for (auto& c : r.checks) {
      os << (c.info ? "INFO" : c.pass ? "PASS" : "FAIL") << "  " << c.id << "  residual=" << fmt_num(c.residual)
         << " tol=" << fmt_num(c.tol);
      if (!c.detail.empty()) os << "  " << c.detail;
      os << '\n';
    }
    os << r.name << ": " << (r.ok() ? "PASS" : "FAIL") << '\n';
  } else if (format == "json") {
    for (auto& c : r.checks) {
      nlohmann::ordered_json j;
      j["id"] = r.name + "/" + c.id;
      for (auto& [k, v] : r.inputs) {
        if (v == std::floor(v) && std::abs(v) < 1e15)
          j["inputs"][k] = static_cast<long long>(v);
        else
          j["inputs"][k] = v;
      }
      j["residual"] = c.residual;
      j["tol"] = c.tol;
      j["pass"] = c.pass;
      j["info"] = c.info;
      if (!c.detail.empty()) j["detail"] = c.detail;
      os << j.dump() << '\n';
    }
  } else if (format == "csv") {
    os << "suite,id,residual,tol,pass,info,detail\n";
    for (auto& c : r.checks)
      os << r.name << ",\"" << c.id << "\"," << fmt_num(c.residual) << ',' << fmt_num(c.tol) << ','
         << (c.pass ? 1 : 0) << ',' << (c.info ? 1 : 0) << ",\"" << c.detail << "\"\n";
  } else {
    throw std::invalid_argument("unknown format " + format);
  }
  return os.str();
}

}  // namespace sl2c
