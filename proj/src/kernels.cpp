#include "sl2c/kernels.hpp"

#include <cmath>
#include <random>

namespace sl2c {

char family_char(Family f) { return "ABCD"[int(f)]; }

Family family_from_char(char c) {
  switch (c) {
    case 'A': case 'a': return Family::A;
    case 'B': case 'b': return Family::B;
    case 'C': case 'c': return Family::C;
    case 'D': case 'd': return Family::D;
  }
  throw std::invalid_argument(std::string("unknown family '") + c + "'");
}

std::vector<std::string> var_names(const std::string& prefix, int n) {
  std::vector<std::string> v;
  for (int k = 1; k <= n; ++k) v.push_back(prefix + std::to_string(k));
  return v;
}

WeylElement monodromy_entry(Family f, int N, const Poly& spin, const Poly& u, Sector sec) {
  OpMatrix2 T = monodromy(N, spin, u, sec);
  switch (f) {
    case Family::A: return T(0, 0);
    case Family::B: return T(0, 1);
    case Family::C: return T(1, 0);
    case Family::D: return T(1, 1);
  }
  return {};
}

namespace {

const KernelSymbols& ks() {
  static const KernelSymbols k;
  return k;
}

Base diffb(const std::string& a, const std::string& b, int sign = 1) { return {sym(a), sym(b), sign}; }
Base single(const std::string& a, int sign = 1) { return {sym(a), -1, sign}; }
std::string Z(int k) { return "z" + std::to_string(k); }
std::string W(int k) { return "w" + std::to_string(k); }

PowExpr from_term(PowTerm t) {
  PowExpr e;
  e.add_term(std::move(t));
  return e;
}

}  // namespace

PowExpr lambda_kernel(Family f, int N, const Poly& x) {
  if (f != Family::A && f != Family::B) throw std::invalid_argument("layer kernels exist for A and B only");
  if (N < 1) throw std::invalid_argument("N >= 1");
  const Poly& s = ks().s;
  const Poly I = Poly::I();
  SymIndex alpha = SymIndex::sym(Poly(1) - s - I * x);
  SymIndex beta = SymIndex::sym(Poly(1) - s + I * x);
  SymIndex gamma = SymIndex::sym(Poly(2) * s - Poly(1));
  PowTerm t;
  for (int k = 1; k < N; ++k) {
    t.mul_power(diffb(Z(k), Z(k + 1)), -gamma);
    t.mul_power(diffb(W(k), Z(k)), -alpha);
    t.mul_power(diffb(W(k), Z(k + 1)), -beta);
  }
  if (f == Family::A) t.mul_power(single(Z(N)), SymIndex::sym(I * x - s));
  return from_term(std::move(t));
}

PowExpr baxter_kernel(Family f, int N, const Poly& u, const Poly& ubar) {
  if (N < 1) throw std::invalid_argument("N >= 1");
  const auto& k = ks();
  const Poly I = Poly::I();
  SymIndex e1{-k.s - I * u, -k.sbar - I * ubar};
  SymIndex e2{-k.s + I * u, -k.sbar + I * ubar};
  SymIndex e3{Poly(2) * k.s - Poly(1), Poly(2) * k.sbar - Poly(1)};
  PowTerm t;
  if (f == Family::A) {
    // w_{N+1} = 0
    for (int j = 1; j <= N; ++j) {
      t.mul_power(diffb(Z(j), W(j)), e1);
      if (j < N) {
        t.mul_power(diffb(Z(j), W(j + 1)), e2);
        t.mul_power(diffb(W(j), W(j + 1)), e3);
      } else {
        t.mul_power(single(Z(j)), e2);
        t.mul_power(single(W(j)), e3);
      }
    }
    return from_term(std::move(t));
  }
  // w_0 = 0
  for (int j = 1; j <= N; ++j) {
    t.mul_power(diffb(Z(j), W(j)), e2);
    if (j > 1) {
      t.mul_power(diffb(Z(j), W(j - 1)), e1);
      t.mul_power(diffb(W(j), W(j - 1)), e3);
    } else if (f != Family::B) {
      t.mul_power(single(Z(1)), e1);
      t.mul_power(single(W(1)), e3);
    }
  }
  if (f == Family::C)
    t.mul_power(single(W(N), -1), SymIndex{Poly(-1) + k.s - I * u, Poly(-1) + k.sbar - I * ubar});
  return from_term(std::move(t));
}

Binding default_kernel_binding(const Spin& spin, cplx u, const SepPoint& x) {
  Binding b;
  b.set("s", spin.s()).set("sbar", spin.sbar());
  b.set("u", u).set("ubar", u - cplx(0, 1) * spin.ns());
  b.set("x", x.x()).set("xbar", x.xbar());
  return b;
}

IdentityResidual intertwining_check(Family f, int N, Sector sec, const Binding& params, int samples,
                                    uint64_t seed, Exec exec) {
  if (N < 2) throw std::invalid_argument("intertwining needs N >= 2");
  const auto& k = ks();
  const bool holo = sec == Sector::holo;
  const Poly& spin = holo ? k.s : k.sbar;
  const Poly& u = holo ? k.u : k.ubar;
  const Poly& x = holo ? k.x : k.xbar;
  PowExpr K = lambda_kernel(f, N, k.x);
  PowExpr lhs = apply_weyl(monodromy_entry(f, N, spin, u, sec), K, var_names("z", N));
  WeylElement prev = monodromy_entry(f, N - 1, spin, u, sec).transpose();
  PowExpr rhs = PowExpr(u - x) * apply_weyl(prev, K, var_names("w", N - 1));
  IdentityResidual r;
  r.name = std::string("intertwine ") + family_char(f) + " N=" + std::to_string(N) +
           (holo ? " holo" : " anti");
  r.residual = kernel_identity_residual(lhs, rhs, params, samples, seed, exec);
  return r;
}

IdentityResidual baxter_check(Family f, Family rhs_family, int N, Sector sec, const Binding& params,
                              int samples, uint64_t seed, Exec exec) {
  const auto& k = ks();
  const bool holo = sec == Sector::holo;
  const Poly sigma(f == Family::A ? -1 : 1);
  const Poly shift = sigma * Poly::I();
  PowExpr Q = baxter_kernel(f, N, k.u, k.ubar);
  PowExpr lhs = apply_weyl(monodromy_entry(f, N, holo ? k.s : k.sbar, holo ? k.u : k.ubar, sec), Q,
                           var_names("z", N));
  Poly pref(1);
  Poly base = holo ? k.u + shift * k.s : k.ubar + shift * k.sbar;
  for (int j = 0; j < N; ++j) pref = pref * base;
  PowExpr Qs = holo ? baxter_kernel(rhs_family, N, k.u + shift, k.ubar)
                    : baxter_kernel(rhs_family, N, k.u, k.ubar + shift);
  PowExpr rhs = PowExpr(pref) * Qs;
  IdentityResidual r;
  r.name = std::string("baxter ") + family_char(f) + " rhs=Q" + family_char(rhs_family) +
           " N=" + std::to_string(N) + (holo ? " holo" : " anti");
  r.residual = kernel_identity_residual(lhs, rhs, params, samples, seed, exec);
  return r;
}

SpecialPointReport special_point(Family f, int N, int sign, const Binding& params, uint64_t seed) {
  const auto& k = ks();
  const Poly I = Poly::I();
  const Poly sg(sign);
  PowExpr Q = baxter_kernel(f, N, sg * I * (Poly(1) - k.s), sg * I * (Poly(1) - k.sbar));
  const PowTerm& t = Q.terms().at(0);
  SpecialPointReport rep;
  rep.sign = sign;
  const SymIndex minus_one{Poly(-1), Poly(-1)};
  PowTerm rest = t;
  rest.pw.clear();
  std::map<int, int> rename;
  bool diagonal = true;
  for (auto& [b, e] : t.pw) {
    if (!(e == minus_one)) {
      rest.pw.emplace(b, e);
      continue;
    }
    ++rep.n_delta;
    if (!rep.pairing.empty()) rep.pairing += ",";
    if (b.j < 0) {
      rep.pairing += sym_name(b.i) + "=0";
      diagonal = false;
      continue;
    }
    std::string a = sym_name(b.i), c = sym_name(b.j);
    if (a[0] == 'w') std::swap(a, c);
    rep.pairing += c + "=" + a;
    if (a[0] != 'z' || c[0] != 'w' || a.substr(1) != c.substr(1)) diagonal = false;
    rename[sym(c)] = sym(a);
  }
  rep.identity = diagonal && rep.n_delta == N;
  rep.remainder_deviation = -1;
  if (rep.identity) {
    PowExpr r;
    r.add_term(rest);
    PowExpr on_diag = r.renamed(rename);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ur(0.3, 3.0), ut(-kPi, kPi);
    CompiledExpr ce(on_diag, params);
    double dev = 0;
    std::vector<cplx> z(ce.vars().size());
    for (int trial = 0; trial < 20; ++trial) {
      for (auto& v : z) v = std::polar(ur(rng), ut(rng));
      try {
        dev = std::max(dev, std::abs(ce(z.data()) - 1.0));
      } catch (const SingularPoint&) {
      }
    }
    rep.remainder_deviation = dev;
    rep.identity = dev < 1e-10;
  }
  return rep;
}

}  // namespace sl2c
