#include <algorithm>
#include <random>

#include "sl2c/diagram.hpp"

namespace sl2c {

namespace {

Poly V(const std::string& n) { return Poly::var(n); }
SymIndex both(long long c) { return SymIndex::both(Poly(c)); }

std::pair<CoefficientProduct, std::vector<Atom>> split_deltas(const CoefficientProduct& c) {
  CoefficientProduct rest;
  std::vector<Atom> d;
  for (const Atom& a : c.atoms())
    if (a.kind == Atom::Kind::Delta)
      d.push_back(a);
    else
      rest *= a;
  auto key = [](const Atom& a) { return std::tie(a.spectral, a.d1, a.d2); };
  std::sort(d.begin(), d.end(), [&](const Atom& a, const Atom& b) { return key(a) < key(b); });
  return {rest, d};
}

// Lambda_2(x) kernel with its lower vertex renamed.
Diagram lambda2(const Poly& x, const std::string& w, VertexKind kind) {
  Diagram d = build_lambda(2, LambdaFamily::plain, x);
  d.relabel({{"w1", w}});
  d.set_kind(w, kind);
  return d;
}

void finish(Derivation& r, const ParitySamples& ps) {
  auto [got, gd] = split_deltas(r.result.diagram.coeff);
  auto [want, wd] = split_deltas(r.expected);
  CoefficientProduct ratio = (got * want.inverse()).simplified(&ps);
  r.matches = ratio.atoms().empty() && gd == wd && r.result.diagram.edges.empty();
  r.numeric_residual = 0;
  for (const Binding& b : ps) {
    cplx g = got.value(b), w = want.value(b);
    r.numeric_residual = std::max(r.numeric_residual, std::abs(g / w - 1.0));
  }
}

}  // namespace

ParitySamples parity_samples(int count, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> two_ns(-2, 3), nk(-3, 3);
  std::uniform_real_distribution<double> nu(-0.6, 0.6), pr(-2.0, 2.0);
  ParitySamples out;
  for (int i = 0; i < count; ++i) {
    Binding b;
    Spin s{two_ns(rng), nu(rng)};
    b.set("s", s.s()).set("sbar", s.sbar());
    auto sep = [&](const std::string& n) {
      SepPoint x{2 * nk(rng) + (s.two_ns & 1), nu(rng)};
      b.set(n, x.x()).set(bar_name(n), x.xbar());
    };
    for (std::string base : {"x", "y"}) {
      sep(base);
      for (int k = 1; k <= 4; ++k) sep(base + std::to_string(k));
    }
    for (std::string n : {"u", "v"}) {
      SepPoint x{2 * nk(rng), nu(rng)};
      b.set(n, x.x()).set(bar_name(n), x.xbar());
    }
    cplx p(pr(rng), pr(rng));
    b.set("p", p).set("pbar", std::conj(p));
    out.push_back(b);
  }
  return out;
}

std::vector<std::string> derivation_names() {
  return {"lambda1", "exchange2", "ll2", "appendixB_2Ra", "appendixB_2Ra_k2"};
}

Derivation derive(const std::string& name, uint64_t seed) {
  const ParitySamples ps = parity_samples(12, seed);
  const Poly x = V("x"), y = V("y"), I = Poly::I();
  Derivation r;
  r.name = name;
  RewriteScript script;
  if (name == "lambda1") {
    // int d^2z conj([z]^(iy - s)) [z]^(ix - s)
    Diagram a = build_lambda(1, LambdaFamily::tilde, x);
    Diagram b = adjoint(build_lambda(1, LambdaFamily::tilde, y));
    r.start = compose(a, b, {"z1"});
    script = {{Rule::merge, {}}, {Rule::mellin_delta, {"z1", {}}}};
    r.expected = {pi_power(2), numeric(2.0), spectral_delta("x", "y")};
  } else if (name == "exchange2") {
    // Lambda_2(y)^dagger Lambda_2(x) = alpha(x, y) Lambda_1(x) Lambda_1(y)^dagger, x != y
    Diagram a = lambda2(x, "w", VertexKind::External);
    Diagram b = adjoint(lambda2(y, "wp", VertexKind::External));
    r.start = compose(a, b, {"z1", "z2"});
    script = {{Rule::merge, {}},
              {Rule::chain, {"z1", {}}},
              {Rule::chain, {"z2", {}}},
              {Rule::merge, {}}};
    r.expected = {pi_power(2), linear_factor(x - y, both(-1))};
  } else if (name == "ll2") {
    // Lambda_2(y)^dagger Lambda_2(x) e^{i(p w + pbar wbar)}
    Diagram a = lambda2(x, "w", VertexKind::Internal);
    a.add_wave("w", V("p"), V("pbar"));
    Diagram b = adjoint(lambda2(y, "wp", VertexKind::External));
    r.start = compose(a, b, {"z1", "z2"});
    script = {{Rule::merge, {}},
              {Rule::momentum, {}},
              {Rule::merge, {}},
              {Rule::mellin_delta, {"k", {}}}};
    r.expected = {pi_power(4), numeric(2.0), linear_factor(V("p"), both(-1)),
                  spectral_delta("x", "y")};
  } else if (name == "appendixB_2Ra" || name == "appendixB_2Ra_k2") {
    bool k1 = name == "appendixB_2Ra";
    const Poly u = V("u"), v = V("v");
    r.start = build_factorized_R(k1 ? 1 : 2, u, v);
    script = {{Rule::integrate_delta, {k1 ? "w1" : "w2", {}}},
              {Rule::chain, {k1 ? "w2" : "w1", {}}},
              {Rule::merge, {}}};
    // k = 1: pi (-1)^(i(u - ubar)) a(iv, 1 - iu, 1 + iu - iv)
    // k = 2: pi (-1)^(i(u - ubar)) a(iu, 1 - iv, 1 + iv - iu)
    const Poly& a = k1 ? u : v;
    const Poly& b = k1 ? v : u;
    r.expected = {pi_power(1), sign_of(SymIndex::sym(I * u)), a_factor(SymIndex::sym(I * b)),
                  a_factor(SymIndex::sym(Poly(1) - I * a)),
                  a_factor(SymIndex::sym(Poly(1) + I * a - I * b))};
  } else {
    throw std::invalid_argument("unknown derivation " + name);
  }
  r.result = run_script(r.start, script, &ps);
  finish(r, ps);
  if (name == "ll2") {
    const Diagram& d = r.result.diagram;
    int wp = d.find("wp");
    bool wave = d.waves.size() == 1 && d.waves[0].vertex == wp && d.waves[0].p == V("p") &&
                d.waves[0].pbar == V("pbar");
    r.matches = r.matches && wave;
  }
  return r;
}

CoefficientProduct measure_from_exchange(int N, Family f) {
  if (N < 1 || N > 4) throw std::invalid_argument("measure_from_exchange needs 1 <= N <= 4");
  if (f != Family::A && f != Family::B) throw std::invalid_argument("families A and B only");
  auto xn = [](int k) { return "x" + std::to_string(k); };
  auto yn = [](int k) { return "y" + std::to_string(k); };
  // M_S is a product of alpha(x_j, y_k) = pi^2 / ((x_j - y_k)(xbar_j - ybar_k)).
  int n = f == Family::A ? N : N - 1;
  CoefficientProduct c;
  for (int j = 1; j <= n; ++j)
    for (int k = 1; j + k <= n; ++k) {
      c *= pi_power(2);
      c *= linear_factor(V(xn(j)) - V(yn(k)), both(-1));
    }
  if (f == Family::A) {
    // one Lambda_1^dagger Lambda_1 = 2 pi^2 delta per layer
    c *= numeric(std::pow(2.0, N));
    c *= pi_power(2 * N);
  } else if (N > 1) {
    // |p p'|^(N-1), (N-1) factors 2 pi^4 |p|^-2, and <E_p'|E_p> = pi^2 delta^2(p - p')
    c *= numeric(std::pow(2.0, N - 1));
    c *= pi_power(4 * (N - 1) + 2);
  } else {
    c *= pi_power(2);
  }
  // terminal deltas pair x_j with y_(n + 1 - j)
  std::map<int, Poly> m;
  for (int k = 1; k <= n; ++k) {
    m[sym(yn(k))] = V(xn(n + 1 - k));
    m[sym(bar_name(yn(k)))] = V(bar_name(xn(n + 1 - k)));
  }
  return c.subst(m).simplified();
}

}  // namespace sl2c
