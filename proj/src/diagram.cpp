#include "sl2c/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace sl2c {

namespace {

Poly one() { return Poly(1); }
SymIndex both(long long c) { return SymIndex::both(Poly(c)); }

std::optional<long long> as_integer(cplx v, double tol = 1e-6) {
  double r = std::round(v.real());
  if (std::abs(v.real() - r) > tol || std::abs(v.imag()) > tol) return std::nullopt;
  return static_cast<long long>(r);
}

long long mod(long long a, long long n) { return ((a % n) + n) % n; }

// Value of p modulo n if it is an integer with the same residue at every sample.
std::optional<long long> residue(const Poly& p, long long n, const ParitySamples* samples) {
  if (p.is_constant()) {
    auto k = as_integer(p.constant_term().value(), 1e-12);
    if (!k) return std::nullopt;
    return mod(*k, n);
  }
  if (!samples || samples->empty()) return std::nullopt;
  std::optional<long long> r;
  for (const Binding& b : *samples) {
    std::optional<long long> k;
    try {
      k = as_integer(p.eval(b));
    } catch (const UnboundVariable&) {
      return std::nullopt;
    }
    if (!k) return std::nullopt;
    if (r && *r != mod(*k, n)) return std::nullopt;
    r = mod(*k, n);
  }
  return r;
}

cplx ipow(long long k) {
  static const cplx v[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return v[mod(k, 4)];
}

cplx int_pow(cplx b, long long n) {
  cplx r = 1.0;
  bool inv = n < 0;
  for (long long k = 0; k < (inv ? -n : n); ++k) r *= b;
  return inv ? 1.0 / r : r;
}

bool is_const(const SymIndex& i) { return i.holo.is_constant() && i.anti.is_constant(); }

// [b]^e with b, bb the holomorphic and anti-holomorphic bases.
cplx linear_value(cplx b, cplx bb, cplx eh, cplx ea) {
  auto ih = as_integer(eh, 1e-12), ia = as_integer(ea, 1e-12);
  if (ih && ia) return int_pow(b, *ih) * int_pow(bb, *ia);
  if (std::abs(bb - std::conj(b)) <= 1e-12 * (1 + std::abs(b))) {
    auto m = as_integer(eh - ea, 1e-9);
    if (m) {
      double r = std::abs(b);
      return std::exp((eh + ea) * std::log(r)) * std::polar(1.0, double(*m) * std::arg(b));
    }
  }
  return std::pow(b, eh) * std::pow(bb, ea);
}

// First-term coefficient of p, used to normalize linear bases.
GaussQ lead(const Poly& p) { return p.terms().begin()->second; }

std::string kind_str(VertexKind k) {
  switch (k) {
    case VertexKind::External: return "external";
    case VertexKind::Internal: return "internal";
    case VertexKind::Anchor: return "anchor";
  }
  return "?";
}

}  // namespace

// ---------------------------------------------------------------------------
// Atoms

bool Atom::operator==(const Atom& o) const {
  return kind == o.kind && power == o.power && expo == o.expo && idx == o.idx && base == o.base &&
         base_bar == o.base_bar && d1 == o.d1 && d2 == o.d2 && spectral == o.spectral &&
         num == o.num;
}

Atom pi_power(int k) {
  Atom a;
  a.kind = Atom::Kind::Pi;
  a.power = k;
  return a;
}
Atom i_power(const Poly& k) {
  Atom a;
  a.kind = Atom::Kind::I;
  a.expo = k;
  return a;
}
Atom sign_power(const Poly& k) {
  Atom a;
  a.kind = Atom::Kind::Sign;
  a.expo = k;
  return a;
}
Atom sign_of(const SymIndex& idx) { return sign_power(idx.holo - idx.anti); }
Atom a_factor(const SymIndex& idx, int power) {
  Atom a;
  a.kind = Atom::Kind::A;
  a.idx = idx;
  a.power = power;
  return a;
}
Atom linear_factor(const Poly& base, const SymIndex& exponent) {
  Atom a;
  a.kind = Atom::Kind::Linear;
  a.base = base;
  a.base_bar = bar(base);
  a.idx = exponent;
  return a;
}
Atom point_delta(const std::string& x, const std::string& y) {
  Atom a;
  a.kind = Atom::Kind::Delta;
  a.d1 = std::min(x, y);
  a.d2 = std::max(x, y);
  return a;
}
Atom spectral_delta(const std::string& x, const std::string& y) {
  Atom a = point_delta(x, y);
  a.spectral = true;
  return a;
}
Atom numeric(cplx c) {
  Atom a;
  a.num = c;
  return a;
}

// ---------------------------------------------------------------------------
// CoefficientProduct

CoefficientProduct& CoefficientProduct::operator*=(const Atom& a) {
  atoms_.push_back(a);
  return *this;
}
CoefficientProduct& CoefficientProduct::operator*=(const CoefficientProduct& o) {
  atoms_.insert(atoms_.end(), o.atoms_.begin(), o.atoms_.end());
  return *this;
}
CoefficientProduct CoefficientProduct::operator*(const CoefficientProduct& o) const {
  CoefficientProduct r = *this;
  r *= o;
  return r;
}

CoefficientProduct CoefficientProduct::inverse() const {
  CoefficientProduct r;
  for (Atom a : atoms_) {
    switch (a.kind) {
      case Atom::Kind::Pi:
      case Atom::Kind::A: a.power = -a.power; break;
      case Atom::Kind::I: a.expo = -a.expo; break;
      case Atom::Kind::Sign: break;
      case Atom::Kind::Linear: a.idx = -a.idx; break;
      case Atom::Kind::Numeric: a.num = 1.0 / a.num; break;
      case Atom::Kind::Delta: throw std::domain_error("delta atoms have no inverse");
    }
    r.atoms_.push_back(a);
  }
  return r;
}

CoefficientProduct CoefficientProduct::simplified(const ParitySamples* parity) const {
  int pi = 0;
  Poly iexp;  // i^iexp, signs folded in as i^(2k)
  cplx num = 1.0;
  std::map<SymIndex, int> A;
  std::map<std::pair<Poly, Poly>, SymIndex> lin;
  std::vector<Atom> deltas;

  auto add_linear = [&](Poly b, Poly bb, SymIndex e) {
    if (e.is_zero()) return;
    if (b.is_zero() || bb.is_zero()) {
      lin[{b, bb}] = lin[{b, bb}] + e;
      return;
    }
    if (b.is_constant() && bb.is_constant()) {
      num *= linear_value(b.constant_term().value(), bb.constant_term().value(),
                          e.holo.constant_term().value(), e.anti.constant_term().value());
      return;
    }
    if (is_const(e)) {
      auto ih = as_integer(e.holo.constant_term().value(), 1e-12);
      auto ia = as_integer(e.anti.constant_term().value(), 1e-12);
      if (ih && ia) {
        GaussQ c = lead(b), cb = lead(bb);
        GaussQ ic = GaussQ(1) / c, icb = GaussQ(1) / cb;
        b = ic * b;
        bb = icb * bb;
        num *= int_pow(c.value(), *ih) * int_pow(cb.value(), *ia);
      }
    }
    lin[{b, bb}] = lin[{b, bb}] + e;
  };

  for (const Atom& a : atoms_) {
    switch (a.kind) {
      case Atom::Kind::Pi: pi += a.power; break;
      case Atom::Kind::I: iexp += a.expo; break;
      case Atom::Kind::Sign: iexp += Poly(2) * a.expo; break;
      case Atom::Kind::A: A[a.idx] += a.power; break;
      case Atom::Kind::Linear: add_linear(a.base, a.base_bar, a.idx); break;
      case Atom::Kind::Numeric: num *= a.num; break;
      case Atom::Kind::Delta: deltas.push_back(a); break;
    }
  }

  auto p1 = [](const SymIndex& x) { return SymIndex{one() - x.anti, one() - x.holo}; };
  auto p2 = [](const SymIndex& x) { return SymIndex{one() - x.holo, one() - x.anti}; };
  auto sw = [](const SymIndex& x) { return SymIndex{x.anti, x.holo}; };
  auto m_of = [](const SymIndex& x) { return x.holo - x.anti; };
  auto sgn = [](int v) { return v > 0 ? 1 : -1; };

  bool changed = true;
  while (changed) {
    changed = false;
    for (auto ia = A.begin(); ia != A.end() && !changed; ++ia) {
      if (ia->second == 0) continue;
      for (auto ib = A.begin(); ib != A.end() && !changed; ++ib) {
        if (ib == ia || ib->second == 0) continue;
        const SymIndex& x = ia->first;
        const SymIndex& y = ib->first;
        int& px = ia->second;
        int& py = ib->second;
        int k = std::min(std::abs(px), std::abs(py));
        bool same = sgn(px) == sgn(py);
        if (same && y == p1(x)) {
          // a(x) a(1 - xbar) = 1
        } else if (same && y == p2(x)) {
          iexp += Poly(2 * k) * m_of(x);
        } else if (!same && y == sw(x)) {
          iexp += Poly(2 * k) * m_of(x);
        } else if (!same && y == x + both(1)) {
          // a(x + 1) / a(x) = -1 / (x xbar)
          if (k % 2) num = -num;
          add_linear(x.holo, x.anti, sgn(py) > 0 ? both(-k) : both(k));
        } else if (same && y == both(2) - x) {
          // a(x) a(2 - x) = -(-1)^(x - xbar) / ((1 - x)(1 - xbar))
          if (k % 2) num = -num;
          iexp += Poly(2 * k) * m_of(x);
          SymIndex q = p2(x);
          add_linear(q.holo, q.anti, sgn(px) > 0 ? both(-k) : both(k));
        } else {
          continue;
        }
        px -= sgn(px) * k;
        py -= sgn(py) * k;
        changed = true;
      }
    }
  }

  CoefficientProduct r;
  for (auto& [x, p] : A) {
    if (p == 0) continue;
    if (is_const(x)) {
      try {
        ZIndex z = ZIndex::from_pair(x.holo.constant_term().value(), x.anti.constant_term().value());
        cplx v = a_of(z);
        if (std::isfinite(v.real()) && std::isfinite(v.imag()) && std::abs(v) > 0) {
          num *= int_pow(v, p);
          continue;
        }
      } catch (const std::exception&) {
      }
    }
    r.atoms_.push_back(a_factor(x, p));
  }

  std::vector<Atom> tail;
  for (auto& [bases, e] : lin) {
    if (e.is_zero()) continue;
    Atom a;
    a.kind = Atom::Kind::Linear;
    a.base = bases.first;
    a.base_bar = bases.second;
    a.idx = e;
    tail.push_back(a);
  }

  if (auto k = residue(iexp, 4, parity)) {
    num *= ipow(*k);
  } else if (!iexp.is_zero()) {
    // keep the constant part reduced mod 4
    GaussQ c = iexp.constant_term();
    Poly rest = iexp;
    if (c.im == 0 && denominator(c.re) == 1) {
      long long ci = numerator(c.re).convert_to<long long>();
      rest = iexp - Poly(GaussQ(ci));
      num *= ipow(ci);
    }
    r.atoms_.insert(r.atoms_.begin(), i_power(rest));
  }

  std::vector<Atom> head;
  if (pi != 0) head.push_back(pi_power(pi));
  if (std::abs(num - cplx(1.0)) > 1e-15) head.push_back(numeric(num));
  r.atoms_.insert(r.atoms_.begin(), head.begin(), head.end());
  r.atoms_.insert(r.atoms_.end(), tail.begin(), tail.end());
  std::sort(deltas.begin(), deltas.end(), [](const Atom& a, const Atom& b) {
    return std::tie(a.spectral, a.d1, a.d2) < std::tie(b.spectral, b.d1, b.d2);
  });
  r.atoms_.insert(r.atoms_.end(), deltas.begin(), deltas.end());
  return r;
}

CoefficientProduct CoefficientProduct::subst(const std::map<int, Poly>& m) const {
  CoefficientProduct r;
  for (Atom a : atoms_) {
    a.expo = a.expo.subst(m);
    a.idx = {a.idx.holo.subst(m), a.idx.anti.subst(m)};
    a.base = a.base.subst(m);
    a.base_bar = a.base_bar.subst(m);
    r.atoms_.push_back(a);
  }
  return r;
}

CoefficientProduct CoefficientProduct::relabeled(const std::map<std::string, std::string>& m) const {
  CoefficientProduct r;
  for (Atom a : atoms_) {
    if (a.kind == Atom::Kind::Delta && !a.spectral) {
      auto f = [&](const std::string& s) {
        auto it = m.find(s);
        return it == m.end() ? s : it->second;
      };
      a = point_delta(f(a.d1), f(a.d2));
    }
    r.atoms_.push_back(a);
  }
  return r;
}

cplx CoefficientProduct::value(const Binding& b) const {
  cplx v = 1.0;
  for (const Atom& a : atoms_) {
    switch (a.kind) {
      case Atom::Kind::Pi: v *= std::pow(kPi, a.power); break;
      case Atom::Kind::I:
      case Atom::Kind::Sign: {
        auto k = as_integer(a.expo.eval(b));
        if (!k) throw std::domain_error("non-integer sign exponent " + a.expo.str());
        v *= a.kind == Atom::Kind::I ? ipow(*k) : ipow(2 * *k);
        break;
      }
      case Atom::Kind::A: v *= int_pow(a_of(a.idx.eval(b)), a.power); break;
      case Atom::Kind::Linear:
        v *= linear_value(a.base.eval(b), a.base_bar.eval(b), a.idx.holo.eval(b),
                          a.idx.anti.eval(b));
        break;
      case Atom::Kind::Numeric: v *= a.num; break;
      case Atom::Kind::Delta: break;
    }
  }
  return v;
}

std::vector<Atom> CoefficientProduct::deltas() const {
  std::vector<Atom> r;
  for (const Atom& a : atoms_)
    if (a.kind == Atom::Kind::Delta) r.push_back(a);
  return r;
}

std::string CoefficientProduct::str() const {
  if (atoms_.empty()) return "1";
  std::string out;
  for (const Atom& a : atoms_) {
    if (!out.empty()) out += " * ";
    std::ostringstream os;
    switch (a.kind) {
      case Atom::Kind::Pi: os << "pi^" << a.power; break;
      case Atom::Kind::I: os << "i^(" << a.expo.str() << ")"; break;
      case Atom::Kind::Sign: os << "(-1)^(" << a.expo.str() << ")"; break;
      case Atom::Kind::A:
        os << "a(" << a.idx.holo.str() << " | " << a.idx.anti.str() << ")";
        if (a.power != 1) os << "^" << a.power;
        break;
      case Atom::Kind::Linear:
        os << "[" << a.base.str() << " | " << a.base_bar.str() << "]^(" << a.idx.holo.str() << ", "
           << a.idx.anti.str() << ")";
        break;
      case Atom::Kind::Numeric: {
        if (a.num.imag() == 0)
          os << a.num.real();
        else
          os << "(" << a.num.real() << (a.num.imag() < 0 ? "" : "+") << a.num.imag() << "i)";
        break;
      }
      case Atom::Kind::Delta:
        os << (a.spectral ? "delta(" : "delta2(") << a.d1 << " - " << a.d2 << ")";
        break;
    }
    out += os.str();
  }
  return out;
}

Poly physical_conj(const Poly& p) {
  std::map<int, Poly> m;
  for (auto& [mono, c] : p.terms())
    for (auto& [id, pw] : mono.f) {
      if (m.count(id)) continue;
      const std::string& n = sym_name(id);
      if (n == "s")
        m.emplace(id, one() - Poly::var("sbar"));
      else if (n == "sbar")
        m.emplace(id, one() - Poly::var("s"));
      else
        m.emplace(id, Poly::var(bar_name(n)));
    }
  return p.conj_coeffs().subst(m);
}

CoefficientProduct physical_conj(const CoefficientProduct& c) {
  CoefficientProduct r;
  for (Atom a : c.atoms()) {
    switch (a.kind) {
      case Atom::Kind::Pi:
      case Atom::Kind::Delta: break;
      case Atom::Kind::I: a.expo = -physical_conj(a.expo); break;
      case Atom::Kind::Sign: a.expo = physical_conj(a.expo); break;
      case Atom::Kind::A: a.idx = {physical_conj(a.idx.holo), physical_conj(a.idx.anti)}; break;
      case Atom::Kind::Linear: {
        Poly b = physical_conj(a.base_bar), bb = physical_conj(a.base);
        a.idx = {physical_conj(a.idx.anti), physical_conj(a.idx.holo)};
        a.base = b;
        a.base_bar = bb;
        break;
      }
      case Atom::Kind::Numeric: a.num = std::conj(a.num); break;
    }
    r *= a;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Diagram

int Diagram::find(const std::string& label) const {
  for (size_t i = 0; i < vertices.size(); ++i)
    if (vertices[i].label == label) return int(i);
  return -1;
}

int Diagram::vertex(const std::string& label, VertexKind kind) {
  int v = find(label);
  if (v >= 0) return v;
  vertices.push_back({kind, label, std::nullopt});
  return int(vertices.size()) - 1;
}

int Diagram::anchor() { return vertex("0", VertexKind::Anchor); }

void Diagram::add_edge(const std::string& tail, const std::string& head, const SymIndex& index) {
  int t = tail == "0" ? anchor() : vertex(tail);
  int h = head == "0" ? anchor() : vertex(head);
  if (t == h) throw PreconditionFailed("edge from " + tail + " to itself");
  edges.push_back({t, h, index});
}

void Diagram::add_wave(const std::string& v, const Poly& p, const Poly& pbar, bool inverted) {
  int id = vertex(v);
  for (auto& w : waves)
    if (w.vertex == id && w.inverted == inverted) {
      w.p += p;
      w.pbar += pbar;
      return;
    }
  waves.push_back({id, p, pbar, inverted});
}

std::vector<int> Diagram::incident(int v) const {
  std::vector<int> r;
  for (size_t i = 0; i < edges.size(); ++i)
    if (edges[i].tail == v || edges[i].head == v) r.push_back(int(i));
  return r;
}

int Diagram::count(VertexKind k) const {
  return int(std::count_if(vertices.begin(), vertices.end(),
                           [&](const Vertex& v) { return v.kind == k; }));
}

std::vector<std::string> Diagram::labels(VertexKind k) const {
  std::vector<std::string> r;
  for (auto& v : vertices)
    if (v.kind == k) r.push_back(v.label);
  return r;
}

void Diagram::relabel(const std::map<std::string, std::string>& m) {
  std::vector<Vertex> nv;
  std::vector<int> remap(vertices.size());
  for (size_t i = 0; i < vertices.size(); ++i) {
    Vertex v = vertices[i];
    auto it = m.find(v.label);
    if (it != m.end()) v.label = it->second;
    auto f = std::find_if(nv.begin(), nv.end(), [&](const Vertex& o) { return o.label == v.label; });
    if (f == nv.end()) {
      remap[i] = int(nv.size());
      nv.push_back(v);
    } else {
      remap[i] = int(f - nv.begin());
    }
  }
  vertices = std::move(nv);
  for (auto& e : edges) {
    e.tail = remap[e.tail];
    e.head = remap[e.head];
    if (e.tail == e.head) throw PreconditionFailed("relabel collapses an edge");
  }
  std::vector<WaveDeco> ws;
  std::swap(ws, waves);
  for (auto& w : ws) add_wave(vertices[remap[w.vertex]].label, w.p, w.pbar, w.inverted);
  coeff = coeff.relabeled(m);
}

void Diagram::set_kind(const std::string& label, VertexKind k) {
  int v = find(label);
  if (v < 0) throw std::invalid_argument("no vertex " + label);
  vertices[v].kind = k;
}

void Diagram::remove_vertex(int v) {
  std::vector<Edge> ne;
  for (auto e : edges) {
    if (e.tail == v || e.head == v) continue;
    if (e.tail > v) --e.tail;
    if (e.head > v) --e.head;
    ne.push_back(e);
  }
  edges = std::move(ne);
  std::vector<WaveDeco> nw;
  for (auto w : waves) {
    if (w.vertex == v) continue;
    if (w.vertex > v) --w.vertex;
    nw.push_back(w);
  }
  waves = std::move(nw);
  vertices.erase(vertices.begin() + v);
}

void Diagram::merge_parallel() {
  std::vector<Edge> ne;
  for (const Edge& e : edges) {
    auto it = std::find_if(ne.begin(), ne.end(), [&](const Edge& o) {
      return (o.tail == e.tail && o.head == e.head) || (o.tail == e.head && o.head == e.tail);
    });
    if (it == ne.end()) {
      ne.push_back(e);
      continue;
    }
    if (it->tail != e.tail) coeff *= sign_of(e.index);
    it->index = it->index + e.index;
  }
  ne.erase(std::remove_if(ne.begin(), ne.end(), [](const Edge& e) { return e.index.is_zero(); }),
           ne.end());
  edges = std::move(ne);
}

PowExpr Diagram::integrand() const {
  PowExpr r(Poly(1));
  for (const Edge& e : edges) {
    const Vertex& t = vertices[e.tail];
    const Vertex& h = vertices[e.head];
    if (t.kind == VertexKind::Anchor)
      r = r * PowExpr::power(h.label, -e.index);
    else if (h.kind == VertexKind::Anchor)
      r = r * PowExpr::power(t.label, -e.index, -1);
    else
      r = r * PowExpr::power(h.label, t.label, -e.index);
  }
  for (const WaveDeco& w : waves) {
    if (vertices[w.vertex].kind == VertexKind::Anchor) continue;
    if (!w.inverted) {
      r = r * PowExpr::wave(vertices[w.vertex].label, w.p, w.pbar);
    } else {
      PowTerm t;
      t.inv_waves[sym(vertices[w.vertex].label)] = {w.p, w.pbar};
      PowExpr iw;
      iw.add_term(t);
      r = r * iw;
    }
  }
  return r;
}

std::string Diagram::serialize() const {
  std::ostringstream os;
  os << "sl2c-diagram v1\n";
  for (size_t i = 0; i < vertices.size(); ++i) {
    os << "vertex " << i << " " << kind_str(vertices[i].kind) << " " << vertices[i].label;
    if (vertices[i].pos) os << " at " << vertices[i].pos->str();
    os << "\n";
  }
  std::vector<std::string> es;
  for (const Edge& e : edges)
    es.push_back("edge " + vertices[e.tail].label + " -> " + vertices[e.head].label + " " +
                 e.index.str());
  std::sort(es.begin(), es.end());
  for (auto& e : es) os << e << "\n";
  std::vector<std::string> ws;
  for (const WaveDeco& w : waves)
    ws.push_back("wave " + vertices[w.vertex].label + " (" + w.p.str() + ", " + w.pbar.str() + ")" +
                 (w.inverted ? " inverted" : ""));
  std::sort(ws.begin(), ws.end());
  for (auto& w : ws) os << w << "\n";
  os << "coeff " << coeff.str() << "\n";
  return os.str();
}

Diagram compose(const Diagram& a, const Diagram& b, const std::vector<std::string>& integrate) {
  Diagram r = a;
  for (const Edge& e : b.edges) {
    const Vertex& t = b.vertices[e.tail];
    const Vertex& h = b.vertices[e.head];
    r.vertex(t.label, t.kind);
    r.vertex(h.label, h.kind);
    r.edges.push_back({r.find(t.label), r.find(h.label), e.index});
  }
  for (const Vertex& v : b.vertices) r.vertex(v.label, v.kind);
  for (const WaveDeco& w : b.waves) r.add_wave(b.vertices[w.vertex].label, w.p, w.pbar, w.inverted);
  r.coeff *= b.coeff;
  for (auto& l : integrate) r.set_kind(l, VertexKind::Internal);
  return r;
}

Diagram adjoint(const Diagram& d) {
  Diagram r = d;
  for (Edge& e : r.edges) e.index = {physical_conj(e.index.anti), physical_conj(e.index.holo)};
  for (WaveDeco& w : r.waves) {
    Poly p = -physical_conj(w.pbar), pb = -physical_conj(w.p);
    w.p = p;
    w.pbar = pb;
  }
  r.coeff = physical_conj(d.coeff);
  return r;
}

Diagram from_powexpr(const PowExpr& e, const std::vector<std::string>& internal) {
  if (e.terms().size() != 1) throw std::invalid_argument("from_powexpr needs a single term");
  const PowTerm& t = e.terms()[0];
  Diagram d;
  if (!t.coeff.is_constant()) throw std::invalid_argument("symbolic term coefficient");
  cplx c = t.scale * t.coeff.constant_term().value();
  if (c != cplx(1.0)) d.coeff *= numeric(c);
  for (int v : t.vars()) d.vertex(sym_name(v));
  for (auto& [b, E] : t.pw) {
    std::string vi = sym_name(b.i);
    std::string vj = b.j < 0 ? "0" : sym_name(b.j);
    if (b.sign > 0)
      d.add_edge(vj, vi, -E);
    else
      d.add_edge(vi, vj, -E);
  }
  for (auto& [v, m] : t.waves) d.add_wave(sym_name(v), m.first, m.second);
  for (auto& [v, m] : t.inv_waves) d.add_wave(sym_name(v), m.first, m.second, true);
  for (auto& [m, c2] : t.spw) {
    Atom a;
    a.kind = Atom::Kind::Linear;
    a.base = m.first;
    a.base_bar = m.second;
    a.idx = c2;
    d.coeff *= a;
  }
  for (auto& l : internal) d.set_kind(l, VertexKind::Internal);
  return d;
}

// ---------------------------------------------------------------------------
// Builders

namespace {

std::string level_label(int top, int level, int k) {
  if (level == top) return "z" + std::to_string(k);
  return "w" + std::to_string(level) + "_" + std::to_string(k);
}

const Poly& S() {
  static const Poly s = Poly::var("s");
  return s;
}

}  // namespace

Diagram build_lambda(int N, LambdaFamily fam, const Poly& x) {
  if (N < 1) throw std::invalid_argument("N >= 1");
  const Poly I = Poly::I();
  std::vector<std::string> ws;
  for (int k = 1; k < N; ++k) ws.push_back("w" + std::to_string(k));
  Diagram d = from_powexpr(lambda_kernel(Family::B, N, x), ws);
  for (int k = 1; k <= N; ++k) d.vertex("z" + std::to_string(k));
  if (N > 1) {
    d.coeff *= a_factor(SymIndex::sym(S() + I * x), N - 1);
    SymIndex second = SymIndex::sym(S() - I * x);
    d.coeff *= a_factor({second.anti, second.holo}, N - 1);
  }
  std::string zN = "z" + std::to_string(N);
  SymIndex up = SymIndex::sym(I * x - S());     // [z]^(ix - s)
  SymIndex down = SymIndex::sym(-I * x - S());  // [z]^(-ix - s)
  switch (fam) {
    case LambdaFamily::plain: break;
    case LambdaFamily::tilde: d.add_edge("0", zN, -up); break;
    case LambdaFamily::hat: d.add_edge("0", "z1", -down); break;
    case LambdaFamily::bar:
      d.add_edge("0", "z1", -down);
      d.add_edge("0", zN, -up);
      d.merge_parallel();
      break;
  }
  return d;
}

Diagram build_psi(Family f, int N, const std::vector<Poly>& xs, const Poly& p) {
  if (N < 1) throw std::invalid_argument("N >= 1");
  bool ad = f == Family::A || f == Family::D;
  size_t want = ad ? size_t(N) : size_t(N - 1);
  if (xs.size() != want)
    throw std::invalid_argument("family " + std::string(1, family_char(f)) + " needs " +
                                std::to_string(want) + " separated variables");
  LambdaFamily lf = f == Family::A   ? LambdaFamily::tilde
                    : f == Family::D ? LambdaFamily::hat
                    : f == Family::C ? LambdaFamily::bar
                                     : LambdaFamily::plain;
  int lowest = ad ? 1 : 2;
  Diagram d;
  std::vector<std::string> inner;
  for (int level = N; level >= lowest; --level) {
    Diagram L = build_lambda(level, lf, xs[size_t(N - level)]);
    std::map<std::string, std::string> m;
    for (int k = 1; k <= level; ++k) m["z" + std::to_string(k)] = level_label(N, level, k);
    for (int k = 1; k < level; ++k) m["w" + std::to_string(k)] = level_label(N, level - 1, k);
    L.relabel(m);
    for (int k = 1; k < level; ++k) inner.push_back(level_label(N, level - 1, k));
    d = compose(d, L, {});
  }
  std::string bottom = level_label(N, 1, 1);
  d.vertex(bottom);
  if (f == Family::B) d.add_wave(bottom, p, bar(p));
  if (f == Family::C) {
    d.add_edge("0", bottom, SymIndex::sym(Poly(2) * S()));
    d.add_wave(bottom, p, bar(p), true);
    d.merge_parallel();
  }
  if (!ad && N > 1) {
    Poly h = Poly(GaussQ::frac(N - 1, 2));
    d.coeff *= linear_factor(p, SymIndex::both(h));
  }
  for (auto& l : inner) d.set_kind(l, VertexKind::Internal);
  return d;
}

Diagram build_baxter(Family f, int N, const Poly& u, const Poly& ubar) {
  return from_powexpr(baxter_kernel(f, N, u, ubar));
}

Diagram build_factorized_R(int which, const Poly& u, const Poly& v) {
  const Poly I = Poly::I();
  Diagram d;
  d.vertex("z1");
  d.vertex("z2");
  d.vertex("w1", VertexKind::Internal);
  d.vertex("w2", VertexKind::Internal);
  if (which == 1) {
    // delta(z1 - w1) [z2 - z1]^(i(v - u)) / ([z2 - w2]^(1 - iu) [z1 - w2]^(iv))
    d.add_edge("z1", "z2", SymIndex::sym(I * (u - v)));
    d.add_edge("w2", "z2", SymIndex::sym(one() - I * u));
    d.add_edge("w2", "z1", SymIndex::sym(I * v));
    d.coeff *= point_delta("z1", "w1");
  } else if (which == 2) {
    // delta(z2 - w2) [z1 - z2]^(i(u - v)) / ([w1 - z1]^(1 - iv) [w1 - z2]^(iu))
    d.add_edge("z2", "z1", SymIndex::sym(I * (v - u)));
    d.add_edge("z1", "w1", SymIndex::sym(one() - I * v));
    d.add_edge("z2", "w1", SymIndex::sym(I * u));
    d.coeff *= point_delta("z2", "w2");
  } else {
    throw std::invalid_argument("which must be 1 or 2");
  }
  return d;
}

// ---------------------------------------------------------------------------
// Rules

std::string rule_name(Rule r) {
  switch (r) {
    case Rule::chain: return "chain";
    case Rule::star_triangle: return "star_triangle";
    case Rule::cross: return "cross";
    case Rule::delta_reduce: return "delta_reduce";
    case Rule::fourier: return "fourier";
    case Rule::mellin_delta: return "mellin_delta";
    case Rule::merge: return "merge";
    case Rule::integrate_delta: return "integrate_delta";
    case Rule::momentum: return "momentum";
  }
  return "?";
}

Rule rule_from_name(const std::string& s) {
  for (Rule r : {Rule::chain, Rule::star_triangle, Rule::cross, Rule::delta_reduce, Rule::fourier,
                 Rule::mellin_delta, Rule::merge, Rule::integrate_delta, Rule::momentum})
    if (rule_name(r) == s) return r;
  throw std::invalid_argument("unknown rule " + s);
}

namespace {

struct Site {
  int v;
  std::vector<int> edges;
};

Site internal_site(const Diagram& d, const std::string& label, int degree, bool allow_wave = false) {
  int v = d.find(label);
  if (v < 0) throw PreconditionFailed("no vertex " + label);
  if (d.vertices[v].kind != VertexKind::Internal)
    throw PreconditionFailed(label + " is not an integration vertex");
  if (!allow_wave)
    for (auto& w : d.waves)
      if (w.vertex == v) throw PreconditionFailed(label + " carries a plane wave");
  Site s{v, d.incident(v)};
  if (degree >= 0 && int(s.edges.size()) != degree)
    throw PreconditionFailed(label + " has degree " + std::to_string(s.edges.size()) +
                             ", expected " + std::to_string(degree));
  std::set<int> ends;
  for (int e : s.edges) {
    const Edge& E = d.edges[e];
    ends.insert(E.tail == v ? E.head : E.tail);
  }
  if (ends.size() != s.edges.size())
    throw PreconditionFailed(label + " has parallel lines; merge first");
  for (auto& a : d.coeff.deltas())
    if (!a.spectral && (a.d1 == label || a.d2 == label))
      throw PreconditionFailed(label + " is tied by a delta function");
  return s;
}

int other_end(const Edge& e, int v) { return e.tail == v ? e.head : e.tail; }

// Index of edge e written as [other - v]^(-idx); a reversed edge costs a sign.
SymIndex outward(const Edge& e, int v, CoefficientProduct& c) {
  if (e.head == v) c *= sign_of(e.index);
  return e.index;
}
// Index of edge e written as [v - other]^(-idx).
SymIndex inward(const Edge& e, int v, CoefficientProduct& c) {
  if (e.tail == v) c *= sign_of(e.index);
  return e.index;
}

void subst_all(Diagram& d, const std::map<int, Poly>& m) {
  for (auto& e : d.edges) e.index = {e.index.holo.subst(m), e.index.anti.subst(m)};
  for (auto& w : d.waves) {
    w.p = w.p.subst(m);
    w.pbar = w.pbar.subst(m);
  }
  for (auto& v : d.vertices)
    if (v.pos) v.pos = v.pos->subst(m);
  d.coeff = d.coeff.subst(m);
}

Diagram chain(const Diagram& d, const std::string& at, bool to_delta) {
  Site s = internal_site(d, at, 2);
  Diagram r = d;
  const Edge& e1 = d.edges[s.edges[0]];
  const Edge& e2 = d.edges[s.edges[1]];
  SymIndex al = outward(e1, s.v, r.coeff);  // [z1 - w]^-al
  SymIndex be = inward(e2, s.v, r.coeff);   // [w - z2]^-be
  std::string z1 = d.vertices[other_end(e1, s.v)].label;
  std::string z2 = d.vertices[other_end(e2, s.v)].label;
  SymIndex ga = both(2) - al - be;
  r.remove_vertex(s.v);
  if (!to_delta) {
    if (ga.is_zero()) throw PreconditionFailed("indices sum to 2; use delta_reduce");
    r.coeff *= pi_power(1);
    r.coeff *= sign_of(ga);
    r.coeff *= a_factor(al);
    r.coeff *= a_factor(be);
    r.coeff *= a_factor(ga);
    r.add_edge(z2, z1, al + be - both(1));
  } else {
    if (!ga.is_zero()) throw PreconditionFailed("indices do not sum to 2");
    r.coeff *= pi_power(2);
    r.coeff *= a_factor(al);
    r.coeff *= a_factor(be);
    r.coeff *= point_delta(z1, z2);
  }
  return r;
}

Diagram star(const Diagram& d, const std::string& at) {
  Site s = internal_site(d, at, 3);
  Diagram r = d;
  SymIndex a[3];
  std::string z[3];
  for (int k = 0; k < 3; ++k) {
    const Edge& e = d.edges[s.edges[k]];
    a[k] = outward(e, s.v, r.coeff);  // [z_k - w]^-a_k
    z[k] = d.vertices[other_end(e, s.v)].label;
  }
  if (!(a[0] + a[1] + a[2] == both(2)))
    throw PreconditionFailed("star indices sum to " + (a[0] + a[1] + a[2]).str() + ", not 2");
  r.remove_vertex(s.v);
  r.coeff *= pi_power(1);
  for (auto& x : a) r.coeff *= a_factor(x);
  r.add_edge(z[0], z[1], both(1) - a[2]);
  r.add_edge(z[2], z[0], both(1) - a[1]);
  r.add_edge(z[1], z[2], both(1) - a[0]);
  return r;
}

// I(al, be, al', be') = int [w - z1]^-al [w - z2]^-(1 - al') [w - z3]^-be [w - z4]^-(1 - be')
//   = a(al) a(bebar) / (a(al') a(be'bar)) [z1 - z2]^(al' - al) [z3 - z4]^-(be - be')
//     I(al', be', al, be)
Diagram cross(const Diagram& d, const std::string& at, const std::vector<std::string>& order) {
  if (order.size() != 4) throw PreconditionFailed("cross needs the order z1, z2, z3, z4");
  Site s = internal_site(d, at, 4);
  Diagram r = d;
  SymIndex idx[4];
  for (int k = 0; k < 4; ++k) {
    int zk = d.find(order[size_t(k)]);
    auto it = std::find_if(s.edges.begin(), s.edges.end(),
                           [&](int e) { return other_end(d.edges[e], s.v) == zk; });
    if (zk < 0 || it == s.edges.end()) throw PreconditionFailed("no line from " + at + " to " + order[size_t(k)]);
    idx[k] = inward(d.edges[*it], s.v, r.coeff);
  }
  SymIndex al = idx[0], alp = both(1) - idx[1], be = idx[2], bep = both(1) - idx[3];
  if (!(al + be == alp + bep)) throw PreconditionFailed("cross needs al + be = al' + be'");
  r.remove_vertex(s.v);
  auto sw = [](const SymIndex& x) { return SymIndex{x.anti, x.holo}; };
  r.coeff *= a_factor(al);
  r.coeff *= a_factor(sw(be));
  r.coeff *= a_factor(alp, -1);
  r.coeff *= a_factor(sw(bep), -1);
  r.vertex(at, VertexKind::Internal);
  r.add_edge(order[0], at, alp);
  r.add_edge(order[1], at, both(1) - al);
  r.add_edge(order[2], at, bep);
  r.add_edge(order[3], at, both(1) - be);
  r.add_edge(order[1], order[0], al - alp);
  r.add_edge(order[3], order[2], be - bep);
  return r;
}

Diagram fourier(const Diagram& d, const std::string& at) {
  Site s = internal_site(d, at, 1, true);
  auto wi = std::find_if(d.waves.begin(), d.waves.end(), [&](const WaveDeco& w) { return w.vertex == s.v; });
  if (wi == d.waves.end() || wi->inverted) throw PreconditionFailed(at + " carries no plane wave");
  Diagram r = d;
  const Edge& e = d.edges[s.edges[0]];
  SymIndex al = inward(e, s.v, r.coeff);  // [w - u]^-al
  std::string u = d.vertices[other_end(e, s.v)].label;
  Poly p = wi->p, pb = wi->pbar;
  r.remove_vertex(s.v);
  r.coeff *= pi_power(1);
  r.coeff *= i_power(al.holo - al.anti);
  r.coeff *= a_factor(al);
  Atom lin;
  lin.kind = Atom::Kind::Linear;
  lin.base = p;
  lin.base_bar = pb;
  lin.idx = al - both(1);
  r.coeff *= lin;
  if (r.vertices[r.find(u)].kind != VertexKind::Anchor) r.add_wave(u, p, pb);
  return r;
}

// int d^2w [w]^-(1 - iD) over the plane is 2 pi^2 delta(D); with two lines
// [P1 - w]^-a [w - P2]^-(2 - a), a = 1 -+ iD, each endpoint contributes half,
// leaving 2 pi^2 delta(D) [P1 - P2]^-1. The regular part away from D = 0 is
// dropped.
Diagram mellin(const Diagram& d, const std::string& at) {
  Site s = internal_site(d, at, -1);
  if (s.edges.empty() || s.edges.size() > 2) throw PreconditionFailed("mellin_delta needs one or two lines");
  Diagram r = d;
  const Edge& e1 = d.edges[s.edges[0]];
  SymIndex a = outward(e1, s.v, r.coeff);
  std::string P1 = d.vertices[other_end(e1, s.v)].label, P2;
  if (s.edges.size() == 2) {
    const Edge& e2 = d.edges[s.edges[1]];
    SymIndex b = inward(e2, s.v, r.coeff);
    P2 = d.vertices[other_end(e2, s.v)].label;
    if (!(a + b == both(2))) throw PreconditionFailed("mellin_delta lines must sum to 2");
  }
  // a = 1 - iD
  Poly D = Poly::I() * (a.holo - one());
  if (!(a.anti == one() - Poly::I() * bar(D)))
    throw PreconditionFailed("index is not of Mellin form 1 - iD");
  std::string plus, minus;
  if (D.terms().size() == 2) {
    for (auto& [m, c] : D.terms()) {
      if (m.f.size() != 1 || m.f[0].second != 1) break;
      if (c == GaussQ(1)) plus = sym_name(m.f[0].first);
      if (c == GaussQ(-1)) minus = sym_name(m.f[0].first);
    }
  }
  if (plus.empty() || minus.empty()) throw PreconditionFailed("D = " + D.str() + " is not x - x'");
  std::string keep = std::min(plus, minus), drop = std::max(plus, minus);
  r.remove_vertex(s.v);
  r.coeff *= pi_power(2);
  r.coeff *= numeric(2.0);
  r.coeff *= spectral_delta(keep, drop);
  if (!P2.empty()) {
    int i1 = r.find(P1), i2 = r.find(P2);
    const Vertex& v1 = r.vertices[i1];
    const Vertex& v2 = r.vertices[i2];
    auto pos = [](const Vertex& v) -> std::optional<Poly> {
      if (v.kind == VertexKind::Anchor) return Poly();
      return v.pos;
    };
    auto q1 = pos(v1), q2 = pos(v2);
    if (q1 && q2)
      r.coeff *= linear_factor(*q1 - *q2, both(-1));
    else
      r.add_edge(P2, P1, both(1));
  }
  std::map<int, Poly> m{{sym(drop), Poly::var(keep)}, {sym(bar_name(drop)), Poly::var(bar_name(keep))}};
  subst_all(r, m);
  // momentum-space points left without lines
  for (int i = int(r.vertices.size()) - 1; i >= 0; --i)
    if (r.vertices[i].pos && r.incident(i).empty()) r.remove_vertex(i);
  return r;
}

Diagram integrate_delta(const Diagram& d, const std::string& at) {
  int v = d.find(at);
  if (v < 0 || d.vertices[v].kind != VertexKind::Internal)
    throw PreconditionFailed(at + " is not an integration vertex");
  CoefficientProduct rest;
  std::string target;
  for (const Atom& a : d.coeff.atoms()) {
    if (target.empty() && a.kind == Atom::Kind::Delta && !a.spectral && (a.d1 == at || a.d2 == at)) {
      target = a.d1 == at ? a.d2 : a.d1;
      continue;
    }
    rest *= a;
  }
  if (target.empty()) throw PreconditionFailed(at + " is not tied by a point delta");
  Diagram r = d;
  r.coeff = rest;
  int t = r.find(target);
  VertexKind k = r.vertices[t].kind;
  r.relabel({{at, target}});
  r.vertices[r.find(target)].kind = k;
  return r;
}

// Each line [h - t]^-a = pi^-2 int d^2k e^{-i(k(h - t) + c.c.)} pi i^(a - abar) a(a) [k]^(a - 1);
// every integration vertex then yields pi^2 delta^2 of its momentum balance.
Diagram momentum(const Diagram& d) {
  std::vector<int> inner;
  for (size_t v = 0; v < d.vertices.size(); ++v)
    if (d.vertices[v].kind == VertexKind::Internal) inner.push_back(int(v));
  const size_t E = d.edges.size(), R = inner.size();
  std::vector<std::vector<Rational>> M(R, std::vector<Rational>(E));
  std::vector<Poly> rhs(R);
  for (size_t r = 0; r < R; ++r) {
    int v = inner[r];
    for (size_t e = 0; e < E; ++e) {
      if (d.edges[e].head == v) M[r][e] += 1;
      if (d.edges[e].tail == v) M[r][e] -= 1;
    }
    for (auto& w : d.waves)
      if (w.vertex == v) {
        if (w.inverted) throw PreconditionFailed("inverted wave on an integration vertex");
        if (!(w.pbar == bar(w.p))) throw PreconditionFailed("wave momenta are not conjugate partners");
        rhs[r] += w.p;
      }
  }
  // reduced row echelon form
  std::vector<int> pivot_col;
  size_t row = 0;
  for (size_t c = 0; c < E && row < R; ++c) {
    size_t p = row;
    while (p < R && M[p][c] == 0) ++p;
    if (p == R) continue;
    std::swap(M[p], M[row]);
    std::swap(rhs[p], rhs[row]);
    Rational inv = 1 / M[row][c];
    for (auto& x : M[row]) x *= inv;
    rhs[row] = GaussQ(inv, 0) * rhs[row];
    for (size_t q = 0; q < R; ++q) {
      if (q == row || M[q][c] == 0) continue;
      Rational f = M[q][c];
      for (size_t k = 0; k < E; ++k) M[q][k] -= f * M[row][k];
      rhs[q] -= GaussQ(f, 0) * rhs[row];
    }
    pivot_col.push_back(int(c));
    ++row;
  }
  for (size_t q = row; q < R; ++q)
    if (!rhs[q].is_zero()) throw PreconditionFailed("momentum balance is inconsistent");
  std::vector<int> free;
  for (size_t c = 0; c < E; ++c)
    if (std::find(pivot_col.begin(), pivot_col.end(), int(c)) == pivot_col.end()) free.push_back(int(c));
  if (free.size() > 1) throw PreconditionFailed("only one-loop diagrams are supported");

  // k_e = c_e l + P_e
  std::vector<int> cl(E, 0);
  std::vector<Poly> P(E);
  for (int f : free) cl[size_t(f)] = 1;
  for (size_t r = 0; r < pivot_col.size(); ++r) {
    size_t e = size_t(pivot_col[r]);
    P[e] = rhs[r];
    if (!free.empty()) {
      Rational c = -M[r][size_t(free[0])];
      if (c != 0 && c != 1 && c != -1) throw PreconditionFailed("non-unimodular momentum routing");
      cl[e] = c.convert_to<int>();
    }
  }

  Diagram m;
  m.anchor();
  m.coeff = d.coeff;
  m.coeff *= pi_power(2 * int(R) - 2 * int(E));
  for (size_t v = 0; v < d.vertices.size(); ++v) {
    const Vertex& V = d.vertices[v];
    if (V.kind != VertexKind::External) continue;
    m.vertex(V.label);
    int lc = 0;
    Poly net;
    for (size_t e = 0; e < E; ++e) {
      if (d.edges[e].head == int(v)) { lc += cl[e]; net += P[e]; }
      if (d.edges[e].tail == int(v)) { lc -= cl[e]; net -= P[e]; }
    }
    if (lc != 0) throw PreconditionFailed("loop momentum leaks through " + V.label);
    if (!net.is_zero()) m.add_wave(V.label, -net, -bar(net));
  }
  for (auto& w : d.waves)
    if (d.vertices[w.vertex].kind == VertexKind::External)
      m.add_wave(d.vertices[w.vertex].label, w.p, w.pbar, w.inverted);

  if (!free.empty()) m.vertex("k", VertexKind::Internal);
  auto point = [&](const Poly& q) -> std::string {
    if (q.is_zero()) return "0";
    std::string l = "q[" + q.str() + "]";
    int id = m.vertex(l);
    m.vertices[id].pos = q;
    return l;
  };
  for (size_t e = 0; e < E; ++e) {
    const SymIndex& a = d.edges[e].index;
    m.coeff *= pi_power(1);
    m.coeff *= i_power(a.holo - a.anti);
    m.coeff *= a_factor(a);
    SymIndex up = both(1) - a;  // [k_e]^(a - 1) = [k_e]^-(1 - a)
    if (cl[e] == 0) {
      if (P[e].is_zero()) throw PreconditionFailed("line carries zero momentum");
      m.coeff *= linear_factor(P[e], -up);
    } else if (cl[e] == 1) {
      m.add_edge(point(-P[e]), "k", up);
    } else {
      m.add_edge("k", point(P[e]), up);
    }
  }
  return m;
}

}  // namespace

Diagram apply_rule(const Diagram& d, Rule rule, const Loc& loc) {
  switch (rule) {
    case Rule::chain: return chain(d, loc.vertex, false);
    case Rule::delta_reduce: return chain(d, loc.vertex, true);
    case Rule::star_triangle: return star(d, loc.vertex);
    case Rule::cross: return cross(d, loc.vertex, loc.order);
    case Rule::fourier: return fourier(d, loc.vertex);
    case Rule::mellin_delta: return mellin(d, loc.vertex);
    case Rule::integrate_delta: return integrate_delta(d, loc.vertex);
    case Rule::momentum: return momentum(d);
    case Rule::merge: {
      Diagram r = d;
      r.merge_parallel();
      return r;
    }
  }
  throw PreconditionFailed("unknown rule");
}

ScriptResult run_script(const Diagram& d, const RewriteScript& script, const ParitySamples* parity) {
  ScriptResult res{d, {}};
  for (size_t i = 0; i < script.size(); ++i) {
    const ScriptStep& st = script[i];
    try {
      res.diagram = apply_rule(res.diagram, st.rule, st.loc);
    } catch (const PreconditionFailed& e) {
      throw StepFailed(int(i), rule_name(st.rule) + " at " + st.loc.vertex + ": " + e.what());
    }
    res.diagram.coeff = res.diagram.coeff.simplified(parity);
    std::string where = st.loc.vertex.empty() ? "" : " @ " + st.loc.vertex;
    res.log.push_back(rule_name(st.rule) + where + ": " + res.diagram.coeff.str());
  }
  return res;
}

// ---------------------------------------------------------------------------
// Numerics

QuadratureResult eval_diagram(const Diagram& d, const Binding& points, const Binding& params,
                              const QuadOptions& opt) {
  if (!d.coeff.deltas().empty()) throw std::domain_error("diagram contains delta functions");
  cplx c = d.coeff.value(params);
  std::vector<std::string> vars = d.labels(VertexKind::Internal);
  std::sort(vars.begin(), vars.end());
  PowExpr e = d.integrand();
  QuadratureResult r;
  if (vars.empty()) {
    r.value = evaluate(e, points, params);
    r.method = "closed";
    r.seed = opt.seed;
  } else if (vars.size() == 1) {
    r = integrate2d(e, vars[0], points, params, opt);
  } else {
    r = integrate_nested(e, vars, points, params, opt);
  }
  r.value *= c;
  r.error *= std::abs(c);
  return r;
}

QuadratureResult inner_product(const Diagram& f, const Diagram& g,
                               const std::vector<std::string>& vars, const Binding& params,
                               double L, long long samples, uint64_t seed, Exec exec) {
  if (f.count(VertexKind::Internal) || g.count(VertexKind::Internal))
    throw std::invalid_argument("inner_product needs fully external diagrams");
  cplx cf = f.coeff.value(params), cg = g.coeff.value(params);
  CompiledExpr F(f.integrand(), params), G(g.integrand(), params);
  auto slots = [&](const CompiledExpr& c) {
    std::vector<int> s;
    for (int id : c.vars()) {
      auto it = std::find(vars.begin(), vars.end(), sym_name(id));
      if (it == vars.end()) throw std::invalid_argument("variable " + sym_name(id) + " not integrated");
      s.push_back(int(it - vars.begin()));
    }
    return s;
  };
  std::vector<int> sf = slots(F), sg = slots(G);
  auto call = [](const CompiledExpr& c, const std::vector<int>& s, const cplx* z) {
    cplx buf[16];
    for (size_t k = 0; k < s.size(); ++k) buf[k] = z[s[k]];
    return c(buf);
  };
  auto fn = [&](const cplx* z) { return cf * call(F, sf, z); };
  auto gn = [&](const cplx* z) { return cg * call(G, sg, z); };
  return box_inner_product(fn, gn, int(vars.size()), L, samples, seed, exec);
}

}  // namespace sl2c
