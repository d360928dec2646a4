#include "sl2c/weyl.hpp"

#include <vector>

namespace sl2c {

size_t WeylElement::term_cap = kDefaultTermCap;

namespace {

// Falling factorial n (n-1) ... (n-k+1).
long long falling(int n, int k) {
  long long r = 1;
  for (int i = 0; i < k; ++i) r *= (n - i);
  return r;
}

long long binom(int n, int k) {
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

WeylElement::WeylElement(const Poly& c) {
  if (!c.is_zero()) t_.emplace(WeylMono{}, c);
}

WeylElement WeylElement::z(int site, Sector sec) {
  WeylMono m;
  m.e[2 * weyl_slot(site, sec)] = 1;
  WeylElement w;
  w.t_.emplace(m, Poly(1));
  return w;
}

WeylElement WeylElement::d(int site, Sector sec) {
  WeylMono m;
  m.e[2 * weyl_slot(site, sec) + 1] = 1;
  WeylElement w;
  w.t_.emplace(m, Poly(1));
  return w;
}

void WeylElement::add(const WeylMono& m, const Poly& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = t_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) t_.erase(it);
  }
  if (t_.size() > term_cap) throw ResourceError("Weyl term count exceeds cap");
}

WeylElement& WeylElement::operator+=(const WeylElement& o) {
  for (auto& [m, c] : o.t_) add(m, c);
  return *this;
}

WeylElement WeylElement::operator+(const WeylElement& o) const {
  WeylElement r = *this;
  r += o;
  return r;
}

WeylElement WeylElement::operator-() const {
  WeylElement r;
  for (auto& [m, c] : t_) r.t_.emplace(m, -c);
  return r;
}

WeylElement WeylElement::operator-(const WeylElement& o) const { return *this + (-o); }

WeylElement WeylElement::operator*(const WeylElement& o) const {
  WeylElement r;
  struct Partial {
    WeylMono m;
    long long c;
  };
  std::vector<Partial> cur, next;
  for (auto& [m1, c1] : t_) {
    for (auto& [m2, c2] : o.t_) {
      // (z^a1 d^b1)(z^a2 d^b2) = sum_k C(b1,k) a2!/(a2-k)! z^(a1+a2-k) d^(b1+b2-k)
      cur.assign(1, Partial{WeylMono{}, 1});
      for (int v = 0; v < WeylMono::kSlots; ++v) {
        int a1 = m1.zdeg(v), b1 = m1.ddeg(v), a2 = m2.zdeg(v), b2 = m2.ddeg(v);
        if (a1 + b1 + a2 + b2 == 0) continue;
        int kmax = std::min(b1, a2);
        next.clear();
        for (auto& p : cur) {
          for (int k = 0; k <= kmax; ++k) {
            Partial q = p;
            q.m.e[2 * v] = uint8_t(a1 + a2 - k);
            q.m.e[2 * v + 1] = uint8_t(b1 + b2 - k);
            q.c *= binom(b1, k) * falling(a2, k);
            next.push_back(q);
          }
        }
        cur.swap(next);
      }
      Poly c12 = c1 * c2;
      for (auto& p : cur) r.add(p.m, GaussQ(p.c) * c12);
    }
  }
  return r;
}

WeylElement operator*(const Poly& c, const WeylElement& w) { return WeylElement(c) * w; }

WeylElement commutator(const WeylElement& a, const WeylElement& b) { return a * b - b * a; }

WeylElement WeylElement::coeff(int sym_id, int k) const {
  WeylElement r;
  for (auto& [m, c] : t_) r.add(m, c.coeff(sym_id, k));
  return r;
}

WeylElement WeylElement::transpose() const {
  WeylElement r;
  for (auto& [m, c] : t_) {
    // (z^a d^b)^T = (-d)^b z^a, per slot; slots commute.
    WeylElement term(c);
    for (int v = 0; v < WeylMono::kSlots; ++v) {
      int a = m.zdeg(v), b = m.ddeg(v);
      if (a + b == 0) continue;
      WeylMono dm, zm;
      dm.e[2 * v + 1] = uint8_t(b);
      zm.e[2 * v] = uint8_t(a);
      WeylElement dpart, zpart;
      dpart.add(dm, Poly(b % 2 ? -1 : 1));
      zpart.add(zm, Poly(1));
      term = term * (dpart * zpart);
    }
    r += term;
  }
  return r;
}

std::string WeylElement::str() const {
  if (t_.empty()) return "0";
  std::string out;
  for (auto& [m, c] : t_) {
    if (!out.empty()) out += " + ";
    out += "(" + c.str() + ")";
    for (int v = 0; v < WeylMono::kSlots; ++v) {
      int site = v % kMaxSites + 1;
      const char* zb = v < kMaxSites ? "z" : "zb";
      const char* db = v < kMaxSites ? "d" : "db";
      if (m.zdeg(v)) out += std::string("*") + zb + std::to_string(site) + (m.zdeg(v) > 1 ? "^" + std::to_string(m.zdeg(v)) : "");
      if (m.ddeg(v)) out += std::string("*") + db + std::to_string(site) + (m.ddeg(v) > 1 ? "^" + std::to_string(m.ddeg(v)) : "");
    }
  }
  return out;
}

Generators generators(int site, const Poly& spin, Sector sec) {
  WeylElement z = WeylElement::z(site, sec), d = WeylElement::d(site, sec);
  WeylElement s(spin);
  return {-d, z * d + s, z * z * d + WeylElement(Poly(2) * spin) * z};
}

Generators total_generators(int N, const Poly& spin, Sector sec) {
  Generators g;
  for (int k = 1; k <= N; ++k) {
    auto gk = generators(k, spin, sec);
    g.minus += gk.minus;
    g.zero += gk.zero;
    g.plus += gk.plus;
  }
  return g;
}

OpMatrix2 OpMatrix2::operator*(const OpMatrix2& o) const {
  OpMatrix2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r(i, j) = (*this)(i, 0) * o(0, j) + (*this)(i, 1) * o(1, j);
  return r;
}

OpMatrix2 lax(int site, const Poly& spin, const Poly& u, Sector sec) {
  auto g = generators(site, spin, sec);
  WeylElement I(Poly::I()), U(u);
  OpMatrix2 L;
  L(0, 0) = U + I * g.zero;
  L(0, 1) = I * g.minus;
  L(1, 0) = I * g.plus;
  L(1, 1) = U - I * g.zero;
  return L;
}

OpMatrix2 monodromy(int N, const Poly& spin, const Poly& u, Sector sec) {
  if (N < 1) throw std::invalid_argument("monodromy needs N >= 1");
  OpMatrix2 T = lax(1, spin, u, sec);
  for (int k = 2; k <= N; ++k) T = T * lax(k, spin, u, sec);
  return T;
}

std::array<WeylElement, 16> fcr_residual(int N, const Poly& spin, const Poly& u, const Poly& v,
                                         Sector sec) {
  OpMatrix2 T = monodromy(N, spin, u, sec);
  OpMatrix2 Tp = monodromy(N, spin, v, sec);
  using M4 = std::array<WeylElement, 16>;
  auto idx = [](int a, int ap) { return 2 * a + ap; };
  M4 T1, T2, R;
  for (int a = 0; a < 2; ++a)
    for (int ap = 0; ap < 2; ++ap)
      for (int b = 0; b < 2; ++b)
        for (int bp = 0; bp < 2; ++bp) {
          if (ap == bp) T1[4 * idx(a, ap) + idx(b, bp)] = T(a, b);
          if (a == b) T2[4 * idx(a, ap) + idx(b, bp)] = Tp(ap, bp);
          Poly r;
          if (a == b && ap == bp) r += u - v;
          if (a == bp && ap == b) r += Poly::I();
          R[4 * idx(a, ap) + idx(b, bp)] = WeylElement(r);
        }
  auto mul = [](const M4& x, const M4& y) {
    M4 z;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) {
          if (x[4 * i + k].is_zero() || y[4 * k + j].is_zero()) continue;
          z[4 * i + j] += x[4 * i + k] * y[4 * k + j];
        }
    return z;
  };
  M4 lhs = mul(mul(R, T1), T2);
  M4 rhs = mul(mul(T2, T1), R);
  M4 res;
  for (int i = 0; i < 16; ++i) res[i] = lhs[i] - rhs[i];
  return res;
}

}  // namespace sl2c
