#include "sl2c/poly.hpp"

#include <mutex>
#include <sstream>
#include <unordered_map>

namespace sl2c {

GaussQ GaussQ::operator/(const GaussQ& o) const {
  Rational d = o.re * o.re + o.im * o.im;
  if (d == 0) throw std::domain_error("GaussQ division by zero");
  return {(re * o.re + im * o.im) / d, (im * o.re - re * o.im) / d};
}

std::string GaussQ::str() const {
  std::ostringstream os;
  if (im == 0) {
    os << re;
  } else if (re == 0) {
    os << im << "i";
  } else {
    os << "(" << re << (im > 0 ? "+" : "") << im << "i)";
  }
  return os.str();
}

namespace {

struct Registry {
  std::mutex mu;
  std::unordered_map<std::string, int> ids;
  std::vector<std::string> names;
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

int sym(const std::string& name) {
  auto& r = registry();
  std::lock_guard<std::mutex> lk(r.mu);
  auto it = r.ids.find(name);
  if (it != r.ids.end()) return it->second;
  int id = int(r.names.size());
  r.names.push_back(name);
  r.ids.emplace(name, id);
  return id;
}

const std::string& sym_name(int id) {
  auto& r = registry();
  std::lock_guard<std::mutex> lk(r.mu);
  return r.names.at(id);
}

int sym_count() {
  auto& r = registry();
  std::lock_guard<std::mutex> lk(r.mu);
  return int(r.names.size());
}

Binding& Binding::set(int id, cplx v) {
  if (id >= int(vals_.size())) vals_.resize(id + 1);
  vals_[id] = v;
  return *this;
}

cplx Binding::get(int id) const {
  if (!has(id)) throw UnboundVariable("unbound formal scalar '" + sym_name(id) + "'");
  return *vals_[id];
}

Monomial Monomial::operator*(const Monomial& o) const {
  Monomial r;
  r.f.reserve(f.size() + o.f.size());
  size_t i = 0, j = 0;
  while (i < f.size() || j < o.f.size()) {
    if (j == o.f.size() || (i < f.size() && f[i].first < o.f[j].first)) {
      r.f.push_back(f[i++]);
    } else if (i == f.size() || o.f[j].first < f[i].first) {
      r.f.push_back(o.f[j++]);
    } else {
      r.f.emplace_back(f[i].first, f[i].second + o.f[j].second);
      ++i;
      ++j;
    }
  }
  return r;
}

int Monomial::degree() const {
  int d = 0;
  for (auto& [s, p] : f) d += p;
  return d;
}

int Monomial::power_of(int id) const {
  for (auto& [s, p] : f)
    if (s == id) return p;
  return 0;
}

std::string Monomial::str() const {
  std::string out;
  for (auto& [s, p] : f) {
    if (!out.empty()) out += "*";
    out += sym_name(s);
    if (p > 1) out += "^" + std::to_string(p);
  }
  return out;
}

Poly::Poly(const GaussQ& c) {
  if (!c.is_zero()) t_.emplace(Monomial{}, c);
}

Poly Poly::var(int id) {
  Poly p;
  p.t_.emplace(Monomial{{{id, 1}}}, GaussQ(1));
  return p;
}

bool Poly::is_constant() const {
  return t_.empty() || (t_.size() == 1 && t_.begin()->first.f.empty());
}

GaussQ Poly::constant_term() const {
  auto it = t_.find(Monomial{});
  return it == t_.end() ? GaussQ() : it->second;
}

int Poly::degree() const {
  int d = 0;
  for (auto& [m, c] : t_) d = std::max(d, m.degree());
  return d;
}

int Poly::degree_in(int id) const {
  int d = 0;
  for (auto& [m, c] : t_) d = std::max(d, m.power_of(id));
  return d;
}

void Poly::add_term(const Monomial& m, const GaussQ& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = t_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) t_.erase(it);
  }
}

Poly Poly::operator+(const Poly& o) const {
  Poly r = *this;
  r += o;
  return r;
}

Poly& Poly::operator+=(const Poly& o) {
  for (auto& [m, c] : o.t_) add_term(m, c);
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  for (auto& [m, c] : o.t_) add_term(m, -c);
  return *this;
}

Poly Poly::operator-(const Poly& o) const {
  Poly r = *this;
  r -= o;
  return r;
}

Poly Poly::operator-() const {
  Poly r;
  for (auto& [m, c] : t_) r.t_.emplace(m, -c);
  return r;
}

Poly Poly::operator*(const Poly& o) const {
  Poly r;
  for (auto& [m1, c1] : t_)
    for (auto& [m2, c2] : o.t_) r.add_term(m1 * m2, c1 * c2);
  return r;
}

Poly operator*(const GaussQ& c, const Poly& p) { return Poly(c) * p; }

cplx Poly::eval(const Binding& b) const {
  cplx acc = 0;
  for (auto& [m, c] : t_) {
    cplx v = c.value();
    for (auto& [s, p] : m.f) {
      cplx x = b.get(s);
      for (int k = 0; k < p; ++k) v *= x;
    }
    acc += v;
  }
  return acc;
}

Poly Poly::coeff(int id, int k) const {
  Poly r;
  for (auto& [m, c] : t_) {
    if (m.power_of(id) != k) continue;
    Monomial rest;
    for (auto& f : m.f)
      if (f.first != id) rest.f.push_back(f);
    r.add_term(rest, c);
  }
  return r;
}

Poly Poly::subst(const std::map<int, Poly>& sub) const {
  Poly r;
  for (auto& [m, c] : t_) {
    Poly term(c);
    Monomial keep;
    for (auto& [s, p] : m.f) {
      auto it = sub.find(s);
      if (it == sub.end()) {
        keep.f.emplace_back(s, p);
      } else {
        for (int k = 0; k < p; ++k) term = term * it->second;
      }
    }
    Poly kp;
    kp.t_.emplace(keep, GaussQ(1));
    r += term * kp;
  }
  return r;
}

Poly Poly::conj_coeffs() const {
  Poly r;
  for (auto& [m, c] : t_) r.t_.emplace(m, c.conj());
  return r;
}

std::string Poly::str() const {
  if (t_.empty()) return "0";
  std::string out;
  for (auto& [m, c] : t_) {
    if (!out.empty()) out += " + ";
    if (m.f.empty()) {
      out += c.str();
    } else if (c == GaussQ(1)) {
      out += m.str();
    } else {
      out += c.str() + "*" + m.str();
    }
  }
  return out;
}

}  // namespace sl2c
