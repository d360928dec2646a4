#include "sl2c/powexpr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <sstream>

namespace sl2c {

std::string bar_name(const std::string& name) {
  size_t k = 0;
  while (k < name.size() && std::isalpha(static_cast<unsigned char>(name[k]))) ++k;
  std::string head = name.substr(0, k), tail = name.substr(k);
  if (head.size() > 3 && head.compare(head.size() - 3, 3, "bar") == 0)
    return head.substr(0, head.size() - 3) + tail;
  return head + "bar" + tail;
}

Poly bar(const Poly& p) {
  std::map<int, Poly> m;
  for (auto& [mono, c] : p.terms())
    for (auto& [id, pow] : mono.f)
      if (!m.count(id)) m.emplace(id, Poly::var(bar_name(sym_name(id))));
  return m.empty() ? p : p.subst(m);
}

ZIndex SymIndex::eval(const Binding& b) const {
  return ZIndex::from_pair(holo.eval(b), anti.eval(b));
}

std::string SymIndex::str() const { return "(" + holo.str() + ", " + anti.str() + ")"; }

namespace {

bool shape_less(const PowTerm& a, const PowTerm& b) {
  auto ka = std::make_pair(a.scale.real(), a.scale.imag());
  auto kb = std::make_pair(b.scale.real(), b.scale.imag());
  if (ka != kb) return ka < kb;
  if (a.pw != b.pw) return a.pw < b.pw;
  if (a.waves != b.waves) return a.waves < b.waves;
  if (a.inv_waves != b.inv_waves) return a.inv_waves < b.inv_waves;
  return a.spw < b.spw;
}

void add_momentum(std::map<int, Momentum>& m, int v, const Momentum& p) {
  auto [it, inserted] = m.try_emplace(v, p);
  if (!inserted) {
    it->second.first += p.first;
    it->second.second += p.second;
    if (it->second.first.is_zero() && it->second.second.is_zero()) m.erase(it);
  }
}

PowTerm multiply(const PowTerm& a, const PowTerm& b) {
  PowTerm r = a;
  r.coeff = a.coeff * b.coeff;
  r.scale = a.scale * b.scale;
  for (auto& [base, e] : b.pw) r.mul_power(base, e);
  for (auto& [v, p] : b.waves) add_momentum(r.waves, v, p);
  for (auto& [v, p] : b.inv_waves) add_momentum(r.inv_waves, v, p);
  for (auto& [p, e] : b.spw) {
    auto [it, inserted] = r.spw.try_emplace(p, e);
    if (!inserted) {
      it->second = it->second + e;
      if (it->second.is_zero()) r.spw.erase(it);
    }
  }
  return r;
}

int var_id(const std::string& v) { return sym(v); }

}  // namespace

void PowTerm::mul_power(const Base& b, const SymIndex& e) {
  if (e.is_zero()) return;
  auto [it, inserted] = pw.try_emplace(b, e);
  if (!inserted) {
    it->second = it->second + e;
    if (it->second.is_zero()) pw.erase(it);
  }
}

std::vector<int> PowTerm::vars() const {
  std::set<int> s;
  for (auto& [b, e] : pw) {
    s.insert(b.i);
    if (b.j >= 0) s.insert(b.j);
  }
  for (auto& [v, p] : waves) s.insert(v);
  for (auto& [v, p] : inv_waves) s.insert(v);
  return {s.begin(), s.end()};
}

PowExpr::PowExpr(const Poly& c) {
  if (!c.is_zero()) {
    PowTerm t;
    t.coeff = c;
    t_.push_back(std::move(t));
  }
}

PowExpr PowExpr::power(const std::string& vi, const std::string& vj, const SymIndex& e, int sign) {
  PowTerm t;
  int i = var_id(vi), j = var_id(vj);
  if (i == j) throw std::invalid_argument("power of a vanishing difference");
  t.mul_power(Base{i, j, sign}, e);
  PowExpr r;
  r.add_term(std::move(t));
  return r;
}

PowExpr PowExpr::power(const std::string& v, const SymIndex& e, int sign) {
  PowTerm t;
  t.mul_power(Base{var_id(v), -1, sign}, e);
  PowExpr r;
  r.add_term(std::move(t));
  return r;
}

PowExpr PowExpr::wave(const std::string& v, const Poly& p, const Poly& pbar) {
  PowTerm t;
  add_momentum(t.waves, var_id(v), {p, pbar});
  PowExpr r;
  r.add_term(std::move(t));
  return r;
}

void PowExpr::add_term(PowTerm t) {
  if (t.coeff.is_zero() || t.scale == cplx(0)) return;
  auto it = std::lower_bound(t_.begin(), t_.end(), t, shape_less);
  if (it != t_.end() && it->same_shape(t)) {
    it->coeff += t.coeff;
    if (it->coeff.is_zero()) t_.erase(it);
  } else {
    t_.insert(it, std::move(t));
  }
}

std::vector<int> PowExpr::vars() const {
  std::set<int> s;
  for (auto& t : t_)
    for (int v : t.vars()) s.insert(v);
  return {s.begin(), s.end()};
}

PowExpr& PowExpr::operator+=(const PowExpr& o) {
  for (auto& t : o.t_) add_term(t);
  return *this;
}

PowExpr PowExpr::operator+(const PowExpr& o) const {
  PowExpr r = *this;
  r += o;
  return r;
}

PowExpr PowExpr::operator-() const {
  PowExpr r = *this;
  for (auto& t : r.t_) t.coeff = -t.coeff;
  return r;
}

PowExpr PowExpr::operator-(const PowExpr& o) const { return *this + (-o); }

PowExpr PowExpr::operator*(const PowExpr& o) const {
  PowExpr r;
  for (auto& a : t_)
    for (auto& b : o.t_) r.add_term(multiply(a, b));
  return r;
}

PowExpr PowExpr::scaled(cplx c) const {
  PowExpr r;
  for (auto t : t_) {
    t.scale *= c;
    r.add_term(std::move(t));
  }
  return r;
}

bool PowExpr::operator==(const PowExpr& o) const {
  if (t_.size() != o.t_.size()) return false;
  for (size_t k = 0; k < t_.size(); ++k)
    if (!t_[k].same_shape(o.t_[k]) || t_[k].coeff != o.t_[k].coeff) return false;
  return true;
}

PowExpr PowExpr::renamed(const std::map<int, int>& m) const {
  auto rn = [&](int v) {
    auto it = m.find(v);
    return it == m.end() ? v : it->second;
  };
  PowExpr r;
  for (auto& t : t_) {
    PowTerm n;
    n.coeff = t.coeff;
    n.scale = t.scale;
    n.spw = t.spw;
    for (auto& [b, e] : t.pw) {
      Base nb{rn(b.i), b.j < 0 ? -1 : rn(b.j), b.sign};
      if (nb.i == nb.j) throw SingularPoint("renaming collapses a difference to zero");
      n.mul_power(nb, e);
    }
    for (auto& [v, p] : t.waves) add_momentum(n.waves, rn(v), p);
    for (auto& [v, p] : t.inv_waves) add_momentum(n.inv_waves, rn(v), p);
    r.add_term(std::move(n));
  }
  return r;
}

PowExpr PowExpr::subst(const std::map<int, Poly>& m) const {
  PowExpr r;
  for (auto& t : t_) {
    PowTerm n;
    n.coeff = t.coeff.subst(m);
    n.scale = t.scale;
    for (auto& [b, e] : t.pw) n.mul_power(b, {e.holo.subst(m), e.anti.subst(m)});
    for (auto& [v, p] : t.waves) add_momentum(n.waves, v, {p.first.subst(m), p.second.subst(m)});
    for (auto& [v, p] : t.inv_waves)
      add_momentum(n.inv_waves, v, {p.first.subst(m), p.second.subst(m)});
    for (auto& [p, e] : t.spw) {
      PowTerm s;
      s.spw.emplace(Momentum{p.first.subst(m), p.second.subst(m)},
                    SymIndex{e.holo.subst(m), e.anti.subst(m)});
      n = multiply(n, s);
    }
    r.add_term(std::move(n));
  }
  return r;
}

std::string PowExpr::str() const {
  if (t_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto& t : t_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << t.coeff.str() << ")";
    if (t.scale != cplx(1)) os << "*" << t.scale;
    for (auto& [b, e] : t.pw) {
      os << "*[" << (b.sign < 0 ? "-" : "") << sym_name(b.i);
      if (b.j >= 0) os << "-" << sym_name(b.j);
      os << "]^" << e.str();
    }
    for (auto& [v, p] : t.waves)
      os << "*exp(i(" << p.first.str() << ")" << sym_name(v) << "+c.c.)";
    for (auto& [v, p] : t.inv_waves)
      os << "*exp(i(" << p.first.str() << ")/" << sym_name(v) << "+c.c.)";
    for (auto& [p, e] : t.spw) os << "*[" << p.first.str() << "]^" << e.str();
  }
  return os.str();
}

PowExpr diff(const PowExpr& e, const std::string& var, Sector sec) {
  return diff(e, var_id(var), sec);
}

PowExpr diff(const PowExpr& e, int v, Sector sec) {
  const bool holo = sec == Sector::holo;
  PowExpr r;
  for (auto& t : e.terms()) {
    for (auto& [b, ex] : t.pw) {
      if (!b.involves(v)) continue;
      const Poly& d = holo ? ex.holo : ex.anti;
      if (d.is_zero()) continue;
      PowTerm n = t;
      int orient = (b.i == v ? 1 : -1) * b.sign;
      n.coeff = n.coeff * d * Poly(orient);
      n.mul_power(b, holo ? SymIndex{Poly(-1), Poly()} : SymIndex{Poly(), Poly(-1)});
      r.add_term(std::move(n));
    }
    if (auto it = t.waves.find(v); it != t.waves.end()) {
      PowTerm n = t;
      n.coeff = n.coeff * Poly::I() * (holo ? it->second.first : it->second.second);
      r.add_term(std::move(n));
    }
    if (auto it = t.inv_waves.find(v); it != t.inv_waves.end()) {
      // d/dz e^{ip/z} = -i p z^{-2} e^{ip/z}
      PowTerm n = t;
      n.coeff = n.coeff * Poly(-1) * Poly::I() * (holo ? it->second.first : it->second.second);
      n.mul_power(Base{v, -1, 1}, holo ? SymIndex{Poly(-2), Poly()} : SymIndex{Poly(), Poly(-2)});
      r.add_term(std::move(n));
    }
  }
  return r;
}

PowExpr apply_weyl(const WeylElement& op, const PowExpr& e, const std::vector<std::string>& sites) {
  using DVec = std::array<uint8_t, WeylMono::kSlots>;
  std::map<DVec, PowExpr> memo;
  memo.emplace(DVec{}, e);
  auto slot_var = [&](int slot) {
    size_t site = size_t(slot % kMaxSites);
    if (site >= sites.size()) throw std::out_of_range("Weyl site has no variable mapping");
    return var_id(sites[site]);
  };
  auto slot_sec = [](int slot) { return slot < kMaxSites ? Sector::holo : Sector::anti; };
  // Derivatives are built incrementally: peel one unit off the first nonzero slot.
  std::function<const PowExpr&(const DVec&)> derived = [&](const DVec& dv) -> const PowExpr& {
    if (auto it = memo.find(dv); it != memo.end()) return it->second;
    DVec prev = dv;
    int slot = 0;
    while (prev[size_t(slot)] == 0) ++slot;
    --prev[size_t(slot)];
    PowExpr d = diff(derived(prev), slot_var(slot), slot_sec(slot));
    return memo.emplace(dv, std::move(d)).first->second;
  };
  PowExpr r;
  for (auto& [m, c] : op.terms()) {
    DVec dv{};
    for (int v = 0; v < WeylMono::kSlots; ++v) dv[size_t(v)] = uint8_t(m.ddeg(v));
    PowExpr cur = derived(dv);
    PowTerm mult;
    mult.coeff = c;
    for (int v = 0; v < WeylMono::kSlots; ++v) {
      int a = m.zdeg(v);
      if (!a) continue;
      mult.mul_power(Base{slot_var(v), -1, 1}, slot_sec(v) == Sector::holo
                                                   ? SymIndex{Poly(a), Poly()}
                                                   : SymIndex{Poly(), Poly(a)});
    }
    PowExpr me;
    me.add_term(mult);
    r += me * cur;
  }
  return r;
}

PowExpr inversion_J(const PowExpr& e, const SymIndex& spin, int N, const std::string& prefix) {
  std::set<int> jv;
  for (int k = 1; k <= N; ++k) jv.insert(var_id(prefix + std::to_string(k)));
  PowExpr r;
  for (auto& t : e.terms()) {
    PowTerm n;
    n.coeff = t.coeff;
    n.scale = t.scale;
    n.spw = t.spw;
    for (auto& [b, ex] : t.pw) {
      bool ii = jv.count(b.i) > 0, jj = b.j >= 0 && jv.count(b.j) > 0;
      if (b.j < 0) {
        n.mul_power(b, ii ? -ex : ex);
      } else if (ii && jj) {
        // s (1/zi - 1/zj) = -s (zi - zj) / (zi zj)
        n.mul_power(Base{b.i, b.j, -b.sign}, ex);
        n.mul_power(Base{b.i, -1, 1}, -ex);
        n.mul_power(Base{b.j, -1, 1}, -ex);
      } else if (!ii && !jj) {
        n.mul_power(b, ex);
      } else {
        throw OutOfClass("inversion couples an inverted and a fixed variable");
      }
    }
    for (auto& [v, p] : t.waves) add_momentum(jv.count(v) ? n.inv_waves : n.waves, v, p);
    for (auto& [v, p] : t.inv_waves) add_momentum(jv.count(v) ? n.waves : n.inv_waves, v, p);
    for (int v : jv) n.mul_power(Base{v, -1, 1}, SymIndex{Poly(-2) * spin.holo, Poly(-2) * spin.anti});
    r.add_term(std::move(n));
  }
  return r;
}

namespace {

cplx i_power(int m) {
  static const cplx tab[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return tab[((m % 4) + 4) % 4];
}

}  // namespace

cplx frac_coefficient(const ZIndex& c, const ZIndex& b) {
  // From the Fourier pair: [i d]^c acts as [-p]^c on e^{i(pz + pbar zbar)}.
  return sign_power(b.m - c.m) * i_power(-c.m) * a_of(-b) * a_of(1.0 + b - c);
}

PowExpr frac_deriv_on_power(const SymIndex& c, const PowExpr& target, const std::string& var,
                            const Binding& params) {
  if (c.is_zero()) return target;
  int v = var_id(var);
  ZIndex zc = c.eval(params);
  PowExpr r;
  for (auto& t : target.terms()) {
    for (int w : t.vars())
      if (w != v) throw OutOfClass("fractional derivative target depends on another variable");
    if (!t.inv_waves.empty()) throw OutOfClass("fractional derivative of an inverted wave");
    if (!t.waves.empty() && !t.pw.empty())
      throw OutOfClass("fractional derivative of power times wave");
    PowTerm n = t;
    if (!t.waves.empty()) {
      const Momentum& p = t.waves.begin()->second;
      PowTerm s;
      s.spw.emplace(Momentum{-p.first, -p.second}, c);
      n = multiply(n, s);
    } else if (t.pw.empty()) {
      continue;  // [i d]^c 1 = 0 for c != 0
    } else {
      auto [b, ex] = *t.pw.begin();
      if (b.sign != 1 || b.j >= 0) throw OutOfClass("fractional derivative needs a bare [z]^b");
      n.scale *= frac_coefficient(zc, ex.eval(params));
      n.mul_power(b, -c);
    }
    r.add_term(std::move(n));
  }
  return r;
}

CompiledExpr::CompiledExpr(const PowExpr& e, const Binding& params) {
  vars_ = e.vars();
  auto pos = [&](int v) {
    return int(std::lower_bound(vars_.begin(), vars_.end(), v) - vars_.begin());
  };
  for (auto& t : e.terms()) {
    Term ct;
    ct.c = t.coeff.eval(params) * t.scale;
    for (auto& [p, ex] : t.spw) {
      cplx P = p.first.eval(params);
      ZIndex z = ex.eval(params);
      cplx sum = z.alpha + z.alpha_bar();
      if (std::abs(P) < 1e-300) throw SingularPoint("scalar power of zero momentum");
      ct.c *= std::exp(sum * std::log(std::abs(P))) * std::polar(1.0, z.m * std::arg(P));
    }
    for (auto& [b, ex] : t.pw) {
      ZIndex z = ex.eval(params);
      ct.f.push_back({pos(b.i), b.j < 0 ? -1 : pos(b.j), double(b.sign), z.alpha + z.alpha_bar(),
                      double(z.m)});
    }
    for (auto& [v, p] : t.waves) ct.w.push_back({pos(v), p.first.eval(params), p.second.eval(params), false});
    for (auto& [v, p] : t.inv_waves)
      ct.w.push_back({pos(v), p.first.eval(params), p.second.eval(params), true});
    terms_.push_back(std::move(ct));
  }
}

cplx CompiledExpr::operator()(const cplx* z) const {
  const cplx I(0, 1);
  cplx acc = 0;
  for (auto& t : terms_) {
    cplx v = t.c;
    for (auto& f : t.f) {
      cplx b = f.sign * (f.j < 0 ? z[f.i] : z[f.i] - z[f.j]);
      double r = std::abs(b);
      if (r < 1e-9) throw SingularPoint("factor evaluated on its singular locus");
      double th = std::arg(b);
      v *= std::exp(f.sum * std::log(r)) * cplx(std::cos(f.m * th), std::sin(f.m * th));
    }
    for (auto& w : t.w) {
      cplx x = z[w.v];
      if (w.inverted) {
        if (std::abs(x) < 1e-9) throw SingularPoint("inverted wave at the origin");
        x = 1.0 / x;
      }
      v *= std::exp(I * (w.p * x + w.pbar * std::conj(x)));
    }
    acc += v;
  }
  return acc;
}

cplx CompiledExpr::operator()(const Binding& pts) const {
  std::vector<cplx> z(vars_.size());
  for (size_t k = 0; k < vars_.size(); ++k) z[k] = pts.get(vars_[k]);
  return (*this)(z.data());
}

cplx evaluate(const PowExpr& e, const Binding& pts, const Binding& params) {
  return CompiledExpr(e, params)(pts);
}

double kernel_identity_residual(const PowExpr& lhs, const PowExpr& rhs, const Binding& params,
                                int samples, uint64_t seed, Exec exec, const SampleOptions& opt) {
  CompiledExpr L(lhs, params), R(rhs, params);
  std::set<int> vs(L.vars().begin(), L.vars().end());
  vs.insert(R.vars().begin(), R.vars().end());
  std::vector<int> all(vs.begin(), vs.end());
  const size_t nv = all.size();
  auto index_of = [&](const std::vector<int>& sub) {
    std::vector<size_t> ix;
    for (int v : sub) ix.push_back(size_t(std::lower_bound(all.begin(), all.end(), v) - all.begin()));
    return ix;
  };
  const auto lix = index_of(L.vars()), rix = index_of(R.vars());

  constexpr int kRetries = 10;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ur(opt.r_min, opt.r_max), ut(-kPi, kPi);
  std::vector<cplx> pts(size_t(samples) * kRetries * nv);
  for (size_t c = 0; c < size_t(samples) * kRetries; ++c) {
    cplx* p = &pts[c * nv];
    for (;;) {
      for (size_t k = 0; k < nv; ++k) p[k] = std::polar(ur(rng), ut(rng));
      bool ok = true;
      for (size_t a = 0; a < nv && ok; ++a)
        for (size_t b = a + 1; b < nv && ok; ++b) ok = std::abs(p[a] - p[b]) >= opt.min_sep;
      if (ok) break;
    }
  }

  std::vector<double> res(size_t(samples), 0.0);
  std::vector<int> failed(size_t(samples), 0);
  auto one = [&](int s) {
    std::vector<cplx> zl(lix.size()), zr(rix.size());
    for (int k = 0; k < kRetries; ++k) {
      const cplx* p = &pts[(size_t(s) * kRetries + size_t(k)) * nv];
      for (size_t q = 0; q < lix.size(); ++q) zl[q] = p[lix[q]];
      for (size_t q = 0; q < rix.size(); ++q) zr[q] = p[rix[q]];
      try {
        cplx l = L(zl.data()), r = R(zr.data());
        res[size_t(s)] = std::abs(l - r) / (std::abs(l) + std::abs(r) + 1e-300);
        return;
      } catch (const SingularPoint&) {
      }
    }
    failed[size_t(s)] = 1;
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int s = 0; s < samples; ++s) one(s);
  } else {
    for (int s = 0; s < samples; ++s) one(s);
  }
  double mx = 0;
  for (int s = 0; s < samples; ++s) {
    if (failed[size_t(s)]) throw SingularPoint("no admissible sample point after retries");
    mx = std::max(mx, res[size_t(s)]);
  }
  return mx;
}

}  // namespace sl2c
