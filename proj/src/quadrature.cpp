#include "sl2c/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <exception>
#include <memory>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "json.hpp"

namespace sl2c {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
constexpr cplx kI{0, 1};

struct Accum {
  cplx value{0};
  double error = 0;
  long long evals = 0;
  void add(cplx v, double e) {
    value += v;
    error += e;
  }
};

template <class F>
cplx gk(F&& f, double a, double b, double tol, int depth, double& err) {
  double l1 = 0;
  double e = 0;
  cplx v = GK::integrate(f, a, b, unsigned(depth), tol, &e, &l1);
  err += std::abs(e);
  return v;
}

// Runs fn(0..n-1); exceptions thrown inside the parallel region are rethrown.
template <class F>
void for_each_index(int n, Exec exec, F&& fn) {
  if (exec == Exec::serial) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < n; ++k) {
    try {
      fn(k);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

// C-infinity step: 0 for x <= 0, 1 for x >= 1.
double smooth_step(double x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  auto h = [](double y) { return y > 0 ? std::exp(-1 / y) : 0.0; };
  return h(x) / (h(x) + h(1 - x));
}

// [zeta]^E for zeta = r e^{i theta}
cplx power_of(const ZIndex& E, double r, double theta) {
  cplx S = E.alpha + E.alpha_bar();
  return std::exp(S * std::log(r)) * std::polar(1.0, E.m * theta);
}

double factorial(int n) {
  double f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

struct Layout {
  cplx c;
  double R1 = 1, R2 = 1.5;
  std::vector<double> reach;  // outer radius of each patch

  double far_weight(cplx w) const { return smooth_step((std::abs(w - c) - R1) / (R2 - R1)); }
};

Layout make_layout(const Integrand& f) {
  Layout L;
  cplx c = 0;
  for (auto& s : f.sing) c += s.at;
  c /= double(f.sing.size());
  double md = 0;
  for (auto& s : f.sing) md = std::max(md, std::abs(s.at - c));
  L.c = c;
  L.R1 = std::max(3 * md, 1.0);
  L.R2 = 1.5 * L.R1;
  for (auto& s : f.sing) L.reach.push_back(std::abs(s.at - c) + L.R2);
  return L;
}

// Partition weight of patch j times the inner cutoff, and the subtracted counter.
struct PatchEval {
  const Integrand& f;
  const Layout& L;
  size_t j;

  cplx counter(double r, double th) const {
    const Singularity& s = f.sing[j];
    if (s.counter.empty() || r >= s.radius) return 0;
    cplx z = std::polar(r, th), sum = 0;
    for (auto& p : s.counter) {
      cplx poly = 0;
      for (auto& t : p.taylor) poly += t.c * std::pow(z, t.a) * std::pow(std::conj(z), t.b);
      sum += power_of(p.E, r, th) * poly;
    }
    return sum;
  }

  cplx operator()(double r, double th) const {
    cplx w = f.sing[j].at + std::polar(r, th);
    double inner = 1 - L.far_weight(w);
    cplx val = 0;
    if (inner > 0) {
      double den = 1;
      for (size_t l = 0; l < f.sing.size(); ++l)
        if (l != j) den += std::pow(r / std::abs(w - f.sing[l].at), 4);
      double wt = inner / den;
      // points within the evaluation threshold of another singular locus are a null set
      if (wt > 1e-30) try {
          val = wt * f.f(w);
        } catch (const SingularPoint&) {
        }
    }
    return val - counter(r, th);
  }
};

// Analytic integral of the counter over the disk of radius rho.
cplx counter_disk(const Singularity& s) {
  cplx sum = 0;
  for (auto& p : s.counter)
    for (auto& t : p.taylor) {
      if (p.E.m + t.a - t.b != 0) continue;
      cplx k = 2.0 + p.E.alpha + p.E.alpha_bar() + double(t.a + t.b);
      sum += 2 * kPi * t.c * std::exp(k * std::log(s.radius)) / k;
    }
  return sum;
}

double inner_exponent(const Singularity& s) {
  if (s.counter.empty()) return s.power;
  int K = 0;
  for (auto& p : s.counter)
    for (auto& t : p.taylor) K = std::max(K, t.a + t.b);
  return s.power + K + 1;
}

Accum integrate_patch(const Integrand& f, const Layout& L, size_t j, const QuadOptions& opt) {
  const Singularity& s = f.sing[j];
  PatchEval pe{f, L, j};
  double sig = inner_exponent(s);
  double rmax = L.reach[j];
  double t_hi = std::log(rmax);
  double t0 = std::log(opt.tol * 1e-3) / (2 + sig);
  // evaluation is refused within 1e-9 of a singular locus
  t0 = std::max(std::min(t0, t_hi - 5.0), std::log(1e-8));
  Accum acc;
  auto angular = [&](double t) -> cplx {
    double r = std::exp(t);
    auto g = [&](double th) { return pe(r, th); };
    double e = 0;
    cplx v = gk(g, -kPi, kPi, opt.tol * 0.1, 12, e);
    (void)e;
    return v * r * r;
  };
  std::vector<double> cuts{t0};
  if (!s.counter.empty() && s.radius < rmax) cuts.push_back(std::log(s.radius));
  for (auto& o : f.sing) {
    double d = std::abs(o.at - s.at);
    if (d > 0 && d < rmax) cuts.push_back(std::log(d));
  }
  cuts.push_back(t_hi);
  std::sort(cuts.begin(), cuts.end());
  double rerr = 0;
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (cuts[k + 1] - cuts[k] < 1e-12) continue;
    acc.value += gk(angular, cuts[k], cuts[k + 1], opt.tol, opt.gk_depth, rerr);
  }
  // r < r0: I(t) ~ C e^{lam t}; lam carries the imaginary part of the local
  // exponent, so it is read off two samples and checked against 2 + sig.
  cplx a0 = angular(t0), a1 = angular(t0 - 0.5);
  cplx lam = 2 + sig;
  if (std::abs(a0) > 0 && std::abs(a1) > 0) {
    cplx est = 2.0 * std::log(a0 / a1);
    if (std::abs(est.real() - (2 + sig)) < 0.05) lam = est;
  }
  cplx tail = a0 / lam;
  acc.value += tail + counter_disk(s);
  // next order of the small-r expansion is relatively O(r0 / distance)
  acc.error = rerr + std::abs(tail) * std::exp(t0) / s.radius;
  return acc;
}

// Angular trapezoid around the centroid (far region has no singularity).
constexpr int kModes = 64;

Accum integrate_far_plain(const Integrand& f, const Layout& L, const QuadOptions& opt) {
  auto ring = [&](double r, int M) {
    cplx sum = 0;
    for (int k = 0; k < M; ++k) sum += f.f(L.c + std::polar(r, 2 * kPi * k / M));
    return sum * (2 * kPi / M);
  };
  double aerr = 0;
  auto radial = [&](double t) -> cplx {
    double r = std::exp(t);
    cplx w = L.c + r;
    double wt = L.far_weight(w);
    if (wt == 0) return 0;
    cplx full = ring(r, kModes);
    aerr = std::max(aerr, std::abs(full - ring(r, kModes / 2)) * r * r);
    return wt * full * r * r;
  };
  double D = f.decay;
  double t1 = std::log(L.R1), t2 = std::log(L.R2);
  double tmax = std::min(t2 + std::log(opt.tol * 1e-3) / (2 + D), 690.0);
  Accum acc;
  double err = 0;
  acc.value += gk(radial, t1, t2, opt.tol, opt.gk_depth, err);
  acc.value += gk(radial, t2, tmax, opt.tol, opt.gk_depth, err);
  cplx tail = -radial(tmax) / (2 + D);
  acc.value += tail;
  acc.error = err + 0.1 * std::abs(tail) + aerr;
  return acc;
}

Accum integrate_far_wave(const Integrand& f, const Layout& L, const QuadOptions& opt) {
  const cplx p = *f.momentum;
  const double ap = std::abs(p), phi = std::arg(p);
  auto wave = [&](cplx w) { return std::exp(2.0 * kI * (p * w).real()); };
  const cplx base_phase = wave(L.c);
  // r * (angular integral of f) at radius r, through angular modes of f / wave.
  auto ring = [&](double r) -> cplx {
    if (L.far_weight(L.c + r) == 0) return 0;
    std::vector<cplx> g(kModes);
    for (int k = 0; k < kModes; ++k) {
      cplx w = L.c + std::polar(r, 2 * kPi * k / kModes);
      g[k] = f.f(w) * std::conj(wave(w));
    }
    double x = 2 * ap * r;
    cplx sum = 0;
    for (int m = -kModes / 2 + 1; m < kModes / 2; ++m) {
      cplx gm = 0;
      for (int k = 0; k < kModes; ++k) gm += g[k] * std::polar(1.0, -2 * kPi * m * k / kModes);
      gm /= double(kModes);
      int am = std::abs(m);
      double J = std::cyl_bessel_j(double(am), x);
      if (m < 0 && am % 2) J = -J;
      sum += gm * 2.0 * kPi * std::pow(kI, m) * J * std::polar(1.0, -m * phi);
    }
    return base_phase * sum * r * L.far_weight(L.c + r);
  };
  Accum acc;
  double err = 0;
  cplx head = gk(ring, L.R1, L.R2, opt.tol, opt.gk_depth, err);
  const double half = kPi / (2 * ap);
  std::vector<cplx> partial;
  cplx run = head;
  double a = L.R2;
  double werr = 0;
  cplx prev = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k < opt.max_shells; ++k) {
    run += gk(ring, a, a + half, opt.tol * 0.1, 10, err);
    a += half;
    partial.push_back(run);
    if (partial.size() >= 12 && partial.size() % 2 == 0) {
      std::vector<cplx> tailseq(partial.end() - std::min<size_t>(partial.size(), 40), partial.end());
      cplx est = wynn_epsilon(tailseq, &werr);
      if (std::abs(est - prev) < opt.tol * std::max(1.0, std::abs(est))) {
        acc.value = est;
        acc.error = err + std::abs(est - prev) + werr;
        return acc;
      }
      prev = est;
    }
  }
  acc.value = prev;
  acc.error = err + werr + std::abs(partial.back() - partial[partial.size() - 2]);
  return acc;
}

// Stratified Monte Carlo in (t = ln r, theta) for one region.
struct McRegion {
  std::function<cplx(double, double)> h;  // integrand in (r, theta), already weighted
  double t_lo, t_hi;
};

uint64_t mix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Accum mc_region(const McRegion& R, long long samples, uint64_t seed, int region, Exec exec) {
  const int nt = 64, nth = 32, S = nt * nth;
  long long per = std::max<long long>(2, samples / S);
  std::vector<cplx> val(S);
  std::vector<double> var(S);
  double dt = (R.t_hi - R.t_lo) / nt, dth = 2 * kPi / nth;
  auto stratum = [&](int s) {
    std::mt19937_64 rng(mix(seed ^ mix(uint64_t(region) * 1000003ULL + uint64_t(s))));
    std::uniform_real_distribution<double> u(0, 1);
    int it = s / nth, ith = s % nth;
    cplx sum = 0;
    double sq = 0;
    for (long long k = 0; k < per; ++k) {
      double t = R.t_lo + (it + u(rng)) * dt, th = (ith + u(rng)) * dth;
      double r = std::exp(t);
      cplx v = R.h(r, th) * r * r;
      sum += v;
      sq += std::norm(v);
    }
    cplx mean = sum / double(per);
    double vv = std::max(0.0, sq / per - std::norm(mean)) / double(per - 1);
    val[s] = mean * dt * dth;
    var[s] = vv * dt * dt * dth * dth;
  };
  for_each_index(S, exec, stratum);
  Accum acc;
  double v2 = 0;
  for (int s = 0; s < S; ++s) {
    acc.value += val[s];
    v2 += var[s];
  }
  acc.error = 3 * std::sqrt(v2);
  acc.evals = per * S;
  return acc;
}

QuadratureResult integrate_mc(const Integrand& f, const Layout& L, const QuadOptions& opt) {
  if (f.momentum) throw BudgetExceeded("Monte Carlo does not handle plane waves at infinity");
  if (opt.mc_samples > opt.mc_budget) throw BudgetExceeded("Monte Carlo sample budget exceeded");
  int nreg = int(f.sing.size()) + 1;
  long long per = opt.mc_samples / nreg;
  QuadratureResult res;
  res.method = "montecarlo";
  res.seed = opt.seed;
  double e2 = 0;
  for (size_t j = 0; j < f.sing.size(); ++j) {
    PatchEval pe{f, L, j};
    double sig = inner_exponent(f.sing[j]);
    double t0 = std::max(std::log(opt.tol * 1e-3) / (2 + sig), std::log(1e-8));
    McRegion R{[&pe](double r, double th) { return pe(r, th); }, t0, std::log(L.reach[j])};
    Accum a = mc_region(R, per, opt.seed, int(j), opt.exec);
    res.value += a.value + counter_disk(f.sing[j]);
    e2 += a.error * a.error;
    res.samples += a.evals;
  }
  double D = f.decay;
  double tmax = std::min(std::log(L.R2) + std::log(opt.tol * 1e-3) / (2 + D), 690.0);
  McRegion far{[&](double r, double th) {
                 cplx w = L.c + std::polar(r, th);
                 double wt = L.far_weight(w);
                 return wt > 0 ? wt * f.f(w) : cplx(0);
               },
               std::log(L.R1), tmax};
  Accum a = mc_region(far, per, opt.seed, nreg, opt.exec);
  res.value += a.value;
  e2 += a.error * a.error;
  res.samples += a.evals;
  res.error = std::sqrt(e2);
  return res;
}

struct LocalFactor {
  cplx at;
  ZIndex E;
  double sign;  // base = sign * (w - at)
};

}  // namespace

cplx wynn_epsilon(const std::vector<cplx>& s, double* err) {
  const size_t n = s.size();
  if (n == 0) return 0;
  if (n < 3) {
    if (err) *err = n == 2 ? std::abs(s[1] - s[0]) : 0;
    return s.back();
  }
  // e[k] holds column k of the epsilon table; even columns are estimates.
  std::vector<std::vector<cplx>> e(n + 1);
  e[0] = std::vector<cplx>(n + 1, 0);
  e[1] = s;
  for (size_t k = 2; k <= n; ++k) {
    const auto& a = e[k - 1];
    const auto& b = e[k - 2];
    size_t len = a.size() - 1;
    e[k].resize(len);
    for (size_t i = 0; i < len; ++i) {
      cplx d = a[i + 1] - a[i];
      e[k][i] = b[i + 1] + (std::abs(d) > 1e-300 ? 1.0 / d : cplx(1e300));
    }
  }
  // Best estimate: last entry of the highest odd-indexed (even-order) column.
  size_t kbest = (n % 2 == 1) ? n : n - 1;
  cplx est = e[kbest].back();
  if (!std::isfinite(est.real()) || !std::isfinite(est.imag())) est = s.back();
  if (err) {
    cplx other = kbest >= 3 ? e[kbest - 2].back() : s[n - 2];
    *err = std::abs(est - other);
  }
  return est;
}

std::string to_json(const QuadratureResult& r) {
  nlohmann::json j;
  j["value_re"] = r.value.real();
  j["value_im"] = r.value.imag();
  j["error"] = r.error;
  j["method"] = r.method;
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  return j.dump();
}

Integrand make_integrand(const PowExpr& e, const std::string& var, const Binding& points,
                         const Binding& params, const QuadOptions& opt) {
  const int v = sym(var);
  auto ce = std::make_shared<CompiledExpr>(e, params);
  std::vector<cplx> vals(ce->vars().size());
  int slot = -1;
  for (size_t k = 0; k < vals.size(); ++k)
    if (ce->vars()[k] == v) slot = int(k);
  if (slot < 0) throw NonIntegrable("integrand does not depend on " + var + "; the integral diverges");
  for (size_t k = 0; k < vals.size(); ++k)
    if (int(k) != slot) vals[k] = points.get(ce->vars()[k]);
  Integrand out;
  out.f = [ce, vals, slot](cplx w) {
    auto z = vals;
    z[size_t(slot)] = w;
    return (*ce)(z.data());
  };
  auto value_of = [&](int id) { return id < 0 ? cplx(0) : points.get(id); };

  struct Point {
    cplx at;
    double power = 0;
    bool any = false;
  };
  std::vector<Point> pts;
  auto find_point = [&](cplx at) -> Point& {
    for (auto& p : pts)
      if (std::abs(p.at - at) < 1e-12) return p;
    pts.push_back({at});
    return pts.back();
  };
  out.decay = -1e300;
  bool first = true;
  for (const PowTerm& t : e.terms()) {
    if (t.inv_waves.count(v)) throw NonIntegrable("inverted plane wave in " + var);
    std::optional<cplx> mom;
    if (auto it = t.waves.find(v); it != t.waves.end()) {
      cplx p = it->second.first.eval(params), pb = it->second.second.eval(params);
      if (std::abs(pb - std::conj(p)) > 1e-12 * (1 + std::abs(p)))
        throw NonIntegrable("plane wave in " + var + " is not unitary (pbar != conj p)");
      if (std::abs(p) > 0) mom = p;
    }
    if (first)
      out.momentum = mom;
    else if (mom.has_value() != out.momentum.has_value() ||
             (mom && std::abs(*mom - *out.momentum) > 1e-12))
      throw NonIntegrable("terms carry different plane waves in " + var + "; split the sum");
    first = false;
    std::vector<std::pair<cplx, double>> local;
    double decay = 0;
    for (auto& [b, idx] : t.pw) {
      if (!b.involves(v)) continue;
      ZIndex E = idx.eval(params);
      double S = (E.alpha + E.alpha_bar()).real();
      decay += S;
      cplx at = b.i == v ? value_of(b.j) : value_of(b.i);
      bool merged = false;
      for (auto& [a, pw] : local)
        if (std::abs(a - at) < 1e-12) {
          pw += S;
          merged = true;
        }
      if (!merged) local.emplace_back(at, S);
    }
    out.decay = std::max(out.decay, decay);
    for (auto& [a, S] : local) {
      Point& P = find_point(a);
      P.power = P.any ? std::min(P.power, S) : S;
      P.any = true;
    }
  }
  if (e.terms().empty()) out.decay = -1e300;
  for (auto& p : pts) out.sing.push_back({p.at, std::min(p.power, 0.0), 0, {}});
  if (out.sing.empty()) out.sing.push_back({cplx(0), 0, 0, {}});

  // Patch radii.
  for (size_t j = 0; j < out.sing.size(); ++j) {
    double nearest = 1e300;
    for (size_t l = 0; l < out.sing.size(); ++l)
      if (l != j) nearest = std::min(nearest, std::abs(out.sing[l].at - out.sing[j].at));
    out.sing[j].radius = opt.patch_factor * (nearest < 1e300 ? nearest : 1.0);
  }

  // Integrability and finite-part counters.
  for (auto& s : out.sing) {
    if (s.power > -2) continue;
    if (!opt.finite_part || s.power <= -4)
      throw NonIntegrable("singularity of power " + std::to_string(s.power) + " at (" +
                          std::to_string(s.at.real()) + "," + std::to_string(s.at.imag()) +
                          ") in " + var);
    const int K = s.power > -3 ? 0 : 1;
    for (const PowTerm& t : e.terms()) {
      PowTerm rest = t;
      rest.pw.clear();
      ZIndex E{0, 0};
      double phase = 1;
      bool has = false;
      for (auto& [b, idx] : t.pw) {
        bool here = b.involves(v) &&
                    std::abs((b.i == v ? value_of(b.j) : value_of(b.i)) - s.at) < 1e-12;
        if (!here) {
          rest.pw.emplace(b, idx);
          continue;
        }
        ZIndex Ei = idx.eval(params);
        double sg = b.i == v ? b.sign : -b.sign;
        if (sg < 0 && (Ei.m % 2)) phase = -phase;
        E = E + Ei;
        has = true;
      }
      if (!has) continue;
      cplx k0 = 2.0 + E.alpha + E.alpha_bar();
      for (int n = 0; n <= K; ++n)
        if (std::abs(k0 + double(n)) < 1e-9)
          throw NonIntegrable("logarithmic divergence at a singular point in " + var);
      PowExpr R;
      R.add_term(rest);
      CounterPiece cp{E, {}};
      Binding at = points;
      at.set(v, s.at);
      for (int a = 0; a <= K; ++a)
        for (int b = 0; a + b <= K; ++b) {
          PowExpr D = R;
          for (int q = 0; q < a; ++q) D = diff(D, v, Sector::holo);
          for (int q = 0; q < b; ++q) D = diff(D, v, Sector::anti);
          cplx c = D.is_zero() ? cplx(0) : evaluate(D, at, params);
          cp.taylor.push_back({a, b, phase * c / (factorial(a) * factorial(b))});
        }
      s.counter.push_back(std::move(cp));
    }
  }
  if (!out.momentum && out.decay >= -2)
    throw NonIntegrable("integrand decays as |w|^" + std::to_string(out.decay) + " in " + var);
  if (out.momentum && out.decay >= -0.5)
    throw NonIntegrable("oscillatory integrand decays as |w|^" + std::to_string(out.decay) +
                        " in " + var);
  return out;
}

QuadratureResult integrate2d(const Integrand& f, const QuadOptions& opt) {
  Layout L = make_layout(f);
  if (opt.force_montecarlo || int(f.sing.size()) > opt.max_patches) return integrate_mc(f, L, opt);
  const size_t n = f.sing.size();
  std::vector<Accum> parts(n + 1);
  auto run = [&](size_t k) {
    parts[k] = k < n ? integrate_patch(f, L, k, opt)
                     : (f.momentum ? integrate_far_wave(f, L, opt) : integrate_far_plain(f, L, opt));
  };
  for_each_index(int(n) + 1, opt.exec, [&](int k) { run(size_t(k)); });
  QuadratureResult r;
  r.method = "adaptive";
  r.seed = opt.seed;
  for (auto& p : parts) {
    r.value += p.value;
    r.error += p.error;
  }
  if (!std::isfinite(r.value.real()) || !std::isfinite(r.value.imag()))
    throw BudgetExceeded("adaptive quadrature did not converge");
  return r;
}

QuadratureResult integrate2d(const PowExpr& e, const std::string& var, const Binding& points,
                             const Binding& params, const QuadOptions& opt) {
  return integrate2d(make_integrand(e, var, points, params, opt), opt);
}

namespace {

// Power counting for the outer variable of an iterated integral: the worst
// exponent when the outer variable and any subset of inner ones approach a
// point together (or go to infinity together).
void nested_counting(const PowExpr& e, int outer, const std::vector<int>& inner,
                     const Binding& points, const Binding& params, Integrand& out) {
  const int k = int(inner.size());
  auto value_of = [&](int id) { return id < 0 ? cplx(0) : points.get(id); };
  auto is_var = [&](int id) {
    return id == outer || std::find(inner.begin(), inner.end(), id) != inner.end();
  };
  auto internal = [&](int id, unsigned mask) {
    if (id == outer) return true;
    for (int q = 0; q < k; ++q)
      if ((mask >> q & 1u) && inner[size_t(q)] == id) return true;
    return false;
  };
  std::vector<cplx> cands;
  for (const PowTerm& t : e.terms())
    for (auto& [b, idx] : t.pw) {
      for (int id : {b.i, b.j}) {
        bool var = id == outer || std::find(inner.begin(), inner.end(), id) != inner.end();
        if (var) continue;
        cplx at = value_of(id);
        bool dup = false;
        for (auto& c : cands) dup = dup || std::abs(c - at) < 1e-12;
        if (!dup) cands.push_back(at);
      }
    }
  out.decay = -1e300;
  std::vector<double> pw(cands.size(), 0);
  for (const PowTerm& t : e.terms()) {
    std::vector<double> tp(cands.size(), 1e300);
    double worst_decay = -1e300;
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
      double dec = 2.0 * __builtin_popcount(mask);
      std::vector<double> loc(cands.size(), 2.0 * __builtin_popcount(mask));
      for (auto& [b, idx] : t.pw) {
        bool ii = internal(b.i, mask), ij = b.j >= 0 && internal(b.j, mask);
        ZIndex E = idx.eval(params);
        double S = (E.alpha + E.alpha_bar()).real();
        if (ii || ij) dec += S;
        if (ii && ij) {
          for (auto& l : loc) l += S;
        } else if ((ii || ij) && !is_var(ii ? b.j : b.i)) {
          cplx at = value_of(ii ? b.j : b.i);
          for (size_t c = 0; c < cands.size(); ++c)
            if (std::abs(cands[c] - at) < 1e-12) loc[c] += S;
        }
      }
      worst_decay = std::max(worst_decay, dec);
      for (size_t c = 0; c < cands.size(); ++c) tp[c] = std::min(tp[c], loc[c]);
    }
    out.decay = std::max(out.decay, worst_decay);
    for (size_t c = 0; c < cands.size(); ++c) pw[c] = std::min(pw[c], tp[c]);
  }
  out.sing.clear();
  for (size_t c = 0; c < cands.size(); ++c) out.sing.push_back({cands[c], std::min(pw[c], 0.0), 0, {}});
  if (out.sing.empty()) out.sing.push_back({cplx(0), 0, 0, {}});
  for (size_t j = 0; j < out.sing.size(); ++j) {
    double nearest = 1e300;
    for (size_t l = 0; l < out.sing.size(); ++l)
      if (l != j) nearest = std::min(nearest, std::abs(out.sing[l].at - out.sing[j].at));
    out.sing[j].radius = 0.3 * (nearest < 1e300 ? nearest : 1.0);
  }
}

}  // namespace

QuadratureResult integrate_nested(const PowExpr& e, const std::vector<std::string>& vars,
                                  const Binding& points, const Binding& params,
                                  const QuadOptions& opt) {
  if (vars.empty()) throw std::invalid_argument("no integration variables");
  if (vars.size() == 1) return integrate2d(e, vars[0], points, params, opt);
  for (const PowTerm& t : e.terms())
    if (!t.waves.empty() || !t.inv_waves.empty())
      for (auto& v : vars)
        if (t.waves.count(sym(v)) || t.inv_waves.count(sym(v)))
          throw NonIntegrable("plane waves in iterated integrals are not supported");
  const int outer = sym(vars.back());
  std::vector<std::string> inner_names(vars.begin(), vars.end() - 1);
  std::vector<int> inner;
  for (auto& n : inner_names) inner.push_back(sym(n));
  Integrand F;
  nested_counting(e, outer, inner, points, params, F);
  for (auto& s : F.sing)
    if (s.power <= -2) throw NonIntegrable("iterated integral diverges at a singular point");
  if (F.decay >= -2) throw NonIntegrable("iterated integral diverges at infinity");
  QuadOptions in = opt;
  in.tol = opt.tol * 0.1;
  in.exec = Exec::serial;
  F.f = [&, in](cplx w) {
    Binding b = points;
    b.set(outer, w);
    return integrate_nested(e, inner_names, b, params, in).value;
  };
  QuadratureResult r = integrate2d(F, opt);
  return r;
}

QuadratureResult box_inner_product(const std::function<cplx(const cplx*)>& f,
                                   const std::function<cplx(const cplx*)>& g, int nvars, double L,
                                   long long samples, uint64_t seed, Exec exec) {
  const int S = 256;
  long long per = std::max<long long>(2, samples / S);
  std::vector<cplx> val(S);
  std::vector<double> var(S);
  const double vol = std::pow(2 * L, 2 * nvars);
  auto stratum = [&](int s) {
    std::mt19937_64 rng(mix(seed ^ mix(uint64_t(s))));
    std::uniform_real_distribution<double> u(-L, L);
    std::vector<cplx> z(static_cast<size_t>(nvars));
    // stratify the first coordinate only
    double lo = -L + 2 * L * s / S, hi = lo + 2 * L / S;
    std::uniform_real_distribution<double> u0(lo, hi);
    cplx sum = 0;
    double sq = 0;
    for (long long k = 0; k < per; ++k) {
      for (int q = 0; q < nvars; ++q) z[size_t(q)] = {q == 0 ? u0(rng) : u(rng), u(rng)};
      cplx v = std::conj(f(z.data())) * g(z.data());
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) v = 0;
      sum += v;
      sq += std::norm(v);
    }
    cplx mean = sum / double(per);
    val[s] = mean * vol / double(S);
    var[s] = std::max(0.0, sq / per - std::norm(mean)) / double(per - 1) * std::pow(vol / S, 2);
  };
  for_each_index(S, exec, stratum);
  QuadratureResult r;
  r.method = "montecarlo";
  r.seed = seed;
  r.samples = per * S;
  double v2 = 0;
  for (int s = 0; s < S; ++s) {
    r.value += val[s];
    v2 += var[s];
  }
  r.error = 3 * std::sqrt(v2);
  return r;
}

}  // namespace sl2c
