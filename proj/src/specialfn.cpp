#include "sl2c/specialfn.hpp"

#include <cmath>

namespace sl2c {

namespace {

// Lanczos approximation, g = 607/128, 15 terms.
constexpr double kLanczosG = 607.0 / 128.0;
constexpr double kLanczos[15] = {
    0.99999999999999709182,     57.156235665862923517,      -59.597960355475491248,
    14.136097974741747174,      -0.49191381609762019978,    .33994649984811888699e-4,
    .46523628927048575665e-4,   -.98374475304879564677e-4,  .15808870322491248884e-3,
    -.21026444172410488319e-3,  .21743961811521264320e-3,   -.16431810653676389022e-3,
    .84418223983852743293e-4,   -.26190838401581408670e-4,  .36899182659531622704e-5};
constexpr double kLnSqrt2Pi = 0.91893853320467274178032973640562;

// ln Gamma(z) for Re z >= 0.5.
cplx lgamma_right(cplx z) {
  cplx zm1 = z - 1.0;
  cplx ser = kLanczos[0];
  for (int k = 1; k < 15; ++k) ser += kLanczos[k] / (zm1 + double(k));
  cplx t = zm1 + kLanczosG + 0.5;
  return kLnSqrt2Pi + (zm1 + 0.5) * std::log(t) - t + std::log(ser);
}

void require_regular(cplx z, const char* fn) {
  if (near_pole(z)) {
    throw PoleError(std::string(fn) + ": argument (" + std::to_string(z.real()) + ", " +
                    std::to_string(z.imag()) + ") is at a pole");
  }
}

// Bernoulli numbers B_{2k}/(2k) for k = 1..9.
constexpr double kPsiAsym[9] = {1.0 / 12,   -1.0 / 120,  1.0 / 252,    -1.0 / 240,   1.0 / 132,
                                -691.0 / 32760, 1.0 / 12, -3617.0 / 8160, 43867.0 / 14364};

}  // namespace

bool near_pole(cplx z) {
  if (z.real() > 0.5) return false;
  double n = std::round(z.real());
  return std::abs(z - cplx(n, 0)) < kPoleRadius;
}

cplx clgamma(cplx z) {
  require_regular(z, "lgamma");
  if (z.real() >= 0.5) return lgamma_right(z);
  // Reflection; the branch of the log is irrelevant for exp().
  return std::log(kPi / std::sin(kPi * z)) - lgamma_right(1.0 - z);
}

cplx cgamma(cplx z) {
  require_regular(z, "gamma");
  if (z.real() >= 0.5) return std::exp(lgamma_right(z));
  return kPi / (std::sin(kPi * z) * std::exp(lgamma_right(1.0 - z)));
}

cplx digamma(cplx z) {
  require_regular(z, "digamma");
  if (z.real() < 0.5) {
    return digamma(1.0 - z) - kPi * std::cos(kPi * z) / std::sin(kPi * z);
  }
  cplx acc = 0;
  while (std::abs(z) < 12.0 || z.real() < 10.0) {
    acc -= 1.0 / z;
    z += 1.0;
  }
  cplx inv2 = 1.0 / (z * z);
  cplx pw = inv2;
  cplx series = 0;
  for (double c : kPsiAsym) {
    series += c * pw;
    pw *= inv2;
  }
  return acc + std::log(z) - 0.5 / z - series;
}

ZIndex ZIndex::from_pair(cplx a, cplx abar, double tol) {
  cplx d = a - abar;
  double m = std::round(d.real());
  if (std::abs(d - cplx(m, 0)) > tol) {
    throw std::domain_error("index pair difference is not an integer");
  }
  return {a, int(m)};
}

cplx a_of(const ZIndex& idx) { return cgamma(1.0 - idx.alpha_bar()) / cgamma(idx.alpha); }

cplx a_of(const std::vector<ZIndex>& idx) {
  cplx r = 1;
  for (const auto& i : idx) r *= a_of(i);
  return r;
}

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

bool args_regular(std::initializer_list<ZIndex> idx) {
  for (const auto& i : idx) {
    if (near_pole(i.alpha) || near_pole(1.0 - i.alpha_bar())) return false;
  }
  return true;
}

}  // namespace

IdentityReport check_a_identities(const ZIndex& a) {
  IdentityReport rep;
  auto run = [&](const char* name, std::initializer_list<ZIndex> args, auto fn) {
    IdentityCheck c{name, 0, false};
    if (!args_regular(args)) {
      c.skipped = true;
    } else {
      c.residual = fn();
      rep.max_residual = std::max(rep.max_residual, c.residual);
    }
    rep.checks.push_back(c);
  };
  const ZIndex one_minus_abar{1.0 - a.alpha_bar(), a.m};
  const ZIndex one_plus{1.0 + a.alpha, a.m};
  const ZIndex one_minus{1.0 - a.alpha, -a.m};
  const ZIndex bar = a.swapped();
  const double sgn = sign_power(a.m);

  run("a(al)a(1-albar)=1", {a, one_minus_abar},
      [&] { return rel(a_of(a) * a_of(one_minus_abar), 1.0); });
  run("a(1+al)/a(al)=-1/(al albar)", {a, one_plus},
      [&] { return rel(a_of(one_plus) / a_of(a), -1.0 / (a.alpha * a.alpha_bar())); });
  run("a(al)a(1-al)=(-1)^m", {a, one_minus},
      [&] { return rel(a_of(a) * a_of(one_minus), sgn); });
  run("a(al)=(-1)^m a(albar)", {a, bar}, [&] { return rel(a_of(a), sgn * a_of(bar)); });
  return rep;
}

bool parity_ok(const SepPoint& p, const Spin& s) {
  return ((p.two_n - s.two_ns) % 2) == 0;
}

}  // namespace sl2c
