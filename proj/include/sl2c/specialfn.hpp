#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace sl2c {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
inline constexpr double kPoleRadius = 1e-6;

struct PoleError : std::domain_error {
  using std::domain_error::domain_error;
};

// True if z lies within kPoleRadius of 0, -1, -2, ...
bool near_pole(cplx z);

cplx clgamma(cplx z);
cplx cgamma(cplx z);
cplx digamma(cplx z);

// A propagator index pair (alpha, alpha_bar) with alpha - alpha_bar = m.
struct ZIndex {
  cplx alpha;
  int m = 0;

  cplx alpha_bar() const { return alpha - double(m); }
  static ZIndex from_pair(cplx a, cplx abar, double tol = 1e-9);
  ZIndex operator+(const ZIndex& o) const { return {alpha + o.alpha, m + o.m}; }
  ZIndex operator-(const ZIndex& o) const { return {alpha - o.alpha, m - o.m}; }
  ZIndex operator-() const { return {-alpha, -m}; }
  // c - idx, with c applied to both components
  friend ZIndex operator-(double c, const ZIndex& i) { return {c - i.alpha, -i.m}; }
  friend ZIndex operator+(double c, const ZIndex& i) { return {c + i.alpha, i.m}; }
  friend ZIndex operator-(const ZIndex& i, double c) { return {i.alpha - c, i.m}; }
  // Swapped sectors: (alpha_bar, alpha)
  ZIndex swapped() const { return {alpha_bar(), -m}; }
};

inline double sign_power(int n) { return (n % 2 == 0) ? 1.0 : -1.0; }

// a(alpha) = Gamma(1 - alpha_bar) / Gamma(alpha)
cplx a_of(const ZIndex& idx);
cplx a_of(const std::vector<ZIndex>& idx);

struct IdentityCheck {
  std::string name;
  double residual = 0;
  bool skipped = false;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  double max_residual = 0;
};

IdentityReport check_a_identities(const ZIndex& idx);

// Representation label: s = (1+n_s)/2 + i nu_s, s_bar = (1-n_s)/2 + i nu_s.
struct Spin {
  int two_ns = 0;
  double nu_s = 0;

  double ns() const { return 0.5 * two_ns; }
  cplx s() const { return {0.5 * (1 + ns()), nu_s}; }
  cplx sbar() const { return {0.5 * (1 - ns()), nu_s}; }
};

// Separated variable: x = -i n/2 + nu, x_bar = i n/2 + nu.
struct SepPoint {
  int two_n = 0;
  double nu = 0;

  double n() const { return 0.5 * two_n; }
  cplx x() const { return {nu, -0.5 * n()}; }
  cplx xbar() const { return {nu, 0.5 * n()}; }
};

// n_k integer iff n_s integer.
bool parity_ok(const SepPoint& p, const Spin& s);

}  // namespace sl2c
