#pragma once

// Singular two-dimensional integrals over the complex plane.
//
// The plane is split by a smooth partition of unity: one polar patch per
// singular point (log-radial variable, angle integrated first) and a far
// region around the centroid. Plane waves in the far region are handled by
// expanding the non-oscillatory factor in angular modes, integrating each
// mode against a Bessel function, and summing half-period radial shells with
// Wynn's epsilon acceleration.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sl2c/exec.hpp"
#include "sl2c/powexpr.hpp"

namespace sl2c {

struct NonIntegrable : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Leading behaviour [w - at]^E sum_ab c_ab (w - at)^a conj(w - at)^b near a
// singular point, used to take a finite part when Re(E + Ebar) <= -2.
struct TaylorCoef {
  int a = 0, b = 0;
  cplx c;
};
struct CounterPiece {
  ZIndex E;
  std::vector<TaylorCoef> taylor;
};

struct Singularity {
  cplx at;
  double power = 0;   // min over terms of Re(E + Ebar)
  double radius = 0;  // patch radius
  std::vector<CounterPiece> counter;  // non-empty only for finite-part points
};

struct Integrand {
  std::function<cplx(cplx)> f;  // must be thread-safe
  std::vector<Singularity> sing;
  double decay = 0;  // |f| ~ |w|^decay at infinity
  std::optional<cplx> momentum;  // common plane wave e^{i(p w + conj(p) conj(w))}
};

struct QuadOptions {
  double tol = 1e-7;
  uint64_t seed = 42;
  Exec exec = Exec::parallel;
  bool finite_part = false;      // allow -4 < Re(E + Ebar) <= -2 via Hadamard finite part
  double patch_factor = 0.3;     // patch radius / distance to nearest other singularity
  int max_patches = 8;           // more singular points -> Monte Carlo
  bool force_montecarlo = false;
  long long mc_samples = 4'000'000;
  long long mc_budget = 20'000'000;
  int max_shells = 600;          // radial half-period shells for plane waves
  int gk_depth = 18;
};

struct QuadratureResult {
  cplx value;
  double error = 0;
  std::string method;  // "adaptive" | "montecarlo"
  long long samples = 0;
  uint64_t seed = 0;
};

std::string to_json(const QuadratureResult& r);

// Integrand for integration over `var`; other variables come from `points`.
// Classifies integrability and throws NonIntegrable with a reason.
Integrand make_integrand(const PowExpr& e, const std::string& var, const Binding& points,
                         const Binding& params, const QuadOptions& opt = {});

QuadratureResult integrate2d(const Integrand& f, const QuadOptions& opt = {});
QuadratureResult integrate2d(const PowExpr& e, const std::string& var, const Binding& points,
                             const Binding& params, const QuadOptions& opt = {});

// Iterated integration; vars[0] is innermost. Plane waves are supported for a
// single integration variable only.
QuadratureResult integrate_nested(const PowExpr& e, const std::vector<std::string>& vars,
                                  const Binding& points, const Binding& params,
                                  const QuadOptions& opt = {});

// Stratified Monte Carlo over the box [-L, L]^2 per variable of
// conj(f) g (the regularized inner product used for smoke tests).
QuadratureResult box_inner_product(const std::function<cplx(const cplx*)>& f,
                                   const std::function<cplx(const cplx*)>& g, int nvars, double L,
                                   long long samples, uint64_t seed, Exec exec = Exec::parallel);

// Wynn epsilon extrapolation of a sequence of partial sums.
cplx wynn_epsilon(const std::vector<cplx>& s, double* err = nullptr);

}  // namespace sl2c
