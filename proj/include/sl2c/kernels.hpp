#pragma once

// Closed-form kernels of the layer operators and Baxter operators, and the
// pointwise identities they satisfy under the monodromy-matrix entries.

#include <string>
#include <vector>

#include "sl2c/powexpr.hpp"
#include "sl2c/weyl.hpp"

namespace sl2c {

enum class Family { A, B, C, D };

char family_char(Family f);
Family family_from_char(char c);

// prefix1 .. prefixN
std::vector<std::string> var_names(const std::string& prefix, int n);

// A -> T(0,0), B -> T(0,1), C -> T(1,0), D -> T(1,1). In the anti sector the
// spin is sbar and u is the anti-holomorphic spectral parameter.
WeylElement monodromy_entry(Family f, int N, const Poly& spin, const Poly& u, Sector sec);

// Layer kernel Lambda_N(z|w) without the r_N normalization:
//   prod_{k<N} [z_k - z_{k+1}]^{-gamma} [w_k - z_k]^{-alpha} [w_k - z_{k+1}]^{-beta}
// alpha = 1 - s - i x, beta = 1 - s + i x, gamma = 2s - 1. Family A multiplies
// by [z_N]^{i x - s}. Only families A and B have layer kernels.
PowExpr lambda_kernel(Family f, int N, const Poly& x);

// Baxter-operator kernels Q_S(u, ubar)(z|w) with holomorphic exponents built
// from u and anti-holomorphic ones from ubar.
PowExpr baxter_kernel(Family f, int N, const Poly& u, const Poly& ubar);

// Formal scalars used by the checks.
struct KernelSymbols {
  Poly s = Poly::var("s"), sbar = Poly::var("sbar");
  Poly u = Poly::var("u"), ubar = Poly::var("ubar");
  Poly x = Poly::var("x"), xbar = Poly::var("xbar");
};

// Default generic binding: n_s = 0, nu_s = 0.3, u = ubar = 0.17 + 0.05i,
// x from (n, nu) = (1, 0.4).
Binding default_kernel_binding(const Spin& spin = {0, 0.3}, cplx u = {0.17, 0.05},
                               const SepPoint& x = {2, 0.4});

struct IdentityResidual {
  std::string name;
  double residual = 0;
};

// X_N^{(z)} K = (u - x) [X_{N-1}]^{T,(w)} K for the layer kernel, X = A or B.
IdentityResidual intertwining_check(Family f, int N, Sector sec, const Binding& params,
                                    int samples, uint64_t seed, Exec exec = Exec::parallel);

// X_N(u) Q_S(u) = (u + sigma i s)^N Q_T(u + sigma i) on the z variables, with
// sigma = -1 for A and +1 otherwise. rhs selects the right-hand kernel family
// (equal to f except for the C-family ambiguity).
IdentityResidual baxter_check(Family f, Family rhs, int N, Sector sec, const Binding& params,
                              int samples, uint64_t seed, Exec exec = Exec::parallel);

// Behaviour of Q_S at u = sign * i(1 - s) (ubar likewise) in the limit eps -> 0:
// factors whose exponent becomes exactly (-1, -1) turn into delta functions
// through [z]^{-1+i eps} -> (pi / i eps) delta(z).
struct SpecialPointReport {
  int sign = 0;
  int n_delta = 0;
  bool identity = false;          // every delta sets w_k = z_k and the rest is 1
  std::string pairing;            // e.g. "w1=z1,w2=z2" or "z1=0,w1=z2"
  double remainder_deviation = 0; // max |rest - 1| at random points
};
SpecialPointReport special_point(Family f, int N, int sign, const Binding& params, uint64_t seed);

}  // namespace sl2c
