#pragma once

// Closed-form sums of coefficient x products of single-valued powers
// [b]^(e, ebar) = b^e conj(b)^ebar of coordinate differences, with optional
// plane waves. Exactly differentiable; evaluated only at the end.

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "sl2c/exec.hpp"
#include "sl2c/poly.hpp"
#include "sl2c/weyl.hpp"

namespace sl2c {

struct SingularPoint : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OutOfClass : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Conjugate-sector renaming of formal scalars: s <-> sbar, x1 <-> xbar1, ...
// The imaginary unit is left alone, so bar(-s - i u) = -sbar - i ubar.
std::string bar_name(const std::string& name);
Poly bar(const Poly& p);

// Holomorphic / anti-holomorphic exponent pair.
struct SymIndex {
  Poly holo, anti;

  SymIndex() = default;
  SymIndex(Poly h, Poly a) : holo(std::move(h)), anti(std::move(a)) {}
  // (h, bar(h)).
  static SymIndex sym(const Poly& h) { return {h, bar(h)}; }
  static SymIndex both(const Poly& c) { return {c, c}; }

  bool is_zero() const { return holo.is_zero() && anti.is_zero(); }
  SymIndex operator+(const SymIndex& o) const { return {holo + o.holo, anti + o.anti}; }
  SymIndex operator-(const SymIndex& o) const { return {holo - o.holo, anti - o.anti}; }
  SymIndex operator-() const { return {-holo, -anti}; }
  bool operator==(const SymIndex& o) const { return holo == o.holo && anti == o.anti; }
  bool operator<(const SymIndex& o) const {
    return holo < o.holo || (holo == o.holo && anti < o.anti);
  }
  // Numeric instantiation; throws std::domain_error unless holo - anti is
  // an integer within 1e-9.
  ZIndex eval(const Binding& b) const;
  std::string str() const;
};

// sign * (v_i - v_j), or sign * v_i when j < 0. Variables are symbol ids.
struct Base {
  int i = -1, j = -1, sign = 1;
  bool operator<(const Base& o) const {
    return std::tie(i, j, sign) < std::tie(o.i, o.j, o.sign);
  }
  bool operator==(const Base& o) const { return i == o.i && j == o.j && sign == o.sign; }
  bool involves(int v) const { return i == v || j == v; }
};

using Momentum = std::pair<Poly, Poly>;  // (p, pbar)

struct PowTerm {
  Poly coeff{1};
  cplx scale{1.0};
  std::map<Base, SymIndex> pw;
  std::map<int, Momentum> waves;      // e^{i(p z + pbar zbar)}
  std::map<int, Momentum> inv_waves;  // e^{i(p/z + pbar/zbar)}, produced by J
  std::map<Momentum, SymIndex> spw;   // scalar powers [p]^c

  // Everything except coeff; terms with equal keys are merged.
  bool same_shape(const PowTerm& o) const {
    return scale == o.scale && pw == o.pw && waves == o.waves && inv_waves == o.inv_waves &&
           spw == o.spw;
  }
  void mul_power(const Base& b, const SymIndex& e);
  std::vector<int> vars() const;
};

class PowExpr {
 public:
  PowExpr() = default;
  PowExpr(const Poly& c);  // NOLINT(google-explicit-constructor)
  static PowExpr power(const std::string& vi, const std::string& vj, const SymIndex& e,
                       int sign = 1);
  static PowExpr power(const std::string& v, const SymIndex& e, int sign = 1);
  static PowExpr wave(const std::string& v, const Poly& p, const Poly& pbar);

  const std::vector<PowTerm>& terms() const { return t_; }
  bool is_zero() const { return t_.empty(); }
  std::vector<int> vars() const;

  PowExpr operator+(const PowExpr& o) const;
  PowExpr operator-(const PowExpr& o) const;
  PowExpr operator-() const;
  PowExpr operator*(const PowExpr& o) const;
  PowExpr& operator+=(const PowExpr& o);
  PowExpr scaled(cplx c) const;
  bool operator==(const PowExpr& o) const;

  // Rename variables (symbol id -> symbol id); merges coinciding bases.
  PowExpr renamed(const std::map<int, int>& m) const;
  // Substitute formal scalars inside coefficients, exponents and momenta.
  PowExpr subst(const std::map<int, Poly>& m) const;
  std::string str() const;

  void add_term(PowTerm t);

 private:
  std::vector<PowTerm> t_;
};

PowExpr diff(const PowExpr& e, const std::string& var, Sector sec = Sector::holo);
PowExpr diff(const PowExpr& e, int var, Sector sec);

// site k of op acts on variable sites[k-1]; both sectors use the same variable.
PowExpr apply_weyl(const WeylElement& op, const PowExpr& e, const std::vector<std::string>& sites);

// [J phi](z) = prod_k [z_k]^(-2s, -2sbar) phi(1/z_1, ..., 1/z_N) on variables
// prefix1..prefixN. Other variables are untouched; a factor coupling a
// J-variable with an untouched one throws OutOfClass.
PowExpr inversion_J(const PowExpr& e, const SymIndex& spin2, int N, const std::string& prefix = "z");

// [i d]^c [z]^b = kappa(c, b) [z]^(b - c).
cplx frac_coefficient(const ZIndex& c, const ZIndex& b);
// [i d_v]^c applied termwise to single-variable powers and plane waves.
PowExpr frac_deriv_on_power(const SymIndex& c, const PowExpr& target, const std::string& var,
                            const Binding& params);

// Numeric form of a PowExpr with all formal scalars bound.
class CompiledExpr {
 public:
  CompiledExpr(const PowExpr& e, const Binding& params);
  const std::vector<int>& vars() const { return vars_; }
  // z[k] is the value of vars()[k].
  cplx operator()(const cplx* z) const;
  cplx operator()(const Binding& pts) const;

 private:
  struct Factor {
    int i, j;
    double sign;
    cplx sum;  // e + ebar
    double m;  // e - ebar (integer)
  };
  struct Wave {
    int v;
    cplx p, pbar;
    bool inverted;
  };
  struct Term {
    cplx c;
    std::vector<Factor> f;
    std::vector<Wave> w;
  };
  std::vector<int> vars_;
  std::vector<Term> terms_;
};

cplx evaluate(const PowExpr& e, const Binding& pts, const Binding& params);

struct SampleOptions {
  double min_sep = 0.1;
  double r_min = 0.2, r_max = 5.0;
};

// max over random admissible points of |l - r| / (|l| + |r| + 1e-300).
double kernel_identity_residual(const PowExpr& lhs, const PowExpr& rhs, const Binding& params,
                                int samples, uint64_t seed, Exec exec = Exec::parallel,
                                const SampleOptions& opt = {});

}  // namespace sl2c
