#pragma once

// Two-dimensional Feynman diagrams with exact coefficient tracking.
//
// An edge from `tail` to `head` with index a stands for [head - tail]^(-a).
// Internal vertices are integrated over the plane; the Anchor is the fixed
// point 0. Vertices may carry a plane wave e^{i(p v + pbar vbar)}.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sl2c/kernels.hpp"
#include "sl2c/powexpr.hpp"
#include "sl2c/quadrature.hpp"

namespace sl2c {

struct PreconditionFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StepFailed : std::runtime_error {
  int step;
  StepFailed(int i, const std::string& why)
      : std::runtime_error("step " + std::to_string(i) + ": " + why), step(i) {}
};

// ---------------------------------------------------------------------------
// Coefficients

struct Atom {
  enum class Kind { Pi, I, Sign, A, Linear, Delta, Numeric };
  Kind kind = Kind::Numeric;
  int power = 1;      // Pi: exponent; A: multiplicity (may be negative)
  Poly expo;          // I: i^expo; Sign: (-1)^expo
  SymIndex idx;       // A: a(idx); Linear: exponent
  Poly base, base_bar;// Linear: base^idx.holo * base_bar^idx.anti
  std::string d1, d2; // Delta: point labels, or separated-variable names
  bool spectral = false;
  cplx num{1.0};      // Numeric

  bool operator==(const Atom& o) const;
};

Atom pi_power(int k);
Atom i_power(const Poly& k);
Atom sign_power(const Poly& k);
// (-1)^(idx.holo - idx.anti)
Atom sign_of(const SymIndex& idx);
Atom a_factor(const SymIndex& idx, int power = 1);
// [base]^exponent with anti-holomorphic base bar(base)
Atom linear_factor(const Poly& base, const SymIndex& exponent);
Atom point_delta(const std::string& a, const std::string& b);
// delta_{nn'} delta(nu - nu') between separated variables x and y
Atom spectral_delta(const std::string& x, const std::string& y);
Atom numeric(cplx c);

// Evaluation points for deciding the parity of symbolic sign exponents:
// every sign whose exponent is the same even (odd) integer at all of them is
// replaced by +1 (-1).
using ParitySamples = std::vector<Binding>;

class CoefficientProduct {
 public:
  CoefficientProduct() = default;
  CoefficientProduct(std::initializer_list<Atom> a) : atoms_(a) {}

  const std::vector<Atom>& atoms() const { return atoms_; }
  CoefficientProduct& operator*=(const Atom& a);
  CoefficientProduct& operator*=(const CoefficientProduct& o);
  CoefficientProduct operator*(const CoefficientProduct& o) const;
  CoefficientProduct inverse() const;  // deltas are not invertible

  // Merges like atoms and applies
  //   a(x) a(1 - xbar) = 1,   a(x) a(1 - x) = (-1)^(x - xbar),
  //   a(x) = (-1)^(x - xbar) a(xbar),   a(x + 1) = -a(x) / (x xbar),
  // and evaluates atoms whose arguments are constant.
  CoefficientProduct simplified(const ParitySamples* parity = nullptr) const;
  // Substitute formal scalars in every non-delta atom.
  CoefficientProduct subst(const std::map<int, Poly>& m) const;
  // Rename vertex labels inside point deltas.
  CoefficientProduct relabeled(const std::map<std::string, std::string>& m) const;

  // Product of all non-delta atoms.
  cplx value(const Binding& b) const;
  std::vector<Atom> deltas() const;
  std::string str() const;

 private:
  std::vector<Atom> atoms_;
};

// Complex conjugation of formal scalars on the principal series:
// s* = 1 - sbar, sbar* = 1 - s, and every other name v* = bar(v).
Poly physical_conj(const Poly& p);
CoefficientProduct physical_conj(const CoefficientProduct& c);

// ---------------------------------------------------------------------------
// Diagrams

enum class VertexKind { External, Internal, Anchor };

struct Vertex {
  VertexKind kind = VertexKind::External;
  std::string label;
  std::optional<Poly> pos;  // symbolic position (momentum-space points)
};

struct Edge {
  int tail = -1, head = -1;
  SymIndex index;
};

struct WaveDeco {
  int vertex = -1;
  Poly p, pbar;
  bool inverted = false;  // e^{i(p / v + pbar / vbar)}
};

class Diagram {
 public:
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  std::vector<WaveDeco> waves;
  CoefficientProduct coeff;

  int find(const std::string& label) const;  // -1 if absent
  int vertex(const std::string& label, VertexKind kind = VertexKind::External);
  int anchor();
  void add_edge(const std::string& tail, const std::string& head, const SymIndex& index);
  void add_wave(const std::string& v, const Poly& p, const Poly& pbar, bool inverted = false);
  std::vector<int> incident(int v) const;
  int count(VertexKind k) const;
  std::vector<std::string> labels(VertexKind k) const;

  void relabel(const std::map<std::string, std::string>& m);
  void set_kind(const std::string& label, VertexKind k);
  void remove_vertex(int v);  // also drops its edges and waves
  // Combine edges joining the same two vertices (a reversed edge costs a
  // sign) and drop edges whose index vanishes.
  void merge_parallel();

  // Integrand as a PowExpr over vertex labels; the coefficient is excluded.
  PowExpr integrand() const;
  // Versioned plain-text form with stable ordering.
  std::string serialize() const;
};

// Product of two diagrams; vertices are identified by label. Labels in
// `integrate` become internal.
Diagram compose(const Diagram& a, const Diagram& b, const std::vector<std::string>& integrate);

// Kernel adjoint: conj K(z|w) with physical conjugation of all indices and
// coefficients; vertex roles are unchanged.
Diagram adjoint(const Diagram& d);

// Single-term PowExpr to diagram; listed variables become internal.
Diagram from_powexpr(const PowExpr& e, const std::vector<std::string>& internal = {});

// ---------------------------------------------------------------------------
// Builders. `x` is the holomorphic separated variable symbol; its partner is
// bar(x). Spin symbols are s and sbar.

enum class LambdaFamily { plain, tilde, hat, bar };

// Kernel of Lambda_N(x) from z1..zN to w1..w_{N-1}; the w vertices are
// internal. Includes r_N = (a(s + i x) a(sbar - i xbar))^(N-1).
Diagram build_lambda(int N, LambdaFamily fam, const Poly& x);

// Eigenfunction diagrams. A/D take N separated variables; B/C take N - 1 and
// the momentum symbol p (partner bar(p)).
Diagram build_psi(Family f, int N, const std::vector<Poly>& xs, const Poly& p = Poly::var("p"));

Diagram build_baxter(Family f, int N, const Poly& u, const Poly& ubar);

// Factorized R operator kernels R^(1)(u, v) and R^(2)(u, v) with z1, z2
// external and w1, w2 internal; the untouched leg is a point delta.
Diagram build_factorized_R(int which, const Poly& u, const Poly& v);

// ---------------------------------------------------------------------------
// Rewrite rules

enum class Rule {
  chain,          // internal degree-2 vertex
  star_triangle,  // internal degree-3 vertex, indices summing to 2
  cross,          // four-edge vertex; loc.order = {z1, z2, z3, z4}
  delta_reduce,   // degree-2 vertex with indices summing to 2
  fourier,        // degree-1 vertex carrying a plane wave
  mellin_delta,   // Mellin orthogonality; produces a spectral delta
  merge,          // combine parallel lines
  integrate_delta,// remove an internal vertex tied by a point delta
  momentum,       // one-loop diagram to momentum representation
};

std::string rule_name(Rule r);
Rule rule_from_name(const std::string& s);

struct Loc {
  std::string vertex;
  std::vector<std::string> order;
};

Diagram apply_rule(const Diagram& d, Rule rule, const Loc& loc = {});

struct ScriptStep {
  Rule rule;
  Loc loc;
};
using RewriteScript = std::vector<ScriptStep>;

struct ScriptResult {
  Diagram diagram;
  std::vector<std::string> log;  // one line per step
};

ScriptResult run_script(const Diagram& d, const RewriteScript& script,
                        const ParitySamples* parity = nullptr);

// Shipped derivations.
struct Derivation {
  std::string name;
  Diagram start;
  ScriptResult result;
  CoefficientProduct expected;  // closed form the result must reduce to
  bool matches = false;         // symbolic equality after simplification
  double numeric_residual = 0;  // |result / expected - 1| on parity samples
};

std::vector<std::string> derivation_names();
Derivation derive(const std::string& name, uint64_t seed = 7);

// 1/mu_S assembled from exchange coefficients and terminal deltas, in the
// separated variables x1..xN (family A) or x1..x_{N-1} and |p| (family B).
CoefficientProduct measure_from_exchange(int N, Family f);

// Admissible parameter draws for the symbols used by the builders: s, sbar,
// x_k, y_k (and bars), u, v, p.
ParitySamples parity_samples(int count, uint64_t seed);

// ---------------------------------------------------------------------------
// Numerics

// Value of a diagram at external points; coefficient included, delta atoms
// must be absent. Internal vertices are integrated innermost-first in label
// order.
QuadratureResult eval_diagram(const Diagram& d, const Binding& points, const Binding& params,
                              const QuadOptions& opt = {});

// Stratified Monte Carlo estimate of the integral of conj(f) g over the box
// [-L, L]^2 in each of `vars`; both diagrams must be fully external.
QuadratureResult inner_product(const Diagram& f, const Diagram& g,
                               const std::vector<std::string>& vars, const Binding& params,
                               double L, long long samples, uint64_t seed,
                               Exec exec = Exec::parallel);

}  // namespace sl2c
