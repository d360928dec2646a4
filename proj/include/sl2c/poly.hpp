#pragma once

// Exact multivariate polynomials in named formal scalars with Gaussian-rational
// coefficients. Shared by the Weyl algebra (operator coefficients) and by PowExpr
// (exponents and term coefficients).

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sl2c/specialfn.hpp"

namespace sl2c {

using Rational = boost::multiprecision::cpp_rational;

struct GaussQ {
  Rational re, im;

  GaussQ() = default;
  GaussQ(long long r) : re(r) {}  // NOLINT(google-explicit-constructor)
  GaussQ(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
  static GaussQ I() { return {0, 1}; }
  static GaussQ frac(long long num, long long den) { return {Rational(num, den), 0}; }

  bool is_zero() const { return re == 0 && im == 0; }
  GaussQ conj() const { return {re, -im}; }
  cplx value() const { return {re.convert_to<double>(), im.convert_to<double>()}; }

  GaussQ operator+(const GaussQ& o) const { return {re + o.re, im + o.im}; }
  GaussQ operator-(const GaussQ& o) const { return {re - o.re, im - o.im}; }
  GaussQ operator-() const { return {-re, -im}; }
  GaussQ operator*(const GaussQ& o) const { return {re * o.re - im * o.im, re * o.im + im * o.re}; }
  GaussQ operator/(const GaussQ& o) const;
  GaussQ& operator+=(const GaussQ& o) { re += o.re; im += o.im; return *this; }
  bool operator==(const GaussQ& o) const { return re == o.re && im == o.im; }
  bool operator<(const GaussQ& o) const { return re < o.re || (re == o.re && im < o.im); }
  std::string str() const;
};

// Formal scalar registry. Names are interned process-wide; ids are stable for
// the lifetime of the process.
int sym(const std::string& name);
const std::string& sym_name(int id);
int sym_count();

struct UnboundVariable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numeric values for formal scalars.
class Binding {
 public:
  Binding& set(const std::string& name, cplx v) { return set(sym(name), v); }
  Binding& set(int id, cplx v);
  cplx get(int id) const;
  bool has(int id) const { return id < int(vals_.size()) && vals_[id].has_value(); }

 private:
  std::vector<std::optional<cplx>> vals_;
};

struct Monomial {
  std::vector<std::pair<int, int>> f;  // (symbol id, power > 0), sorted by id

  Monomial operator*(const Monomial& o) const;
  bool operator<(const Monomial& o) const { return f < o.f; }
  bool operator==(const Monomial& o) const { return f == o.f; }
  int degree() const;
  int power_of(int id) const;
  std::string str() const;
};

class Poly {
 public:
  Poly() = default;
  Poly(long long c) : Poly(GaussQ(c)) {}  // NOLINT(google-explicit-constructor)
  Poly(const GaussQ& c);                  // NOLINT(google-explicit-constructor)
  static Poly var(int id);
  static Poly var(const std::string& name) { return var(sym(name)); }
  static Poly I() { return Poly(GaussQ::I()); }

  bool is_zero() const { return t_.empty(); }
  bool is_constant() const;
  GaussQ constant_term() const;
  int degree() const;
  int degree_in(int id) const;
  const std::map<Monomial, GaussQ>& terms() const { return t_; }

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator-() const;
  Poly operator*(const Poly& o) const;
  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  bool operator==(const Poly& o) const { return t_ == o.t_; }
  bool operator!=(const Poly& o) const { return !(*this == o); }
  bool operator<(const Poly& o) const { return t_ < o.t_; }

  cplx eval(const Binding& b) const;
  // Coefficient of id^k viewed as a polynomial in id.
  Poly coeff(int id, int k) const;
  // Replace symbols by polynomials.
  Poly subst(const std::map<int, Poly>& m) const;
  // Complex-conjugate the coefficients only (symbols untouched).
  Poly conj_coeffs() const;
  std::string str() const;

 private:
  void add_term(const Monomial& m, const GaussQ& c);
  std::map<Monomial, GaussQ> t_;
};

Poly operator*(const GaussQ& c, const Poly& p);

}  // namespace sl2c
