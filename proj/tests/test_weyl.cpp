#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sl2c/weyl.hpp"

using namespace sl2c;

namespace {

const Poly S = Poly::var("s");
const Poly U = Poly::var("u");
const Poly V = Poly::var("v");

bool all_zero(const std::array<WeylElement, 16>& m) {
  for (auto& e : m)
    if (!e.is_zero()) return false;
  return true;
}

}  // namespace

TEST_CASE("normal ordering") {
  auto z = WeylElement::z(1), d = WeylElement::d(1);
  CHECK(d * z == z * d + WeylElement(Poly(1)));
  CHECK((z * d) * (z * d) == z * z * d * d + z * d);
  // different sites commute
  CHECK(commutator(WeylElement::d(1), WeylElement::z(2)).is_zero());
  // sectors commute
  CHECK(commutator(WeylElement::d(1), WeylElement::z(1, Sector::anti)).is_zero());
}

TEST_CASE("associativity on random-ish elements") {
  auto z1 = WeylElement::z(1), d1 = WeylElement::d(1), z2 = WeylElement::z(2), d2 = WeylElement::d(2);
  WeylElement a = z1 * d1 * d1 + WeylElement(S) * z2;
  WeylElement b = d1 * z1 * z1 + d2 * WeylElement(U);
  WeylElement c = z1 * z1 * z1 * d2 + WeylElement(Poly::I()) * d1;
  CHECK((a * b) * c == a * (b * c));
}

TEST_CASE("sl(2) relations per site and in total") {
  for (Sector sec : {Sector::holo, Sector::anti}) {
    auto g = generators(1, S, sec);
    CHECK(commutator(g.plus, g.minus) == WeylElement(Poly(2)) * g.zero);
    CHECK(commutator(g.zero, g.plus) == g.plus);
    CHECK(commutator(g.zero, g.minus) == -g.minus);
    for (int N = 2; N <= 4; ++N) {
      auto t = total_generators(N, S, sec);
      CHECK(commutator(t.plus, t.minus) == WeylElement(Poly(2)) * t.zero);
      CHECK(commutator(t.zero, t.plus) == t.plus);
      CHECK(commutator(t.zero, t.minus) == -t.minus);
    }
  }
}

TEST_CASE("Lax matrix entries") {
  auto L = lax(1, S, U);
  CHECK(L(0, 1) == WeylElement(Poly::I()) * (-WeylElement::d(1)));
  CHECK(L(0, 0) == WeylElement(U) + WeylElement(Poly::I()) * (WeylElement::z(1) * WeylElement::d(1) + WeylElement(S)));
  CHECK(L(0, 0) + L(1, 1) == WeylElement(Poly(2) * U));
}

TEST_CASE("monodromy expansion coefficients") {
  int u = sym("u");
  {
    auto T1 = monodromy(1, S, U), L1 = lax(1, S, U);
    for (int e = 0; e < 4; ++e) CHECK(T1.e[e] == L1.e[e]);
  }
  for (int N = 2; N <= 3; ++N) {
    auto T = monodromy(N, S, U);
    auto g = total_generators(N, S);
    WeylElement I(Poly::I());
    CHECK(T(0, 0).coeff(u, N) == WeylElement(Poly(1)));
    CHECK(T(0, 0).coeff(u, N - 1) == I * g.zero);
    CHECK(T(1, 1).coeff(u, N - 1) == -(I * g.zero));
    CHECK(T(0, 1).coeff(u, N - 1) == I * g.minus);
    CHECK(T(1, 0).coeff(u, N - 1) == I * g.plus);
    CHECK(T(0, 1).coeff(u, N).is_zero());
    for (int k = 2; k <= N; ++k) {
      for (int e = 0; e < 4; ++e) CHECK(commutator(g.zero, T.e[e].coeff(u, N - k)).is_zero() == (e == 0 || e == 3));
    }
  }
}

TEST_CASE("FCR residual vanishes exactly") {
  for (int N = 1; N <= 3; ++N) {
    CAPTURE(N);
    CHECK(all_zero(fcr_residual(N, S, U, V)));
  }
  CHECK(all_zero(fcr_residual(2, Poly::var("sbar"), Poly::var("ubar"), Poly::var("vbar"), Sector::anti)));
}

TEST_CASE("monodromy entries commute with themselves") {
  for (int N = 1; N <= 3; ++N) {
    auto Tu = monodromy(N, S, U), Tv = monodromy(N, S, V);
    for (int e = 0; e < 4; ++e) {
      CAPTURE(N);
      CAPTURE(e);
      CHECK(commutator(Tu.e[e], Tv.e[e]).is_zero());
    }
  }
}

TEST_CASE("transpose") {
  auto z = WeylElement::z(1), d = WeylElement::d(1);
  CHECK(d.transpose() == -d);
  CHECK((z * d).transpose() == -(d * z));
  WeylElement a = z * z * d + WeylElement(S) * d * d;
  WeylElement b = z * d * d + z;
  CHECK((a * b).transpose() == b.transpose() * a.transpose());
  CHECK(a.transpose().transpose() == a);
}

TEST_CASE("term cap raises a resource error") {
  auto saved = WeylElement::term_cap;
  WeylElement::term_cap = 10;
  CHECK_THROWS_AS(monodromy(3, S, U), ResourceError);
  WeylElement::term_cap = saved;
}
