#pragma once

// Polynomial differential operators in site variables z_k (and their
// anti-holomorphic copies), kept in normal order z^a d^b with [d, z] = 1.

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "sl2c/poly.hpp"

namespace sl2c {

enum class Sector { holo, anti };

inline constexpr int kMaxSites = 8;
inline constexpr size_t kDefaultTermCap = 2'000'000;

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Weyl variable slot: holomorphic sites 1..kMaxSites occupy 0..kMaxSites-1,
// anti-holomorphic ones the next kMaxSites slots.
inline int weyl_slot(int site, Sector sec) {
  if (site < 1 || site > kMaxSites) throw std::out_of_range("site out of range");
  return site - 1 + (sec == Sector::anti ? kMaxSites : 0);
}

struct WeylMono {
  static constexpr int kSlots = 2 * kMaxSites;
  std::array<uint8_t, 2 * kSlots> e{};  // [2v] = z-degree, [2v+1] = d-degree

  int zdeg(int v) const { return e[2 * v]; }
  int ddeg(int v) const { return e[2 * v + 1]; }
  bool operator<(const WeylMono& o) const { return e < o.e; }
  bool operator==(const WeylMono& o) const { return e == o.e; }
};

class WeylElement {
 public:
  WeylElement() = default;
  WeylElement(const Poly& c);  // NOLINT(google-explicit-constructor)
  static WeylElement z(int site, Sector sec = Sector::holo);
  static WeylElement d(int site, Sector sec = Sector::holo);

  bool is_zero() const { return t_.empty(); }
  size_t size() const { return t_.size(); }
  const std::map<WeylMono, Poly>& terms() const { return t_; }

  WeylElement operator+(const WeylElement& o) const;
  WeylElement operator-(const WeylElement& o) const;
  WeylElement operator-() const;
  WeylElement operator*(const WeylElement& o) const;
  WeylElement& operator+=(const WeylElement& o);
  bool operator==(const WeylElement& o) const { return t_ == o.t_; }

  // Coefficient of sym^k in every term (u-expansion of monodromy entries).
  WeylElement coeff(int sym_id, int k) const;
  // Formal transpose: z -> z, d -> -d, factor order reversed.
  WeylElement transpose() const;
  std::string str() const;

  void add(const WeylMono& m, const Poly& c);

  static size_t term_cap;

 private:
  std::map<WeylMono, Poly> t_;
};

WeylElement operator*(const Poly& c, const WeylElement& w);
WeylElement commutator(const WeylElement& a, const WeylElement& b);

struct Generators {
  WeylElement minus, zero, plus;
};

// S_- = -d, S_0 = z d + s, S_+ = z^2 d + 2 s z at one site.
Generators generators(int site, const Poly& spin, Sector sec = Sector::holo);
Generators total_generators(int N, const Poly& spin, Sector sec = Sector::holo);

struct OpMatrix2 {
  std::array<WeylElement, 4> e;  // row-major: A B / C D
  const WeylElement& operator()(int i, int j) const { return e[2 * i + j]; }
  WeylElement& operator()(int i, int j) { return e[2 * i + j]; }
  OpMatrix2 operator*(const OpMatrix2& o) const;
};

// L(u) = u + i [[S_0, S_-], [S_+, -S_0]].
OpMatrix2 lax(int site, const Poly& spin, const Poly& u, Sector sec = Sector::holo);
// T(u) = L_1(u) ... L_N(u).
OpMatrix2 monodromy(int N, const Poly& spin, const Poly& u, Sector sec = Sector::holo);

// R(u-v) T(u) T'(v) - T'(v) T(u) R(u-v) with R = (u - v) + i P on C^2 x C^2.
std::array<WeylElement, 16> fcr_residual(int N, const Poly& spin, const Poly& u, const Poly& v,
                                         Sector sec = Sector::holo);

}  // namespace sl2c
