// Acceptance run: one PASS/FAIL line per criterion, sub-checks indented.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sl2c/diagram.hpp"
#include "sl2c/kernels.hpp"
#include "sl2c/spectral.hpp"
#include "sl2c/suites.hpp"

using namespace sl2c;

namespace {

// Pinned tolerances.
constexpr double kAlgebraSeconds = 120;
constexpr double kRulesSeconds = 600;
constexpr double kKernelTol = 1e-10;
constexpr int kKernelPoints = 100;
constexpr double kDerivationTol = 1e-10;
constexpr double kMeasureTol = 1e-12;
constexpr double kSlopeTol = 1e-6;
constexpr double kEnergyTol = 1e-10;
constexpr double kStopTol = 1e-8;
constexpr double kTwoformTol = 1e-8;
constexpr double kHkkTol = 1e-10;
constexpr int kOperatorDraws = 50;

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;
  void add(const Check& c) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "  residual=%.3e tol=%.3e", c.residual, c.tol);
    lines.push_back(std::string(c.info ? "INFO" : c.pass ? "pass" : "FAIL") + "  " + c.id + buf +
                    (c.detail.empty() ? "" : "  " + c.detail));
    if (!c.info) pass = pass && c.pass;
  }
  void add(const std::vector<Check>& cs) {
    for (auto& c : cs) add(c);
  }
  void add(const std::string& id, double residual, double tol, const std::string& detail = {}) {
    Check c;
    c.id = id;
    c.residual = residual;
    c.tol = tol;
    c.pass = std::isfinite(residual) && residual <= tol;
    c.detail = detail;
    add(c);
  }
  void note(const std::string& s) { lines.push_back("note  " + s); }
};

SuiteConfig base_config() {
  SuiteConfig c;
  c.samples = kKernelPoints;
  return c;
}

Outcome c1_algebra() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  for (int N = 1; N <= 3; ++N) o.add(algebra_checks(N));
  double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.add("runtime seconds", sec, kAlgebraSeconds);
  return o;
}

Outcome c2_rules() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  o.add(rule_checks(base_config(), 3));
  double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.add("runtime seconds", sec, kRulesSeconds);
  return o;
}

Binding kernel_binding() { return default_kernel_binding({0, 0.3}, {0.17, 0.05}, {2, 0.4}); }

Outcome c3_intertwining() {
  Outcome o;
  Binding b = kernel_binding();
  for (int N = 2; N <= 3; ++N)
    for (Family f : {Family::A, Family::B})
      for (Sector s : {Sector::holo, Sector::anti}) {
        auto r = intertwining_check(f, N, s, b, kKernelPoints, 42);
        o.add(r.name, r.residual, kKernelTol);
      }
  return o;
}

Outcome c4_baxter() {
  Outcome o;
  Binding b = kernel_binding();
  for (int N = 1; N <= 3; ++N)
    for (Family f : {Family::A, Family::B, Family::C, Family::D})
      for (Sector s : {Sector::holo, Sector::anti}) {
        auto r = baxter_check(f, f, N, s, b, kKernelPoints, 42);
        o.add(r.name, r.residual, kKernelTol);
      }
  for (int N = 1; N <= 3; ++N) {
    auto r = baxter_check(Family::C, Family::A, N, Sector::holo, b, kKernelPoints, 42);
    Check c;
    c.id = r.name + " (candidate)";
    c.residual = r.residual;
    c.tol = kKernelTol;
    c.info = true;
    c.detail = r.residual > 0.1 ? "fails; Q_C on the right is used" : "unexpectedly holds";
    o.add(c);
  }
  o.note("C family: X_N(u) Q_C(u) = (u + i s)^N Q_C(u + i); the candidate with Q_A(u + i) is rejected");
  return o;
}

Outcome c5_derivations() {
  Outcome o;
  for (const char* n : {"lambda1", "exchange2", "ll2"}) {
    Derivation d = derive(n, 7);
    o.add(std::string("derive ") + n, d.matches ? d.numeric_residual : INFINITY, kDerivationTol,
          d.result.diagram.coeff.str());
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> nu(-1.5, 1.5);
  std::uniform_int_distribution<int> nk(-2, 2);
  for (Family f : {Family::A, Family::B})
    for (int N = 1; N <= 3; ++N) {
      double worst = 0;
      for (int i = 0; i < 20; ++i) {
        SpectrumPoint pt;
        pt.spin = {0, 0.3};
        Binding b;
        int n = f == Family::A ? N : N - 1;
        for (int k = 1; k <= n; ++k) {
          SepPoint x{2 * nk(rng), nu(rng)};
          pt.seps.push_back(x);
          b.set("x" + std::to_string(k), x.x()).set("xbar" + std::to_string(k), x.xbar());
        }
        cplx assembled = 1.0 / measure_from_exchange(N, f).value(b);
        worst = std::max(worst, rel(assembled, measure(f, pt)));
      }
      o.add(std::string("measure ") + family_char(f) + " N=" + std::to_string(N) + " (20 draws)", worst,
            kMeasureTol);
    }
  return o;
}

Outcome c6_eigen() {
  Outcome o;
  o.add(eigenfunction_checks(base_config()));
  return o;
}

Outcome c7_spectral() {
  Outcome o;
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> ns(-2, 2), nk(-2, 2);
  std::uniform_real_distribution<double> nu(-1, 1);
  for (int N = 1; N <= 3; ++N) {
    double worst = 0;
    for (int i = 0; i < 5; ++i) {
      SpectrumPoint p;
      p.spin = {ns(rng), nu(rng)};
      for (int k = 0; k < N; ++k) p.seps.push_back({2 * nk(rng) + (p.spin.two_ns & 1), nu(rng)});
      worst = std::max(worst, std::abs(qD_log_slope(p) - cplx(0, -energy(EnergyVariant::s, p))));
    }
    o.add("eps-slope of log q_D + iE, N=" + std::to_string(N) + " (5 draws)", worst, kSlopeTol);
  }
  SpectrumPoint z;
  z.spin = {-2, 0.0};
  z.seps = {{0, 0.0}};
  o.add("E at n_s=-1, n=0, nu=0", std::abs(energy(EnergyVariant::s, z)), kEnergyTol);
  for (int N = 1; N <= 3; ++N) {
    SpectrumPoint d;
    d.spin = {1, 0.4};
    d.seps.assign(size_t(N), SepPoint{1, 0.4});
    o.add("E + 4N ln 2 at n_k=n_s, nu_k=nu_s, N=" + std::to_string(N),
          std::abs(energy(EnergyVariant::s, d) + 4 * N * std::log(2.0)), kEnergyTol);
  }
  return o;
}

Outcome c8_operators() {
  Outcome o;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ur(-0.45, 0.45);
  std::uniform_int_distribution<int> um(-2, 2);
  double stop = 0;
  for (int done = 0; done < kOperatorDraws;) {
    ZIndex al{{ur(rng), ur(rng)}, um(rng)}, be{{ur(rng), ur(rng)}, um(rng)}, c{{ur(rng), ur(rng)}, um(rng)};
    try {
      stop = std::max(stop, star_triangle_operator_residual(al, be, c));
      ++done;
    } catch (const PoleError&) {
    }
  }
  o.add("operator star-triangle on powers (50 draws)", stop, kStopTol);

  std::uniform_real_distribution<double> re(-0.7, 0.7);
  std::uniform_int_distribution<int> mm(-2, 2), ns(-2, 2);
  double two = 0, h34 = 0;
  for (int i = 0; i < kOperatorDraws; ++i) {
    Spin s{ns(rng), re(rng)};
    ZIndex a{{re(rng), re(rng)}, mm(rng)};
    cplx f3 = factorized_R_on_power(a, s, 1e-3, 3);
    two = std::max({two, rel(factorized_R_on_power(a, s, 1e-3, 1), f3), rel(factorized_R_on_power(a, s, 1e-3, 2), f3)});
    cplx h3 = pairwise_h_on_power(a, s, 3), h4 = pairwise_h_on_power(a, s, 4);
    h34 = std::max(h34, rel(h4, h3));
  }
  o.add("R(eps) forms 1, 2 vs 3 on powers, eps=1e-3 (50 draws)", two, kTwoformTol);
  o.add("H_kk+1 forms 3 vs 4 on powers (50 draws)", h34, kHkkTol);
  return o;
}

Outcome c9_appendixB() {
  Outcome o;
  o.add(appendixB_checks(base_config()));
  o.note("A1 = pi (-1)^(i(u-ubar)) a(iv, 1-iu, 1+iu-iv); the sign (-1)^(i(v-vbar)) is wrong when "
         "i(u-ubar) and i(v-vbar) differ in parity");
  return o;
}

Outcome c10_reproducible() {
  Outcome o;
  SuiteConfig cfg = base_config();
  for (const std::string& name : suite_names()) {
    std::vector<int> Ns = {2};
    if (name == "algebra" || name == "kernels") Ns = {1, 2, 3};
    for (int N : Ns) {
      cfg.N = N;
      std::string a = render(run_suite(name, cfg), "json"), b = render(run_suite(name, cfg), "json");
      o.add("suite " + name + " N=" + std::to_string(N) + " byte-identical", a == b ? 0.0 : 1.0, 0);
    }
  }
  for (const std::string& n : derivation_names()) {
    Derivation a = derive(n, 7), b = derive(n, 7);
    bool same = a.result.diagram.serialize() == b.result.diagram.serialize() && a.result.log == b.result.log;
    o.add("derive " + n + " byte-identical", same ? 0.0 : 1.0, 0);
  }
  SpectrumPoint base;
  base.spin = {0, 0.3};
  base.seps = {{0, 0.0}, {0, 0.25}};
  auto grid = parse_grid("nu=-1:1:0.1,n=-2:2");
  std::string ser = to_csv(tabulate(Quantity::qD, Family::D, base, grid, {0.17, 0.05}, Exec::serial), {});
  std::string par = to_csv(tabulate(Quantity::qD, Family::D, base, grid, {0.17, 0.05}, Exec::parallel), {});
  o.add("qD table serial vs parallel byte-identical", ser == par ? 0.0 : 1.0, 0);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {"exact algebra: sl(2), FCR N<=2, commuting entries N<=3, < 2 min", c1_algebra},
      {"rewrite rules by quadrature: chain/Fourier 1e-4, star/cross 1e-3, 3 draws, < 10 min", c2_rules},
      {"kernel intertwining, 100 points, N in {2,3}, 1e-10", c3_intertwining},
      {"Baxter difference equations, 4 families, N=1..3, 1e-10", c4_baxter},
      {"scripted derivations and measure assembly, N<=3", c5_derivations},
      {"eigenvalue equation and scaling at N=2 by quadrature, 1e-3", c6_eigen},
      {"q_D slope = -iE (1e-6), energy special points (1e-10)", c7_spectral},
      {"operator star-triangle and R forms 1e-8, H forms 3/4 1e-10", c8_operators},
      {"R1 kernel integral = A1: quadrature 1e-3, chain rewriting exact", c9_appendixB},
      {"reproducibility: byte-identical reruns", c10_reproducible},
  };
  int failed = 0, k = 0;
  for (auto& c : all) {
    ++k;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.lines.push_back(std::string("error  ") + e.what());
    }
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  [%d] %s  (%.1f s)\n", o.pass ? "PASS" : "FAIL", k, c.title, sec);
    for (auto& l : o.lines) std::printf("      %s\n", l.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", int(all.size()) - failed, all.size());
  return failed ? 1 : 0;
}
