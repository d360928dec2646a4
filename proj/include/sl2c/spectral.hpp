#pragma once

// Closed-form spectral data: Sklyanin measures, the D-family Baxter
// eigenvalue, energies, and the pairwise Hamiltonian on power functions.

#include <string>
#include <vector>

#include "sl2c/kernels.hpp"
#include "sl2c/specialfn.hpp"

namespace sl2c {

struct SpectrumPoint {
  std::vector<SepPoint> seps;  // N for A/D, N - 1 for B/C
  cplx p = 0;                  // B/C only
  Spin spin;
};

// Throws std::invalid_argument naming the first sep whose n has the wrong parity.
void check_parity(const SpectrumPoint& pt);

struct ConformalSpinPair {
  cplx J, Jbar;
};

// mu_S for S = A (N = seps.size()) or B (N = seps.size() + 1).
double measure(Family f, const SpectrumPoint& pt);

// q_D(u) = pi^N prod_k a(1 + i ubar - i xbar_k, s - i u, 1 - s + i x_k).
// Each a-factor pairs a holomorphic argument with its anti-holomorphic
// partner; a non-integral difference throws std::domain_error.
cplx baxter_eigenvalue_D(cplx u, cplx ubar, const SpectrumPoint& pt);

enum class EnergyVariant { s, one_minus_s };

// 2 sum_k Re(psi(1/2 + (n_k -+ n_s)/2 + i(nu_k -+ nu_s)) - psi(1)).
double energy(EnergyVariant v, const SpectrumPoint& pt);
// sum_k psi(1 - s + i x_k) + psi(sbar - i xbar_k) - 2 psi(1) (variant s), in the
// complex labels; equals energy() up to rounding.
cplx energy_complex(EnergyVariant v, const SpectrumPoint& pt);

// d/deps log((i eps / pi)^N q_D) at u = i(1 - s) + eps, ubar = i(1 - sbar) + eps,
// by Richardson-extrapolated central differences with step h.
cplx qD_log_slope(const SpectrumPoint& pt, double h = 1e-3);

cplx pairwise_energy(const ConformalSpinPair& jp);

// Eigenvalue of H_{kk+1} on [z_{kk+1}]^a in one of its four forms.
// Forms 3 and 4 are the psi forms; forms 1 and 2 take ln[z] and ln[i d] as
// c-derivatives of [z]^c and [i d]^c at c = 0 (central differences, step h).
cplx pairwise_h_on_power(const ZIndex& a, const Spin& s, int form, double h = 1e-3);

// Eigenvalue of R_{kk+1}(eps) on [z_{kk+1}]^a in the three forms of the
// factorized operator; eps is taken equal in both sectors.
cplx factorized_R_on_power(const ZIndex& a, const Spin& s, double eps, int form);

// Operator star-triangle [z]^al [i d]^(al+be) [z]^be = [i d]^be [z]^(al+be) [i d]^al
// on [z]^c: relative residual of the two coefficients.
double star_triangle_operator_residual(const ZIndex& al, const ZIndex& be, const ZIndex& c);

// ---------------------------------------------------------------------------
// Tables

struct GridAxis {
  std::string name;  // n<k> or nu<k>; "n" and "nu" mean sep 1
  std::vector<double> values;
};

// "nu=-2:2:0.1,n=-2:2" -> axes in the given order; lo:hi:step, step 1 when omitted.
std::vector<GridAxis> parse_grid(const std::string& spec);

struct TableRow {
  std::vector<double> inputs;
  cplx value = 0;
  std::string error;  // nonempty rows are kept and marked
};

struct Table {
  std::vector<std::string> columns;  // input columns
  bool complex_value = false;
  std::vector<TableRow> rows;
};

enum class Quantity { measure, qD, energy, energy_one_minus_s };

// Cartesian product of the axes, last axis fastest, applied on top of `base`.
Table tabulate(Quantity q, Family f, const SpectrumPoint& base, const std::vector<GridAxis>& axes,
               cplx u = {0.17, 0.05}, Exec exec = Exec::parallel);

std::string to_csv(const Table& t, const std::vector<std::string>& provenance);
std::string to_jsonl(const Table& t);

}  // namespace sl2c
