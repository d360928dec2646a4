#include "sl2c/spectral.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace sl2c {

namespace {

const cplx I(0, 1);

cplx psi1() { return -kEulerGamma; }

// [z]^E at a point, principal branch of the phase.
cplx power_at(const ZIndex& E, cplx z) {
  return std::exp((E.alpha + E.alpha_bar()) * std::log(std::abs(z))) * std::polar(1.0, E.m * std::arg(z));
}

// Richardson-extrapolated central difference of a complex function at 0.
template <class F>
cplx slope(F&& f, double h) {
  auto d = [&](double t) { return (f(t) - f(-t)) / (2 * t); };
  cplx d1 = d(h), d2 = d(h / 2), d4 = d(h / 4);
  cplx r1 = (4.0 * d2 - d1) / 3.0, r2 = (4.0 * d4 - d2) / 3.0;
  return (16.0 * r2 - r1) / 15.0;
}

std::string fmt_num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// Grid inputs are snapped to 1e-12, so 12 digits are exact.
std::string fmt_input(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

void check_parity(const SpectrumPoint& pt) {
  for (size_t k = 0; k < pt.seps.size(); ++k)
    if (!parity_ok(pt.seps[k], pt.spin))
      throw std::invalid_argument("sep " + std::to_string(k + 1) +
                                  ": n must be integer iff n_s is integer");
}

double measure(Family f, const SpectrumPoint& pt) {
  if (f != Family::A && f != Family::B) throw std::invalid_argument("measure: families A and B only");
  int N = f == Family::A ? int(pt.seps.size()) : int(pt.seps.size()) + 1;
  if (N < 1) throw std::invalid_argument("measure: N >= 1");
  double v = std::pow(2 * kPi, -N) * std::pow(kPi, -double(N) * N);
  if (f == Family::B) v *= 2;
  for (size_t j = 0; j < pt.seps.size(); ++j)
    for (size_t k = j + 1; k < pt.seps.size(); ++k) {
      double dnu = pt.seps[k].nu - pt.seps[j].nu, dn = pt.seps[k].n() - pt.seps[j].n();
      v *= dnu * dnu + 0.25 * dn * dn;
    }
  return v;
}

cplx baxter_eigenvalue_D(cplx u, cplx ubar, const SpectrumPoint& pt) {
  const cplx s = pt.spin.s(), sb = pt.spin.sbar();
  cplx q = std::pow(kPi, double(pt.seps.size()));
  for (const SepPoint& x : pt.seps) {
    ZIndex f1 = ZIndex::from_pair(1.0 + I * ubar - I * x.xbar(), 1.0 + I * u - I * x.x());
    ZIndex f2 = ZIndex::from_pair(s - I * u, sb - I * ubar);
    ZIndex f3 = ZIndex::from_pair(1.0 - s + I * x.x(), 1.0 - sb + I * x.xbar());
    q *= a_of({f1, f2, f3});
  }
  return q;
}

double energy(EnergyVariant v, const SpectrumPoint& pt) {
  const double sg = v == EnergyVariant::s ? -1 : 1;
  double e = 0;
  for (const SepPoint& x : pt.seps) {
    cplx arg(0.5 + 0.5 * (x.n() + sg * pt.spin.ns()), x.nu + sg * pt.spin.nu_s);
    e += 2 * (digamma(arg) - psi1()).real();
  }
  return e;
}

cplx energy_complex(EnergyVariant v, const SpectrumPoint& pt) {
  const cplx s = pt.spin.s(), sb = pt.spin.sbar();
  cplx e = 0;
  for (const SepPoint& x : pt.seps) {
    if (v == EnergyVariant::s)
      e += digamma(1.0 - s + I * x.x()) + digamma(sb - I * x.xbar()) - 2.0 * psi1();
    else
      e += digamma(s + I * x.x()) + digamma(1.0 - sb - I * x.xbar()) - 2.0 * psi1();
  }
  return e;
}

cplx qD_log_slope(const SpectrumPoint& pt, double h) {
  const cplx s = pt.spin.s(), sb = pt.spin.sbar();
  const double N = double(pt.seps.size());
  auto f = [&](double eps) {
    cplx u = I * (1.0 - s) + eps, ub = I * (1.0 - sb) + eps;
    return std::log(std::pow(I * eps / kPi, N) * baxter_eigenvalue_D(u, ub, pt));
  };
  return slope(f, h);
}

cplx pairwise_energy(const ConformalSpinPair& jp) {
  return digamma(jp.J) + digamma(1.0 - jp.J) + digamma(jp.Jbar) + digamma(1.0 - jp.Jbar) - 4.0 * psi1();
}

// On functions of z = z_k - z_{k+1}, d_{k+1} = -d_z; [i d_{k+1}]^c = (-1)^{m_c} [i d_z]^c.
cplx pairwise_h_on_power(const ZIndex& a, const Spin& sp, int form, double h) {
  const cplx s = sp.s(), sb = sp.sbar();
  const ZIndex two_s{2.0 * s, sp.two_ns};  // (2s, 2sbar)
  switch (form) {
    case 3: return digamma(1.0 - 2.0 * s - a.alpha) + digamma(2.0 * sb + a.alpha_bar()) - 2.0 * psi1();
    case 4: return digamma(2.0 * s + a.alpha) + digamma(1.0 - 2.0 * sb - a.alpha_bar()) - 2.0 * psi1();
    case 1: {
      // ln[z] + [z]^(1-2s) ln[i d] [z]^(2s-1), ln[i d] = d/dc [i d]^c at c = 0
      const cplx z0(0.7, -0.4);
      const ZIndex b = a + two_s - 1.0;
      auto G = [&](double c) {
        ZIndex C{c, 0};
        return power_at(1.0 - two_s, z0) * frac_coefficient(C, b) * power_at(b - C, z0);
      };
      cplx lnz = 2 * std::log(std::abs(z0));
      return lnz + slope(G, h) / power_at(a, z0) - 2.0 * psi1();
    }
    case 2: {
      // ln[i d] + [i d]^(2s-1) ln[z] [i d]^(1-2s)
      const cplx z0(0.7, -0.4);
      auto T1 = [&](double c) {
        ZIndex C{c, 0};
        return frac_coefficient(C, a) * power_at(a - C, z0);
      };
      const ZIndex up = 1.0 - two_s, down = two_s - 1.0;
      const ZIndex b1 = a - up;  // exponent after [i d]^(1-2s)
      double sg = sign_power(up.m) * sign_power(down.m);
      cplx k1 = frac_coefficient(up, a);
      auto T2 = [&](double t) {
        ZIndex bt{b1.alpha + t, b1.m};
        return frac_coefficient(down, bt) * power_at(bt - down, z0);
      };
      return (slope(T1, h) + sg * k1 * slope(T2, h)) / power_at(a, z0) - 2.0 * psi1();
    }
    default: throw std::invalid_argument("pairwise_h_on_power: form must be 1..4");
  }
}

cplx factorized_R_on_power(const ZIndex& a, const Spin& sp, double eps, int form) {
  const cplx s = sp.s(), sb = sp.sbar(), ie(0, eps);
  const ZIndex two_s{2.0 * s, sp.two_ns};
  const cplx pre = kPi * a_of(ZIndex{1.0 - ie, 0});
  switch (form) {
    case 1:
      // [z]^(1-2s-ie) [i d]^(-ie) [z]^(2s-1)
      return pre * frac_coefficient(ZIndex{-ie, 0}, a + two_s - 1.0);
    case 2: {
      // [i d]^(2s-1) [z]^(-ie) [i d]^(1-2s-ie)
      const ZIndex c1{1.0 - 2.0 * s - ie, -sp.two_ns}, c2 = two_s - 1.0;
      const ZIndex mid{a.alpha - c1.alpha - ie, a.m - c1.m};
      double sg = sign_power(c1.m) * sign_power(c2.m);
      return pre * sg * frac_coefficient(c1, a) * frac_coefficient(c2, mid);
    }
    case 3:
      return pre * cgamma(2.0 * sb + a.alpha_bar()) / cgamma(2.0 * sb + a.alpha_bar() + ie) *
             cgamma(1.0 - 2.0 * s - a.alpha - ie) / cgamma(1.0 - 2.0 * s - a.alpha);
    default: throw std::invalid_argument("factorized_R_on_power: form must be 1..3");
  }
}

double star_triangle_operator_residual(const ZIndex& al, const ZIndex& be, const ZIndex& c) {
  cplx lhs = frac_coefficient(al + be, be + c);
  cplx rhs = frac_coefficient(al, c) * frac_coefficient(be, be + c);
  return std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs));
}

// ---------------------------------------------------------------------------
// Tables

std::vector<GridAxis> parse_grid(const std::string& spec) {
  std::vector<GridAxis> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("grid item '" + item + "' lacks '='");
    GridAxis ax;
    ax.name = item.substr(0, eq);
    std::vector<double> parts;
    std::stringstream rs(item.substr(eq + 1));
    std::string p;
    while (std::getline(rs, p, ':')) {
      try {
        size_t used = 0;
        parts.push_back(std::stod(p, &used));
        if (used != p.size()) throw std::invalid_argument(p);
      } catch (const std::exception&) {
        throw std::invalid_argument("grid value '" + p + "' is not a number");
      }
    }
    if (parts.size() == 1) parts = {parts[0], parts[0], 1};
    if (parts.size() == 2) parts.push_back(1);
    if (parts.size() != 3 || parts[2] <= 0 || parts[1] < parts[0])
      throw std::invalid_argument("grid range '" + item + "' must be lo:hi[:step] with step > 0");
    long long n = std::llround(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    for (long long i = 0; i <= n; ++i) {
      // snap away accumulated rounding so 0 prints as 0
      double v = parts[0] + double(i) * parts[2];
      ax.values.push_back(std::round(v * 1e12) / 1e12);
    }
    out.push_back(ax);
  }
  if (out.empty()) throw std::invalid_argument("empty grid");
  return out;
}

namespace {

// Sep index (0-based) and whether the axis is n.
std::pair<size_t, bool> axis_target(const std::string& name) {
  bool is_n = name.rfind("nu", 0) != 0;
  std::string head = is_n ? "n" : "nu";
  if (name.rfind(head, 0) != 0) throw std::invalid_argument("unknown grid axis " + name);
  std::string idx = name.substr(head.size());
  if (idx.empty()) return {0, is_n};
  for (char ch : idx)
    if (!std::isdigit(static_cast<unsigned char>(ch))) throw std::invalid_argument("unknown grid axis " + name);
  int k = std::stoi(idx);
  if (k < 1) throw std::invalid_argument("grid axis index starts at 1: " + name);
  return {size_t(k - 1), is_n};
}

}  // namespace

Table tabulate(Quantity q, Family f, const SpectrumPoint& base, const std::vector<GridAxis>& axes,
               cplx u, Exec exec) {
  Table t;
  std::vector<std::pair<size_t, bool>> tgt;
  for (auto& a : axes) {
    t.columns.push_back(a.name);
    tgt.push_back(axis_target(a.name));
    if (tgt.back().first >= base.seps.size())
      throw std::invalid_argument("grid axis " + a.name + " exceeds the number of separated variables");
  }
  t.complex_value = q == Quantity::qD;
  size_t total = 1;
  for (auto& a : axes) total *= a.values.size();
  t.rows.resize(total);
  auto row = [&](size_t r) {
    SpectrumPoint pt = base;
    TableRow& out = t.rows[r];
    size_t rest = r;
    out.inputs.assign(axes.size(), 0);
    for (size_t k = axes.size(); k-- > 0;) {
      double v = axes[k].values[rest % axes[k].values.size()];
      rest /= axes[k].values.size();
      out.inputs[k] = v;
      SepPoint& sp = pt.seps[tgt[k].first];
      if (tgt[k].second) {
        double two = 2 * v;
        if (std::abs(two - std::round(two)) > 1e-9) {
          out.error = "n must be a multiple of 1/2";
          return;
        }
        sp.two_n = int(std::lround(two));
      } else {
        sp.nu = v;
      }
    }
    try {
      check_parity(pt);
      switch (q) {
        case Quantity::measure: out.value = measure(f, pt); break;
        case Quantity::energy: out.value = energy(EnergyVariant::s, pt); break;
        case Quantity::energy_one_minus_s: out.value = energy(EnergyVariant::one_minus_s, pt); break;
        case Quantity::qD: {
          // ubar - u = i n_s keeps every a-factor pair integral
          cplx ub = u + I * pt.spin.ns();
          out.value = baxter_eigenvalue_D(u, ub, pt);
          break;
        }
      }
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long long r = 0; r < (long long)total; ++r) row(size_t(r));
  } else {
    for (size_t r = 0; r < total; ++r) row(r);
  }
  return t;
}

std::string to_csv(const Table& t, const std::vector<std::string>& provenance) {
  std::ostringstream os;
  for (auto& p : provenance) os << "# " << p << "\n";
  for (auto& c : t.columns) os << c << ",";
  os << (t.complex_value ? "value_re,value_im" : "value") << ",error\n";
  for (auto& r : t.rows) {
    for (double v : r.inputs) os << fmt_input(v) << ",";
    if (!r.error.empty()) {
      os << (t.complex_value ? "," : "") << ",\"" << r.error << "\"\n";
      continue;
    }
    os << fmt_num(r.value.real());
    if (t.complex_value) os << "," << fmt_num(r.value.imag());
    os << ",\n";
  }
  return os.str();
}

std::string to_jsonl(const Table& t) {
  std::ostringstream os;
  for (size_t i = 0; i < t.rows.size(); ++i) {
    const TableRow& r = t.rows[i];
    nlohmann::ordered_json j;
    j["id"] = i;
    nlohmann::ordered_json in;
    for (size_t k = 0; k < t.columns.size(); ++k) in[t.columns[k]] = r.inputs[k];
    j["inputs"] = in;
    if (r.error.empty()) {
      if (t.complex_value)
        j["value"] = {r.value.real(), r.value.imag()};
      else
        j["value"] = r.value.real();
      j["pass"] = true;
    } else {
      j["value"] = nullptr;
      j["error"] = r.error;
      j["pass"] = false;
    }
    os << j.dump() << "\n";
  }
  return os.str();
}

}  // namespace sl2c
