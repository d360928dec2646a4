// sl2c: verification suites, scripted derivations and spectral tables.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sl2c/diagram.hpp"
#include "sl2c/spectral.hpp"
#include "sl2c/suites.hpp"

using namespace sl2c;

namespace {

struct RunConfig {
  int N = 2;
  double ns = 0;
  double nus = 0;
  uint64_t seed = 42;
  double tol = -1;
  int samples = 100;
  std::string format = "text";
  std::string out;
  std::string grid;
  std::string family = "A";
  std::string variant = "s";
  std::vector<double> u = {0.17, 0.05};
  bool serial = false;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Spin spin_of(const RunConfig& c) {
  double two = 2 * c.ns;
  if (std::abs(two - std::round(two)) > 1e-12) throw ConfigError("--ns must be a multiple of 1/2");
  return {int(std::lround(two)), c.nus};
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> provenance(const std::string& cmd, const RunConfig& c, bool table) {
  std::vector<std::string> p = {"sl2c " + cmd,
                                "N=" + std::to_string(c.N) + " ns=" + num(c.ns) + " nus=" + num(c.nus) +
                                    " seed=" + std::to_string(c.seed) + " samples=" + std::to_string(c.samples) +
                                    (c.tol > 0 ? " tol=" + num(c.tol) : "")};
  if (table)
    p.push_back("family=" + c.family + " variant=" + c.variant + " u=" + num(c.u[0]) + "," + num(c.u[1]) +
                (c.grid.empty() ? "" : " grid=" + c.grid));
  return p;
}

void emit(const RunConfig& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw ConfigError("cannot open " + c.out);
  f << text;
}

int cmd_verify(const std::string& suite, const RunConfig& c) {
  SuiteConfig cfg;
  cfg.N = c.N;
  cfg.spin = spin_of(c);
  cfg.seed = c.seed;
  cfg.tol = c.tol;
  cfg.samples = c.samples;
  cfg.exec = c.serial ? Exec::serial : Exec::parallel;
  SuiteReport r;
  try {
    r = run_suite(suite, cfg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::string body = render(r, c.format);
  if (c.format != "json") {
    std::string head;
    for (auto& l : provenance("verify " + suite, c, false)) head += "# " + l + "\n";
    body = head + body;
  }
  emit(c, body);
  return r.ok() ? 0 : 1;
}

int cmd_derive(const std::string& name, const RunConfig& c) {
  Derivation d;
  try {
    d = derive(name, c.seed);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::ostringstream os;
  const CoefficientProduct& got = d.result.diagram.coeff;
  if (c.format == "json") {
    nlohmann::ordered_json j;
    j["id"] = "derive/" + name;
    j["inputs"]["seed"] = c.seed;
    j["trace"] = d.result.log;
    j["coefficient"] = got.str();
    j["expected"] = d.expected.str();
    j["residual"] = d.numeric_residual;
    j["pass"] = d.matches;
    os << j.dump() << '\n';
  } else {
    os << "# sl2c derive " << name << " seed=" << c.seed << '\n';
    os << "start\n" << d.start.serialize() << '\n';
    for (auto& l : d.result.log) os << "step " << l << '\n';
    os << "result\n" << d.result.diagram.serialize() << '\n';
    os << "coefficient  " << got.str() << '\n';
    os << "closed form  " << d.expected.str() << '\n';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", d.numeric_residual);
    os << (d.matches ? "PASS" : "FAIL") << "  symbolic match, numeric residual " << buf << '\n';
  }
  emit(c, os.str());
  return d.matches ? 0 : 1;
}

// Pairwise energy over (n, nu) labels J = (1 + n)/2 + i nu, Jbar = (1 - n)/2 + i nu.
Table pairwise_table(const std::vector<GridAxis>& axes) {
  Table t;
  t.complex_value = true;
  std::vector<double> n = {0}, nu = {0};
  for (auto& a : axes) {
    if (a.name == "n")
      n = a.values;
    else if (a.name == "nu")
      nu = a.values;
    else
      throw ConfigError("pairwise grid takes axes n and nu");
  }
  t.columns = {"n", "nu"};
  for (double nv : n)
    for (double v : nu) {
      TableRow r;
      r.inputs = {nv, v};
      try {
        r.value = pairwise_energy({{0.5 * (1 + nv), v}, {0.5 * (1 - nv), v}});
      } catch (const std::exception& e) {
        r.error = e.what();
      }
      t.rows.push_back(r);
    }
  return t;
}

int cmd_compute(const std::string& what, const RunConfig& c) {
  if (c.u.size() != 2) throw ConfigError("--u takes re,im");
  std::vector<GridAxis> axes;
  try {
    if (!c.grid.empty()) axes = parse_grid(c.grid);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.family.size() != 1) throw ConfigError("--family takes one of A B C D");
  Family fam;
  try {
    fam = family_from_char(c.family[0]);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  Spin sp = spin_of(c);
  SpectrumPoint base;
  base.spin = sp;
  // n_k follows the parity of n_s; nu_k spaced by 1/4 so distinct labels stay apart
  int nseps = (what == "measure" && fam == Family::B) ? c.N - 1 : c.N;
  if (nseps < 0 || c.N < 1) throw ConfigError("--n must be >= 1");
  for (int k = 0; k < nseps; ++k) base.seps.push_back({sp.two_ns % 2 ? 1 : 0, 0.25 * k});
  Table t;
  try {
    if (what == "pairwise") {
      t = pairwise_table(axes);
    } else {
      Quantity q;
      if (what == "measure")
        q = Quantity::measure;
      else if (what == "qD")
        q = Quantity::qD;
      else if (what == "energy")
        q = c.variant == "one_minus_s" ? Quantity::energy_one_minus_s : Quantity::energy;
      else
        throw ConfigError("unknown quantity " + what);
      if (c.variant != "s" && c.variant != "one_minus_s") throw ConfigError("--variant takes s or one_minus_s");
      t = tabulate(q, fam, base, axes, {c.u[0], c.u[1]}, c.serial ? Exec::serial : Exec::parallel);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::string body;
  if (c.format == "json") {
    body = to_jsonl(t);
  } else if (c.format == "csv" || c.format == "text") {
    body = to_csv(t, provenance("compute " + what, c, true));
  } else {
    throw ConfigError("unknown format " + c.format);
  }
  emit(c, body);
  return 0;
}

void add_common(CLI::App* a, RunConfig& c) {
  a->add_option("--n", c.N, "number of sites")->capture_default_str();
  a->add_option("--ns", c.ns, "spin n_s (integer or half-integer)")->capture_default_str();
  a->add_option("--nus", c.nus, "spin nu_s")->capture_default_str();
  a->add_option("--seed", c.seed, "random seed")->capture_default_str();
  a->add_option("--tol", c.tol, "override every check tolerance");
  a->add_option("--samples", c.samples, "random points per pointwise identity")->capture_default_str();
  a->add_option("--format", c.format, "output format")
      ->check(CLI::IsMember({"json", "csv", "text"}))
      ->capture_default_str();
  a->add_option("--out", c.out, "output file (default stdout)");
  a->add_flag("--serial", c.serial, "run kernels on the serial reference path");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SL(2,C) spin magnet workbench"};
  app.set_config("--config", "", "key=value file ([verify] / [compute] sections), below flags");
  app.require_subcommand(1);
  RunConfig c;
  std::string suite, script, what;

  auto* verify = app.add_subcommand("verify", "run an invariant suite");
  verify->add_option("suite", suite, "primitives|algebra|kernels|rules|appendixB|eigenfunctions")->required();
  add_common(verify, c);

  auto* der = app.add_subcommand("derive", "run a scripted diagram derivation");
  der->add_option("script", script, "lambda1|exchange2|ll2|appendixB_2Ra|appendixB_2Ra_k2")->required();
  add_common(der, c);

  auto* comp = app.add_subcommand("compute", "tabulate a spectral quantity");
  comp->add_option("what", what, "measure|qD|energy|pairwise")->required();
  add_common(comp, c);
  comp->add_option("--grid", c.grid, "axes, e.g. nu=-2:2:0.1,n=-2:2");
  comp->add_option("--family", c.family, "A or B for measure")->capture_default_str();
  comp->add_option("--variant", c.variant, "energy variant: s or one_minus_s")->capture_default_str();
  comp->add_option("--u", c.u, "spectral parameter re,im for qD")->delimiter(',')->expected(2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    if (*verify) return cmd_verify(suite, c);
    if (*der) return cmd_derive(script, c);
    return cmd_compute(what, c);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
