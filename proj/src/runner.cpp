#include "vds/runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "vds/effective.hpp"
#include "vds/models.hpp"
#include "vds/observables.hpp"
#include "vds/parallel.hpp"
#include "vds/spectra.hpp"
#include "vds/topology.hpp"
#include "vds/vds_engine.hpp"

namespace vds::cli {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- schema

enum class Kind { number, integer, text, boolean };

struct Field {
  const char* name;
  Kind kind;
};

const std::vector<Field> kModelFields = {
    {"variant", Kind::text}, {"n", Kind::integer},        {"nx", Kind::integer},
    {"ny", Kind::integer},   {"omega_c", Kind::number},   {"J", Kind::number},
    {"delta", Kind::number}, {"m_creutz", Kind::number},  {"alpha", Kind::number},
    {"m_haldane", Kind::number}, {"t", Kind::number},     {"phi", Kind::number},
    {"bc", Kind::text}};

const std::vector<Field> kAtomFields = {{"omega0", Kind::number}, {"g", Kind::number},
                                        {"site", Kind::integer}, {"cell", Kind::text}};

struct ScenarioSpec {
  std::string name;
  std::vector<Variant> variants;  // first is the default
  std::vector<Field> options;
  json model_defaults;
};

const std::vector<ScenarioSpec>& specs() {
  const double half_pi = std::numbers::pi / 2;
  static const std::vector<ScenarioSpec> s = {
      {"dimer", {Variant::dimer}, {}, json{{"J", 1.0}}},
      {"mirror-bic",
       {Variant::chain},
       {{"length", Kind::integer}, {"s", Kind::integer}},
       json{{"J", 1.0}}},
      {"ssh-vds", {Variant::ssh}, {{"margin", Kind::number}}, json{{"n", 64}, {"delta", 0.5}}},
      {"creutz-vds",
       {Variant::creutz},
       {{"margin", Kind::number}},
       json{{"n", 20}, {"m_creutz", 0.5}, {"alpha", half_pi}}},
      {"haldane-vds",
       {Variant::haldane},
       {{"margin", Kind::number}},
       json{{"nx", 30}, {"ny", 30}, {"t", 0.1}, {"phi", half_pi}}},
      {"heff",
       {Variant::creutz, Variant::ssh, Variant::haldane},
       {{"margin", Kind::number}, {"oracle", Kind::boolean}},
       json{{"n", 20}, {"m_creutz", 0.5}, {"alpha", half_pi}, {"delta", 0.5}, {"t", 0.1},
            {"phi", half_pi}, {"nx", 12}, {"ny", 12}}},
      {"phase-diagram",
       {Variant::haldane},
       {{"phi_steps", Kind::integer},
        {"mt_steps", Kind::integer},
        {"t", Kind::number},
        {"nk", Kind::integer},
        {"mesh", Kind::integer},
        {"sublattice", Kind::integer},
        {"margin", Kind::number}},
       json::object()},
      {"robustness",
       {Variant::ssh, Variant::creutz, Variant::haldane},
       {{"detuning_min", Kind::number}, {"detuning_max", Kind::number}, {"steps", Kind::integer}},
       json{{"n", 64}, {"delta", 0.5}, {"m_creutz", 0.5}, {"alpha", half_pi}, {"t", 0.1},
            {"phi", half_pi}, {"nx", 12}, {"ny", 12}}},
  };
  return s;
}

const ScenarioSpec& spec_for(const std::string& name) {
  for (const auto& s : specs())
    if (s.name == name) return s;
  throw ConfigError("field 'scenario': unknown scenario '" + name + "'");
}

const Field* find_field(const std::vector<Field>& fields, const std::string& name) {
  for (const auto& f : fields)
    if (name == f.name) return &f;
  return nullptr;
}

void check_kind(const json& v, Kind kind, const std::string& path) {
  switch (kind) {
    case Kind::number:
      if (!v.is_number()) throw ConfigError("field '" + path + "': expected a number");
      break;
    case Kind::integer:
      if (!v.is_number_integer()) throw ConfigError("field '" + path + "': expected an integer");
      break;
    case Kind::text:
      if (!v.is_string()) throw ConfigError("field '" + path + "': expected a string");
      break;
    case Kind::boolean:
      if (!v.is_boolean()) throw ConfigError("field '" + path + "': expected true or false");
      break;
  }
}

void check_object(const json& obj, const std::vector<Field>& fields, const std::string& path) {
  if (!obj.is_object()) throw ConfigError("field '" + path + "': expected an object");
  for (const auto& [key, value] : obj.items()) {
    const Field* f = find_field(fields, key);
    if (!f) throw ConfigError("field '" + path + "." + key + "': unknown field");
    if (path.rfind("atoms", 0) == 0 && key == "cell") {
      if (!value.is_array() || value.size() != 3 ||
          !std::all_of(value.begin(), value.end(), [](const json& x) { return x.is_number_integer(); }))
        throw ConfigError("field '" + path + ".cell': expected [cell_x, cell_y, sublattice]");
      continue;
    }
    check_kind(value, f->kind, path + "." + key);
  }
}

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// ---------------------------------------------------------------- model

Boundary boundary_from(const std::string& s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "open") return Boundary::open;
  throw ConfigError("field 'model.bc': expected \"periodic\" or \"open\"");
}

json merged_model(const ScenarioConfig& cfg) {
  const auto& sp = spec_for(cfg.scenario);
  json m = sp.model_defaults;
  if (!m.contains("variant")) m["variant"] = to_string(sp.variants.front());
  for (const auto& [k, v] : cfg.model.items()) m[k] = v;
  return m;
}

ModelParams model_params(const ScenarioConfig& cfg) {
  const json m = merged_model(cfg);
  ModelParams p;
  try {
    p.variant = variant_from_string(m.at("variant").get<std::string>());
  } catch (const Error& e) {
    throw ConfigError(std::string("field 'model.variant': ") + e.what());
  }
  const auto& allowed = spec_for(cfg.scenario).variants;
  if (std::find(allowed.begin(), allowed.end(), p.variant) == allowed.end())
    throw ConfigError("field 'model.variant': scenario '" + cfg.scenario + "' does not support '" +
                      to_string(p.variant) + "'");
  auto num = [&](const char* k, double& out) {
    if (m.contains(k)) out = m[k].get<double>();
  };
  auto integer = [&](const char* k, int& out) {
    if (m.contains(k)) out = static_cast<int>(std::lround(m[k].get<double>()));
  };
  integer("n", p.n);
  integer("nx", p.nx);
  integer("ny", p.ny);
  num("omega_c", p.omega_c);
  num("J", p.J);
  num("delta", p.delta);
  num("m_creutz", p.m_creutz);
  num("alpha", p.alpha);
  num("m_haldane", p.m_haldane);
  num("t", p.t);
  num("phi", p.phi);
  if (m.contains("bc")) p.bc = boundary_from(m["bc"].get<std::string>());
  if (p.variant == Variant::chain && !cfg.model.contains("bc")) p.bc = Boundary::open;
  return p;
}

struct AtomInput {
  AtomSpec spec;
  bool has_omega0 = false;
};

SiteId default_site(const ModelParams& p) {
  switch (p.variant) {
    case Variant::dimer: return 0;
    case Variant::chain: return static_cast<SiteId>(p.n / 2);
    case Variant::haldane: return lattice_site(p, p.nx / 2, p.ny / 2, 0);
    default: return lattice_site(p, p.n / 2, 0, 0);
  }
}

std::vector<AtomInput> atom_inputs(const ScenarioConfig& cfg, const ModelParams& p) {
  std::vector<AtomInput> out;
  std::size_t k = 0;
  for (const auto& a : cfg.atoms) {
    AtomInput in;
    in.spec.g = a.value("g", 0.0);
    in.spec.omega0 = a.value("omega0", p.omega_c);
    in.has_omega0 = a.contains("omega0");
    if (a.contains("cell")) {
      const auto& c = a["cell"];
      const std::string field = "field 'atoms." + std::to_string(k) + ".cell': ";
      if (!c.is_array() || c.size() != 3)
        throw ConfigError(field + "expected [cell_x, cell_y, sublattice]");
      try {
        in.spec.site = lattice_site(p, c[0].get<int>(), c[1].get<int>(), c[2].get<int>());
      } catch (const json::exception&) {
        throw ConfigError(field + "entries must be integers");
      } catch (const Error& e) {
        throw ConfigError(field + e.what());
      }
    } else if (a.contains("site")) {
      in.spec.site = a["site"].get<SiteId>();
    } else {
      in.spec.site = default_site(p);
    }
    if (in.spec.g < 0.0)
      throw ConfigError("field 'atoms." + std::to_string(k) + ".g': must be non-negative");
    out.push_back(in);
    ++k;
  }
  if (out.empty()) {
    AtomInput in;
    in.spec = {p.omega_c, 0.0, default_site(p)};
    out.push_back(in);
  }
  return out;
}

double option(const ScenarioConfig& cfg, const char* key, double fallback) {
  return cfg.options.contains(key) ? cfg.options[key].get<double>() : fallback;
}

// ---------------------------------------------------------------- helpers

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

json gap_json(const GapInfo& g) { return json{{"omega_mid", g.omega_mid}, {"width", g.width}}; }

std::string fmt8(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.8g", x);
  return buf;
}

std::string csv_cell(const json& v) {
  if (v.is_number()) return fmt8(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_null()) return "NA";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string profile_csv(const BathGraph& bath, const CVector& psi) {
  std::ostringstream os;
  os << "i,cell_x,cell_y,sublattice,x,y,re,im,p\n";
  for (SiteId i = 0; i < bath.size(); ++i) {
    const SiteLabel l = bath.labels().empty() ? SiteLabel{static_cast<int>(i), 0, 0} : bath.labels()[i];
    const auto pos = bath.position(i);
    const cplx z = psi(static_cast<Eigen::Index>(i));
    os << i << ',' << l.cell_x << ',' << l.cell_y << ',' << l.sublattice << ',' << fmt8(pos[0])
       << ',' << fmt8(pos[1]) << ',' << fmt8(z.real()) << ',' << fmt8(z.imag()) << ','
       << fmt8(std::norm(z)) << '\n';
  }
  return os.str();
}

json state_json(const DressedState& ds, double residual) {
  return json{{"theta", ds.theta},
              {"phi", ds.phi_angle},
              {"epsilon", ds.epsilon},
              {"eta", ds.photon_only ? json(nullptr) : cjson(ds.eta)},
              {"photon_only", ds.photon_only},
              {"energy", ds.energy},
              {"residual", residual}};
}

GapInfo numeric_gap(const ModelParams& p) {
  const UnitCell cell = unit_cell(p);
  if (p.variant == Variant::haldane) return grid_gap(cell, p.nx, p.ny);
  return grid_gap(cell, p.n);
}

// ---------------------------------------------------------------- scenarios

ScenarioOutput run_dimer(const ScenarioConfig& cfg) {
  const ModelParams p = model_params(cfg);
  const BathGraph bath = build_model(p);
  const AtomInput in = atom_inputs(cfg, p).front();
  ScenarioOutput out;
  json cands = json::array();
  for (const auto& c : vds_candidates(bath, in.spec.site))
    cands.push_back(json{{"omega", c.omega}, {"multiplicity", c.multiplicity}});
  const auto states = vds_at(bath, in.spec);
  json js = json::array();
  for (const auto& ds : states) {
    json s = state_json(ds, verify_vds(ds, bath, in.spec));
    json psi = json::array();
    for (Eigen::Index i = 0; i < ds.psi.size(); ++i) psi.push_back(cjson(ds.psi(i)));
    s["psi"] = psi;
    js.push_back(s);
  }
  out.payload = json{{"candidates", cands}, {"g_over_J", in.spec.g / p.J}, {"states", js}};
  out.summary["n_vds"] = states.size();
  out.summary["g_over_J"] = in.spec.g / p.J;
  if (!states.empty() && !states.front().photon_only) {
    const auto& ds = states.front();
    out.summary["theta"] = ds.theta;
    out.summary["tan_theta"] = std::tan(ds.theta);
    out.summary["phi"] = ds.phi_angle;
    out.summary["residual"] = js.front()["residual"];
  }
  return out;
}

ScenarioOutput run_mirror(const ScenarioConfig& cfg) {
  const ModelParams p = model_params(cfg);
  const int length = static_cast<int>(option(cfg, "length", 400));
  const int s = static_cast<int>(option(cfg, "s", 3));
  const AtomInput in = atom_inputs(cfg, p).front();
  const auto r = bic_scan(p, length, s, in.spec.omega0, in.spec.g);
  ScenarioOutput out;
  out.payload = json{{"length", length}, {"s", s}, {"omega0", in.spec.omega0}, {"exists", r.exists}};
  out.summary["exists"] = r.exists;
  if (r.exists) {
    out.payload["state"] = state_json(*r.state, r.residual);
    out.payload["leak_probability"] = r.leak_probability;
    out.payload["exact_overlap"] = r.exact_overlap;
    out.summary["theta"] = r.state->theta;
    out.summary["residual"] = r.residual;
    out.summary["leak_probability"] = r.leak_probability;
    out.summary["exact_overlap"] = r.exact_overlap;
    ModelParams q = p;
    q.n = length;
    q.bc = Boundary::open;
    out.files.push_back({"profile.csv", profile_csv(build_model(q), r.state->psi)});
  }
  return out;
}

ScenarioOutput run_lattice_vds(const ScenarioConfig& cfg) {
  const ModelParams p = model_params(cfg);
  const BathGraph bath = build_model(p);
  AtomInput in = atom_inputs(cfg, p).front();
  const SiteId v = in.spec.site;
  const GapInfo ga = analytic_gap(p);
  const GapInfo gn = numeric_gap(p);
  const auto vac = vacancy_ingap_states(bath, v, gn, option(cfg, "margin", 0.01));
  if (vac.empty()) throw Error("no vacancy bound state inside the gap");
  if (!in.has_omega0) in.spec.omega0 = vac.front().energy;
  const DressedState ds = make_vds(bath, in.spec, restrict_to_vacancy(vac.front().psi, v));
  const double residual = verify_vds(ds, bath, in.spec);
  const auto loc = localization(vac.front().psi, bath, v);

  ScenarioOutput out;
  out.payload = json{{"site", v},
                     {"gap_analytic", gap_json(ga)},
                     {"gap_numeric", gap_json(gn)},
                     {"ingap_count", vac.size()},
                     {"vacancy_energy", vac.front().energy},
                     {"boundary_element",
                      cjson(boundary_element(bath, v, restrict_to_vacancy(vac.front().psi, v)))},
                     {"state", state_json(ds, residual)},
                     {"ipr", loc.ipr},
                     {"decay_length", loc.decay_length ? json(*loc.decay_length) : json(nullptr)}};
  auto& sm = out.summary;
  sm["gap_mid"] = gn.omega_mid;
  sm["gap_width"] = gn.width;
  sm["gap_width_analytic"] = ga.width;
  sm["ingap_count"] = vac.size();
  sm["vacancy_energy"] = vac.front().energy;
  sm["theta"] = ds.theta;
  sm["phi"] = ds.phi_angle;
  sm["eta_abs"] = std::abs(ds.eta);
  sm["eta_arg"] = std::arg(ds.eta);
  sm["residual"] = residual;
  sm["ipr"] = loc.ipr;
  sm["decay_length"] = loc.decay_length ? json(*loc.decay_length) : json(nullptr);

  const RVector prob = probability_density(vac.front().psi);
  if (p.variant == Variant::ssh) {
    const int sub_v = bath.labels()[v].sublattice;
    double same = 0.0;
    double mean = 0.0;
    for (SiteId i = 0; i < bath.size(); ++i) {
      if (bath.labels()[i].sublattice == sub_v) same += prob(static_cast<Eigen::Index>(i));
      mean += prob(static_cast<Eigen::Index>(i)) * (bath.position(i)[0] - bath.position(v)[0]);
    }
    sm["same_sublattice_weight"] = same;
    sm["mean_offset"] = mean;
    out.payload["same_sublattice_weight"] = same;
    out.payload["mean_offset"] = mean;
  }
  if (p.variant == Variant::haldane) {
    const CurrentField f = bond_currents(bath, vac.front().psi);
    const auto ext = current_extremum(f);
    const double kirchhoff = f.outflow().cwiseAbs().maxCoeff();
    const double circ = circulation(f, ring_around(bath, v, 1.0));
    out.payload["currents"] = json{{"edges", f.edges.size()},
                                   {"max_abs", ext.value},
                                   {"max_edge", json::array({ext.i, ext.j})},
                                   {"kirchhoff_defect", kirchhoff},
                                   {"circulation", circ}};
    sm["current_max"] = ext.value;
    sm["kirchhoff_defect"] = kirchhoff;
    sm["circulation"] = circ;
    sm["edges"] = f.edges.size();
    out.files.push_back({"currents.csv", current_csv(bath, f)});
  }
  out.files.push_back({"profile.csv", profile_csv(bath, vac.front().psi)});
  return out;
}

ScenarioOutput run_heff(const ScenarioConfig& cfg) {
  const ModelParams p = model_params(cfg);
  const BathGraph bath = build_model(p);
  auto inputs = atom_inputs(cfg, p);
  if (inputs.size() < 2) throw ConfigError("field 'atoms': heff needs at least two atoms");
  const GapInfo gap = numeric_gap(p);
  std::vector<AtomSpec> atoms;
  for (const auto& a : inputs) atoms.push_back(a.spec);
  const CouplingMatrix cm = coupling_matrix(bath, atoms, gap);
  for (std::size_t k = 0; k < atoms.size(); ++k)
    if (!inputs[k].has_omega0) atoms[k].omega0 = cm.profiles[k].energy;
  const CMatrix heff = effective_hamiltonian(cm);

  ScenarioOutput out;
  std::ostringstream csv;
  csv << "row,col,K_re,K_im,K_abs,K_arg,H_re,H_im\n";
  json kj = json::array();
  for (Eigen::Index r = 0; r < cm.K.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < cm.K.cols(); ++c) {
      row.push_back(cjson(cm.K(r, c)));
      csv << r << ',' << c << ',' << fmt8(cm.K(r, c).real()) << ',' << fmt8(cm.K(r, c).imag())
          << ',' << fmt8(std::abs(cm.K(r, c))) << ',' << fmt8(std::arg(cm.K(r, c))) << ','
          << fmt8(heff(r, c).real()) << ',' << fmt8(heff(r, c).imag()) << '\n';
    }
    kj.push_back(row);
  }
  json energies = json::array();
  for (const auto& pr : cm.profiles) energies.push_back(pr.energy);
  out.payload = json{{"gap", gap_json(gap)}, {"K", kj}, {"profile_energies", energies}};
  out.summary["K01_abs"] = std::abs(cm.K(0, 1));
  out.summary["K01_arg"] = std::arg(cm.K(0, 1));
  out.summary["H01_abs"] = std::abs(heff(0, 1));
  out.summary["H01_arg"] = std::arg(heff(0, 1));
  if (!cfg.options.contains("oracle") || cfg.options["oracle"].get<bool>()) {
    const auto sr = splitting_oracle(bath, atoms[0], atoms[1], gap);
    out.payload["oracle"] = json{{"h", cjson(sr.h)}, {"splitting", sr.splitting}, {"resolved", sr.resolved}};
    out.summary["oracle_abs"] = std::abs(sr.h);
    out.summary["oracle_arg"] = std::arg(sr.h);
    out.summary["oracle_rel_err"] = std::abs(std::abs(sr.h) - std::abs(heff(0, 1))) / std::abs(heff(0, 1));
    out.summary["oracle_phase_err"] = std::abs(std::arg(sr.h / heff(0, 1)));
  }
  out.files.push_back({"kmatrix.csv", csv.str()});
  return out;
}

ScenarioOutput run_phase(const ScenarioConfig& cfg, unsigned workers) {
  PhaseOptions opt;
  opt.phi_steps = static_cast<int>(option(cfg, "phi_steps", opt.phi_steps));
  opt.mt_steps = static_cast<int>(option(cfg, "mt_steps", opt.mt_steps));
  opt.t = option(cfg, "t", opt.t);
  opt.nk = static_cast<int>(option(cfg, "nk", opt.nk));
  opt.mesh = static_cast<int>(option(cfg, "mesh", opt.mesh));
  opt.sublattice = static_cast<int>(option(cfg, "sublattice", opt.sublattice));
  opt.margin = option(cfg, "margin", opt.margin);
  opt.workers = workers;
  const auto pts = phase_diagram(opt);
  std::size_t defined = 0, topo = 0, bs = 0, agree = 0, errors = 0;
  for (const auto& pt : pts) {
    if (!pt.error.empty()) ++errors;
    if (pt.chern) ++defined;
    const bool t = pt.chern && std::abs(*pt.chern) == 1;
    topo += t;
    bs += pt.bs_exists;
    agree += pt.chern && (t == pt.bs_exists);
  }
  ScenarioOutput out;
  out.payload = json{{"points", pts.size()},     {"chern_defined", defined},
                     {"topological", topo},      {"bs_exists", bs},
                     {"agreement", agree},       {"errors", errors}};
  out.summary = out.payload;
  out.files.push_back({"phase_diagram.csv", phase_csv(pts)});
  return out;
}

ScenarioOutput run_robustness(const ScenarioConfig& cfg) {
  const ModelParams p = model_params(cfg);
  const BathGraph bath = build_model(p);
  const AtomSpec atom = atom_inputs(cfg, p).front().spec;
  const GapInfo gap = numeric_gap(p);
  const double g = atom.g;
  const double lo = option(cfg, "detuning_min", -2.0 * g);
  const double hi = option(cfg, "detuning_max", 2.0 * g);
  const int steps = static_cast<int>(option(cfg, "steps", 21));
  if (steps < 1) throw ConfigError("field 'options.steps': must be positive");
  std::vector<double> grid;
  for (int k = 0; k < steps; ++k) grid.push_back(steps == 1 ? lo : lo + (hi - lo) * k / (steps - 1));
  const auto curve = detuning_robustness(bath, atom, gap, grid);

  ScenarioOutput out;
  std::ostringstream csv;
  csv << "detuning,fidelity,in_gap\n";
  json pts = json::array();
  double best = -1.0, best_at = 0.0, min_within = 1.0;
  for (const auto& c : curve) {
    csv << fmt8(c.detuning) << ',' << fmt8(c.fidelity) << ',' << (c.in_gap ? 1 : 0) << '\n';
    pts.push_back(json{{"detuning", c.detuning}, {"fidelity", c.fidelity}, {"in_gap", c.in_gap}});
    if (c.fidelity > best) {
      best = c.fidelity;
      best_at = c.detuning;
    }
    if (std::abs(c.detuning) <= g * (1.0 + 1e-12)) min_within = std::min(min_within, c.fidelity);
  }
  out.payload = json{{"gap", gap_json(gap)}, {"g", g}, {"curve", pts}};
  out.summary["g_over_gap"] = g / gap.width;
  out.summary["peak_detuning"] = best_at;
  out.summary["peak_fidelity"] = best;
  out.summary["min_fidelity_within_g"] = min_within;
  out.files.push_back({"robustness.csv", csv.str()});
  return out;
}

// ---------------------------------------------------------------- output

void round_numbers(json& j) {
  if (j.is_number_float()) {
    const double x = j.get<double>();
    if (!std::isfinite(x)) {
      j = nullptr;
      return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    j = std::strtod(buf, nullptr);
    return;
  }
  if (j.is_structured())
    for (auto& e : j) round_numbers(e);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << content;
}

std::string summary_csv(const json& s) {
  std::ostringstream os;
  os << "key,value\n";
  for (const auto& [k, v] : s.items()) os << k << ',' << csv_cell(v) << '\n';
  return os.str();
}

json set_path(json doc, const std::string& path, double value) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  json* node = &doc;
  if (parts[0] == "atom") parts = {"atoms", "0", parts[1]};
  for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
    if (node->is_array()) {
      const auto idx = static_cast<std::size_t>(std::stoul(parts[k]));
      while (node->size() <= idx) node->push_back(json::object());
      node = &(*node)[idx];
    } else {
      if (!node->contains(parts[k]))
        (*node)[parts[k]] = parts[k] == "atoms" ? json::array() : json::object();
      node = &(*node)[parts[k]];
    }
  }
  (*node)[parts.back()] = value;
  return doc;
}

bool integer_parameter(const ScenarioConfig& cfg, const std::string& path) {
  const auto dot = path.find('.');
  const std::string head = path.substr(0, dot);
  const std::string tail = path.substr(path.rfind('.') + 1);
  const std::vector<Field>* fields = nullptr;
  if (head == "model") fields = &kModelFields;
  else if (head == "options") fields = &spec_for(cfg.scenario).options;
  else fields = &kAtomFields;
  const Field* f = find_field(*fields, tail);
  return f && f->kind == Kind::integer;
}

void validate_axis(const ScenarioConfig& cfg, const SweepAxis& ax, const std::string& where) {
  std::vector<std::string> parts;
  std::stringstream ss(ax.parameter);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  auto bad = [&](const std::string& why) {
    throw ConfigError("field '" + where + ".parameter': " + why + " ('" + ax.parameter + "')");
  };
  auto numeric = [](const Field* f) { return f && (f->kind == Kind::number || f->kind == Kind::integer); };
  if (parts.size() == 2 && parts[0] == "model") {
    if (!numeric(find_field(kModelFields, parts[1]))) bad("not a numeric model parameter");
  } else if (parts.size() == 2 && parts[0] == "options") {
    if (!numeric(find_field(spec_for(cfg.scenario).options, parts[1])))
      bad("not a numeric option of scenario '" + cfg.scenario + "'");
  } else if ((parts.size() == 2 && parts[0] == "atom") ||
             (parts.size() == 3 && parts[0] == "atoms")) {
    const std::string& f = parts.back();
    if (f != "g" && f != "omega0") bad("only atom g and omega0 can be swept");
    if (parts.size() == 3) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(parts[1]);
      } catch (...) {
        bad("atom index must be an integer");
      }
      if (idx >= std::max<std::size_t>(1, cfg.atoms.size())) bad("atom index out of range");
    }
  } else {
    bad("expected model.<field>, atom.<field>, atoms.<k>.<field> or options.<key>");
  }
  if (ax.steps < 1) throw ConfigError("field '" + where + ".steps': must be at least 1");
}

}  // namespace

// ---------------------------------------------------------------- public

double SweepAxis::value(int k) const {
  return steps == 1 ? start : start + (stop - start) * k / (steps - 1);
}

std::size_t ScenarioConfig::grid_size() const {
  std::size_t n = 1;
  for (const auto& a : sweep) n *= static_cast<std::size_t>(a.steps);
  return n;
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& s : specs()) n.push_back(s.name);
    return n;
  }();
  return names;
}

ScenarioConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte);
    std::string what = e.what();
    const auto pos = what.find("parse error");
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                      (pos == std::string::npos ? what : what.substr(pos)));
  }
  if (!doc.is_object()) throw ConfigError("line 1: configuration must be a JSON object");

  static const std::set<std::string> top = {"schema_version", "scenario", "model",   "atom",
                                            "atoms",          "options",  "sweep",   "output",
                                            "workers",        "grid_cap"};
  for (const auto& [k, _] : doc.items())
    if (!top.count(k)) throw ConfigError("field '" + k + "': unknown field");

  if (!doc.contains("schema_version")) throw ConfigError("field 'schema_version': missing");
  check_kind(doc["schema_version"], Kind::integer, "schema_version");
  if (doc["schema_version"].get<int>() != kSchemaVersion)
    throw ConfigError("field 'schema_version': unsupported version " +
                      std::to_string(doc["schema_version"].get<int>()) + " (expected " +
                      std::to_string(kSchemaVersion) + ")");
  if (!doc.contains("scenario")) throw ConfigError("field 'scenario': missing");
  check_kind(doc["scenario"], Kind::text, "scenario");

  ScenarioConfig cfg;
  cfg.raw = doc;
  cfg.scenario = doc["scenario"].get<std::string>();
  const auto& sp = spec_for(cfg.scenario);

  if (doc.contains("model")) {
    check_object(doc["model"], kModelFields, "model");
    cfg.model = doc["model"];
  }
  if (doc.contains("atom") && doc.contains("atoms"))
    throw ConfigError("field 'atom': give either 'atom' or 'atoms', not both");
  if (doc.contains("atom")) cfg.atoms = json::array({doc["atom"]});
  if (doc.contains("atoms")) {
    if (!doc["atoms"].is_array()) throw ConfigError("field 'atoms': expected an array");
    cfg.atoms = doc["atoms"];
  }
  for (std::size_t k = 0; k < cfg.atoms.size(); ++k) {
    const std::string path = "atoms." + std::to_string(k);
    check_object(cfg.atoms[k], kAtomFields, path);
    if (cfg.atoms[k].contains("site") && cfg.atoms[k].contains("cell"))
      throw ConfigError("field '" + path + "': give either 'site' or 'cell', not both");
  }
  if (doc.contains("options")) {
    check_object(doc["options"], sp.options, "options");
    cfg.options = doc["options"];
  }
  if (doc.contains("output")) {
    check_kind(doc["output"], Kind::text, "output");
    cfg.output = doc["output"].get<std::string>();
  }
  if (doc.contains("workers")) {
    check_kind(doc["workers"], Kind::integer, "workers");
    if (doc["workers"].get<int>() < 1) throw ConfigError("field 'workers': must be at least 1");
    cfg.workers = doc["workers"].get<unsigned>();
  }
  if (doc.contains("grid_cap")) {
    check_kind(doc["grid_cap"], Kind::integer, "grid_cap");
    if (doc["grid_cap"].get<long long>() < 1) throw ConfigError("field 'grid_cap': must be at least 1");
    cfg.grid_cap = doc["grid_cap"].get<std::size_t>();
  }
  if (doc.contains("sweep")) {
    if (!doc["sweep"].is_array()) throw ConfigError("field 'sweep': expected an array of axes");
    for (std::size_t k = 0; k < doc["sweep"].size(); ++k) {
      const auto& a = doc["sweep"][k];
      const std::string where = "sweep." + std::to_string(k);
      check_object(a,
                   {{"parameter", Kind::text}, {"start", Kind::number}, {"stop", Kind::number},
                    {"steps", Kind::integer}},
                   where);
      for (const char* key : {"parameter", "start", "stop", "steps"})
        if (!a.contains(key)) throw ConfigError("field '" + where + "." + key + "': missing");
      SweepAxis ax{a["parameter"].get<std::string>(), a["start"].get<double>(),
                   a["stop"].get<double>(), a["steps"].get<int>()};
      validate_axis(cfg, ax, where);
      cfg.sweep.push_back(ax);
    }
    if (cfg.grid_size() > cfg.grid_cap)
      throw ConfigError("field 'sweep': " + std::to_string(cfg.grid_size()) +
                        " grid points exceed the cap of " + std::to_string(cfg.grid_cap));
  }

  // semantic checks on the base point
  try {
    const ModelParams p = model_params(cfg);
    validate(p);
    const auto atoms = atom_inputs(cfg, p);
    const std::size_t m = p.variant == Variant::dimer ? 2
                          : p.variant == Variant::haldane
                              ? static_cast<std::size_t>(2 * p.nx * p.ny)
                              : static_cast<std::size_t>(p.n) *
                                    (p.variant == Variant::chain ? 1 : 2);
    for (std::size_t k = 0; k < atoms.size(); ++k)
      if (atoms[k].spec.site >= m && cfg.scenario != "mirror-bic")
        throw ConfigError("field 'atoms." + std::to_string(k) + "': site " +
                          std::to_string(atoms[k].spec.site) + " outside the bath");
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("field 'model': ") + e.what());
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

ScenarioOutput run_scenario(const ScenarioConfig& cfg, unsigned workers) {
  try {
    const std::string& s = cfg.scenario;
    if (s == "dimer") return run_dimer(cfg);
    if (s == "mirror-bic") return run_mirror(cfg);
    if (s == "ssh-vds" || s == "creutz-vds" || s == "haldane-vds") return run_lattice_vds(cfg);
    if (s == "heff") return run_heff(cfg);
    if (s == "phase-diagram") return run_phase(cfg, workers);
    if (s == "robustness") return run_robustness(cfg);
    throw ConfigError("field 'scenario': unknown scenario '" + s + "'");
  } catch (const std::exception& e) {
    ScenarioOutput out;
    out.failed = true;
    out.payload = json{{"error", e.what()}};
    out.summary = json{{"error", e.what()}};
    return out;
  }
}

ScenarioConfig grid_point(const ScenarioConfig& cfg, std::size_t k) {
  json doc{{"model", cfg.model}, {"atoms", cfg.atoms}, {"options", cfg.options}};
  std::size_t rest = k;
  for (std::size_t a = cfg.sweep.size(); a-- > 0;) {
    const auto& ax = cfg.sweep[a];
    const int idx = static_cast<int>(rest % static_cast<std::size_t>(ax.steps));
    rest /= static_cast<std::size_t>(ax.steps);
    double v = ax.value(idx);
    if (integer_parameter(cfg, ax.parameter)) v = std::round(v);
    doc = set_path(doc, ax.parameter, v);
  }
  ScenarioConfig out = cfg;
  out.sweep.clear();
  out.model = doc["model"];
  out.atoms = doc["atoms"];
  out.options = doc["options"];
  // integer-typed fields must stay integers for later reads
  for (auto* obj : {&out.model, &out.options})
    for (auto& [key, val] : obj->items())
      if (val.is_number_float() && integer_parameter(cfg, (obj == &out.model ? "model." : "options.") + key))
        val = static_cast<long long>(std::llround(val.get<double>()));
  return out;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[md[k] >> 4];
    out += hex[md[k] & 15];
  }
  return out;
}

std::string dump_results(const json& j) {
  json copy = j;
  round_numbers(copy);
  return copy.dump(2) + "\n";
}

RunRecord execute(const ScenarioConfig& cfg, const RunOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.out_dir = opt.out_dir.empty() ? cfg.output : opt.out_dir;
  const fs::path dir(rec.out_dir);
  fs::create_directories(dir);
  const unsigned workers = std::max(1u, opt.workers);

  json results{{"tool", kToolVersion},
               {"schema_version", kSchemaVersion},
               {"scenario", cfg.scenario},
               {"config", cfg.raw}};
  std::vector<Artifact> files;

  if (cfg.sweep.empty()) {
    ScenarioOutput out = run_scenario(cfg, workers);
    rec.ok = !out.failed;
    results["results"] = out.payload;
    files.push_back({"summary.csv", summary_csv(out.summary)});
    for (auto& f : out.files) files.push_back(std::move(f));
  } else {
    const std::size_t n = cfg.grid_size();
    std::vector<ScenarioOutput> outs(n);
    parallel_for(n, workers, [&](std::size_t k) { outs[k] = run_scenario(grid_point(cfg, k), 1); });

    // columns: sweep parameters then summary keys in first-seen order
    std::vector<std::string> keys;
    for (const auto& o : outs)
      for (const auto& [key, _] : o.summary.items())
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    std::ostringstream csv;
    csv << "point";
    for (const auto& ax : cfg.sweep) csv << ',' << ax.parameter;
    for (const auto& key : keys) csv << ',' << key;
    csv << '\n';

    json points = json::array();
    for (std::size_t k = 0; k < n; ++k) {
      const ScenarioConfig pc = grid_point(cfg, k);
      json params = json::object();
      std::size_t rest = k;
      std::vector<double> vals(cfg.sweep.size());
      for (std::size_t a = cfg.sweep.size(); a-- > 0;) {
        const auto& ax = cfg.sweep[a];
        vals[a] = ax.value(static_cast<int>(rest % static_cast<std::size_t>(ax.steps)));
        if (integer_parameter(cfg, ax.parameter)) vals[a] = std::round(vals[a]);
        rest /= static_cast<std::size_t>(ax.steps);
      }
      for (std::size_t a = 0; a < vals.size(); ++a) params[cfg.sweep[a].parameter] = vals[a];
      points.push_back(json{{"point", k}, {"parameters", params}, {"result", outs[k].payload}});
      rec.ok = rec.ok && !outs[k].failed;

      csv << k;
      for (double v : vals) csv << ',' << fmt8(v);
      for (const auto& key : keys)
        csv << ',' << (outs[k].summary.contains(key) ? csv_cell(outs[k].summary[key]) : "NA");
      csv << '\n';
      char prefix[32];
      std::snprintf(prefix, sizeof prefix, "point_%05zu_", k);
      for (auto& f : outs[k].files) files.push_back({prefix + f.name, std::move(f.content)});
    }
    results["sweep"] = json::array();
    for (const auto& ax : cfg.sweep)
      results["sweep"].push_back(
          json{{"parameter", ax.parameter}, {"start", ax.start}, {"stop", ax.stop}, {"steps", ax.steps}});
    results["results"] = points;
    files.insert(files.begin(), {"summary.csv", csv.str()});
  }

  files.insert(files.begin(), {"results.json", dump_results(results)});
  for (const auto& f : files) {
    write_file(dir / f.name, f.content);
    rec.checksums[f.name] = sha256_hex(f.content);
  }
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json record{{"tool", kToolVersion},
              {"scenario", cfg.scenario},
              {"workers", workers},
              {"seedless", opt.seedless},
              {"wall_seconds", rec.wall_seconds},
              {"ok", rec.ok},
              {"checksums", json::object()}};
  for (const auto& [name, sum] : rec.checksums) record["checksums"][name] = sum;
  write_file(dir / "record.json", record.dump(2) + "\n");
  return rec;
}

}  // namespace vds::cli
