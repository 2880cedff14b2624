#include "vds/models.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace vds {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::dimer: return "dimer";
    case Variant::chain: return "chain";
    case Variant::ssh: return "ssh";
    case Variant::creutz: return "creutz";
    case Variant::haldane: return "haldane";
  }
  return "?";
}

Variant variant_from_string(const std::string& name) {
  for (auto v : {Variant::dimer, Variant::chain, Variant::ssh, Variant::creutz, Variant::haldane})
    if (to_string(v) == name) return v;
  throw Error("unknown model variant '" + name + "'");
}

void validate(const ModelParams& p) {
  if (!(p.J > 0.0)) throw Error("model.J: energy scale must be positive");
  if (p.variant != Variant::dimer && p.variant != Variant::haldane && p.n < 2)
    throw Error("model.n: need at least 2 cells");
  if (p.variant == Variant::ssh && std::abs(p.delta) > 1.0)
    throw Error("model.delta: dimerization must satisfy |delta| <= 1");
  if (p.variant == Variant::creutz && std::abs(p.m_creutz) > 1.0)
    throw Error("model.m_creutz: must satisfy |m| <= 1");
  if (p.variant == Variant::haldane) {
    if (p.nx < 2 || p.ny < 2) throw Error("model.nx/ny: need at least 2x2 cells");
    if (p.t < 0.0) throw Error("model.t: NNN ratio must be non-negative");
  }
}

UnitCell unit_cell(const ModelParams& p) {
  validate(p);
  const double J = p.J;
  const double wc = p.omega_c;
  UnitCell c;
  switch (p.variant) {
    case Variant::chain:
      c.onsite = {wc};
      c.hoppings = {{0, 0, 1, 0, -J}};
      c.basis = {{0.0, 0.0}};
      break;
    case Variant::ssh:
      c.onsite = {wc, wc};
      c.hoppings = {{0, 1, 0, 0, J * (1.0 - p.delta)},   // intracell a-b
                    {1, 0, 1, 0, J * (1.0 + p.delta)}};  // b_n -> a_{n+1}
      c.basis = {{0.0, 0.0}, {0.5, 0.0}};
      break;
    case Variant::creutz: {
      const cplx up = J * std::polar(1.0, -p.alpha);
      const cplx down = J * std::polar(1.0, p.alpha);
      c.onsite = {wc, wc};
      c.hoppings = {{0, 1, 0, 0, -2.0 * p.m_creutz * J},  // rung
                    {0, 0, 1, 0, up},                      // a_n -> a_{n+1}
                    {1, 1, 1, 0, down},                    // b_n -> b_{n+1}
                    {0, 1, 1, 0, J},                       // diagonals
                    {1, 0, 1, 0, J}};
      c.basis = {{0.0, 0.5}, {0.0, -0.5}};
      break;
    }
    case Variant::haldane: {
      const double s3 = std::sqrt(3.0);
      c.dimensions = 2;
      c.onsite = {wc + p.m_haldane * J, wc - p.m_haldane * J};
      c.a1 = {s3, 0.0};
      c.a2 = {0.5 * s3, 1.5};
      c.basis = {{0.0, 0.0}, {0.5 * s3, 0.5}};
      c.hoppings = {{0, 1, 0, 0, J}, {0, 1, -1, 0, J}, {0, 1, 0, -1, J}};
      // these three shifts wind counter-clockwise around a hexagon for
      // sublattice a and clockwise for b
      const int shifts[3][2] = {{-1, 0}, {1, -1}, {0, 1}};
      const cplx ja = p.t * J * std::polar(1.0, p.phi);
      for (const auto& s : shifts) {
        c.hoppings.push_back({0, 0, s[0], s[1], ja});
        c.hoppings.push_back({1, 1, s[0], s[1], std::conj(ja)});
      }
      break;
    }
    case Variant::dimer:
      throw Error("unit_cell: the dimer is not a lattice");
  }
  return c;
}

CMatrix bloch_hamiltonian(const UnitCell& cell, double k1, double k2) {
  const auto d = static_cast<Eigen::Index>(cell.onsite.size());
  CMatrix h = CMatrix::Zero(d, d);
  for (Eigen::Index s = 0; s < d; ++s) h(s, s) = cell.onsite[s];
  for (const auto& hop : cell.hoppings) {
    const cplx phase = std::polar(1.0, -(k1 * hop.dx + k2 * hop.dy));
    h(hop.to, hop.from) += hop.value * phase;
    h(hop.from, hop.to) += std::conj(hop.value * phase);
  }
  return h;
}

namespace {

BathGraph dimer(const ModelParams& p) {
  // site 0 is the atom's cavity v, site 1 its partner
  BathMetadata meta{1, 1, Boundary::open};
  return BathGraph({p.omega_c, p.omega_c}, {{0, 1, -p.J}}, meta, {{0, 0, 0}, {1, 0, 0}},
                   {{{0.0, 0.0}}, {{1.0, 0.0}}});
}

BathGraph tile(const ModelParams& p, const UnitCell& cell) {
  const int nx = cell.dimensions == 2 ? p.nx : p.n;
  const int ny = cell.dimensions == 2 ? p.ny : 1;
  const int d = static_cast<int>(cell.onsite.size());
  const bool periodic = p.bc == Boundary::periodic;
  auto index = [&](int x, int y, int s) {
    return static_cast<SiteId>((y * nx + x) * d + s);
  };

  const std::size_t m = static_cast<std::size_t>(nx) * ny * d;
  std::vector<double> omega(m);
  std::vector<SiteLabel> labels(m);
  std::vector<std::array<double, 2>> pos(m);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x)
      for (int s = 0; s < d; ++s) {
        const SiteId i = index(x, y, s);
        omega[i] = cell.onsite[s];
        labels[i] = {x, y, s};
        pos[i] = {x * cell.a1[0] + y * cell.a2[0] + cell.basis[s][0],
                  x * cell.a1[1] + y * cell.a2[1] + cell.basis[s][1]};
      }

  // accumulate H(lo, hi) so that wrapped bonds on small meshes add up
  std::map<std::pair<SiteId, SiteId>, cplx> acc;
  std::vector<std::pair<SiteId, SiteId>> order;
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x)
      for (const auto& hop : cell.hoppings) {
        int tx = x + hop.dx;
        int ty = y + hop.dy;
        if (!periodic && (tx < 0 || tx >= nx || ty < 0 || ty >= ny)) continue;
        tx = (tx % nx + nx) % nx;
        ty = (ty % ny + ny) % ny;
        const SiteId from = index(x, y, hop.from);
        const SiteId to = index(tx, ty, hop.to);
        if (from == to) {
          omega[from] += 2.0 * hop.value.real();
          continue;
        }
        const auto key = std::minmax(from, to);
        const cplx oriented = to < from ? hop.value : std::conj(hop.value);
        auto [it, inserted] = acc.emplace(key, oriented);
        if (inserted) order.push_back(key);
        else it->second += oriented;
      }

  std::vector<Coupling> couplings;
  couplings.reserve(order.size());
  for (const auto& key : order) {
    const cplx v = acc[key];
    if (std::abs(v) == 0.0) continue;
    couplings.push_back({key.first, key.second, v});
  }
  BathMetadata meta{d, 1, p.bc};
  return BathGraph(std::move(omega), std::move(couplings), meta, std::move(labels),
                   std::move(pos));
}

}  // namespace

BathGraph build_model(const ModelParams& p) {
  validate(p);
  if (p.variant == Variant::dimer) return dimer(p);
  return tile(p, unit_cell(p));
}

GapInfo analytic_gap(const ModelParams& p) {
  validate(p);
  const double J = p.J;
  switch (p.variant) {
    case Variant::ssh:
      return {p.omega_c, 4.0 * std::abs(p.delta) * J};
    case Variant::creutz: {
      const double dp = std::abs(p.m_creutz + 1.0);
      const double dm = std::abs(p.m_creutz - 1.0);
      const double c = 2.0 * std::cos(p.alpha);
      // band edges sit at k = 0 and k = pi
      const double upper = std::min(2.0 * dp - c, 2.0 * dm + c);
      const double lower = std::max(-2.0 * dp - c, -2.0 * dm + c);
      const double w = std::min({4.0 * dp, 4.0 * dm, 2.0 * (dp + dm + c), 2.0 * (dp + dm - c)});
      return {p.omega_c + 0.5 * (upper + lower) * J, std::max(0.0, w) * J};
    }
    case Variant::haldane: {
      const double closing = 3.0 * std::sqrt(3.0) * p.t * std::abs(std::sin(p.phi));
      return {p.omega_c - 3.0 * p.t * std::cos(p.phi) * J,
              2.0 * std::abs(std::abs(p.m_haldane) - closing) * J};
    }
    case Variant::dimer:
    case Variant::chain:
      break;
  }
  throw Error("analytic_gap: no closed-form gap for variant '" + to_string(p.variant) + "'");
}

double chain_dispersion(const ModelParams& p, double k) {
  if (p.variant != Variant::chain) throw Error("chain_dispersion: variant must be chain");
  return p.omega_c - 2.0 * p.J * std::cos(k);
}

SiteId lattice_site(const ModelParams& p, int cell_x, int cell_y, int sublattice) {
  const int nx = p.variant == Variant::haldane ? p.nx : (p.variant == Variant::dimer ? 2 : p.n);
  const int ny = p.variant == Variant::haldane ? p.ny : 1;
  const int d = (p.variant == Variant::dimer || p.variant == Variant::chain) ? 1 : 2;
  if (cell_x < 0 || cell_x >= nx || cell_y < 0 || cell_y >= ny || sublattice < 0 ||
      sublattice >= d)
    throw Error("lattice_site: (" + std::to_string(cell_x) + ", " + std::to_string(cell_y) +
                ", " + std::to_string(sublattice) + ") is outside the lattice");
  switch (p.variant) {
    case Variant::dimer: return static_cast<SiteId>(cell_x);
    case Variant::chain: return static_cast<SiteId>(cell_x);
    case Variant::ssh:
    case Variant::creutz: return static_cast<SiteId>(2 * cell_x + sublattice);
    case Variant::haldane: return static_cast<SiteId>(2 * (cell_y * p.nx + cell_x) + sublattice);
  }
  return 0;
}

}  // namespace vds
