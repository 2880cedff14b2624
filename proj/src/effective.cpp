#include "vds/effective.hpp"

#include <algorithm>
#include <cmath>

#include "vds/spectra.hpp"
#include "vds/vds_engine.hpp"

namespace vds {

VacancyProfile vacancy_profile(const BathGraph& bath, SiteId nu, const GapInfo& gap,
                               double margin) {
  const auto states = vacancy_ingap_states(bath, nu, gap, margin);
  if (states.empty())
    throw Error("vacancy_profile: no vacancy bound state in the gap for site " +
                std::to_string(nu));
  VacancyProfile p;
  p.nu = nu;
  p.energy = states.front().energy;
  p.psi = states.front().psi;
  p.boundary = boundary_element(bath, nu, restrict_to_vacancy(p.psi, nu));
  return p;
}

CouplingMatrix coupling_matrix(const BathGraph& bath, const std::vector<AtomSpec>& atoms,
                               const GapInfo& gap) {
  const auto n = static_cast<Eigen::Index>(atoms.size());
  CouplingMatrix cm;
  cm.K = CMatrix::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const SiteId s = atoms[a].site;
    if (s >= bath.size()) throw Error("coupling_matrix: atom site out of range");
    for (Eigen::Index b = 0; b < a; ++b)
      if (atoms[b].site == s) throw Error("coupling_matrix: duplicate atom site");
    const int sub = bath.labels().empty() ? 0 : bath.labels()[s].sublattice;
    cm.atoms.push_back({static_cast<std::size_t>(a), s, sub});
  }
  if (n < 2) return cm;
  for (Eigen::Index nu = 0; nu < n; ++nu) {
    auto prof = vacancy_profile(bath, atoms[nu].site, gap);
    if (std::abs(prof.boundary) <= 1e-12)
      throw Error("coupling_matrix: vanishing boundary element for atom " + std::to_string(nu));
    const double g = atoms[nu].g;
    for (Eigen::Index mu = 0; mu < n; ++mu) {
      if (mu == nu) continue;
      const auto site = static_cast<Eigen::Index>(atoms[mu].site);
      cm.K(mu, nu) = -(g * g / 2.0) * prof.psi(site) / prof.boundary;
    }
    cm.profiles.push_back(std::move(prof));
  }
  return cm;
}

CMatrix effective_hamiltonian(const CouplingMatrix& cm) { return cm.K + cm.K.adjoint(); }

SplittingResult splitting_oracle(const BathGraph& bath, const AtomSpec& a0, const AtomSpec& a1,
                                 const GapInfo& gap) {
  if (a0.site == a1.site) throw Error("splitting_oracle: atoms share a site");
  const auto h = assemble_full(bath, {a0, a1});
  const double lo = gap.lower() + 0.01 * gap.width;
  const double hi = gap.upper() - 0.01 * gap.width;
  const auto es = diagonalize_window(h.dense(), lo, hi);
  if (es.size() < 2) throw Error("splitting_oracle: fewer than two in-gap dressed levels");

  const double w0 = 0.5 * (a0.omega0 + a1.omega0);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(es.size()));
  for (Eigen::Index k = 0; k < es.size(); ++k) idx[k] = k;
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index x, Eigen::Index y) {
    return std::abs(es.values(x) - w0) < std::abs(es.values(y) - w0);
  });
  Eigen::Index lower = idx[0];
  Eigen::Index upper = idx[1];
  if (es.values(lower) > es.values(upper)) std::swap(lower, upper);

  SplittingResult out;
  out.lower = es.values(lower);
  out.upper = es.values(upper);
  out.splitting = out.upper - out.lower;
  out.resolved = out.splitting > 1e-10;
  const cplx x0 = es.vectors(0, upper);
  const cplx x1 = es.vectors(1, upper);
  const double phase = (std::abs(x0) > 0.0 && std::abs(x1) > 0.0) ? -std::arg(x1 / x0) : 0.0;
  out.h = std::polar(0.5 * out.splitting, phase);
  return out;
}

}  // namespace vds
