#include "vds/vds_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace vds {

namespace {

constexpr double kBoundaryFloor = 1e-12;

double eigen_residual(const HermitianOperator& h, const CVector& x, double w) {
  return (h.apply(x) - w * x).norm();
}

// Unitary on C^d whose first column is parallel to u.
CMatrix completion(const CVector& u) {
  const CMatrix col = u;
  Eigen::HouseholderQR<CMatrix> qr(col);
  CMatrix q = qr.householderQ() * CMatrix::Identity(u.size(), u.size());
  // make the first column exactly u rather than a phase multiple
  const cplx ph = u.dot(q.col(0));
  q.col(0) *= std::conj(ph) / std::abs(ph);
  return q;
}

}  // namespace

CVector DressedState::full_vector() const {
  CVector x(psi.size() + 1);
  x(0) = epsilon;
  x.tail(psi.size()) = psi;
  return x;
}

DressedState make_vds(const BathGraph& bath, const AtomSpec& atom, const CVector& psi_vacancy) {
  const SiteId v = atom.site;
  if (v >= bath.size()) throw Error("make_vds: atom site out of range");
  if (atom.g < 0.0) throw Error("make_vds: g must be non-negative");
  if (static_cast<std::size_t>(psi_vacancy.size()) + 1 != bath.size())
    throw Error("make_vds: state must live on B_v (dimension " + std::to_string(bath.size() - 1) +
                ")");
  const double norm = psi_vacancy.norm();
  if (norm == 0.0) throw Error("make_vds: zero state");
  const CVector psi = psi_vacancy / norm;

  const auto hv = assemble_bath(remove_site(bath, v));
  const double res = eigen_residual(hv, psi, atom.omega0);
  if (res > 1e-8)
    throw Error("make_vds: state is not an eigenstate of B_v at omega0 (residual " +
                std::to_string(res) + ")");

  const cplx b = boundary_element(bath, v, psi);
  if (std::abs(b) <= kBoundaryFloor)
    throw Error("make_vds: unbound/ill-conditioned VDS, boundary element vanishes");

  DressedState ds;
  ds.v = v;
  ds.energy = atom.omega0;
  ds.eta = -atom.g / b;
  ds.theta = std::atan(std::abs(ds.eta));
  ds.phi_angle = atom.g == 0.0 ? 0.0 : std::arg(ds.eta);
  // report (-pi, pi] without a signed zero
  if (ds.phi_angle == 0.0) ds.phi_angle = 0.0;
  if (ds.phi_angle <= -std::numbers::pi) ds.phi_angle = std::numbers::pi;
  ds.epsilon = std::cos(ds.theta);
  ds.psi = std::polar(std::sin(ds.theta), ds.phi_angle) * embed_vacancy_state(psi, v);
  return ds;
}

double verify_vds(const DressedState& ds, const BathGraph& bath, const AtomSpec& atom) {
  const auto h = assemble_full(bath, {atom});
  const CVector x = ds.full_vector();
  if (static_cast<std::size_t>(x.size()) != h.dimension())
    throw Error("verify_vds: state dimension does not match bath");
  return eigen_residual(h, x, atom.omega0);
}

std::vector<VdsCandidate> vds_candidates(const BathGraph& bath, SiteId v, double tol) {
  const RVector w = eigenvalues(assemble_bath(remove_site(bath, v)));
  std::vector<VdsCandidate> out;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (!out.empty() && w(k) - out.back().omega <= tol) {
      // level value is the mean of its members
      auto& c = out.back();
      c.omega = (c.omega * c.multiplicity + w(k)) / (c.multiplicity + 1);
      ++c.multiplicity;
      continue;
    }
    out.push_back({w(k), 1});
  }
  return out;
}

std::vector<DressedState> vds_at(const BathGraph& bath, const AtomSpec& atom, double tol) {
  if (atom.site >= bath.size()) throw Error("vds_at: atom site out of range");
  const BathGraph bv = remove_site(bath, atom.site);
  const auto es =
      diagonalize_window(assemble_bath(bv).dense(), atom.omega0 - tol, atom.omega0 + tol);
  const Eigen::Index d = es.size();
  if (d == 0) return {};

  CVector b(d);
  for (Eigen::Index k = 0; k < d; ++k) b(k) = boundary_element(bath, atom.site, es.vector(k));
  std::vector<DressedState> out;
  CMatrix basis = es.vectors;
  const bool coupled = b.norm() > kBoundaryFloor;
  if (coupled) basis = es.vectors * completion(b.conjugate() / b.norm());
  for (Eigen::Index k = 0; k < d; ++k) {
    CVector psi = basis.col(k);
    fix_phase(psi);
    if (coupled && k == 0) {
      out.push_back(make_vds(bath, atom, psi));
      continue;
    }
    DressedState ds;
    ds.v = atom.site;
    ds.energy = atom.omega0;
    ds.epsilon = 0.0;
    ds.theta = std::numbers::pi / 2;
    ds.eta = std::numeric_limits<double>::infinity();
    ds.psi = embed_vacancy_state(psi, atom.site);
    ds.photon_only = true;
    out.push_back(std::move(ds));
  }
  return out;
}

std::vector<VacancyState> vacancy_ingap_states(const BathGraph& bath, SiteId v,
                                               const GapInfo& gap, double margin) {
  if (v >= bath.size()) throw Error("vacancy_ingap_states: site out of range");
  const double lo = gap.lower() + margin * gap.width;
  const double hi = gap.upper() - margin * gap.width;
  std::vector<VacancyState> out;
  if (!(hi > lo)) return out;
  const auto es = diagonalize_window(assemble_bath(remove_site(bath, v)).dense(), lo, hi);
  for (Eigen::Index k = 0; k < es.size(); ++k) {
    if (es.values(k) >= hi) continue;
    out.push_back({es.values(k), embed_vacancy_state(es.vector(k), v)});
  }
  return out;
}

BicResult bic_scan(const ModelParams& chain, int length, int s, double omega0, double g,
                   double tol) {
  if (chain.variant != Variant::chain) throw Error("bic_scan: variant must be chain");
  if (s < 0 || s >= length - 1) throw Error("bic_scan: need 0 <= s < length - 1");
  ModelParams p = chain;
  p.n = length;
  p.bc = Boundary::open;
  const BathGraph bath = build_model(p);
  const AtomSpec atom{omega0, g, static_cast<SiteId>(s)};

  BicResult out;
  if (s == 0) return out;
  const CMatrix hv = assemble_bath(remove_site(bath, atom.site)).dense();
  const auto seg = diagonalize_window(hv.topLeftCorner(s, s), omega0 - tol, omega0 + tol);
  if (seg.size() == 0) return out;

  CVector psi = CVector::Zero(length - 1);
  psi.head(s) = seg.vector(0);
  out.exists = true;
  out.state = make_vds(bath, atom, psi);
  out.residual = verify_vds(*out.state, bath, atom);

  const auto full = assemble_full(bath, {atom});
  const auto exact = diagonalize_window(full.dense(), omega0 - 1e-6, omega0 + 1e-6);
  const CVector ref = out.state->full_vector();
  for (Eigen::Index k = 0; k < exact.size(); ++k) {
    const double ov = std::norm(exact.vectors.col(k).dot(ref));
    if (ov <= out.exact_overlap) continue;
    out.exact_overlap = ov;
    // bath site i sits at row i + 1 of the full vector
    out.leak_probability = exact.vectors.col(k).tail(length - s - 1).squaredNorm();
  }
  return out;
}

UnboundReport unbound_vds_check(const ModelParams& chain, const AtomSpec& atom, double window) {
  if (chain.variant != Variant::chain) throw Error("unbound_vds_check: variant must be chain");
  const double x = (chain.omega_c - atom.omega0) / (2.0 * chain.J);
  if (!(std::abs(x) < 1.0 - 1e-6))
    throw Error("unbound_vds_check: omega0 must lie strictly inside the band");
  ModelParams p = chain;
  p.bc = Boundary::open;
  const BathGraph bath = build_model(p);
  const auto n = static_cast<Eigen::Index>(bath.size());
  const auto v = static_cast<Eigen::Index>(atom.site);
  if (v <= 0 || v >= n - 1) throw Error("unbound_vds_check: atom must sit at an interior site");

  const auto es = diagonalize_window(assemble_full(bath, {atom}).dense(), atom.omega0 - window,
                                     atom.omega0 + window);
  UnboundReport out;
  out.min_offresonant_amplitude = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index k = 0; k < es.size(); ++k) {
    const CVector photon = es.vectors.col(k).tail(n);
    const double av = std::abs(photon(v));
    const double atom_weight = std::norm(es.vectors(0, k));
    const double e = es.values(k);
    if (av <= 1e-6) {
      const double kk = std::acos(std::clamp((chain.omega_c - e) / (2.0 * chain.J), -1.0, 1.0));
      CVector left = CVector::Zero(n);
      CVector right = CVector::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double s = std::sin(kk * static_cast<double>(std::abs(i - v)));
        (i < v ? left : right)(i) = s;
      }
      double proj = 0.0;
      for (const CVector* u : {&left, &right})
        if (u->squaredNorm() > 0.0) proj += std::norm(u->dot(photon)) / u->squaredNorm();
      const double pn = photon.squaredNorm();
      out.node_states.push_back({e, av, pn > 0.0 ? proj / pn : 0.0});
      continue;
    }
    if (atom_weight > 1e-12 && std::abs(e - atom.omega0) > kDegeneracyTol)
      if (std::isnan(out.min_offresonant_amplitude) || av < out.min_offresonant_amplitude)
        out.min_offresonant_amplitude = av;
  }
  return out;
}

std::vector<RobustnessPoint> detuning_robustness(const BathGraph& bath, const AtomSpec& atom,
                                                 const GapInfo& gap,
                                                 const std::vector<double>& detunings) {
  const auto vac = vacancy_ingap_states(bath, atom.site, gap);
  if (vac.empty()) throw Error("detuning_robustness: no vacancy bound state in the gap");
  AtomSpec resonant = atom;
  resonant.omega0 = vac.front().energy;
  const CVector psi = restrict_to_vacancy(vac.front().psi, atom.site);
  const CVector ref = make_vds(bath, resonant, psi).full_vector();

  const double lo = gap.lower() + 0.01 * gap.width;
  const double hi = gap.upper() - 0.01 * gap.width;
  std::vector<RobustnessPoint> out;
  out.reserve(detunings.size());
  for (double dw : detunings) {
    AtomSpec a = resonant;
    a.omega0 = resonant.omega0 + dw;
    const auto es = diagonalize_window(assemble_full(bath, {a}).dense(), lo, hi);
    RobustnessPoint pt{dw, 0.0, false};
    for (Eigen::Index k = 0; k < es.size(); ++k) {
      if (es.values(k) >= hi) continue;
      pt.in_gap = true;
      pt.fidelity = std::max(pt.fidelity, std::norm(es.vectors.col(k).dot(ref)));
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace vds
