#include "vds/topology.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "vds/parallel.hpp"
#include "vds/spectra.hpp"
#include "vds/vds_engine.hpp"

namespace vds {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::SelfAdjointEigenSolver<CMatrix> bloch_eigen(const UnitCell& cell, int nk, int i, int j) {
  return Eigen::SelfAdjointEigenSolver<CMatrix>(
      bloch_hamiltonian(cell, kTwoPi * i / nk, kTwoPi * j / nk));
}

cplx link(const CVector& a, const CVector& b) {
  const cplx z = a.dot(b);
  const double r = std::abs(z);
  if (r < 1e-14) throw Error("chern_number: vanishing link variable, refine the grid");
  return z / r;
}

}  // namespace

int chern_number(const UnitCell& cell, int nk) {
  if (cell.dimensions != 2) throw Error("chern_number: needs a two-dimensional lattice");
  if (nk < 3) throw Error("chern_number: nk must be at least 3");
  std::vector<CVector> u(static_cast<std::size_t>(nk) * nk);
  auto at = [&](int i, int j) -> CVector& {
    return u[static_cast<std::size_t>((j % nk) * nk + (i % nk))];
  };
  for (int j = 0; j < nk; ++j)
    for (int i = 0; i < nk; ++i) at(i, j) = bloch_eigen(cell, nk, i, j).eigenvectors().col(0);
  double flux = 0.0;
  for (int j = 0; j < nk; ++j)
    for (int i = 0; i < nk; ++i) {
      const cplx w = link(at(i, j), at(i + 1, j)) * link(at(i + 1, j), at(i + 1, j + 1)) *
                     link(at(i + 1, j + 1), at(i, j + 1)) * link(at(i, j + 1), at(i, j));
      flux += std::arg(w);
    }
  return static_cast<int>(std::lround(flux / kTwoPi));
}

GapInfo grid_gap(const UnitCell& cell, int nk, int nk2) {
  if (cell.onsite.size() < 2) throw Error("grid_gap: need at least two bands");
  double top = -1e300;
  double bottom = 1e300;
  const int ny = nk2 > 0 ? nk2 : (cell.dimensions == 2 ? nk : 1);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nk; ++i) {
      const RVector e =
          Eigen::SelfAdjointEigenSolver<CMatrix>(
              bloch_hamiltonian(cell, kTwoPi * i / nk, kTwoPi * j / ny), Eigen::EigenvaluesOnly)
              .eigenvalues();
      top = std::max(top, e(0));
      bottom = std::min(bottom, e(1));
    }
  return {0.5 * (top + bottom), std::max(0.0, bottom - top)};
}

int chern_number(const ModelParams& p, int nk) {
  if (p.variant != Variant::haldane) throw Error("chern_number: variant must be haldane");
  const GapInfo gap = analytic_gap(p);
  if (gap.width <= 1e-6) throw Error("chern_number: gap is closed");
  if (nk <= 0) nk = gap.width < 0.05 * p.J ? 48 : 24;
  return chern_number(unit_cell(p), nk);
}

int winding_number(const ModelParams& p, int nk) {
  if (p.variant != Variant::ssh && p.variant != Variant::creutz)
    throw Error("winding_number: variant must be ssh or creutz");
  if (nk < 8) throw Error("winding_number: nk must be at least 8");
  const UnitCell cell = unit_cell(p);
  const cplx I(0.0, 1.0);
  const CMatrix paulis[3] = {(CMatrix(2, 2) << 0, 1, 1, 0).finished(),
                             (CMatrix(2, 2) << 0, -I, I, 0).finished(),
                             (CMatrix(2, 2) << 1, 0, 0, -1).finished()};
  std::vector<CMatrix> hk;
  for (int k = 0; k < nk; ++k)
    hk.push_back(bloch_hamiltonian(cell, kTwoPi * k / nk) -
                 p.omega_c * CMatrix::Identity(2, 2));

  const CMatrix* gamma = nullptr;
  for (const auto& s : paulis) {
    bool ok = true;
    for (const auto& h : hk) ok = ok && (s * h * s + h).cwiseAbs().maxCoeff() <= 1e-10;
    if (ok) {
      gamma = &s;
      break;
    }
  }
  if (!gamma) throw Error("winding_number: parameter point has no chiral symmetry");

  // chiral eigenbasis ordered (+1, -1)
  Eigen::SelfAdjointEigenSolver<CMatrix> gs(*gamma);
  CMatrix u(2, 2);
  u.col(0) = gs.eigenvectors().col(1);
  u.col(1) = gs.eigenvectors().col(0);

  double total = 0.0;
  cplx prev = 0.0;
  for (int k = 0; k <= nk; ++k) {
    const cplx q = (u.adjoint() * hk[static_cast<std::size_t>(k % nk)] * u)(0, 1);
    if (std::abs(q) < 1e-9) throw Error("winding_number: gap closes on the k grid");
    if (k > 0) total += std::arg(q / prev);
    prev = q;
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

std::size_t edge_state_count(const ModelParams& p, const GapInfo& gap, double margin) {
  ModelParams q = p;
  q.bc = Boundary::open;
  return ingap_values(eigenvalues(assemble_bath(build_model(q))), gap, margin).size();
}

PhasePoint phase_point(double phi, double m_over_t, const PhaseOptions& opt) {
  PhasePoint pt;
  pt.phi = phi;
  pt.m_over_t = m_over_t;
  ModelParams p;
  p.variant = Variant::haldane;
  p.t = opt.t;
  p.phi = phi;
  p.m_haldane = m_over_t * opt.t;
  p.nx = p.ny = opt.mesh;
  p.bc = Boundary::periodic;
  const UnitCell cell = unit_cell(p);
  const GapInfo gap = grid_gap(cell, opt.nk);
  pt.gap = gap.width;
  if (gap.width <= 1e-6) return pt;
  pt.chern = chern_number(cell, gap.width < 0.05 * p.J ? 2 * opt.nk : opt.nk);

  const BathGraph bath = build_model(p);
  const SiteId v = lattice_site(p, opt.mesh / 2, opt.mesh / 2, opt.sublattice);
  pt.bs_exists = !vacancy_ingap_states(bath, v, gap, opt.margin).empty();
  return pt;
}

std::vector<PhasePoint> phase_diagram(const PhaseOptions& opt) {
  if (opt.phi_steps < 2 || opt.mt_steps < 2) throw Error("phase_diagram: need at least 2 steps per axis");
  const double mt_max = 6.0 * std::sqrt(3.0);
  const std::size_t n = static_cast<std::size_t>(opt.phi_steps) * opt.mt_steps;
  std::vector<PhasePoint> out(n);
  parallel_for(n, opt.workers, [&](std::size_t k) {
    const int a = static_cast<int>(k) / opt.mt_steps;
    const int b = static_cast<int>(k) % opt.mt_steps;
    const double phi = -std::numbers::pi + kTwoPi * a / (opt.phi_steps - 1);
    const double mt = -mt_max + 2.0 * mt_max * b / (opt.mt_steps - 1);
    try {
      out[k] = phase_point(phi, mt, opt);
    } catch (const std::exception& e) {
      out[k].phi = phi;
      out[k].m_over_t = mt;
      out[k].error = e.what();
    }
  });
  return out;
}

std::string phase_csv(const std::vector<PhasePoint>& points) {
  std::ostringstream os;
  os << "phi,m_over_t,gap,chern,bs_exists\n";
  char buf[128];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.8g,%.8g,%.8g,", p.phi, p.m_over_t, p.gap);
    os << buf << (p.chern ? std::to_string(*p.chern) : std::string("NA")) << ','
       << (p.bs_exists ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace vds
