#pragma once

#include <optional>
#include <vector>

#include "vds/hamiltonian.hpp"
#include "vds/models.hpp"
#include "vds/spectra.hpp"

namespace vds {

/// Atom-photon eigenstate at exactly omega0 with a photonic node on the
/// atom's site. Global phase: epsilon real and non-negative.
struct DressedState {
  SiteId v = 0;
  double epsilon = 1.0;  // cos(theta)
  CVector psi;           // photonic amplitudes on the full bath, psi(v) == 0
  double theta = 0.0;
  double phi_angle = 0.0;
  cplx eta;
  double energy = 0.0;
  // theta = pi/2 member of a degenerate family: the bath eigenstate does not
  // see the vacancy site, so the atom stays empty and eta is undefined
  bool photon_only = false;

  /// (epsilon, psi) in the assemble_full basis of a single atom.
  CVector full_vector() const;
};

/// Dressed state built from a normalized eigenstate `psi_vacancy` of B_v at
/// atom.omega0. Throws when psi is not such an eigenstate or when its
/// boundary element vanishes.
DressedState make_vds(const BathGraph& bath, const AtomSpec& atom, const CVector& psi_vacancy);

/// ||H x - omega0 x|| for the embedded state x.
double verify_vds(const DressedState& ds, const BathGraph& bath, const AtomSpec& atom);

struct VdsCandidate {
  double omega = 0.0;
  std::size_t multiplicity = 0;
};

/// Spectrum of B_v grouped into levels.
std::vector<VdsCandidate> vds_candidates(const BathGraph& bath, SiteId v,
                                         double tol = kDegeneracyTol);

/// All dressed states at atom.omega0: one per orthonormal vector of the B_v
/// eigenspace. The eigenspace is rotated so that a single vector carries the
/// whole boundary element; the rest come back photon_only. Empty when
/// omega0 is not in the B_v spectrum.
std::vector<DressedState> vds_at(const BathGraph& bath, const AtomSpec& atom,
                                 double tol = kDegeneracyTol);

/// In-gap eigenstate of B_v, embedded on the full bath (zero at v).
struct VacancyState {
  double energy = 0.0;
  CVector psi;
};

std::vector<VacancyState> vacancy_ingap_states(const BathGraph& bath, SiteId v,
                                               const GapInfo& gap, double margin = 0.01);

struct BicResult {
  bool exists = false;
  std::optional<DressedState> state;
  double residual = 0.0;
  // from the exact eigenvector of the full Hamiltonian closest to the VDS
  double leak_probability = 0.0;
  double exact_overlap = 0.0;
};

/// Atom on an open chain of `length` sites, attached to site s so that s
/// cavities sit between it and the open end. A bound VDS exists when the
/// s-site segment has a mode at omega0.
BicResult bic_scan(const ModelParams& chain, int length, int s, double omega0, double g,
                   double tol = kDegeneracyTol);

struct NodeState {
  double energy = 0.0;
  double amplitude_at_v = 0.0;
  double standing_wave_overlap = 0.0;
};

struct UnboundReport {
  std::vector<NodeState> node_states;
  // smallest |psi_v| among states inside the probe window that are not node
  // states; NaN when there are none
  double min_offresonant_amplitude = 0.0;
};

/// Open chain (chain.n sites) with the atom at an interior site. Eigenstates
/// of the full Hamiltonian within `window` of omega0 are split into node
/// states (|psi_v| <= 1e-6, compared against sin(k |i - v|) on both sides)
/// and the rest.
UnboundReport unbound_vds_check(const ModelParams& chain, const AtomSpec& atom, double window);

struct RobustnessPoint {
  double detuning = 0.0;
  double fidelity = 0.0;
  bool in_gap = false;
};

/// Overlap between the VDS built at the vacancy level and the exact in-gap
/// dressed state of the full Hamiltonian with the atom detuned by each
/// entry of `detunings`. atom.omega0 is ignored.
std::vector<RobustnessPoint> detuning_robustness(const BathGraph& bath, const AtomSpec& atom,
                                                 const GapInfo& gap,
                                                 const std::vector<double>& detunings);

}  // namespace vds
