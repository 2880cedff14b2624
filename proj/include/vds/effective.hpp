#pragma once

#include <vector>

#include "vds/hamiltonian.hpp"
#include "vds/models.hpp"

namespace vds {

/// Normalized in-gap eigenstate of B_nu, embedded on B with a zero at nu.
struct VacancyProfile {
  SiteId nu = 0;
  double energy = 0.0;
  CVector psi;
  cplx boundary;  // <nu|H_B|psi>
};

/// Throws when B_nu has no state in the gap (shrunk by margin * width).
VacancyProfile vacancy_profile(const BathGraph& bath, SiteId nu, const GapInfo& gap,
                               double margin = 0.01);

struct AtomEntry {
  std::size_t index = 0;
  SiteId site = 0;
  int sublattice = 0;
};

/// K(nu', nu) = -(g^2 / 2) psi^nu(nu') / <nu|H_B|psi^nu>, zero diagonal.
struct CouplingMatrix {
  CMatrix K;
  std::vector<AtomEntry> atoms;
  std::vector<VacancyProfile> profiles;
};

CouplingMatrix coupling_matrix(const BathGraph& bath, const std::vector<AtomSpec>& atoms,
                               const GapInfo& gap);

/// <e_nu'|H_eff|e_nu> = K(nu', nu) + conj(K(nu, nu')).
CMatrix effective_hamiltonian(const CouplingMatrix& cm);

struct SplittingResult {
  cplx h;               // <e_0|H_eff|e_1> recovered from the exact levels
  double splitting = 0.0;
  bool resolved = false;  // false: |h| is only an upper bound
  double lower = 0.0;
  double upper = 0.0;
};

/// Diagonalize the full two-atom Hamiltonian and read off the effective
/// exchange from the pair of in-gap levels closest to the atoms' frequency:
/// |h| is half the splitting, arg h follows from the upper level's atomic
/// amplitudes.
SplittingResult splitting_oracle(const BathGraph& bath, const AtomSpec& a0, const AtomSpec& a1,
                                 const GapInfo& gap);

}  // namespace vds
