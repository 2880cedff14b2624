#pragma once

#include <string>
#include <vector>

#include "vds/hamiltonian.hpp"

namespace vds {

enum class Variant { dimer, chain, ssh, creutz, haldane };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

/// Parameters for every bath in the zoo. Energies are in units of J;
/// unused fields are ignored by the variants that do not need them.
struct ModelParams {
  Variant variant = Variant::chain;
  int n = 2;            // cells (sites for the chain)
  int nx = 2;           // Haldane cells along a1
  int ny = 2;           // Haldane cells along a2
  double omega_c = 0.0;
  double J = 1.0;
  double delta = 0.0;   // SSH dimerization
  double m_creutz = 0.0;
  double alpha = 0.0;
  double m_haldane = 0.0;
  double t = 0.0;       // NNN strength ratio
  double phi = 0.0;     // NNN phase
  Boundary bc = Boundary::periodic;
};

/// Throws vds::Error naming the first violated range.
void validate(const ModelParams& p);

struct GapInfo {
  double omega_mid = 0.0;
  double width = 0.0;
  double lower() const { return omega_mid - 0.5 * width; }
  double upper() const { return omega_mid + 0.5 * width; }
};

/// Hopping H(cell + shift, to) <- (cell, from) with the given amplitude.
/// Shifts are in reduced lattice coordinates.
struct CellHopping {
  int from = 0;
  int to = 0;
  int dx = 0;
  int dy = 0;
  cplx value;
};

/// Translation-invariant description of a lattice model: the single source
/// for both the real-space bath and the Bloch Hamiltonian.
struct UnitCell {
  int dimensions = 1;
  std::vector<double> onsite;
  std::vector<CellHopping> hoppings;
  std::array<double, 2> a1{1.0, 0.0};
  std::array<double, 2> a2{0.0, 1.0};
  std::vector<std::array<double, 2>> basis;  // sublattice offsets
};

/// Unit cell of the ssh, creutz, haldane or (one-site) chain variants.
UnitCell unit_cell(const ModelParams& p);

/// Bloch Hamiltonian H(k) for reduced wavevector (k1, k2) in [0, 2pi).
CMatrix bloch_hamiltonian(const UnitCell& cell, double k1, double k2 = 0.0);

BathGraph build_model(const ModelParams& p);

/// Closed-form gap data for ssh, creutz and haldane.
GapInfo analytic_gap(const ModelParams& p);

/// omega_k = omega_c - 2 J cos k for the chain variant.
double chain_dispersion(const ModelParams& p, double k);

/// Site index helpers for lattice variants (cells along x, then y).
SiteId lattice_site(const ModelParams& p, int cell_x, int cell_y, int sublattice);

}  // namespace vds
