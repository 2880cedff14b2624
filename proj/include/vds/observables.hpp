#pragma once

#include <string>
#include <vector>

#include "vds/hamiltonian.hpp"

namespace vds {

struct BondCurrent {
  SiteId i = 0;
  SiteId j = 0;
  double value = 0.0;  // I(i -> j); I(j -> i) = -value
};

/// Probability current on every stored bath edge.
struct CurrentField {
  std::size_t sites = 0;
  std::vector<BondCurrent> edges;

  /// Signed I(i -> j); throws if i and j are not coupled.
  double at(SiteId i, SiteId j) const;

  /// Net outflow sum_j I(i -> j) from every site.
  RVector outflow() const;
};

/// |psi_i|^2, no normalization applied.
RVector probability_density(const CVector& state);

/// I(i -> j) = -2 Im[conj(psi_i) H(i, j) psi_j], the sign fixed by
/// d|psi_i|^2/dt = -sum_j I(i -> j).
CurrentField bond_currents(const BathGraph& bath, const CVector& state);

/// Signed sum of I(loop[k] -> loop[k+1]) around the closed loop.
double circulation(const CurrentField& field, const std::vector<SiteId>& loop);

struct CurrentExtremum {
  SiteId i = 0;  // oriented so that I(i -> j) = value >= 0
  SiteId j = 0;
  double value = 0.0;
  std::vector<double> rescaled;  // edge values / value, zero field stays zero
};

CurrentExtremum current_extremum(const CurrentField& field);

/// Sites at Euclidean distance `radius` (within 1e-6) from v, ordered
/// counter-clockwise by angle around v.
std::vector<SiteId> ring_around(const BathGraph& bath, SiteId v, double radius);

/// CSV rows i,j,x_i,y_i,x_j,y_j,I with 8 significant digits.
std::string current_csv(const BathGraph& bath, const CurrentField& field);

}  // namespace vds
