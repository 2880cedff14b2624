#pragma once

#include <optional>
#include <vector>

#include "vds/hamiltonian.hpp"
#include "vds/models.hpp"

namespace vds {

/// Ascending eigenvalues with matching orthonormal eigenvectors (columns).
/// Every vector is phase-fixed: its largest-magnitude component (lowest
/// index on ties) is real and positive.
struct EigenSystem {
  RVector values;
  CMatrix vectors;

  Eigen::Index size() const { return values.size(); }
  CVector vector(Eigen::Index k) const { return vectors.col(k); }
};

/// Levels closer than this (in units of J) count as one.
inline constexpr double kDegeneracyTol = 1e-8;

EigenSystem diagonalize(const HermitianOperator& h);
EigenSystem diagonalize(const CMatrix& h);

/// Eigenpairs with eigenvalue in the half-open window (lo, hi]. Cheaper than
/// a full decomposition when only a few states are wanted.
EigenSystem diagonalize_window(const CMatrix& h, double lo, double hi);

/// Eigenvalues only.
RVector eigenvalues(const CMatrix& h);
RVector eigenvalues(const HermitianOperator& h);

/// Multiply v by a phase so its dominant component is real positive.
void fix_phase(Eigen::Ref<CVector> v);

/// Maximal eigenvalue-free intervals strictly wider than min_width, between
/// the lowest and highest eigenvalue.
std::vector<GapInfo> find_gaps(const RVector& values, double min_width);

/// Widest internal gap, if any gap wider than min_width exists.
std::optional<GapInfo> widest_gap(const RVector& values, double min_width);

struct InGapState {
  double value = 0.0;
  CVector vector;
};

/// Eigenpairs strictly inside the gap shrunk by margin * width on each side.
std::vector<InGapState> find_ingap_states(const EigenSystem& es, const GapInfo& gap,
                                          double margin = 0.01);

/// Same selection on eigenvalues alone.
std::vector<double> ingap_values(const RVector& values, const GapInfo& gap, double margin = 0.01);

/// Number of distinct levels after merging values closer than tol.
std::size_t count_levels(std::vector<double> values, double tol = kDegeneracyTol);

struct LocalizationMetrics {
  double ipr = 0.0;
  std::optional<double> decay_length;  // amplitude decay length in cells
  SiteId center = 0;
  std::vector<double> cell_probability;  // indexed by cell distance
};

/// Inverse participation ratio plus an exponential fit of the cell-summed
/// probability against unweighted cell-graph distance from `center`. The
/// state is indexed on `bath`. The fit runs over the monotone tail starting
/// at the most populated distance; fewer than three usable distances leave
/// decay_length empty.
LocalizationMetrics localization(const CVector& state, const BathGraph& bath, SiteId center);

/// Unweighted shortest-path distance between unit cells, measured from the
/// cell of `center`, for every site.
std::vector<int> cell_distances(const BathGraph& bath, SiteId center);

}  // namespace vds
