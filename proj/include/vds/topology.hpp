#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vds/models.hpp"

namespace vds {

/// Lowest-band Chern number of the Haldane model by plaquette Berry flux on
/// an nk x nk grid of the Brillouin zone. nk = 0 picks 24, or 48 when the
/// gap is below 0.05 J. Throws when the gap is closed.
int chern_number(const ModelParams& p, int nk = 0);

/// Same computation on an explicit unit cell, no gap check.
int chern_number(const UnitCell& cell, int nk);

/// Gap between the two lowest bands sampled on an nk x nk2 grid (nk2 = 0
/// means nk for 2D cells and 1 for chains): min of band 2 minus max of
/// band 1, clipped at zero. On the grid matching a periodic mesh this is
/// the exact gap of the real-space bath.
GapInfo grid_gap(const UnitCell& cell, int nk, int nk2 = 0);

/// Winding of the off-diagonal Bloch element in the chiral basis, for ssh
/// (any delta != 0) and creutz at alpha = +-pi/2. Other points are rejected.
int winding_number(const ModelParams& p, int nk = 256);

/// In-gap eigenvalue count of the open-boundary bath.
std::size_t edge_state_count(const ModelParams& p, const GapInfo& gap, double margin = 0.01);

struct PhaseOptions {
  int phi_steps = 41;
  int mt_steps = 41;
  double t = 0.1;
  int nk = 24;
  int mesh = 12;       // periodic cells per side for the vacancy test
  int sublattice = 0;  // sublattice of the vacancy
  double margin = 0.02;
  unsigned workers = 1;
};

struct PhasePoint {
  double phi = 0.0;
  double m_over_t = 0.0;
  double gap = 0.0;
  std::optional<int> chern;  // empty where the grid gap is closed
  bool bs_exists = false;
  std::string error;
};

/// phi over [-pi, pi] (outer index) and m/t over [-6 sqrt(3), 6 sqrt(3)]
/// (inner index), both endpoints included.
std::vector<PhasePoint> phase_diagram(const PhaseOptions& opt);

/// Evaluate a single phase-diagram point.
PhasePoint phase_point(double phi, double m_over_t, const PhaseOptions& opt);

/// CSV with header phi,m_over_t,gap,chern,bs_exists (8 significant digits).
std::string phase_csv(const std::vector<PhasePoint>& points);

}  // namespace vds
