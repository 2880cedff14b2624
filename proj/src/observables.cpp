#include "vds/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace vds {

double CurrentField::at(SiteId i, SiteId j) const {
  for (const auto& e : edges) {
    if (e.i == i && e.j == j) return e.value;
    if (e.i == j && e.j == i) return -e.value;
  }
  throw Error("current field: no edge between " + std::to_string(i) + " and " + std::to_string(j));
}

RVector CurrentField::outflow() const {
  RVector out = RVector::Zero(static_cast<Eigen::Index>(sites));
  for (const auto& e : edges) {
    out(static_cast<Eigen::Index>(e.i)) += e.value;
    out(static_cast<Eigen::Index>(e.j)) -= e.value;
  }
  return out;
}

RVector probability_density(const CVector& state) { return state.cwiseAbs2(); }

CurrentField bond_currents(const BathGraph& bath, const CVector& state) {
  if (static_cast<std::size_t>(state.size()) != bath.size())
    throw Error("bond_currents: state dimension does not match bath");
  CurrentField f;
  f.sites = bath.size();
  f.edges.reserve(bath.couplings().size());
  for (const auto& c : bath.couplings()) {
    const auto i = static_cast<Eigen::Index>(c.i);
    const auto j = static_cast<Eigen::Index>(c.j);
    f.edges.push_back({c.i, c.j, -2.0 * std::imag(std::conj(state(i)) * c.value * state(j))});
  }
  return f;
}

double circulation(const CurrentField& field, const std::vector<SiteId>& loop) {
  if (loop.size() < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < loop.size(); ++k) sum += field.at(loop[k], loop[(k + 1) % loop.size()]);
  return sum;
}

CurrentExtremum current_extremum(const CurrentField& field) {
  if (field.edges.empty()) throw Error("current_extremum: empty field");
  CurrentExtremum out;
  const auto it = std::max_element(field.edges.begin(), field.edges.end(),
                                   [](const BondCurrent& a, const BondCurrent& b) {
                                     return std::abs(a.value) < std::abs(b.value);
                                   });
  out.value = std::abs(it->value);
  out.i = it->value >= 0.0 ? it->i : it->j;
  out.j = it->value >= 0.0 ? it->j : it->i;
  out.rescaled.reserve(field.edges.size());
  for (const auto& e : field.edges) out.rescaled.push_back(out.value > 0.0 ? e.value / out.value : 0.0);
  return out;
}

std::vector<SiteId> ring_around(const BathGraph& bath, SiteId v, double radius) {
  if (v >= bath.size()) throw Error("ring_around: site out of range");
  const auto c = bath.position(v);
  std::vector<std::pair<double, SiteId>> ring;
  for (SiteId i = 0; i < bath.size(); ++i) {
    const auto p = bath.position(i);
    const double dx = p[0] - c[0];
    const double dy = p[1] - c[1];
    if (std::abs(std::hypot(dx, dy) - radius) <= 1e-6) ring.push_back({std::atan2(dy, dx), i});
  }
  std::sort(ring.begin(), ring.end());
  std::vector<SiteId> out;
  for (const auto& r : ring) out.push_back(r.second);
  return out;
}

std::string current_csv(const BathGraph& bath, const CurrentField& field) {
  std::ostringstream os;
  os << "i,j,x_i,y_i,x_j,y_j,I\n";
  char buf[160];
  for (const auto& e : field.edges) {
    const auto pi = bath.position(e.i);
    const auto pj = bath.position(e.j);
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.8g,%.8g,%.8g,%.8g,%.8g\n", e.i, e.j, pi[0], pi[1],
                  pj[0], pj[1], e.value);
    os << buf;
  }
  return os.str();
}

}  // namespace vds
