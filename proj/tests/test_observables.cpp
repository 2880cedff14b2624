#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "vds/models.hpp"
#include "vds/observables.hpp"
#include "vds/spectra.hpp"
#include "vds/vds_engine.hpp"

using namespace vds;
using std::numbers::pi;

namespace {

ModelParams haldane(int n, double phi) {
  ModelParams p;
  p.variant = Variant::haldane;
  p.nx = p.ny = n;
  p.t = 0.1;
  p.phi = phi;
  return p;
}

VacancyState haldane_vacancy(const ModelParams& p, SiteId v) {
  const auto vac = vacancy_ingap_states(build_model(p), v, analytic_gap(p));
  REQUIRE(!vac.empty());
  return vac.front();
}

}  // namespace

TEST_CASE("two-site probe against the continuity oracle") {
  const BathGraph b({0.0, 0.0}, {{0, 1, -1.0}});
  CVector psi(2);
  psi << 1.0, cplx(0.0, 1.0);
  psi /= std::sqrt(2.0);
  const CurrentField f = bond_currents(b, psi);
  REQUIRE(f.edges.size() == 1);
  const double dt = 1e-4;
  const CMatrix h = assemble_bath(b).dense();
  const CVector later = oracle::evolve(h, psi, dt);
  const CVector earlier = oracle::evolve(h, psi, -dt);
  const double dp0 = (std::norm(later(0)) - std::norm(earlier(0))) / (2 * dt);
  // d p_0 / dt = -I(0 -> 1)
  CHECK(std::abs(-dp0 - f.at(0, 1)) <= 1e-6);
  CHECK(f.at(0, 1) == doctest::Approx(1.0));
  CHECK(f.at(1, 0) == -f.at(0, 1));
}

TEST_CASE("continuity holds site by site for a random state on a complex lattice") {
  ModelParams p = haldane(4, 0.7);
  p.m_haldane = 0.1;
  const BathGraph b = build_model(p);
  std::mt19937 rng(5);
  std::normal_distribution<double> nd;
  CVector psi(static_cast<Eigen::Index>(b.size()));
  for (Eigen::Index i = 0; i < psi.size(); ++i) psi(i) = cplx(nd(rng), nd(rng));
  psi.normalize();
  const RVector out = bond_currents(b, psi).outflow();
  const CMatrix h = assemble_bath(b).dense();
  const double dt = 1e-4;
  const CVector later = oracle::evolve(h, psi, dt);
  const CVector earlier = oracle::evolve(h, psi, -dt);
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const double dp = (std::norm(later(i)) - std::norm(earlier(i))) / (2 * dt);
    CHECK(std::abs(dp + out(i)) <= 1e-6);
  }
}

TEST_CASE("probability density") {
  ModelParams d;
  d.variant = Variant::dimer;
  const BathGraph b = build_model(d);
  CVector one(1);
  one << 1.0;
  const auto ds = make_vds(b, {0.0, 1.0, 0}, one);
  const RVector pd = probability_density(ds.psi);
  CHECK(pd(0) == 0.0);
  CHECK(pd(1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(pd.sum() == doctest::Approx(std::pow(std::sin(ds.theta), 2)));
}

TEST_CASE("real couplings carry no current") {
  ModelParams p;
  p.variant = Variant::ssh;
  p.n = 20;
  p.delta = 0.5;
  const BathGraph b = build_model(p);
  const SiteId v = lattice_site(p, 10, 0, 0);
  const auto vac = vacancy_ingap_states(b, v, analytic_gap(p));
  REQUIRE(vac.size() == 1);
  const auto f = bond_currents(b, vac[0].psi);
  for (const auto& e : f.edges) CHECK(std::abs(e.value) <= 1e-12);
  const auto ex = current_extremum(f);
  CHECK(ex.value <= 1e-12);
  // sublattice polarization: nothing on the vacancy's own sublattice
  const RVector pd = probability_density(vac[0].psi);
  double on_a = 0.0;
  for (int n = 0; n < 20; ++n) on_a += pd(lattice_site(p, n, 0, 0));
  CHECK(on_a <= 1e-12);
}

TEST_CASE("zero field") {
  const BathGraph b({0.0, 0.0, 0.0}, {{0, 1, -1.0}, {1, 2, -1.0}, {0, 2, -1.0}});
  const auto f = bond_currents(b, CVector::Zero(3));
  CHECK(circulation(f, {0, 1, 2}) == 0.0);
  const auto ex = current_extremum(f);
  CHECK(ex.value == 0.0);
  for (double r : ex.rescaled) CHECK(r == 0.0);
  CHECK_THROWS_AS(current_extremum(CurrentField{}), Error);
}

TEST_CASE("uniform ring current") {
  const int n = 6;
  std::vector<Coupling> cs;
  for (int i = 0; i < n; ++i) cs.push_back({static_cast<SiteId>((i + 1) % n), static_cast<SiteId>(i), -1.0});
  const BathGraph ring(std::vector<double>(n, 0.0), cs);
  CVector psi(n);
  for (int i = 0; i < n; ++i) psi(i) = std::polar(1.0 / std::sqrt(n), 2 * pi * i / n);
  const auto f = bond_currents(ring, psi);
  const auto ex = current_extremum(f);
  for (const auto& e : f.edges) CHECK(std::abs(e.value) == doctest::Approx(ex.value));
  std::vector<SiteId> loop;
  for (int i = 0; i < n; ++i) loop.push_back(static_cast<SiteId>(i));
  CHECK(std::abs(circulation(f, loop)) == doctest::Approx(n * ex.value));
  CHECK_THROWS_AS(circulation(f, {0, 2}), Error);
}

TEST_CASE("gauge covariance") {
  const ModelParams p = haldane(6, pi / 2);
  const BathGraph b = build_model(p);
  const SiteId v = lattice_site(p, 3, 3, 0);
  const CVector psi = haldane_vacancy(p, v).psi;
  const CVector rotated = std::polar(1.0, 1.234) * psi;
  CHECK((probability_density(psi) - probability_density(rotated)).cwiseAbs().maxCoeff() <= 1e-12);
  const auto f1 = bond_currents(b, psi);
  const auto f2 = bond_currents(b, rotated);
  for (std::size_t k = 0; k < f1.edges.size(); ++k)
    CHECK(std::abs(f1.edges[k].value - f2.edges[k].value) <= 1e-12);
}

TEST_CASE("Haldane vacancy state: Kirchhoff and time-reversal sign flip") {
  double circ[2];
  int k = 0;
  for (double phi : {pi / 2, -pi / 2}) {
    const ModelParams p = haldane(10, phi);
    const BathGraph b = build_model(p);
    const SiteId v = lattice_site(p, 5, 5, 0);
    const auto vac = haldane_vacancy(p, v);
    const auto f = bond_currents(b, vac.psi);
    CHECK(f.outflow().cwiseAbs().maxCoeff() <= 1e-10);
    // the three b neighbours carry the state and are joined pairwise by NNN bonds
    const auto ring = ring_around(b, v, 1.0);
    CHECK(ring.size() == 3);
    CHECK(ring_around(b, v, std::sqrt(3.0)).size() == 6);
    circ[k] = circulation(f, ring);
    CHECK(std::abs(circ[k]) > 1e-6);
    ++k;
  }
  CHECK(circ[0] * circ[1] < 0.0);
  CHECK(circ[0] == doctest::Approx(-circ[1]).epsilon(1e-8));
}

TEST_CASE("ring ordering is counter-clockwise") {
  const ModelParams p = haldane(6, 0.0);
  const BathGraph b = build_model(p);
  const SiteId v = lattice_site(p, 3, 3, 0);
  const auto ring = ring_around(b, v, std::sqrt(3.0));
  const auto c = b.position(v);
  double last = -10.0;
  for (SiteId s : ring) {
    const auto q = b.position(s);
    const double ang = std::atan2(q[1] - c[1], q[0] - c[0]);
    CHECK(ang > last);
    last = ang;
  }
}

TEST_CASE("current CSV") {
  const BathGraph b({0.0, 0.0}, {{0, 1, -1.0}});
  CVector psi(2);
  psi << 1.0, cplx(0.0, 1.0);
  psi /= std::sqrt(2.0);
  const std::string csv = current_csv(b, bond_currents(b, psi));
  CHECK(csv == "i,j,x_i,y_i,x_j,y_j,I\n0,1,0,0,1,0,1\n");
}
