#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "vds/models.hpp"
#include "vds/topology.hpp"

using namespace vds;
using std::numbers::pi;

namespace {

ModelParams haldane(double phi, double m, double t = 0.1) {
  ModelParams p;
  p.variant = Variant::haldane;
  p.t = t;
  p.phi = phi;
  p.m_haldane = m;
  return p;
}

}  // namespace

TEST_CASE("Haldane Chern numbers") {
  CHECK(std::abs(chern_number(haldane(pi / 2, 0.0))) == 1);
  CHECK(chern_number(haldane(pi / 2, 0.6)) == 0);            // m / t = 6 > 3 sqrt(3)
  CHECK(chern_number(haldane(0.0, 1e-3)) == 0);              // trivial mass gap, no flux
  CHECK(std::abs(chern_number(haldane(pi / 2, 0.4))) == 1);  // m / t = 4 inside the lobe
  CHECK_THROWS_WITH_AS(chern_number(haldane(pi / 2, 3 * std::sqrt(3.0) * 0.1)),
                       doctest::Contains("closed"), Error);
}

TEST_CASE("Chern number is stable under grid refinement") {
  for (double phi : {0.4, pi / 2, 2.5})
    for (double m : {0.0, 0.2, -0.3}) {
      const ModelParams p = haldane(phi, m);
      if (analytic_gap(p).width < 0.05) continue;
      CHECK(chern_number(p, 24) == chern_number(p, 48));
    }
}

TEST_CASE("time reversal flips the Chern number") {
  for (double phi : {0.5, 1.2, pi / 2, 2.8}) {
    const ModelParams p = haldane(phi, 0.1);
    const ModelParams q = haldane(-phi, 0.1);
    CHECK(chern_number(p) == -chern_number(q));
  }
}

TEST_CASE("Chern number from an explicit cell") {
  CHECK_THROWS_AS(chern_number(unit_cell(haldane(0.0, 0.0)), 2), Error);
  ModelParams s;
  s.variant = Variant::ssh;
  s.delta = 0.3;
  CHECK_THROWS_AS(chern_number(unit_cell(s), 24), Error);
  CHECK_THROWS_AS(chern_number(s), Error);
}

TEST_CASE("grid gap equals the real-space gap on the matching mesh") {
  ModelParams p = haldane(1.1, 0.15);
  p.nx = p.ny = 6;
  const GapInfo g = grid_gap(unit_cell(p), 6);
  const RVector w = oracle::spectrum(assemble_bath(build_model(p)).dense());
  CHECK(g.width == doctest::Approx(w(36) - w(35)).epsilon(1e-10));
  CHECK(g.omega_mid == doctest::Approx(0.5 * (w(36) + w(35))).epsilon(1e-10));
}

TEST_CASE("SSH winding and edge states") {
  ModelParams p;
  p.variant = Variant::ssh;
  p.n = 40;
  p.delta = 0.5;
  const int w_plus = winding_number(p);
  p.delta = -0.5;
  const int w_minus = winding_number(p);
  CHECK(std::abs(w_plus - w_minus) == 1);

  p.delta = 0.5;
  const GapInfo gap = analytic_gap(p);
  CHECK(edge_state_count(p, gap) == (w_plus != 0 ? 2u : 0u));
  p.delta = -0.5;
  CHECK(edge_state_count(p, gap) == (w_minus != 0 ? 2u : 0u));
}

TEST_CASE("Creutz winding") {
  ModelParams p;
  p.variant = Variant::creutz;
  p.n = 30;
  p.m_creutz = 0.5;
  p.alpha = pi / 2;
  CHECK(std::abs(winding_number(p)) == 1);
  CHECK(edge_state_count(p, analytic_gap(p)) == 2);
  p.alpha = 0.7;
  CHECK_THROWS_WITH_AS(winding_number(p), doctest::Contains("chiral"), Error);
  p.variant = Variant::haldane;
  CHECK_THROWS_AS(winding_number(p), Error);
}

TEST_CASE("phase points") {
  PhaseOptions opt;
  opt.mesh = 8;
  SUBCASE("inside a lobe") {
    const auto pt = phase_point(pi / 2, 0.0, opt);
    REQUIRE(pt.chern);
    CHECK(std::abs(*pt.chern) == 1);
    CHECK(pt.bs_exists);
    CHECK(pt.error.empty());
  }
  SUBCASE("trivial mass gap") {
    const auto pt = phase_point(pi / 2, 8.0, opt);
    REQUIRE(pt.chern);
    CHECK(*pt.chern == 0);
    CHECK(!pt.bs_exists);
  }
  SUBCASE("closed gap has no Chern number") {
    const auto pt = phase_point(pi / 2, 3 * std::sqrt(3.0), opt);
    CHECK(!pt.chern);
    CHECK(pt.gap < 1e-6);
  }
}

TEST_CASE("phase diagram layout and worker independence") {
  PhaseOptions opt;
  opt.phi_steps = 3;
  opt.mt_steps = 5;
  opt.mesh = 6;
  opt.workers = 1;
  const auto a = phase_diagram(opt);
  opt.workers = 3;
  const auto b = phase_diagram(opt);
  REQUIRE(a.size() == 15);
  CHECK(phase_csv(a) == phase_csv(b));
  CHECK(a[0].phi == doctest::Approx(-pi));
  CHECK(a[0].m_over_t == doctest::Approx(-6 * std::sqrt(3.0)));
  CHECK(a[1].phi == doctest::Approx(-pi));
  CHECK(a[5].phi == doctest::Approx(0.0));
  CHECK(a[14].m_over_t == doctest::Approx(6 * std::sqrt(3.0)));
  const std::string csv = phase_csv(a);
  CHECK(csv.rfind("phi,m_over_t,gap,chern,bs_exists\n", 0) == 0);
  opt.phi_steps = 1;
  CHECK_THROWS_AS(phase_diagram(opt), Error);
}
