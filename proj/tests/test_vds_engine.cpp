#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "vds/models.hpp"
#include "vds/spectra.hpp"
#include "vds/vds_engine.hpp"

using namespace vds;
using std::numbers::pi;

namespace {

BathGraph dimer(double J = 1.0) {
  ModelParams p;
  p.variant = Variant::dimer;
  p.J = J;
  return build_model(p);
}

CVector one_site() {
  CVector psi(1);
  psi << 1.0;
  return psi;
}

ModelParams chain(int n) {
  ModelParams p;
  p.variant = Variant::chain;
  p.n = n;
  p.bc = Boundary::open;
  return p;
}

void check_invariants(const DressedState& ds) {
  CHECK(ds.full_vector().norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(ds.psi(static_cast<Eigen::Index>(ds.v))) <= 1e-12);
  CHECK(ds.theta >= 0.0);
  CHECK(ds.theta <= pi / 2);
  CHECK(ds.epsilon == doctest::Approx(std::cos(ds.theta)).epsilon(1e-14));
  CHECK(ds.psi.norm() == doctest::Approx(std::sin(ds.theta)).epsilon(1e-12));
}

}  // namespace

TEST_CASE("dimer: tan theta = g / J, phi = 0") {
  for (double J : {1.0, 0.5})
    for (double g : {0.1, 1.0, 10.0}) {
      const AtomSpec atom{0.0, g * J, 0};
      const auto ds = make_vds(dimer(J), atom, one_site());
      CHECK(std::abs(std::tan(ds.theta) - g) <= 1e-12 * std::max(1.0, g));
      CHECK(ds.phi_angle == 0.0);
      CHECK(!std::signbit(ds.phi_angle));
      CHECK(verify_vds(ds, dimer(J), atom) <= 1e-10);
      check_invariants(ds);
    }
}

TEST_CASE("g = 0 gives the bare excited atom") {
  const AtomSpec atom{0.0, 0.0, 0};
  const auto ds = make_vds(dimer(), atom, one_site());
  CHECK(ds.theta == 0.0);
  CHECK(ds.epsilon == 1.0);
  CHECK(ds.psi.norm() == 0.0);
}

TEST_CASE("preconditions") {
  SUBCASE("not an eigenstate of B_v") {
    const BathGraph b = build_model(chain(6));
    CVector psi = CVector::Ones(5);
    CHECK_THROWS_WITH_AS(make_vds(b, {0.0, 0.1, 2}, psi), doctest::Contains("eigenstate"), Error);
  }
  SUBCASE("zero boundary element") {
    const BathGraph iso({0.0, 0.0, 0.0}, {{0, 1, -1.0}});
    CVector q(2);
    q << 0.0, 1.0;  // isolated site, untouched by v
    CHECK_THROWS_WITH_AS(make_vds(iso, {0.0, 0.1, 0}, q),
                         doctest::Contains("unbound/ill-conditioned VDS"), Error);
  }
  SUBCASE("dimension and range") {
    CHECK_THROWS_AS(make_vds(dimer(), {0.0, 0.1, 0}, CVector::Ones(2)), Error);
    CHECK_THROWS_AS(make_vds(dimer(), {0.0, 0.1, 2}, one_site()), Error);
    CHECK_THROWS_AS(make_vds(dimer(), {0.0, -0.1, 0}, one_site()), Error);
  }
}

TEST_CASE("broken node is detected") {
  const BathGraph b = dimer();
  const AtomSpec atom{0.0, 1.0, 0};
  auto ds = make_vds(b, atom, one_site());
  ds.psi(0) = 0.01;
  CHECK(verify_vds(ds, b, atom) > 1e-4);
}

TEST_CASE("energy does not depend on g and theta grows with g") {
  ModelParams p;
  p.variant = Variant::creutz;
  p.n = 8;
  p.m_creutz = 0.5;
  p.alpha = pi / 2;
  const BathGraph b = build_model(p);
  const SiteId v = lattice_site(p, 3, 0, 0);
  const auto vac = vacancy_ingap_states(b, v, analytic_gap(p));
  REQUIRE(vac.size() == 1);
  const CVector psi = restrict_to_vacancy(vac[0].psi, v);
  double last = -1.0;
  for (double g : {1e-3, 1e-2, 0.1, 1.0, 3.0}) {
    const AtomSpec atom{vac[0].energy, g, v};
    const auto ds = make_vds(b, atom, psi);
    CHECK(ds.energy == vac[0].energy);
    CHECK(verify_vds(ds, b, atom) <= 1e-10);
    CHECK(ds.theta > last);
    last = ds.theta;
    check_invariants(ds);
  }
}

TEST_CASE("random sites and couplings across the zoo") {
  std::mt19937 rng(2024);
  std::vector<ModelParams> zoo;
  ModelParams p;
  p.variant = Variant::dimer;
  zoo.push_back(p);
  p.variant = Variant::chain;
  p.n = 30;
  zoo.push_back(p);
  p.variant = Variant::ssh;
  p.n = 15;
  p.delta = 0.4;
  zoo.push_back(p);
  p.variant = Variant::creutz;
  p.n = 12;
  p.m_creutz = 0.3;
  p.alpha = 0.8;
  zoo.push_back(p);
  p.variant = Variant::haldane;
  p.nx = 5;
  p.ny = 4;
  p.t = 0.1;
  p.phi = 1.0;
  p.m_haldane = 0.2;
  zoo.push_back(p);
  for (const auto& m : zoo) {
    const BathGraph b = build_model(m);
    std::uniform_int_distribution<SiteId> site(0, b.size() - 1);
    std::uniform_real_distribution<double> coupling(0.0, 3.0);
    for (int trial = 0; trial < 5; ++trial) {
      const SiteId v = site(rng);
      const auto es = diagonalize(assemble_bath(remove_site(b, v)));
      const Eigen::Index k = static_cast<Eigen::Index>(rng() % es.size());
      const AtomSpec atom{es.values(k), coupling(rng), v};
      if (std::abs(boundary_element(b, v, es.vector(k))) <= 1e-12) continue;
      const auto ds = make_vds(b, atom, es.vector(k));
      CHECK(verify_vds(ds, b, atom) <= 1e-10);
      check_invariants(ds);
    }
  }
}

TEST_CASE("make_vds agrees with the exact eigenvector when the level is unique") {
  ModelParams p;
  p.variant = Variant::ssh;
  p.n = 20;
  p.delta = 0.5;
  const BathGraph b = build_model(p);
  const SiteId v = lattice_site(p, 10, 0, 0);
  const auto vac = vacancy_ingap_states(b, v, analytic_gap(p));
  REQUIRE(vac.size() == 1);
  const AtomSpec atom{vac[0].energy, 0.05, v};
  const auto ds = make_vds(b, atom, restrict_to_vacancy(vac[0].psi, v));
  const auto exact = oracle::spectrum(assemble_full(b, {atom}).dense());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(assemble_full(b, {atom}).dense());
  Eigen::Index best = 0;
  (es.eigenvalues().array() - atom.omega0).abs().minCoeff(&best);
  CHECK(es.eigenvalues()(best) == doctest::Approx(atom.omega0).epsilon(1e-10));
  CHECK(std::norm(es.eigenvectors().col(best).dot(ds.full_vector())) >= 1.0 - 1e-10);
  CHECK(exact.size() == static_cast<Eigen::Index>(b.size() + 1));
}

TEST_CASE("vds_candidates") {
  SUBCASE("dimer: single candidate omega_1") {
    const auto c = vds_candidates(dimer(), 0);
    REQUIRE(c.size() == 1);
    CHECK(c[0].omega == 0.0);
    CHECK(vds_at(dimer(), {0.3, 1.0, 0}).empty());
  }
  SUBCASE("open chain: union of the two segments") {
    const BathGraph b = build_model(chain(200));
    const SiteId v = 80;
    std::vector<double> ref;
    for (int len : {80, 119}) {
      const RVector w = oracle::spectrum(oracle::chain(len, 1.0, false));
      ref.insert(ref.end(), w.data(), w.data() + w.size());
    }
    std::sort(ref.begin(), ref.end());
    const auto c = vds_candidates(b, v);
    std::size_t total = 0;
    for (const auto& x : c) total += x.multiplicity;
    CHECK(total == 199);
    CHECK(c.size() == count_levels(ref));
    std::size_t k = 0;
    for (const auto& x : c) {
      CHECK(x.omega == doctest::Approx(ref[k]).epsilon(1e-10));
      k += x.multiplicity;
    }
  }
}

TEST_CASE("degenerate eigenspace: one coupled VDS plus photon-only states") {
  // star: v = 0 joined to three otherwise isolated cavities
  const BathGraph b({0.0, 0.0, 0.0, 0.0}, {{0, 1, -1.0}, {0, 2, -1.0}, {0, 3, -1.0}});
  const AtomSpec atom{0.0, 0.5, 0};
  const auto states = vds_at(b, atom);
  REQUIRE(states.size() == 3);
  CHECK(!states[0].photon_only);
  CHECK(std::tan(states[0].theta) == doctest::Approx(0.5 / std::sqrt(3.0)));
  for (const auto& ds : states) {
    CHECK(verify_vds(ds, b, atom) <= 1e-10);
    CHECK(ds.full_vector().norm() == doctest::Approx(1.0));
  }
  CHECK(states[1].photon_only);
  CHECK(states[2].photon_only);
  CHECK(std::abs(states[1].full_vector().dot(states[2].full_vector())) < 1e-12);
  CHECK(std::abs(states[0].full_vector().dot(states[1].full_vector())) < 1e-12);
}

TEST_CASE("bic_scan") {
  const ModelParams c = chain(2);
  SUBCASE("s = 3: bound state between the mirror and the end") {
    const auto r = bic_scan(c, 400, 3, 0.0, 0.3);
    REQUIRE(r.exists);
    CHECK(r.residual <= 1e-10);
    CHECK(r.leak_probability <= 1e-8);
    CHECK(r.exact_overlap >= 1.0 - 1e-10);
    const RVector seg = oracle::spectrum(oracle::chain(3, 1.0, false));
    CHECK(std::abs(seg(1)) < 1e-12);
  }
  SUBCASE("s = 2: no mode at omega_c") {
    CHECK(!bic_scan(c, 400, 2, 0.0, 0.3).exists);
    const RVector seg = oracle::spectrum(oracle::chain(2, 1.0, false));
    CHECK(seg(0) == doctest::Approx(-1.0));
    CHECK(seg(1) == doctest::Approx(1.0));
  }
  SUBCASE("off-centre frequency matching a 4-site mode") {
    const double w = -2.0 * std::cos(pi / 5);
    const auto r = bic_scan(c, 300, 4, w, 0.2);
    REQUIRE(r.exists);
    CHECK(r.leak_probability <= 1e-8);
  }
  SUBCASE("argument checks") {
    CHECK_THROWS_AS(bic_scan(c, 10, 9, 0.0, 0.1), Error);
    ModelParams s;
    s.variant = Variant::ssh;
    CHECK_THROWS_AS(bic_scan(s, 10, 3, 0.0, 0.1), Error);
  }
}

TEST_CASE("unbound_vds_check: standing waves with a node on the atom") {
  ModelParams c = chain(403);
  const auto r = unbound_vds_check(c, {0.0, 0.5, 201}, 0.05);
  REQUIRE(!r.node_states.empty());
  for (const auto& s : r.node_states) CHECK(s.standing_wave_overlap >= 0.99);
  int at_resonance = 0;
  for (const auto& s : r.node_states)
    if (std::abs(s.energy) < 1e-8) ++at_resonance;
  CHECK(at_resonance >= 1);
  REQUIRE(!std::isnan(r.min_offresonant_amplitude));
  CHECK(r.min_offresonant_amplitude > 1e-3);

  CHECK_THROWS_AS(unbound_vds_check(c, {2.0, 0.5, 201}, 0.05), Error);
  CHECK_THROWS_AS(unbound_vds_check(c, {0.0, 0.5, 0}, 0.05), Error);
}

TEST_CASE("decoupled atom: only bare chain modes") {
  // omega0 between two chain levels so the bare atom stays a separate eigenvector
  const double w0 = 0.005;
  const auto r = unbound_vds_check(chain(401), {w0, 0.0, 200}, 0.02);
  const RVector bare = oracle::spectrum(oracle::chain(401, 1.0, false));
  std::size_t nodes = 0;
  for (Eigen::Index k = 0; k < bare.size(); ++k)
    if (std::abs(bare(k) - w0) < 0.02 && k % 2 == 1) ++nodes;  // odd k: node at the centre
  // the bare atom itself is the extra entry at omega0
  CHECK(r.node_states.size() == nodes + 1);
  for (const auto& s : r.node_states)
    if (std::abs(s.energy - w0) > 1e-12) CHECK(s.standing_wave_overlap >= 0.99);
  CHECK(std::isnan(r.min_offresonant_amplitude));
}

TEST_CASE("detuning robustness") {
  ModelParams p;
  p.variant = Variant::ssh;
  p.n = 40;
  p.delta = 0.5;
  const BathGraph b = build_model(p);
  const GapInfo gap = analytic_gap(p);
  const SiteId v = lattice_site(p, 20, 0, 0);

  SUBCASE("weak coupling") {
    const double g = 0.01;
    std::vector<double> dw;
    for (int k = -10; k <= 10; ++k) dw.push_back(g * k / 10.0);
    const auto curve = detuning_robustness(b, {0.0, g, v}, gap, dw);
    REQUIRE(curve.size() == dw.size());
    CHECK(curve[10].fidelity == doctest::Approx(1.0).epsilon(1e-10));
    for (const auto& pt : curve) {
      CHECK(pt.in_gap);
      CHECK(pt.fidelity >= 0.9);
      CHECK(pt.fidelity <= curve[10].fidelity + 1e-12);
    }
  }
  SUBCASE("strong coupling degrades away from resonance") {
    const double g = gap.width;
    const auto curve = detuning_robustness(b, {0.0, g, v}, gap, {-g, 0.0, g});
    CHECK(curve[1].fidelity == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::min(curve[0].fidelity, curve[2].fidelity) < 0.9);
  }
}
