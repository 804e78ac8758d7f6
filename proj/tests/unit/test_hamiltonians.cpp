#include <cmath>
#include <vector>

#include "doctest.h"
#include "sdg/error.hpp"
#include "sdg/examples.hpp"
#include "sdg/hamiltonians.hpp"

using namespace sdg;

namespace {

HamPoint point(double z, double gamma, double x = 0.0, double y = 0.0, double t = 0.0) {
  return {t, {x}, y, {z}, {gamma}};
}

double H(const CoefficientSet& cs, const HamPoint& xi, double u, double v) {
  return hamiltonian(cs, xi, ConstVec(&u, 1), ConstVec(&v, 1));
}

EnvelopeGrids grids(double anchor_radius, double lattice_radius, std::size_t anchors, std::size_t lattice) {
  const double c = 0.0;
  EnvelopeGrids g;
  g.anchors_u = ball_lattice(ConstVec(&c, 1), anchor_radius, anchors);
  g.anchors_v = g.anchors_u;
  g.lattice_u = ball_lattice(ConstVec(&c, 1), lattice_radius, lattice);
  g.lattice_v = g.lattice_u;
  return g;
}

}  // namespace

TEST_CASE("hamiltonian plug-in values") {
  CHECK(H(make_game("heat"), point(0.7, 2.0), 0.0, 0.0) == doctest::Approx(1.0));
  CHECK(H(make_game("scalar_phi_sum"), point(0.0, 0.0), 1.0, 2.0) == doctest::Approx(3.0));
  CHECK(H(make_game("mirror"), point(1.0, 0.0), 1.0, -1.0) == doctest::Approx(2.0));
}

TEST_CASE("malformed points are rejected") {
  HamPoint bad = point(0.0, 0.0);
  bad.Gamma = {1.0, 2.0};
  CHECK_THROWS_AS(H(make_game("heat"), bad, 0.0, 0.0), Error);
}

TEST_CASE("control-free Hamiltonian") {
  SUBCASE("identically zero") {
    const CoefficientSet cs = make_game("zero");
    for (Envelope e : {Envelope::H1Lower, Envelope::H1Upper, Envelope::H2Lower, Envelope::H2Upper})
      for (double v : envelope_h(cs, point(0.3, -1.0), e, grids(1.0, 2.0, 5, 9)).per_level) CHECK(v == 0.0);
  }
  SUBCASE("heat: the limit approaches H(Xi) as the neighbourhood shrinks") {
    const CoefficientSet cs = make_game("heat");
    const EnvelopeGrids g = grids(1.0, 2.0, 5, 9);
    const double slack = 0.5 * g.xi_radius / static_cast<double>(g.n_max + 1) + 1e-12;
    for (Envelope e : {Envelope::H1Lower, Envelope::H1Upper, Envelope::H2Lower, Envelope::H2Upper}) {
      const EnvelopeResult r = envelope_h(cs, point(0.0, 2.0), e, g);
      CHECK(r.per_level.size() == g.n_max);
      CHECK(std::abs(r.limit - 1.0) <= slack);
    }
  }
}

TEST_CASE("mirror game level sequences are monotone") {
  const CoefficientSet cs = make_game("mirror");
  const EnvelopeGrids g = grids(2.0, 20.0, 9, 81);
  const HamPoint xi = point(1.0, 0.0);
  const auto up = envelope_h(cs, xi, Envelope::H1Upper, g).per_level;
  const auto lo = envelope_h(cs, xi, Envelope::H2Lower, g).per_level;
  for (std::size_t n = 1; n < up.size(); ++n) {
    CHECK(up[n] <= up[n - 1]);
    CHECK(lo[n] >= lo[n - 1]);
  }
  // The truncated inf over v pushes v to kappa + n|u|: strictly decreasing early on.
  CHECK(up.front() > up.back());
}

TEST_CASE("compact case collapses to the brute-force values") {
  const CoefficientSet cs = make_game("compact_demo");
  const HamPoint xi = point(0.4, -0.3, 0.2, 0.1, 0.5);
  double prev = INFINITY;
  for (std::size_t per_axis : {9u, 17u, 33u}) {
    EnvelopeGrids g = grids(1.0, 1.0, per_axis, per_axis);
    g.xi_radius = g.control_radius = 2.0 / static_cast<double>(per_axis - 1);
    const double si = supinf_bruteforce(cs, xi, g.anchors_u, g.lattice_v);
    const double is = infsup_bruteforce(cs, xi, g.lattice_u, g.anchors_v);
    const double modulus = grid_modulus(cs, xi, g);
    double gap = std::abs(envelope_h(cs, xi, Envelope::H1Lower, g).limit - si);
    gap = std::max(gap, std::abs(envelope_h(cs, xi, Envelope::H1Upper, g).limit - si));
    gap = std::max(gap, std::abs(envelope_h(cs, xi, Envelope::H2Lower, g).limit - is));
    gap = std::max(gap, std::abs(envelope_h(cs, xi, Envelope::H2Upper, g).limit - is));
    CHECK(gap <= modulus);
    CHECK(gap <= prev);
    prev = gap;
  }
}

TEST_CASE("brute force min-max ordering") {
  const CoefficientSet cs = make_game("compact_demo");
  const double c = 0.0;
  const auto us = ball_lattice(ConstVec(&c, 1), 1.0, 9);
  const HamPoint xi = point(0.5, 0.2, 0.1, 0.0, 0.3);
  CHECK(supinf_bruteforce(cs, xi, us, us) <= infsup_bruteforce(cs, xi, us, us) + 1e-12);
}

TEST_CASE("ball lattice") {
  const double c = 0.0;
  const auto line = ball_lattice(ConstVec(&c, 1), 1.0, 5);
  REQUIRE(line.size() == 5);
  CHECK(line.front()[0] == doctest::Approx(-1.0));
  CHECK(line[2][0] == doctest::Approx(0.0));
  const std::vector<double> c2{0.0, 0.0};
  const auto disc = ball_lattice(c2, 1.0, 3);
  CHECK(disc.size() == 5);  // corners fall outside the unit disc
}

TEST_CASE("empty grids are rejected") {
  EnvelopeGrids g = grids(1.0, 1.0, 3, 3);
  g.anchors_u.clear();
  CHECK_THROWS_AS(envelope_h(make_game("compact_demo"), point(0.0, 0.0), Envelope::H1Upper, g), Error);
}
