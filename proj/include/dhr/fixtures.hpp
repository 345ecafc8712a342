#pragma once

// Gauge-invariant lattice nets on small grids, with charged objects and their
// transporter families. Regions are the boxes of the grid except the full grid.

#include "dhr/net_model.hpp"
#include "dhr/transport.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dhr::fixtures {

struct GaugeFixtureSpec {
  std::string name = "z2_2x2";
  int rows = 2;
  int cols = 2;
  int order = 2;      // cyclic gauge group Z_order acting by the clock matrix
  int site_dim = 2;   // must equal order unless order == 1
  bool fermionic = false;  // Z_2 only: Jordan-Wigner fermions, observables = even part
  bool vacuum = true;      // represent observables on the charge-0 subspace
  bool doubled = false;    // tensor every local algebra with the diagonal algebra of M_2
};

struct FixtureObject {
  std::string id;
  Amplimorphism rho;
  std::optional<TransporterFamily> family;
};

struct FixtureManifest {
  std::string name;
  ValidationReport site;
  NetCheckReport net;
  std::vector<std::string> notes;
};

struct Fixture {
  GaugeFixtureSpec spec;
  NetPtr net;
  Mat embedding;  // isometry from the (undoubled) reference space into the field space
  std::vector<FixtureObject> objects;
  FixtureManifest manifest;

  const FixtureObject& object(const std::string& id) const;
  Region cell_region(int r, int c) const;
  // Charged unitary at a cell, compressed to the reference space.
  Mat charged_unitary(int r, int c, int charge) const;
};

CausalSite grid_site(int rows, int cols);
std::string box_id(int r0, int r1, int c0, int c1);

Fixture build_gauge_fixture(const GaugeFixtureSpec& spec);
// A -> psi A psi* for the charged unitary psi at the cell, with transporters
// to every region (target localized at the top-left cell of the region).
FixtureObject build_charged_morphism(const Fixture& fx, int r, int c, int charge);

std::vector<std::string> fixture_names();
GaugeFixtureSpec named_spec(const std::string& name);
Fixture named_fixture(const std::string& name);

}  // namespace dhr::fixtures
