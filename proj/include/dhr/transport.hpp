#pragma once

// Transporter families: for an object rho localized in o, one unitary arrow
// V_a in (rho, tau_a) with tau_a localized in a, for every region a of the site.

#include "dhr/bimodule.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dhr {

struct Transport {
  Amplimorphism target;  // tau_a, localized in a
  Mat unitary;           // V_a in (rho, tau_a)
};

struct TransporterFamily {
  Amplimorphism base;
  Region support = 0;
  std::vector<Transport> transports;  // indexed by region; transports[support] = (rho, 1_rho)

  const Transport& at(Region a) const;
  Intertwiner arrow(Region a) const;
};

struct FamilyRegionReport {
  Region region = 0;
  double unitarity = 0.0;
  double intertwining = 0.0;
  double localization = 0.0;
};
struct FamilyReport {
  std::vector<FamilyRegionReport> regions;
  double base_localization = 0.0;
  double unit_at_support = 0.0;
  bool complete = false;
  bool ok(double tol = kTol) const;
  double worst() const;
};
FamilyReport validate_family(const TransporterFamily& fam, double tol = kTol);

// rho localized everywhere (e.g. iota): tau_a = rho, V_a = 1_rho.
TransporterFamily trivial_family(const Amplimorphism& rho, Region support);
// Same targets, new base tau_a: V'_b = V_b V_a+.
TransporterFamily rebase(const TransporterFamily& fam, Region a);
// Family of rho' given a unitary u in (rho, rho') with rho' localized in `support`.
TransporterFamily transfer(const TransporterFamily& fam, const Intertwiner& u, Region support);
TransporterFamily tensor_families(const TransporterFamily& f, const TransporterFamily& g);
TransporterFamily direct_sum_families(const TransporterFamily& f, const TransporterFamily& g);

// Another family for the same base: each target away from the support is
// conjugated by a unitary of A(a) drawn from the seed.
TransporterFamily twist_family(const TransporterFamily& fam, std::uint64_t seed);

struct SubobjectFamilyResult {
  std::optional<TransporterFamily> family;
  std::optional<Intertwiner> embedding;  // isometry from the family base into rho
  std::string diagnostic;
  std::vector<Region> failing_regions;
};
// Family for the subobject of rho with range v v+, v in (beta, rho) an isometry.
// Each target is cut down from tau_a by an isometry W_a with entries in A(a)
// onto V_a v v+ V_a+; the base is the cut at the support, so it is localized
// there even when beta is not, and `embedding` is W at the support.
SubobjectFamilyResult subobject_family(const TransporterFamily& fam, const Intertwiner& v, double tol = kTol);

}  // namespace dhr
