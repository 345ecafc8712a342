#pragma once

// The presheaf side: 1-cocycles from transporters, the extension of an object
// to the commutants A(a)', restriction back to the net, presheaf tensor
// products, (double) faithfulness, presheaf-left inverses and homogeneity.

#include "dhr/symmetry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dhr {

// z[a][b] = V_a V_b+ in (tau_b, tau_a).
struct Cocycle {
  std::vector<std::vector<Mat>> z;
  const Mat& at(Region a, Region b) const { return z.at(a).at(b); }
};
// Throws when a transporter is not unitary.
Cocycle cocycle_from_transporters(const TransporterFamily& fam, double tol = kTol);

struct CocycleReport {
  double identity = 0.0;    // z_ab z_bc - z_ac over all triples
  double diagonal = 0.0;    // z_aa - tau_a(1)
  double locality = 0.0;    // entries of z_ab outside A(c) for the smallest c containing a and b
  double reproduces = 0.0;  // z_oa (A (x) 1) z_ao - rho(A) for A in A(b), b spacelike to a
  std::size_t pairs_without_bound = 0;
  bool ok(double tol = kTol) const;
};
CocycleReport check_cocycle(const Cocycle& z, const TransporterFamily& fam, double tol = kTol);
// Largest |zg_ab - u_a z_ab u_b+| with u_a = W_a V_a+ in (tau_a, taug_a), for
// two families V, W of the same base.
double cohomology_defect(const TransporterFamily& f, const TransporterFamily& g);

// Components _a rho on A(a)' for every region a, tabulated on the basis of
// net.local_commutant(a).
struct PresheafMorphism {
  NetPtr net;
  Eigen::Index multiplicity = 1;
  Region support = 0;
  Mat unit;
  std::vector<std::vector<Mat>> components;
  std::string label;

  Eigen::Index size() const { return multiplicity * net->ambient_dim(); }
  Mat component(Region a, const Mat& x) const;
  // Entrywise application of _a rho to a block matrix with entries in A(a)'.
  Mat lift(Region a, const Mat& x) const;
};

// _a rho(A) = V_a+ (A (x) 1) V_a.
PresheafMorphism extend(const TransporterFamily& fam, kernels::Exec e = kernels::default_exec());
double presheaf_distance(const PresheafMorphism& x, const PresheafMorphism& y);

struct PresheafReport {
  double unit = 0.0;
  double compatibility = 0.0;  // _a rho = _b rho on A(b)' for a <= b
  double localization = 0.0;   // _o rho(A) = (A (x) 1) rho(1) on A(o)'
  double homomorphism = 0.0;
  double codomain = 0.0;       // _a rho(A(a)') inside A(a)' (x) M_n for a spacelike to o
  double agreement = 0.0;      // _a rho = rho on A(b) for b spacelike to a
  bool ok(double tol = kTol) const;
};
PresheafReport check_presheaf_morphism(const PresheafMorphism& r, const Amplimorphism& rho, double tol = kTol);
// Largest |T _a rho(A) - _a sigma(A) T| over regions and commutant basis elements.
double presheaf_intertwiner_defect(const Mat& t, const PresheafMorphism& r, const PresheafMorphism& s);

struct RestrictResult {
  std::optional<Amplimorphism> rho;
  double choice_discrepancy = 0.0;  // two spacelike regions b used to evaluate on A(a)
  std::string diagnostic;
};
// On A(a) uses _b rho for the first b spacelike to a, then closes under products.
RestrictResult restrict_presheaf(const PresheafMorphism& r, double tol = kTol);

// Homomorphism of the global algebra fixed by values on elements that
// generate it; products of the given pairs are added until the global
// dimension is reached.
std::optional<Amplimorphism> extend_homomorphism(const NetPtr& net, Eigen::Index multiplicity,
                                                 const std::vector<std::pair<Mat, Mat>>& values,
                                                 std::optional<Region> support, std::string label,
                                                 std::string* diagnostic = nullptr, double tol = kTol);
double amplimorphism_distance(const Amplimorphism& a, const Amplimorphism& b);

struct RoundTrip {
  double restrict_extend = 0.0;  // R(E(rho)) - rho
  double extend_restrict = 0.0;  // E(R(rho^)) - rho^
  double choice_discrepancy = 0.0;
  bool ok(double tol = kTol) const;
};
RoundTrip functor_round_trip(const TransporterFamily& fam, double tol = kTol);

// Extension of rho sigma from the tensor family.
PresheafMorphism presheaf_tensor(const TransporterFamily& f, const TransporterFamily& g);
// Largest |_c(rho sigma)(A) - _c rho(_c sigma(A))| over c spacelike to both supports.
double tensor_identity_defect(const TransporterFamily& f, const TransporterFamily& g);

struct FaithfulnessReport {
  bool faithful_kernel = false;
  bool faithful_central = false;
  bool doubly_kernel = false;
  bool doubly_central = false;
  std::vector<Region> kernel_failures;   // regions where _a rho is not injective
  std::vector<Region> central_failures;  // regions o where tau_o(1) has central support != 1
  bool faithful() const { return faithful_kernel && faithful_central; }
  bool doubly_faithful() const { return doubly_kernel && doubly_central; }
  bool consistent() const { return faithful_kernel == faithful_central && doubly_kernel == doubly_central; }
};
FaithfulnessReport check_faithfulness(const TransporterFamily& fam, double tol = kTol);

// Components _a phi for regions a spacelike to the support, each stored like a
// LeftInverse generator acting on (A(a)' (x) M_n)_{rho(1)}.
struct PresheafLeftInverse {
  Amplimorphism base;
  Region support = 0;
  std::vector<std::optional<Mat>> actions;

  bool defined_at(Region a) const { return a < actions.size() && actions[a].has_value(); }
  std::vector<Region> regions() const;
  Mat component(Region a, const Mat& b) const;
  Mat apply(Region a, const Mat& x) const;
};

struct PresheafLeftInverseResult {
  std::optional<PresheafLeftInverse> value;
  std::string diagnostic;
  std::vector<Region> failing_regions;
  double image_defect = 0.0;  // distance of _a gamma(A(a)') from (A(a)' (x) M)_{gamma(1)}, simple route
};
// Componentwise inverse of the extension of gamma onto its image.
PresheafLeftInverseResult presheaf_left_inverse_simple(const TransporterFamily& gamma_fam, double tol = kTol);
// _a phi(A) = _a gamma^{-1}(V+ _a rho^{d-1}(A) V) for v in (gamma, rho^d); rho and gamma
// localized in the same region.
PresheafLeftInverseResult presheaf_left_inverse_finite_stats(const TransporterFamily& rho_fam, int d,
                                                             const TransporterFamily& gamma_fam, const Intertwiner& v,
                                                             double tol = kTol);

struct PresheafLeftInverseReport {
  double normalization = 0.0;
  double restriction = 0.0;  // _a phi = _b phi on (A(b)' (x) M)_{rho(1)} for a <= b
  double module = 0.0;       // _a phi(B _a rho(A)) = _a phi(B) A
  double positivity = 0.0;
  bool ok(double tol = kTol) const;
};
PresheafLeftInverseReport check_presheaf_left_inverse(const PresheafLeftInverse& phi, const PresheafMorphism& rho,
                                                      double tol = kTol);

struct AssociatedLeftInverse {
  std::optional<LeftInverse> value;
  double consistency = 0.0;  // largest disagreement among the determining data
  std::string diagnostic;
};
// Net-left inverse agreeing with _b phi on (A(c) (x) M)_{rho(1)} for c spacelike to b,
// extended through phi(X rho(A)) = phi(X) A and phi(rho(A) X) = A phi(X).
AssociatedLeftInverse associated_left_inverse(const PresheafLeftInverse& phi, double tol = kTol);

PresheafLeftInverse pli_compose(const PresheafLeftInverse& phi, const PresheafLeftInverse& psi);
PresheafLeftInverse pli_convex(const DirectSum& sum, const PresheafLeftInverse& phi1, const PresheafLeftInverse& phi2,
                               double s);
struct PresheafCompressResult {
  std::optional<PresheafLeftInverse> value;
  std::vector<Region> closed_gates;
  std::string diagnostic;
};
PresheafCompressResult pli_compress(const PresheafLeftInverse& phi, const Intertwiner& v, double tol = kTol);
// Largest generator difference over the reduced global algebra.
double left_inverse_distance(const LeftInverse& a, const LeftInverse& b, double tol = kTol);

struct HomogeneityRegion {
  Region region = 0;
  bool ok = false;
  std::string route;  // "simple", "finite-statistics" or "direct-sum"
  std::string diagnostic;
};
struct HomogeneityReport {
  std::vector<HomogeneityRegion> regions;
  bool homogeneous = false;
  std::vector<Region> failing() const;
};
// For every region a, transports rho to a and builds a presheaf-left inverse
// there; a decomposed rho combines the inverses of its summands.
HomogeneityReport check_homogeneous(const TransporterFamily& fam, int d_max = 4, double tol = kTol);

struct MembershipSummand {
  std::optional<Witness> witness;
  std::optional<FaithfulnessReport> gamma_faithfulness;
  std::optional<HomogeneityReport> homogeneity;
  bool member = false;
  bool equivalence_consistent = false;  // member == (homogeneous and finite statistics)
  std::vector<std::string> evidence;
};
struct MembershipReport {
  StatisticsReport statistics;
  std::vector<MembershipSummand> summands;
  bool member = false;
};
MembershipReport check_relevant_membership(const TransporterFamily& fam, int d_max = 4, double tol = kTol);

}  // namespace dhr
