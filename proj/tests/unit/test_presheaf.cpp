#include "dhr/fixtures.hpp"
#include "dhr/presheaf.hpp"
#include "fixture_cache.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace dhr;
namespace tst = dhr::testing;

namespace {

const TransporterFamily& fam(const std::string& id) { return tst::family("z2_2x2", id); }

// Ordered pairs of grid boxes whose bounding box is the whole grid, which is not a region.
std::size_t unbounded_pairs(const CausalSite& site, int rows, int cols) {
  std::size_t n = 0;
  for (const auto& x : site.ids())
    for (const auto& y : site.ids()) {
      const auto a = tst::parse_box(x), b = tst::parse_box(y);
      if (std::min(a.r0, b.r0) == 0 && std::max(a.r1, b.r1) == rows - 1 && std::min(a.c0, b.c0) == 0 &&
          std::max(a.c1, b.c1) == cols - 1)
        ++n;
    }
  return n;
}

}  // namespace

TEST(Cocycle, FromTransportersSatisfiesIdentities) {
  const auto& f = fam("rho_r00c00");
  const auto z = cocycle_from_transporters(f);
  const auto rep = check_cocycle(z, f);
  EXPECT_TRUE(rep.ok()) << rep.identity << " " << rep.diagonal << " " << rep.locality << " " << rep.reproduces;
  EXPECT_EQ(rep.pairs_without_bound, unbounded_pairs(f.base.net().site(), 2, 2));
  const Region a = 3, b = 5;
  EXPECT_LT(tst::distance(z.at(a, b), f.at(a).unitary * f.at(b).unitary.adjoint()), 1e-14);
}

TEST(Cocycle, BrokenCocycleIsDetected) {
  const auto& f = fam("rho_r00c00");
  auto z = cocycle_from_transporters(f);
  z.z[1][2] = -z.z[1][2];
  EXPECT_GT(check_cocycle(z, f).identity, 1.0);
}

TEST(Cocycle, NonUnitaryTransporterThrows) {
  auto f = fam("rho_r00c00");
  f.transports[2].unitary *= 2.0;
  EXPECT_THROW(cocycle_from_transporters(f), Error);
}

TEST(Cocycle, TwistedFamilyIsCohomologous) {
  const auto& f = fam("rho_r00c00");
  const auto g = twist_family(f, 17);
  EXPECT_LT(cohomology_defect(f, g), 1e-9);
  EXPECT_TRUE(check_cocycle(cocycle_from_transporters(g), g).ok());
}

TEST(Presheaf, ExtensionIsAValidPresheafMorphism) {
  for (const std::string id : {"iota", "rho_r00c00", "rho_r11c00"}) {
    const auto& f = fam(id);
    const auto ext = extend(f);
    const auto rep = check_presheaf_morphism(ext, f.base);
    EXPECT_TRUE(rep.ok()) << id << " compat " << rep.compatibility << " agree " << rep.agreement;
  }
}

TEST(Presheaf, ExtensionSerialAndParallelAgree) {
  const auto& f = fam("rho_r00c00");
  const auto s = extend(f, kernels::Exec::serial);
  const auto p = extend(f, kernels::Exec::parallel);
  EXPECT_EQ(presheaf_distance(s, p), 0.0);
}

TEST(Presheaf, ExtensionDoesNotDependOnTheFamily) {
  const auto& f = fam("rho_r00c00");
  EXPECT_LT(presheaf_distance(extend(f), extend(twist_family(f, 3))), 1e-9);
}

TEST(Presheaf, RoundTripBetweenNetAndPresheaf) {
  for (const std::string id : {"rho_r00c00", "rho_r11c11"}) {
    const auto rt = functor_round_trip(fam(id));
    EXPECT_TRUE(rt.ok()) << id << " " << rt.restrict_extend << " " << rt.extend_restrict;
  }
  const auto r = restrict_presheaf(extend(fam("rho_r00c00")));
  ASSERT_TRUE(r.rho) << r.diagnostic;
  EXPECT_LT(amplimorphism_distance(*r.rho, fam("rho_r00c00").base), 1e-9);
  EXPECT_LT(r.choice_discrepancy, 1e-9);
}

TEST(Presheaf, TensorProductIsComposition) {
  const auto& f = fam("rho_r00c00");
  const auto& g = fam("rho_r00c11");
  EXPECT_LT(tensor_identity_defect(f, g), 1e-9);
  const auto t = presheaf_tensor(f, g);
  EXPECT_TRUE(check_presheaf_morphism(t, tensor_objects(f.base, g.base)).ok());
}

TEST(Presheaf, SymmetryIntertwinesPresheafTensorProducts) {
  const auto& f = fam("rho_r00c00");
  const auto& g = fam("rho_r00c11");
  const auto eps = symmetry(f, g).eps;
  const auto fg = extend(tensor_families(f, g));
  const auto gf = extend(tensor_families(g, f));
  EXPECT_LT(presheaf_intertwiner_defect(eps.block, fg, gf), 1e-9);
  DetRng rng(6);
  EXPECT_GT(presheaf_intertwiner_defect(random_unitary(eps.block.rows(), rng), fg, gf), 1e-3);
}

TEST(Faithfulness, ChargedObjectIsDoublyFaithful) {
  const auto rep = check_faithfulness(fam("rho_r00c00"));
  EXPECT_TRUE(rep.faithful());
  EXPECT_TRUE(rep.doubly_faithful());
  EXPECT_TRUE(rep.consistent());
}

TEST(Faithfulness, CutDownObjectIsNotFaithful) {
  const auto& fx = tst::fixture("z2_2x2_doubled");
  const auto rep = check_faithfulness(*fx.object("sigma_nf").family);
  EXPECT_FALSE(rep.faithful());
  EXPECT_TRUE(rep.consistent());
  EXPECT_FALSE(rep.kernel_failures.empty());
  EXPECT_FALSE(rep.central_failures.empty());
}

TEST(PresheafLeftInverse, SimpleRouteAndAssociatedNetLeftInverse) {
  const auto& f = fam("rho_r00c00");
  const auto pli = presheaf_left_inverse_simple(f);
  ASSERT_TRUE(pli.value) << pli.diagnostic;
  EXPECT_LT(pli.image_defect, 1e-9);
  const auto ext = extend(f);
  EXPECT_TRUE(check_presheaf_left_inverse(*pli.value, ext).ok());
  for (Region a : pli.value->regions()) EXPECT_TRUE(f.base.net().site().disjoint(a, f.support));
  const auto assoc = associated_left_inverse(*pli.value);
  ASSERT_TRUE(assoc.value) << assoc.diagnostic;
  EXPECT_LT(assoc.consistency, 1e-9);
  EXPECT_TRUE(check_left_inverse(*assoc.value).ok());
  // an automorphism has exactly one left inverse, its inverse
  const auto direct = left_inverse_simple(f.base);
  ASSERT_TRUE(direct.value);
  EXPECT_LT(left_inverse_distance(*assoc.value, *direct.value), 1e-9);
}

TEST(PresheafLeftInverse, ConvexAndCompressedOnDirectSum) {
  const auto& f = fam("rho_r00c00");
  const auto pli = presheaf_left_inverse_simple(f);
  ASSERT_TRUE(pli.value);
  const auto ds = direct_sum(f.base, f.base);
  const auto conv = pli_convex(ds, *pli.value, *pli.value, 0.25);
  const auto sumfam = direct_sum_families(f, f);
  EXPECT_TRUE(check_presheaf_left_inverse(conv, extend(sumfam)).ok());
  const auto comp = pli_compress(conv, ds.w1);
  ASSERT_TRUE(comp.value) << comp.diagnostic;
  EXPECT_TRUE(check_presheaf_left_inverse(*comp.value, extend(f)).ok());
  const auto twice = pli_compose(*pli.value, *pli.value);
  EXPECT_TRUE(check_presheaf_left_inverse(twice, extend(tensor_families(f, f))).ok());
}

TEST(Homogeneity, SimpleChargeEverywhere) {
  const auto rep = check_homogeneous(fam("rho_r00c00"));
  EXPECT_TRUE(rep.homogeneous);
  EXPECT_TRUE(rep.failing().empty());
  EXPECT_EQ(rep.regions.size(), fam("rho_r00c00").transports.size());
  for (const auto& r : rep.regions) EXPECT_EQ(r.route, "simple");
}

TEST(Homogeneity, DirectSumUsesSummands) {
  const auto sum = direct_sum_families(fam("rho_r00c00"), fam("rho_r00c00"));
  const auto rep = check_homogeneous(sum);
  EXPECT_TRUE(rep.homogeneous);
  for (const auto& r : rep.regions) EXPECT_EQ(r.route, "direct-sum") << r.diagnostic;
}

TEST(Membership, ChargedObjectIsRelevant) {
  const auto rep = check_relevant_membership(fam("rho_r00c00"));
  EXPECT_TRUE(rep.member);
  ASSERT_EQ(rep.summands.size(), 1u);
  EXPECT_TRUE(rep.summands.front().equivalence_consistent);
}

TEST(PresheafLeftInverse, FermionicChargeWithoutDuality) {
  // the componentwise inverse needs only the extension, not duality
  const auto& f = *tst::fixture("z2f_2x2_full").object("rho_r00c00").family;
  EXPECT_TRUE(check_presheaf_morphism(extend(f), f.base).ok());
  const auto r = presheaf_left_inverse_simple(f);
  ASSERT_TRUE(r.value) << r.diagnostic;
  EXPECT_TRUE(check_presheaf_left_inverse(*r.value, extend(f)).ok());
  const auto assoc = associated_left_inverse(*r.value);
  ASSERT_TRUE(assoc.value) << assoc.diagnostic;
  EXPECT_TRUE(check_left_inverse(*assoc.value).ok());
}
