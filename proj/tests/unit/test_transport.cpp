#include "dhr/fixtures.hpp"
#include "fixture_cache.hpp"

#include <gtest/gtest.h>

using namespace dhr;
namespace tst = dhr::testing;

namespace {

const fixtures::Fixture& z2() { return tst::fixture("z2_2x2"); }
Region reg(const std::string& id) { return z2().net->site().index(id); }

void expect_valid(const TransporterFamily& fam, const std::string& what) {
  const auto rep = validate_family(fam);
  EXPECT_TRUE(rep.ok()) << what << ": worst " << rep.worst() << ", complete " << rep.complete;
}

}  // namespace

TEST(TransporterFamily, FixtureFamiliesAreValid) {
  for (const std::string name : {"z2_2x2", "z3_2x2", "trivial_2x2"}) {
    for (const auto& o : tst::fixture(name).objects) {
      ASSERT_TRUE(o.family) << name << "/" << o.id;
      expect_valid(*o.family, name + "/" + o.id);
    }
  }
}

TEST(TransporterFamily, TargetsAreLocalizedWhereClaimed) {
  const auto& fam = tst::family("z2_2x2", "rho_r00c00");
  for (Region a = 0; a < fam.transports.size(); ++a) {
    const auto& t = fam.at(a);
    ASSERT_TRUE(t.target.support());
    EXPECT_EQ(*t.target.support(), a);
    EXPECT_TRUE(check_localized(t.target, a));
    EXPECT_TRUE(is_unitary_arrow(fam.arrow(a)));
    EXPECT_TRUE(check_intertwiner(fam.arrow(a)).ok());
  }
  EXPECT_THROW(fam.at(99), Error);
}

TEST(TransporterFamily, BrokenUnitaryIsReportedAtItsRegion) {
  auto fam = tst::family("z2_2x2", "rho_r00c00");
  const Region bad = reg("r11c11");
  fam.transports[bad].unitary = identity(8);
  const auto rep = validate_family(fam);
  EXPECT_FALSE(rep.ok());
  for (const auto& r : rep.regions) {
    if (r.region == bad)
      EXPECT_GT(r.intertwining, 1.0);
    else
      EXPECT_LT(r.intertwining, 1e-9);
  }
}

TEST(TransporterFamily, IncompleteFamilyIsReported) {
  auto fam = tst::family("z2_2x2", "rho_r00c00");
  fam.transports.pop_back();
  EXPECT_FALSE(validate_family(fam).ok());
}

TEST(TransporterFamily, RebaseKeepsTargetsAndRoundTrips) {
  const auto& fam = tst::family("z2_2x2", "rho_r00c00");
  const Region a = reg("r11c01");
  const auto moved = rebase(fam, a);
  expect_valid(moved, "rebased");
  EXPECT_EQ(moved.support, a);
  EXPECT_TRUE(moved.base.same_as(fam.at(a).target));
  const auto back = rebase(moved, fam.support);
  for (Region b = 0; b < fam.transports.size(); ++b)
    EXPECT_LT(tst::distance(back.at(b).unitary, fam.at(b).unitary), 1e-12);
}

TEST(TransporterFamily, TransferAlongUnitary) {
  const auto& fam = tst::family("z2_2x2", "rho_r00c00");
  const auto& target = z2().object("rho_r11c11").rho;
  const auto u = find_unitary_equivalence(fam.base, target);
  ASSERT_TRUE(u.unitary);
  const auto moved = transfer(fam, *u.unitary, reg("r11c11"));
  expect_valid(moved, "transferred");
}

TEST(TransporterFamily, TensorNeedsCommonUpperBound) {
  const auto& f = tst::family("z2_2x2", "rho_r00c00");
  const auto& g = tst::family("z2_2x2", "rho_r00c11");
  const auto fg = tensor_families(f, g);
  EXPECT_EQ(fg.support, reg("r00c01"));
  expect_valid(fg, "tensor");
  // the full grid is not a region, so opposite corners have no common bound
  EXPECT_THROW(tensor_families(f, tst::family("z2_2x2", "rho_r11c11")), Error);
}

TEST(TransporterFamily, DirectSumAndTwist) {
  const auto& f = tst::family("z2_2x2", "rho_r00c00");
  const auto& g = tst::family("z2_2x2", "iota");
  const auto sum = direct_sum_families(f, g);
  expect_valid(sum, "sum");
  EXPECT_EQ(sum.base.multiplicity(), 2);
  const auto tw = twist_family(f, 5);
  expect_valid(tw, "twist");
  EXPECT_GT(tst::distance(tw.at(reg("r11c11")).unitary, f.at(reg("r11c11")).unitary), 1e-3);
  const auto tw2 = twist_family(f, 5);
  EXPECT_EQ(tw.at(reg("r11c11")).unitary, tw2.at(reg("r11c11")).unitary);
}

TEST(TransporterFamily, SubobjectFamilyOfDirectSum) {
  const auto& f = tst::family("z2_2x2", "rho_r00c00");
  const auto sum = direct_sum_families(f, f);
  const auto ds = direct_sum(f.base, f.base);
  const Intertwiner v{f.base, sum.base, ds.w2.block};
  const auto sub = subobject_family(sum, v);
  ASSERT_TRUE(sub.family) << sub.diagnostic;
  EXPECT_TRUE(sub.failing_regions.empty());
  expect_valid(*sub.family, "subobject");
  ASSERT_TRUE(sub.embedding);
  EXPECT_TRUE(is_isometric_arrow(*sub.embedding));
  EXPECT_TRUE(find_unitary_equivalence(sub.family->base, f.base).unitary);
}

TEST(TransporterFamilyProperty, RangesMatchTargetUnits) {
  for (const std::string id : {"rho_r00c00", "rho_r11c00"}) {
    const auto& fam = tst::family("z3_2x2", id);
    for (Region a = 0; a < fam.transports.size(); ++a) {
      const Mat& u = fam.at(a).unitary;
      EXPECT_LT(tst::distance(u * u.adjoint(), fam.at(a).target.unit()), 1e-10);
      EXPECT_LT(tst::distance(u.adjoint() * u, fam.base.unit()), 1e-10);
    }
  }
}
