#include "dhr/fixtures.hpp"
#include "fixture_cache.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace dhr;
namespace tst = dhr::testing;

namespace {

struct Expected {
  std::string name;
  Eigen::Index ambient;
  Eigen::Index cell_local, cell_dual;
  Eigen::Index pair_local, pair_dual;  // two-cell rows and columns
  Eigen::Index global_dim;
  Eigen::Index commutant_dim;
  bool duality;
  bool irreducible;
};

// Site dimension q on four sites:
//  gauge-invariant part of M_{q^s} is q^{2s}/q, on the vacuum sector M_{q^3} for the global algebra;
//  doubling tensors every algebra with C^2;
//  the fermionic net keeps the even part of M_16 with commutant span{1, parity}.
const std::vector<Expected>& expected() {
  static const std::vector<Expected> e{
      {"z2_2x2", 8, 2, 2, 8, 8, 64, 1, true, true},
      {"z2_2x2_doubled", 16, 4, 4, 16, 16, 128, 2, true, false},
      {"z2f_2x2_full", 16, 2, 8, 8, 32, 128, 2, false, false},
      {"z3_2x2", 27, 3, 3, 27, 27, 729, 1, true, true},
      {"trivial_2x2", 16, 4, 4, 16, 16, 256, 1, true, true},
  };
  return e;
}

}  // namespace

TEST(Fixtures, NamesAreKnown) {
  const auto names = fixtures::fixture_names();
  ASSERT_EQ(names.size(), expected().size());
  for (const auto& e : expected()) EXPECT_NE(std::find(names.begin(), names.end(), e.name), names.end());
  EXPECT_THROW(fixtures::named_spec("no_such_fixture"), Error);
}

TEST(Fixtures, FrozenDimensionsAndDuality) {
  for (const auto& e : expected()) {
    const auto& fx = tst::fixture(e.name);
    const auto& m = fx.manifest;
    const auto& site = fx.net->site();
    EXPECT_EQ(fx.net->ambient_dim(), e.ambient) << e.name;
    EXPECT_EQ(m.net.global_dim, e.global_dim) << e.name;
    EXPECT_EQ(m.net.global_commutant_dim, e.commutant_dim) << e.name;
    EXPECT_EQ(m.net.irreducible, e.irreducible) << e.name;
    EXPECT_TRUE(m.site.ok());
    ASSERT_EQ(m.net.duality.size(), site.size());
    for (const auto& d : m.net.duality) {
      const auto b = tst::parse_box(site.id(d.region));
      const bool cell = b.r0 == b.r1 && b.c0 == b.c1;
      EXPECT_EQ(d.dim_local, cell ? e.cell_local : e.pair_local) << e.name << " " << site.id(d.region);
      EXPECT_EQ(d.dim_dual, cell ? e.cell_dual : e.pair_dual) << e.name << " " << site.id(d.region);
      EXPECT_EQ(d.holds, e.duality) << e.name << " " << site.id(d.region);
    }
    EXPECT_EQ(m.net.ok(), e.duality && e.irreducible) << e.name;
  }
}

TEST(Fixtures, ManifestNotes) {
  const auto& z2 = tst::fixture("z2_2x2").manifest.notes;
  ASSERT_EQ(z2.size(), 3u);
  EXPECT_EQ(z2[0], "reference space dimension 8");
  EXPECT_EQ(z2[1], "global algebra irreducible, dimension 64");
  EXPECT_EQ(z2[2], "duality holds at every region");
  const auto& f = tst::fixture("z2f_2x2_full").manifest.notes;
  EXPECT_EQ(f[1], "global algebra reducible, dimension 128");
  EXPECT_EQ(f[2].rfind("duality fails at r00c00,", 0), 0u);
}

TEST(Fixtures, ObjectsPerCharge) {
  for (const auto& e : expected()) {
    const auto& fx = tst::fixture(e.name);
    const std::size_t charges = static_cast<std::size_t>(fx.spec.site_dim - 1) * 4;
    const std::size_t extra = fx.spec.doubled ? 1 : 0;
    EXPECT_EQ(fx.objects.size(), 1 + charges + extra) << e.name;
    EXPECT_EQ(fx.objects.front().id, "iota");
    for (const auto& o : fx.objects) {
      ASSERT_TRUE(o.family) << e.name << "/" << o.id;
      EXPECT_EQ(o.rho.label(), o.id);
    }
  }
  EXPECT_NO_THROW(tst::fixture("z3_2x2").object("rho2_r11c11"));
  EXPECT_THROW(tst::fixture("z2_2x2").object("rho2_r11c11"), Error);
}

TEST(Fixtures, ChargedUnitaries) {
  const auto& fx = tst::fixture("z3_2x2");
  for (int q = 0; q < 3; ++q) {
    const Mat u = fx.charged_unitary(1, 0, q);
    EXPECT_LT(tst::distance(u.adjoint() * u, identity(27)), 1e-12);
    EXPECT_TRUE(fx.net->local(fx.cell_region(1, 0)).contains(u));
  }
  // the clock has order three
  const Mat c = fx.charged_unitary(0, 1, 1);
  EXPECT_LT(tst::distance(c * c * c, identity(27)), 1e-12);
  EXPECT_LT(tst::distance(c * c, fx.charged_unitary(0, 1, 2)), 1e-12);
  EXPECT_THROW(fx.charged_unitary(2, 0, 1), Error);
  EXPECT_THROW(fx.charged_unitary(0, 0, 3), Error);
}

TEST(Fixtures, InvalidSpecsAreRejected) {
  fixtures::GaugeFixtureSpec s;
  s.rows = 1;
  EXPECT_THROW(fixtures::build_gauge_fixture(s), Error);
  s = {};
  s.order = 3;
  EXPECT_THROW(fixtures::build_gauge_fixture(s), Error);
  s = {};
  s.fermionic = true;
  s.order = 3;
  s.site_dim = 3;
  EXPECT_THROW(fixtures::build_gauge_fixture(s), Error);
  EXPECT_THROW(fixtures::grid_site(0, 2), Error);
  EXPECT_EQ(fixtures::box_id(0, 1, 1, 1), "r01c11");
}

TEST(Fixtures, GridSiteSize) {
  // every box except the whole grid: (r(r+1)/2)(c(c+1)/2) - 1
  for (int r = 1; r <= 3; ++r)
    for (int c = 1; c <= 3; ++c) {
      const auto s = fixtures::grid_site(r, c);
      EXPECT_EQ(s.size(), static_cast<std::size_t>(r * (r + 1) / 2 * c * (c + 1) / 2 - 1));
      EXPECT_TRUE(validate_site(s).ok());
    }
}

TEST(Fixtures, BuildIsDeterministic) {
  const auto a = fixtures::named_fixture("z2_2x2");
  const auto& b = tst::fixture("z2_2x2");
  ASSERT_EQ(a.objects.size(), b.objects.size());
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    const auto& x = a.objects[i].rho.images();
    const auto& y = b.objects[i].rho.images();
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t k = 0; k < x.size(); ++k) ASSERT_EQ(x[k], y[k]);
  }
  for (std::size_t k = 0; k < a.net->global().basis().size(); ++k)
    ASSERT_EQ(a.net->global().basis()[k], b.net->global().basis()[k]);
}
