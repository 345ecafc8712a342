#include "dhr/fixtures.hpp"
#include "dhr/symmetry.hpp"
#include "fixture_cache.hpp"

#include <gtest/gtest.h>

using namespace dhr;
namespace tst = dhr::testing;

namespace {

const TransporterFamily& fam(const std::string& id) { return tst::family("z2_2x2", id); }

LeftInverse simple_li(const Amplimorphism& rho) {
  auto r = left_inverse_simple(rho);
  if (!r.value) throw Error("no left inverse: " + r.diagnostic);
  return *r.value;
}

// Independent product formula prod_{k=1}^{d-1} (1 - k lambda) / (k + 1).
double rhs_oracle(double lambda, int d) {
  double p = 1.0;
  for (int k = 1; k < d; ++k) p *= (1.0 - k * lambda) / (k + 1);
  return p;
}

}  // namespace

TEST(Flip, ExplicitEntriesAndInverse) {
  const Mat t = flip(2, 3);
  ASSERT_EQ(t.rows(), 6);
  for (int j1 = 0; j1 < 2; ++j1)
    for (int j2 = 0; j2 < 3; ++j2)
      for (int r = 0; r < 6; ++r) EXPECT_EQ(t(r, j1 + 2 * j2), cplx(r == j2 + 3 * j1 ? 1.0 : 0.0));
  EXPECT_LT(tst::distance(flip(3, 2) * t, identity(6)), 1e-15);
  EXPECT_EQ(flip(1, 1), identity(1));
}

TEST(FlipProperty, RelationHoldsForAllSmallShapes) {
  for (int n = 1; n <= 3; ++n)
    for (int m = 1; m <= 3; ++m)
      for (int n1 = 1; n1 <= 2; ++n1)
        for (int m1 = 1; m1 <= 2; ++m1) EXPECT_LT(flip_relation_defect(n, m, n1, m1), 1e-14);
}

TEST(Symmetry, SpacelikePairsAreOrdered) {
  const auto& site = tst::fixture("z2_2x2").net->site();
  const auto pairs = spacelike_pairs(site);
  ASSERT_FALSE(pairs.empty());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_TRUE(site.disjoint(pairs[i].rho_region, pairs[i].sigma_region));
    if (i > 0) {
      const auto& p = pairs[i - 1];
      const auto& q = pairs[i];
      EXPECT_TRUE(p.rho_region < q.rho_region || (p.rho_region == q.rho_region && p.sigma_region < q.sigma_region));
    }
  }
}

TEST(Symmetry, IndependentOfSpacelikeConfiguration) {
  const auto& f = fam("rho_r00c00");
  const auto& g = fam("rho_r11c11");
  const auto pairs = spacelike_pairs(f.base.net().site());
  const Mat ref = symmetry_at(f, g, pairs.front()).block;
  for (const auto& p : pairs) EXPECT_LT(tst::distance(symmetry_at(f, g, p).block, ref), 1e-9);
  const auto s = symmetry(f, g);
  EXPECT_LT(s.discrepancy, 1e-9);
  EXPECT_TRUE(check_intertwiner(s.eps).ok());
  EXPECT_TRUE(is_unitary_arrow(s.eps));
}

TEST(Symmetry, SquaresToOneAndIsNatural) {
  const auto& f = fam("rho_r00c00");
  const auto& g = fam("rho_r00c11");
  const auto& h = fam("rho_r11c11");
  const auto fg = symmetry(f, g).eps, gf = symmetry(g, f).eps;
  EXPECT_LT(tst::distance(compose(gf, fg).block, fg.source.unit()), 1e-9);
  // eps(rho', sigma)(T x 1) = (1 x T) eps(rho, sigma) for T in (rho, rho')
  const auto t = find_unitary_equivalence(f.base, h.base).unitary;
  ASSERT_TRUE(t);
  const auto hg = symmetry(h, g).eps;
  const auto lhs = compose(hg, tensor_arrows(*t, unit_arrow(g.base)));
  const auto rhs = compose(tensor_arrows(unit_arrow(g.base), *t), fg);
  EXPECT_LT(tst::distance(lhs.block, rhs.block), 1e-9);
}

TEST(Symmetry, FlipArrowIntertwinesSpacelikeObjects) {
  const auto& rho = fam("rho_r00c00").base;
  const auto& sigma = fam("rho_r11c11").base;
  EXPECT_TRUE(check_intertwiner(flip_arrow(rho, sigma)).ok());
}

TEST(Permutations, GeneratorsSatisfyCoxeterRelations) {
  const auto& f = fam("rho_r00c00");
  const auto eps = symmetry(f, f).eps;
  const auto gens = perm_generators(f.base, eps, 4);
  ASSERT_EQ(gens.size(), 3u);
  EXPECT_LT(check_perm_relations(gens).worst(), 1e-9);
}

TEST(Permutations, SymmetrizersForBosonicCharge) {
  const auto& f = fam("rho_r00c00");
  const auto eps = symmetry(f, f).eps;
  for (auto e : {kernels::Exec::serial, kernels::Exec::parallel}) {
    const auto sym = symmetrizer(f.base, eps, 3, SymKind::symmetric, e);
    const auto anti = symmetrizer(f.base, eps, 2, SymKind::antisymmetric, e);
    EXPECT_LT(tst::distance(sym.block, sym.source.unit()), 1e-9);
    EXPECT_LT(anti.block.norm(), 1e-9);
  }
  const auto s = symmetrizer(f.base, eps, 3, SymKind::antisymmetric, kernels::Exec::serial).block;
  const auto p = symmetrizer(f.base, eps, 3, SymKind::antisymmetric, kernels::Exec::parallel).block;
  EXPECT_EQ(s, p);
}

TEST(DhrFormula, RightHandSideMatchesProductOracle) {
  for (double lambda : {1.0, -1.0, 0.0, 0.5, 1.0 / 3.0, -0.25})
    for (int d = 1; d <= 5; ++d) EXPECT_NEAR(dhr_rhs(lambda, d), rhs_oracle(lambda, d), 1e-14) << lambda << " " << d;
  EXPECT_NEAR(dhr_rhs(1.0, 2), 0.0, 1e-15);
  EXPECT_NEAR(dhr_rhs(-1.0, 4), 1.0, 1e-15);
  EXPECT_NEAR(dhr_rhs(0.5, 3), 0.0, 1e-15);
  EXPECT_NEAR(dhr_rhs(0.0, 3), 1.0 / 6.0, 1e-15);
}

TEST(LeftInverse, SimpleChargeHasValidLeftInverseAndBosonicStatistics) {
  const auto& f = fam("rho_r00c00");
  const auto phi = simple_li(f.base);
  EXPECT_TRUE(check_left_inverse(phi).ok());
  EXPECT_GT(faithfulness_margin(phi), 1e-6);
  const auto eps = symmetry(f, f).eps;
  const auto lam = statistics_parameter(phi, eps);
  EXPECT_LT(std::abs(lam.lambda - cplx(1.0)), 1e-9);
  EXPECT_LT(lam.residual, 1e-9);
  for (int d = 1; d <= 3; ++d) {
    const auto fc = dhr_formula_check(phi, eps, d);
    EXPECT_LT(fc.residual, 1e-9) << d;
    EXPECT_LT(fc.lhs_residual, 1e-9) << d;
  }
}

TEST(LeftInverse, TabulatedFromConjugationAgrees) {
  const auto& rho = fam("rho_r00c00").base;
  const auto phi = simple_li(rho);
  const Mat z = tst::fixture("z2_2x2").charged_unitary(0, 0, 1);
  const auto tab = tabulate_left_inverse(rho, [&](const Mat& b) -> Mat { return z.adjoint() * b * z; });
  DetRng rng(1);
  for (int k = 0; k < 3; ++k) {
    const Mat b = random_hermitian(8, rng);
    EXPECT_LT(tst::distance(tab.generator(b), z.adjoint() * b * z), 1e-10);
  }
  const auto& g = rho.net().global();
  for (const auto& b : g.basis()) EXPECT_LT(tst::distance(phi.generator(b), tab.generator(b)), 1e-9);
  const auto s = tabulate_left_inverse(rho, [&](const Mat& b) -> Mat { return b; }, kernels::Exec::serial);
  const auto p = tabulate_left_inverse(rho, [&](const Mat& b) -> Mat { return b; }, kernels::Exec::parallel);
  EXPECT_EQ(s.action, p.action);
}

TEST(LeftInverse, ConvexCompositionAndTransport) {
  const auto& f = fam("rho_r00c00");
  const auto& g = fam("rho_r11c11");
  const auto phi = simple_li(f.base), psi = simple_li(g.base);
  const auto sum = direct_sum(f.base, g.base);
  for (double s : {0.0, 0.3, 1.0}) EXPECT_TRUE(check_left_inverse(li_convex(sum, phi, psi, s)).ok()) << s;
  EXPECT_TRUE(check_left_inverse(li_compose(phi, psi)).ok());
  const auto u = find_unitary_equivalence(f.base, g.base).unitary;
  ASSERT_TRUE(u);
  EXPECT_TRUE(check_left_inverse(transport_left_inverse(phi, *u)).ok());
  const auto c = li_compress(li_convex(sum, phi, psi, 0.5), sum.w1);
  ASSERT_TRUE(c.value) << c.diagnostic;
  EXPECT_TRUE(check_left_inverse(*c.value).ok());
}

TEST(LeftInverse, FamilyAxioms) {
  const auto& f = fam("rho_r00c00");
  const auto& g = fam("rho_r11c11");
  const auto phi = simple_li(f.base);
  const auto eps = symmetry(f, g).eps;
  const auto x = compose(adjoint(symmetry(g, f).eps), eps);  // in (rho sigma, rho sigma)
  const auto one = unit_arrow(g.base);
  EXPECT_LT(family_axiom_i_defect(phi, x, one, one), 1e-9);
  EXPECT_LT(family_axiom_ii_defect(phi, unit_arrow(tensor_objects(f.base, g.base)), g.base, g.base), 1e-9);
  EXPECT_LT(adjoint_property_defect(phi, eps.block), 1e-9);
  EXPECT_GT(schwarz_min_eigenvalue(phi, eps.block), -1e-9);
}

TEST(LeftInverse, DefectsAreReported) {
  const auto& rho = fam("rho_r00c00").base;
  const auto bad = tabulate_left_inverse(rho, [](const Mat& b) -> Mat { return 2.0 * b; });
  EXPECT_FALSE(check_left_inverse(bad).ok());
}

TEST(Simplicity, BosonicChargeIsSimple) {
  const auto& f = fam("rho_r00c00");
  const auto rep = check_simple(f.base, symmetry(f, f).eps, simple_li(f.base));
  EXPECT_TRUE(rep.simple);
  EXPECT_TRUE(rep.consistent);
  ASSERT_TRUE(rep.sign);
  EXPECT_EQ(*rep.sign, 1);
  EXPECT_EQ(rep.square_endomorphisms, 1);
}

TEST(Classification, DirectSumSplitsIntoTwoBosonicSummands) {
  const auto sum = direct_sum_families(fam("rho_r00c00"), fam("rho_r00c00"));
  const auto rep = classify_finite_statistics(sum);
  EXPECT_EQ(rep.endomorphism_dim, 4);
  EXPECT_TRUE(rep.decomposed);
  EXPECT_TRUE(rep.classified);
  ASSERT_EQ(rep.summands.size(), 2u);
  for (const auto& s : rep.summands) {
    ASSERT_TRUE(s.lambda);
    EXPECT_LT(std::abs(s.lambda->lambda - cplx(1.0)), 1e-9);
    ASSERT_TRUE(s.witness);
    EXPECT_EQ(s.witness->sign, 1);
  }
}

TEST(Statistics, FermionicChargeHasLambdaMinusOne) {
  const auto& fx = tst::fixture("z2f_2x2_full");
  const auto& f = *fx.object("rho_r00c00").family;
  const auto eps = symmetry(f, f).eps;
  const auto phi = simple_li(f.base);
  const auto lam = statistics_parameter(phi, eps);
  EXPECT_LT(std::abs(lam.lambda - cplx(-1.0)), 1e-9);
  EXPECT_LT(dhr_formula_check(phi, eps, 3).residual, 1e-9);
}

TEST(Statistics, Z3ChargesAreBosonic) {
  const auto& f = tst::family("z3_2x2", "rho2_r11c00");
  const auto eps = symmetry(f, f).eps;
  const auto lam = statistics_parameter(simple_li(f.base), eps);
  EXPECT_LT(std::abs(lam.lambda - cplx(1.0)), 1e-9);
}

TEST(SymmetryAxioms, HoldForChargesSumsAndTensors) {
  const auto& a = fam("rho_r00c00");
  const auto& b = fam("rho_r00c11");
  const auto& c = fam("rho_r11c00");
  const auto sum = direct_sum_families(a, a);
  const auto prod = tensor_families(a, b);
  // third argument shares an upper bound with the second
  const auto r1 = check_symmetry_axioms(a, b, a);
  EXPECT_TRUE(r1.ok()) << r1.worst();
  ASSERT_TRUE(r1.normalization);
  const auto r2 = check_symmetry_axioms(sum, c, a);
  EXPECT_TRUE(r2.ok()) << r2.worst();
  EXPECT_TRUE(r2.normalization);
  const auto r3 = check_symmetry_axioms(prod, sum, fam("iota"));
  EXPECT_TRUE(r3.ok()) << r3.worst();
  EXPECT_FALSE(r3.normalization);  // r00c01 meets r00c00
  EXPECT_THROW(check_symmetry_axioms(a, c, fam("rho_r00c11")), Error);
}

TEST(SymmetryAxioms, VacuumIsTheUnit) {
  const auto& a = fam("rho_r00c00");
  const auto& iota = fam("iota");
  EXPECT_LT(tst::distance(symmetry(a, iota).eps.block, a.base.unit()), 1e-12);
  EXPECT_LT(tst::distance(symmetry(iota, a).eps.block, a.base.unit()), 1e-12);
}

TEST(LeftInverse, StatisticsAreMultiplicative) {
  const auto& f = fam("rho_r00c00");
  const auto& g = fam("rho_r00c11");
  EXPECT_LT(multiplicativity_defect(simple_li(f.base), f, simple_li(g.base), g), 1e-9);
  const auto sum = direct_sum_families(f, f);
  const auto phi = simple_li(f.base);
  const auto conv = li_convex(direct_sum(f.base, f.base), phi, phi, 0.5);
  EXPECT_LT(multiplicativity_defect(conv, sum, simple_li(g.base), g), 1e-9);
}
