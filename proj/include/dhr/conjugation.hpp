#pragma once

// Conjugate equations, their numerical solution, the explicit conjugates of
// simple objects and of objects with finite statistics, and the chain of
// checks placing an object with conjugates in the relevant subcategory.

#include "dhr/presheaf.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dhr {

struct ConjugateSolution {
  Amplimorphism rho, rho_bar;
  Intertwiner r;      // in (iota, rhobar rho)
  Intertwiner r_bar;  // in (iota, rho rhobar)
  double residual = 0.0;      // Rbar+ x 1_rho . 1_rho x R - 1_rho
  double residual_bar = 0.0;  // R+ x 1_rhobar . 1_rhobar x Rbar - 1_rhobar
};

struct ConjugateResiduals {
  double first = 0.0;
  double second = 0.0;
};
ConjugateResiduals conjugate_residuals(const Amplimorphism& rho, const Amplimorphism& rho_bar, const Mat& r,
                                       const Mat& r_bar);

struct ConjugateSearch {
  std::optional<ConjugateSolution> solution;
  Eigen::Index r_space_dim = 0;
  Eigen::Index r_bar_space_dim = 0;
  std::size_t candidates = 0;
  bool exhaustive = false;  // true when absence of a solution is decided, not just not found
  std::string diagnostic;
};
// R swept over a fixed lattice on the unit sphere of (iota, rhobar rho), at most
// kConjugateSweepCap points; Rbar solved from the first equation, the second
// equation checked. When (iota, rhobar rho) has dimension <= 1 both equations are
// solved jointly and the outcome is exact.
inline constexpr std::size_t kConjugateSweepCap = 10000;
ConjugateSearch solve_conjugate(const Amplimorphism& rho, const Amplimorphism& rho_bar, double tol = kTol,
                                kernels::Exec e = kernels::default_exec());

// Replaces (R, Rbar) by ((1 x T) R, (T^{-1}+ x 1) Rbar) with T > 0 in (rho, rho) chosen
// so that R+ (1 x X) R = Rbar+ (X x 1) Rbar for X in (rho, rho); on irreducible rho this
// is the rescaling making R+R = Rbar+Rbar. Throws when the induced functionals are
// not faithful.
ConjugateSolution standardize(const ConjugateSolution& sol, double tol = kTol);
// c with Phi(eps)^2 = c 1_rho for the left inverse induced by the solution.
ScalarFit standardness(const ConjugateSolution& sol, const Intertwiner& eps);

ConjugateSolution swap_solution(const ConjugateSolution& sol);
// Solution for rho sigma with conjugate sigmabar rhobar.
ConjugateSolution tensor_solutions(const ConjugateSolution& a, const ConjugateSolution& b);
ConjugateSolution direct_sum_solutions(const ConjugateSolution& a, const ConjugateSolution& b);

struct SimpleConjugate {
  std::optional<Amplimorphism> gamma_bar;
  std::optional<ConjugateSolution> solution;
  std::string diagnostic;
};
// gammabar = gamma1^{-1} with gamma1 = V+ gamma V, V an isometry with entries in
// A(o) onto gamma(1); R = gammabar(V), Rbar = V.
SimpleConjugate conjugate_for_simple(const Amplimorphism& gamma, double tol = kTol);
// Transporters for gammabar: at each region the conjugate of the transported
// object, joined to gammabar by a unitary intertwiner.
struct ConjugateFamily {
  std::optional<TransporterFamily> family;
  std::string diagnostic;
};
ConjugateFamily conjugate_family(const TransporterFamily& gamma_fam, const Amplimorphism& gamma_bar,
                                 double tol = kTol);

struct FiniteStatsConjugate {
  std::optional<ConjugateSolution> solution;
  std::optional<TransporterFamily> rho_bar_family;
  std::string diagnostic;
};
// rhobar = gammabar rho^{d-1}, R = (1_gammabar x V) T, Rbar = eps(rhobar, rho) R.
FiniteStatsConjugate conjugate_for_finite_stats(const TransporterFamily& rho_fam, const Witness& w,
                                                const TransporterFamily& gamma_bar_fam, const Intertwiner& t,
                                                const Intertwiner& t_bar, double tol = kTol);

// Presheaf-left inverse _a phi(A) = (R+R)^{-1} R+ _a rhobar(A) R.
PresheafLeftInverse presheaf_left_inverse_from_conjugate(const ConjugateSolution& sol,
                                                         const TransporterFamily& rho_fam,
                                                         const TransporterFamily& rho_bar_fam);

struct ConjugationStage {
  std::string name;
  bool ok = false;
  std::string detail;
};
struct ConjugationTheoremReport {
  std::vector<ConjugationStage> stages;
  std::optional<std::string> aborted_at;
  std::optional<StatisticsParameter> lambda;
  std::optional<ScalarFit> standard;  // Phi(eps)^2 against 1_rho; recorded outside the chain
  bool member = false;
  bool ok() const { return !aborted_at && member; }
  bool standard_ok(double tol = kTol) const;
};
// Stages: equations, left-inverse, statistics, presheaf-left-inverse,
// homogeneity, membership. The chain stops at the first failing stage. For a
// reducible rho the statistics stage asks every summand for lambda != 0.
ConjugationTheoremReport verify_conjugation_theorems(const TransporterFamily& rho_fam, const ConjugateSolution& sol,
                                                     const TransporterFamily& rho_bar_fam, int d_max = 4,
                                                     double tol = kTol);

}  // namespace dhr
