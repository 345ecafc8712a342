#pragma once

// Flip, symmetry, permutation statistics, left inverses and the statistics
// parameter.

#include "dhr/transport.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dhr {

// theta(n, m) e_{j1 + n j2} = e_{j2 + m j1}: exchanges the factors of C^n (x) C^m.
Mat flip(Eigen::Index n, Eigen::Index m);
// Largest violation of theta(m, m1) (A (x) B) = (B (x) A) theta(n, n1) over
// elementary A (m x n) and B (m1 x n1).
double flip_relation_defect(Eigen::Index n, Eigen::Index m, Eigen::Index n1, Eigen::Index m1);
// theta(n_rho, n_sigma) (x) 1 applied to rho sigma(1); lies in (rho sigma, sigma rho)
// when the supports are spacelike.
Intertwiner flip_arrow(const Amplimorphism& rho, const Amplimorphism& sigma);

struct TransportPair {
  Region rho_region = 0;
  Region sigma_region = 0;
};
// All ordered pairs of spacelike regions in lexicographic order.
std::vector<TransportPair> spacelike_pairs(const CausalSite& site);
// (V+ x U+) theta (U x V) with U = f.arrow(p.rho_region), V = g.arrow(p.sigma_region).
Intertwiner symmetry_at(const TransporterFamily& f, const TransporterFamily& g, TransportPair p);

struct SymmetryResult {
  Intertwiner eps;  // in (rho sigma, sigma rho)
  TransportPair primary;
  TransportPair secondary;
  double discrepancy = 0.0;
};
// Primary configuration: first spacelike pair; secondary: last one. Throws
// when the two disagree beyond tol.
SymmetryResult symmetry(const TransporterFamily& f, const TransporterFamily& g, double tol = kTol);

struct SymmetryAxiomReport {
  double naturality = 0.0;  // eps(tau, beta) (T x S) = (S x T) eps(rho, sigma) for transports T, S
  double adjoint = 0.0;     // eps(rho, sigma)+ = eps(sigma, rho)
  double cocycle = 0.0;     // eps(rho, tau sigma) = (1_tau x eps(rho, sigma)) (eps(rho, tau) x 1_sigma)
  double inverse = 0.0;     // eps(sigma, rho) eps(rho, sigma) = 1_{rho sigma}
  std::optional<double> normalization;  // eps = theta (x) 1 when the supports are spacelike
  double discrepancy = 0.0;             // primary against secondary configuration
  double worst() const;
  bool ok(double tol = kTol) const { return worst() < tol; }
};
// Axioms for eps(rho, sigma) with tau = h; tau and sigma need a common upper bound.
// Naturality is checked against every transport of rho paired with a transport of sigma.
SymmetryAxiomReport check_symmetry_axioms(const TransporterFamily& f, const TransporterFamily& g,
                                          const TransporterFamily& h, double tol = kTol);

// u_k = 1_{rho^{k-1}} x eps x 1_{rho^{n-k-1}}, k = 1..n-1, in (rho^n, rho^n).
std::vector<Intertwiner> perm_generators(const Amplimorphism& rho, const Intertwiner& eps, int n);
struct PermRelationReport {
  double involution = 0.0;
  double braid = 0.0;
  double distant = 0.0;
  double worst() const;
};
PermRelationReport check_perm_relations(const std::vector<Intertwiner>& gens);

enum class SymKind { symmetric, antisymmetric };
// (1/d!) sum over permutations of sgn^kind(pi) eps^d(pi), summed in a fixed pairwise tree.
Intertwiner symmetrizer(const Amplimorphism& rho, const Intertwiner& eps, int d, SymKind kind,
                        kernels::Exec e = kernels::default_exec());

// Generator phi of a left inverse of `base`, stored as the matrix of
// vec(B) -> vec(phi(B)) on (n d) x (n d) matrices. Only its values on
// (A (x) M_n)_{rho(1)} carry meaning.
struct LeftInverse {
  Amplimorphism base;
  Mat action;  // d^2 x (n d)^2

  Mat generator(const Mat& b) const;
  // Phi_{sigma,tau}(X): the generator applied to each block of size n d.
  Mat apply(const Mat& x) const;
};

LeftInverse tabulate_left_inverse(const Amplimorphism& rho, const std::function<Mat(const Mat&)>& phi,
                                  kernels::Exec e = kernels::default_exec());
// phi(B) = (R+ R)^{-1} R+ (1_rhobar x B) R with R in (iota, rhobar rho).
LeftInverse left_inverse_from_conjugate(const Amplimorphism& rho, const Amplimorphism& rho_bar, const Mat& r);
// gamma1 = W+ gamma W with W an isometry with entries in A and W W+ = gamma(1);
// phi(B) = gamma1^{-1}(W+ B W). Requires gamma injective.
struct LeftInverseResult {
  std::optional<LeftInverse> value;
  std::string diagnostic;
};
LeftInverseResult left_inverse_simple(const Amplimorphism& gamma, double tol = kTol);
// psi(B) = phi(V+ (1_{rho^{d-1}} x B) V) for V in (gamma, rho^d).
LeftInverse left_inverse_from_witness(const Amplimorphism& rho, int d, const Intertwiner& v, const LeftInverse& phi);
// Left inverse of tau from one of rho and a unitary u in (rho, tau).
LeftInverse transport_left_inverse(const LeftInverse& phi, const Intertwiner& u);

// Left inverse of rho sigma: phi (of rho) innermost, then psi (of sigma).
LeftInverse li_compose(const LeftInverse& phi, const LeftInverse& psi);
LeftInverse li_convex(const DirectSum& sum, const LeftInverse& phi1, const LeftInverse& phi2, double s);
struct CompressResult {
  std::optional<LeftInverse> value;
  Mat gate;  // Phi_{iota,iota}(E)
  std::string diagnostic;
};
// Left inverse of beta from one of rho and an isometry v in (beta, rho).
CompressResult li_compress(const LeftInverse& phi, const Intertwiner& v, double tol = kTol);

struct LeftInverseReport {
  double normalization = 0.0;
  double inversion = 0.0;   // phi(rho(A)) - A
  double module = 0.0;      // phi(B rho(A)) - phi(B) A and phi(rho(A) B) - A phi(B)
  double star = 0.0;        // phi(B+) - phi(B)+
  double positivity = 0.0;  // most negative eigenvalue of phi (x) id_2 on sampled B+ B
  bool ok(double tol = kTol) const;
};
LeftInverseReport check_left_inverse(const LeftInverse& phi, double tol = kTol);
// Smallest eigenvalue of the Gram form <B, C> = tr phi(B+ C) on the reduced
// algebra (A (x) M_n)_{rho(1)}; positive iff phi is faithful there.
double faithfulness_margin(const LeftInverse& phi, double tol = kTol);
// Hilbert-Schmidt orthonormal basis of (A (x) M_n)_{p}.
std::vector<Mat> reduced_algebra_basis(const ConcreteAlgebra& alg, Eigen::Index n, const Mat& p, double tol = kTol);

// Axioms of the family Phi_{sigma,tau}.
// i) Phi(1_rho x T . X . 1_rho x S+) = T Phi(X) S+
double family_axiom_i_defect(const LeftInverse& phi, const Intertwiner& x, const Intertwiner& t, const Intertwiner& s);
// ii) Phi(X x 1_pi) = Phi(X) x 1_pi, with X in (rho sigma, rho tau)
double family_axiom_ii_defect(const LeftInverse& phi, const Intertwiner& x, const Amplimorphism& sigma,
                              const Amplimorphism& pi);
// Adjoint and Schwarz properties for R in (rho sigma, rho gamma).
double adjoint_property_defect(const LeftInverse& phi, const Mat& r);
double schwarz_min_eigenvalue(const LeftInverse& phi, const Mat& r);

struct StatisticsParameter {
  cplx lambda;
  double residual = 0.0;
  bool finite(double tol = kTol) const { return std::abs(lambda) > tol; }
};
// Scalar fit of Phi_{rho,rho}(eps(rho,rho)) against rho(1).
StatisticsParameter statistics_parameter(const LeftInverse& phi, const Intertwiner& eps);
// Left inverse of rho^d given by composing phi d times.
LeftInverse composed_power(const LeftInverse& phi, int d);

// |(Psi o Phi)(eps(rho sigma, rho sigma)) - Phi(eps(rho, rho)) x Psi(eps(sigma, sigma))| with
// phi, psi left inverses of the bases of f and g.
double multiplicativity_defect(const LeftInverse& phi, const TransporterFamily& f, const LeftInverse& psi,
                               const TransporterFamily& g);

struct FormulaCheck {
  int d = 0;
  cplx lhs;
  double lhs_residual = 0.0;  // distance of Psi^d(A_d) from a scalar
  double rhs = 0.0;
  double residual = 0.0;
};
double dhr_rhs(double lambda, int d);
FormulaCheck dhr_formula_check(const LeftInverse& phi, const Intertwiner& eps, int d);

struct SimpleReport {
  std::optional<StatisticsParameter> phi_test;  // Phi(eps) = +-1
  ScalarFit eps_fit{};                           // eps(gamma,gamma) against 1_{gamma^2}
  Eigen::Index square_endomorphisms = 0;        // dim (gamma^2, gamma^2)
  bool phi_says = false;
  bool eps_says = false;
  bool square_says = false;
  bool consistent = false;
  bool simple = false;
  std::optional<int> sign;
};
// Evaluates the three equivalent simplicity tests. When the global algebra is
// irreducible a disagreement is an internal error and throws.
SimpleReport check_simple(const Amplimorphism& gamma, const Intertwiner& eps,
                          const std::optional<LeftInverse>& phi = std::nullopt, double tol = kTol);

struct Witness {
  int d = 0;
  SymKind kind = SymKind::antisymmetric;
  Amplimorphism gamma;
  Intertwiner v;  // in (gamma, rho^d)
  int sign = 0;   // chi_gamma
  // Transporters for gamma when it could be cut down locally; gamma is then localized at their support.
  std::optional<TransporterFamily> gamma_family;
};

struct SummaryStatistics {
  Intertwiner embedding;  // isometry of the summand into rho
  Amplimorphism beta;
  std::optional<TransporterFamily> family;
  std::optional<Witness> witness;
  std::optional<LeftInverse> left_inverse;
  std::optional<StatisticsParameter> lambda;
  std::vector<std::string> notes;
};

struct StatisticsReport {
  Eigen::Index endomorphism_dim = 0;
  std::vector<SummaryStatistics> summands;
  bool decomposed = false;
  bool classified = false;  // every summand has a witness with d <= d_max
  int d_max = 4;
};

// Minimal projections of (rho, rho) from the spectral projections of a generic self-adjoint element.
std::vector<Mat> minimal_projections(const Amplimorphism& rho, double tol = kTol);
StatisticsReport classify_finite_statistics(const TransporterFamily& fam, int d_max = 4, double tol = kTol);

}  // namespace dhr
